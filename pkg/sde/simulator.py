from dataclasses import dataclass

import numpy as np

from sde.calculus import jump_compensator
from utils.errors import SimulationError
from utils.general_utils import make_rng


@dataclass(frozen=True)
class JumpEvent:
    time: float
    mark_index: int
    mark: np.ndarray
    displacement: np.ndarray
    pre_state: np.ndarray
    post_state: np.ndarray


@dataclass(frozen=True)
class PathRecord:
    """One cadlag realization on a uniform grid.

    ``states[k]`` is the state at ``times[k]`` after every jump with epoch
    <= times[k]; the jump log keeps the pre- and post-jump states in between.
    ``brownian_increments[k]`` drove step k, so oracle paths can share the noise.
    """

    times: np.ndarray
    states: np.ndarray
    jump_log: tuple
    seed: object
    brownian_increments: np.ndarray

    @property
    def n_steps(self):
        return len(self.times) - 1

    def brownian_path(self):
        """W_s - W_t0 at every grid node, shape (N + 1, d)."""
        d = self.brownian_increments.shape[1]
        return np.vstack([np.zeros((1, d)), np.cumsum(self.brownian_increments, axis=0)])

    def jump_counts(self):
        """N_s - N_t0 at every grid node."""
        epochs = np.array([j.time for j in self.jump_log])
        return np.searchsorted(epochs, self.times, side="right")


def sample_jump_times(jumps, t0, T, seed):
    """Compound Poisson epochs on (t0, T]: exponential inter-arrivals of rate
    n(E), marks drawn with probability weight / n(E). Sorted by time.

    Returns a list of (time, mark_index, mark).
    """
    if T < t0:
        raise ValueError(f"T = {T} is before t0 = {t0}")
    rng = make_rng(seed)
    rate = jumps.total_mass
    if rate <= 0.0 or not len(jumps):
        return []
    probs = jumps.weights / rate
    out = []
    s = t0
    while True:
        s += rng.exponential(1.0 / rate)
        if s > T:
            return out
        i = int(rng.choice(len(jumps), p=probs)) if len(jumps) > 1 else 0
        out.append((s, i, jumps.marks[i]))


def euler_step(coeffs, jumps, t, x, h, brownian_increment, jumps_in_step=(), jump_log=None):
    """One Euler-Maruyama step of the compensated jump SDE.

    x + b(t,x) h + sum_a sigma_a(t,x) dW_a - h sum_e gamma(t,x,e) n({e})
      + sum over jumps in (t, t+h] of gamma(tau, x(tau-), e)

    The continuous increment is frozen at (t, x) and spread linearly over the
    step; each jump is evaluated at its pre-jump state at its own epoch.
    """
    if h <= 0:
        raise ValueError(f"step must be > 0, got {h}")
    x = np.asarray(x, dtype=float)
    dW = np.asarray(brownian_increment, dtype=float).reshape(-1)
    increment = coeffs.b(t, x) * h
    for alpha in range(coeffs.dim_noise):
        increment = increment + coeffs.sigma_column(alpha, t, x) * dW[alpha]
    if len(jumps):
        increment = increment - h * jump_compensator(coeffs, jumps, t, x)

    jumped = np.zeros_like(x)
    for tau, i, e in jumps_in_step:
        pre = x + ((tau - t) / h) * increment + jumped
        displacement = coeffs.gamma(tau, pre, e)
        jumped = jumped + displacement
        if jump_log is not None:
            jump_log.append(
                JumpEvent(float(tau), int(i), np.array(e), displacement, pre, pre + displacement)
            )

    out = x + increment + jumped
    if not np.all(np.isfinite(out)):
        raise SimulationError("state became non-finite", t, x)
    return out


def simulate(problem, n_steps, seed):
    """Euler-Maruyama path of ``problem`` on a uniform grid of ``n_steps`` steps.

    All randomness comes from ``seed``: first the jump epochs on (t0, T],
    then the Brownian increments N(0, h I_d), so equal seeds give identical paths.
    """
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")
    coeffs, jumps = problem.coefficients, problem.jumps
    t0, T = problem.t0, problem.horizon
    d = coeffs.dim_noise
    if T == t0:
        return PathRecord(
            np.array([t0]), problem.x0[None, :].copy(), (), seed, np.zeros((0, d))
        )

    rng = make_rng(seed)
    times = np.linspace(t0, T, n_steps + 1)
    h = (T - t0) / n_steps
    epochs = sample_jump_times(jumps, t0, T, rng)
    dW = rng.normal(0.0, np.sqrt(h), size=(n_steps, d))

    # jump at tau belongs to the step k with times[k] < tau <= times[k+1]
    by_step = {}
    for tau, i, e in epochs:
        k = min(max(int(np.searchsorted(times, tau, side="left")) - 1, 0), n_steps - 1)
        by_step.setdefault(k, []).append((tau, i, e))

    states = np.empty((n_steps + 1, coeffs.dim_state))
    states[0] = problem.x0
    log = []
    x = problem.x0
    for k in range(n_steps):
        try:
            x = euler_step(coeffs, jumps, times[k], x, h, dW[k], by_step.get(k, ()), log)
        except SimulationError as err:
            raise SimulationError(f"step {k} failed: {err}", times[k], x, k) from err
        states[k + 1] = x
    states.setflags(write=False)
    return PathRecord(times, states, tuple(log), seed, dW)
