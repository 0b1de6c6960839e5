"""Built-in scenarios on the unit sphere S^2 (d = 1) and a drift-only control.

ex33: b = -1/2 (0, x2, x3),  sigma = (0, -x3, x2)            stays on S^2
ex34: b = -3/2 (0, x2, x3),  sigma = (0, -x3, x2)            leaves S^2
ex35: b = -(1/2 + 2 lam)(0, x2, x3), sigma = (0, -x3, x2),
      gamma = (0, -2 x2, -2 x3), one mark of weight lam      stays on S^2
drift_only: b = -x, sigma = 0, gamma = 0 on R^m               exact exponential decay
"""

import math

import numpy as np

from sde.coefficients import CoefficientSet, JumpMeasure, SDEProblem
from sde.lipschitz import LipschitzData

EXAMPLE_IDS = ("ex33", "ex34", "ex35")
BUILTIN_IDS = EXAMPLE_IDS + ("drift_only",)


def _rotation_sigma(t, x):
    return np.array([0.0, -x[2], x[1]])


def _rotation_sigma_derivative(t, x):
    return np.array([0.0, -x[1], -x[2]])


def _radial_drift(rate):
    def drift(t, x):
        return np.array([0.0, -rate * x[1], -rate * x[2]])

    return drift


def _reflection_jump(t, x, e):
    return np.array([0.0, -2.0 * x[1], -2.0 * x[2]])


def example_coefficients(example_id, lam=1.0):
    """Hard-coded coefficients and jump measure of a built-in example."""
    if example_id == "ex33":
        coeffs = CoefficientSet(
            3, 1, _radial_drift(0.5), (_rotation_sigma,),
            sigma_derivatives=(_rotation_sigma_derivative,),
            lipschitz=LipschitzData(2.0), name="ex33",
        )
        return coeffs, JumpMeasure.empty()
    if example_id == "ex34":
        coeffs = CoefficientSet(
            3, 1, _radial_drift(1.5), (_rotation_sigma,),
            sigma_derivatives=(_rotation_sigma_derivative,),
            lipschitz=LipschitzData(2.5), name="ex34",
        )
        return coeffs, JumpMeasure.empty()
    if example_id == "ex35":
        if lam < 0:
            raise ValueError(f"lambda must be >= 0, got {lam}")
        jumps = JumpMeasure.single(lam, rho=[2.0]) if lam > 0 else JumpMeasure.empty()
        coeffs = CoefficientSet(
            3, 1, _radial_drift(0.5 + 2.0 * lam), (_rotation_sigma,), _reflection_jump,
            sigma_derivatives=(_rotation_sigma_derivative,),
            lipschitz=LipschitzData.from_measure(1.5 + 2.0 * lam, jumps), name="ex35",
        )
        return coeffs, jumps
    if example_id == "drift_only":
        return drift_only_coefficients(3), JumpMeasure.empty()
    raise ValueError(f"unknown example id {example_id!r}, expected one of {BUILTIN_IDS}")


def drift_only_coefficients(dim):
    def drift(t, x):
        return -np.asarray(x, dtype=float)

    return CoefficientSet(dim, 0, drift, (), lipschitz=LipschitzData(1.0), name="drift_only")


def example_initial_point(beta):
    return np.array([math.cos(beta), math.sin(beta), 0.0])


def make_builtin_problem(example_id, beta=math.pi / 2, lam=1.0, t0=0.0, T=1.0, x0=None):
    coeffs, jumps = example_coefficients(example_id, lam)
    if x0 is None:
        x0 = example_initial_point(beta)
    return SDEProblem(coeffs, jumps, t0, x0, T)


def closed_form_oracle(example_id, beta, times, brownian_path, poisson_path=None, x0=None):
    """Exact solution of a built-in example on ``times``.

    ``brownian_path`` holds W_s - W_t (1-d, or (n, 1)), ``poisson_path`` N_s - N_t
    (ex35 only). ``x0`` is used by drift_only. Returns an (n, 3) array.
    """
    times = np.asarray(times, dtype=float)
    elapsed = times - times[0]
    if example_id == "drift_only":
        x0 = np.asarray(x0, dtype=float)
        return np.exp(-elapsed)[:, None] * x0[None, :]
    if example_id not in EXAMPLE_IDS:
        raise ValueError(f"unknown example id {example_id!r}, expected one of {BUILTIN_IDS}")
    w = np.asarray(brownian_path, dtype=float).reshape(len(times), -1)[:, 0]
    if example_id == "ex33":
        radius = np.full_like(elapsed, math.sin(beta))
        phase = w
    elif example_id == "ex34":
        radius = math.sin(beta) * np.exp(-elapsed)
        phase = w
    else:
        if poisson_path is None:
            raise ValueError("ex35 needs the Poisson counting path")
        radius = np.full_like(elapsed, math.sin(beta))
        phase = w + math.pi * np.asarray(poisson_path, dtype=float)
    out = np.empty((len(times), 3))
    out[:, 0] = math.cos(beta)
    out[:, 1] = radius * np.cos(phase)
    out[:, 2] = radius * np.sin(phase)
    return out


def oracle_for_path(example_id, beta, path):
    """Closed-form solution driven by the noise that produced ``path``."""
    if example_id == "drift_only":
        return closed_form_oracle(example_id, beta, path.times, None, x0=path.states[0])
    return closed_form_oracle(
        example_id, beta, path.times, path.brownian_path(), path.jump_counts()
    )


def ex34_radius(beta, elapsed):
    """Deterministic |X_s| of ex34: sqrt(cos^2 beta + sin^2 beta e^{-2(s-t)})."""
    elapsed = np.asarray(elapsed, dtype=float)
    return np.sqrt(math.cos(beta) ** 2 + math.sin(beta) ** 2 * np.exp(-2.0 * elapsed))
