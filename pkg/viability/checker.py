import itertools
from dataclasses import dataclass, field

import numpy as np

from manifold.implicit import dist2, normal_basis
from manifold.sampling import sample_manifold
from sde.calculus import (
    FD_STEP,
    directional_derivative_sigma,
    ito_to_stratonovich_drift,
    jump_compensator,
)
from utils.errors import GeometryError
from utils.parallel import parallel_threads

SAMPLED_CERTIFICATE = "sampled certificate over a finite set of (t, x), not a proof"


@dataclass(frozen=True)
class Tolerances:
    drift: float = 1e-6
    tangency: float = 1e-6
    jump: float = 1e-8
    analytic: bool = True
    fd_step: float = FD_STEP

    @classmethod
    def from_profile(cls, name):
        if name == "analytic":
            return cls()
        if name == "fd":
            return cls(drift=1e-4, tangency=1e-4, jump=1e-8, analytic=False)
        raise ValueError(f"unknown tolerance profile {name!r}, expected 'analytic' or 'fd'")


@dataclass(frozen=True)
class ConditionResiduals:
    """Residuals of the three viability conditions at (t, x_bar).

    drift_residuals[j]   2<b, m_j> - sum_a <<D s_a, s_a>, m_j> - 2 sum_e <g(e), m_j> n(e)
    tangency_residuals   (d, k) array of <s_a, m_j>
    jump_residuals[i]    d_K(x_bar + g(t, x_bar, e_i))
    """

    point: np.ndarray
    time: float
    normals: np.ndarray
    drift_residuals: np.ndarray
    tangency_residuals: np.ndarray
    jump_residuals: np.ndarray

    @property
    def max_drift(self):
        return float(np.max(np.abs(self.drift_residuals), initial=0.0))

    @property
    def max_tangency(self):
        return float(np.max(np.abs(self.tangency_residuals), initial=0.0))

    @property
    def max_jump(self):
        return float(np.max(self.jump_residuals, initial=0.0))


@dataclass
class ViabilityReport:
    samples: list
    tolerances: Tolerances
    max_drift: float = 0.0
    max_tangency: float = 0.0
    max_jump: float = 0.0
    verdicts: dict = field(default_factory=dict)
    note: str = SAMPLED_CERTIFICATE

    def __post_init__(self):
        if not self.samples:
            raise ValueError("a viability report needs at least one sample")
        self.max_drift = max(s.max_drift for s in self.samples)
        self.max_tangency = max(s.max_tangency for s in self.samples)
        self.max_jump = max(s.max_jump for s in self.samples)
        tol = self.tolerances
        self.verdicts = {
            "drift": self.max_drift <= tol.drift,
            "tangency": self.max_tangency <= tol.tangency,
            "jump": self.max_jump <= tol.jump,
        }

    @property
    def passed(self):
        return all(self.verdicts.values())

    @property
    def verdict(self):
        return "PASS" if self.passed else "FAIL"

    def worst(self, kind="drift"):
        return max(self.samples, key=lambda s: getattr(s, f"max_{kind}"))

    def merge(self, other):
        return ViabilityReport(self.samples + other.samples, self.tolerances)

    def summary(self):
        flags = " ".join(f"{k}={'PASS' if v else 'FAIL'}" for k, v in self.verdicts.items())
        return (
            f"{self.verdict} max residuals (drift {self.max_drift:.3e}, "
            f"tangency {self.max_tangency:.3e}, jump {self.max_jump:.3e}) "
            f"[{flags}] over {len(self.samples)} samples; {self.note}"
        )


def _jump_distance(M, y, tube_bound):
    try:
        return float(np.sqrt(dist2(M, y)))
    except GeometryError:
        # outside the projection domain: the distance is at least the tube radius
        return tube_bound


def _jump_residuals(coeffs, jumps, M, t, x_bar):
    out = np.zeros(len(jumps))
    for i, e in enumerate(jumps.marks):
        out[i] = _jump_distance(M, x_bar + coeffs.gamma(t, x_bar, e), M.tube_radius)
    return out


def check_point(coeffs, jumps, M, t, x_bar, tolerances=None):
    """Residuals of the viability conditions at one (t, x_bar), x_bar on K."""
    tol = tolerances or Tolerances()
    x_bar = np.asarray(x_bar, dtype=float)
    normals = normal_basis(M, x_bar).vectors
    b = coeffs.b(t, x_bar)
    drift_vec = 2.0 * b
    tangency = np.zeros((coeffs.dim_noise, len(normals)))
    for alpha in range(coeffs.dim_noise):
        drift_vec = drift_vec - directional_derivative_sigma(
            coeffs, alpha, t, x_bar, tol.fd_step, tol.analytic
        )
        tangency[alpha] = normals @ coeffs.sigma_column(alpha, t, x_bar)
    if len(jumps):
        drift_vec = drift_vec - 2.0 * jump_compensator(coeffs, jumps, t, x_bar)
    return ConditionResiduals(
        point=x_bar,
        time=float(t),
        normals=normals,
        drift_residuals=normals @ drift_vec,
        tangency_residuals=tangency,
        jump_residuals=_jump_residuals(coeffs, jumps, M, t, x_bar),
    )


def check_point_stratonovich(coeffs, jumps, M, t, x_bar, tolerances=None):
    """Same residuals with the drift condition written as normality of the
    Stratonovich drift minus the jump compensator."""
    tol = tolerances or Tolerances()
    x_bar = np.asarray(x_bar, dtype=float)
    normals = normal_basis(M, x_bar).vectors
    corrected = ito_to_stratonovich_drift(coeffs, t, x_bar, tol.fd_step, tol.analytic)
    drift = 2.0 * (normals @ corrected)
    if len(jumps):
        drift = drift - 2.0 * (normals @ jump_compensator(coeffs, jumps, t, x_bar))
    tangency = np.array(
        [normals @ coeffs.sigma_column(a, t, x_bar) for a in range(coeffs.dim_noise)]
    ).reshape(coeffs.dim_noise, len(normals))
    return ConditionResiduals(
        x_bar, float(t), normals, drift, tangency, _jump_residuals(coeffs, jumps, M, t, x_bar)
    )


def sphere_form_residuals(coeffs, jumps, t, x_bar):
    """Drift, tangency and jump residuals in the sphere form

        2<b, x> + sum_a |s_a|^2 - 2 sum_e <g(e), x> n(e),  <s_a, x>,  | |x + g| - 1 |
    """
    x_bar = np.asarray(x_bar, dtype=float)
    drift = 2.0 * (coeffs.b(t, x_bar) @ x_bar)
    tangency = np.zeros(coeffs.dim_noise)
    for alpha in range(coeffs.dim_noise):
        s = coeffs.sigma_column(alpha, t, x_bar)
        drift += s @ s
        tangency[alpha] = s @ x_bar
    jump = np.zeros(len(jumps))
    if len(jumps):
        drift -= 2.0 * (jump_compensator(coeffs, jumps, t, x_bar) @ x_bar)
        for i, e in enumerate(jumps.marks):
            jump[i] = abs(np.linalg.norm(x_bar + coeffs.gamma(t, x_bar, e)) - 1.0)
    return drift, tangency, jump


def check_manifold(coeffs, jumps, M, time_grid, sample_count, tolerances=None, seed=0,
                   threads=1, quiet=True):
    """check_point over every (t, x_bar) of time_grid x sample_manifold(M)."""
    if sample_count < 1:
        raise ValueError(f"sample_count must be >= 1, got {sample_count}")
    time_grid = list(time_grid)
    if not time_grid:
        raise ValueError("time_grid is empty")
    tol = tolerances or Tolerances()
    points = sample_manifold(M, sample_count, seed)
    jobs = list(itertools.product(time_grid, points))
    samples = parallel_threads(
        lambda t, x: check_point(coeffs, jumps, M, t, x, tol),
        jobs,
        workers=threads,
        star_args=True,
        desc="Checking viability conditions",
        disable=quiet,
    )
    return ViabilityReport(samples, tol)


def report_rows(report):
    """One CSV row per (t, x_bar, residual kind, index)."""
    for s in report.samples:
        head = [s.time, *s.point]
        for j, r in enumerate(s.drift_residuals):
            yield head + ["drift", j, r]
        for (alpha, j), r in np.ndenumerate(s.tangency_residuals):
            yield head + ["tangency", f"{alpha}:{j}", r]
        for i, r in enumerate(s.jump_residuals):
            yield head + ["jump", i, r]
