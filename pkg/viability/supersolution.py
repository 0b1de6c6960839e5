from dataclasses import dataclass, field

import numpy as np

from manifold.implicit import dist2, grad_dist2, hess_dist2
from manifold.sampling import sample_shell, sample_tube
from sde.calculus import FD_STEP, directional_derivative_sigma
from utils.errors import DomainError, GeometryError
from utils.general_utils import geometric_ladder
from utils.parallel import parallel_threads

MIN_DIST2 = 1e-14


@dataclass(frozen=True)
class TubeGrid:
    points: np.ndarray
    times: np.ndarray
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError(f"radius must be > 0, got {self.radius}")
        object.__setattr__(self, "points", np.atleast_2d(np.asarray(self.points, dtype=float)))
        object.__setattr__(self, "times", np.atleast_1d(np.asarray(self.times, dtype=float)))

    @classmethod
    def sample(cls, M, count, radius, times, seed=0):
        return cls(sample_tube(M, count, radius, seed), times, radius)

    @classmethod
    def shell(cls, M, count, radius, times, seed=0):
        return cls(sample_shell(M, count, radius, seed), times, radius)


def _post_jump_dist2(M, y, mark_index):
    try:
        return dist2(M, y)
    except GeometryError as err:
        raise DomainError(f"post-jump point {y} is outside the projection domain: {err}",
                          mark_index) from err


def generator_apply(coeffs, jumps, M, t, x):
    """(L + B) d_K^2 at (t, x):

        <D d^2, b> + 1/2 tr[D^2 d^2 s s^T] + sum_e [d^2(x + g) - d^2(x) - <D d^2, g>] n(e)
    """
    x = np.asarray(x, dtype=float)
    g = grad_dist2(M, x)
    H = hess_dist2(M, x)
    S = coeffs.sigma(t, x)
    value = g @ coeffs.b(t, x) + 0.5 * np.trace(H @ S @ S.T)
    if len(jumps):
        d2 = dist2(M, x)
        for i, (e, w) in enumerate(zip(jumps.marks, jumps.weights)):
            gamma = coeffs.gamma(t, x, e)
            value += w * (_post_jump_dist2(M, x + gamma, i) - d2 - g @ gamma)
    return float(value)


def first_order_coefficient(coeffs, jumps, M, t, x_bar, normal, s):
    """generator(x_bar + s * normal) / s; tends to the drift residual along
    ``normal`` as s -> 0."""
    return generator_apply(coeffs, jumps, M, t, np.asarray(x_bar) + s * np.asarray(normal)) / s


@dataclass
class SupersolutionReport:
    radius: float
    C: float
    slack_tol: float
    rows: list = field(default_factory=list)
    skipped: int = 0
    lipschitz_estimated: bool = False

    @property
    def max_slack(self):
        return max((r[-1] for r in self.rows), default=-np.inf)

    @property
    def passed(self):
        return self.max_slack <= self.slack_tol

    @property
    def verdict(self):
        return "PASS" if self.passed else "FAIL"

    def summary(self):
        source = "estimated" if self.lipschitz_estimated else "declared"
        return (
            f"radius {self.radius:.4g}: {self.verdict} max slack {self.max_slack:.3e} "
            f"(C = {self.C:.6g}, {source}; {len(self.rows)} points, {self.skipped} skipped)"
        )


def _evaluate(coeffs, jumps, M, C, t, x):
    try:
        value = generator_apply(coeffs, jumps, M, t, x)
    except DomainError:
        return None
    d2 = dist2(M, x)
    return [t, *x, float(np.sqrt(d2)), value, value - (C - 1.0) * d2]


def check_supersolution(coeffs, jumps, M, lip, grid, slack_tol=1e-9, threads=1, quiet=True):
    """Reduced supersolution test on a tube grid: for every (t, x),

        slack = (L + B) d^2 (t, x) - (C - 1) d^2(x)  <=  slack_tol.

    Rows are (t, x..., d_K, generator, slack); points whose post-jump image
    leaves the projection domain are skipped and counted.
    """
    if grid.radius > M.tube_radius:
        raise ValueError(f"grid radius {grid.radius} exceeds tube radius {M.tube_radius}")
    jobs = [(t, x) for t in grid.times for x in grid.points]
    results = parallel_threads(
        lambda job: _evaluate(coeffs, jumps, M, lip.C, job[0], job[1]),
        jobs,
        workers=threads,
        desc=f"Supersolution r={grid.radius:.3g}",
        disable=quiet,
    )
    report = SupersolutionReport(grid.radius, lip.C, slack_tol,
                                 lipschitz_estimated=lip.estimated)
    for row in results:
        if row is None:
            report.skipped += 1
        else:
            report.rows.append(row)
    return report


def check_radius_ladder(coeffs, jumps, M, lip, radius, count, times, seed=0, rungs=4,
                        slack_tol=1e-9, threads=1, quiet=True, shell=False):
    """check_supersolution on tubes of radius r, r/2, r/4, ... (``rungs`` values).

    With ``shell`` every rung samples exactly |s| = radius.
    """
    make_grid = TubeGrid.shell if shell else TubeGrid.sample
    reports = []
    for i, r in enumerate(geometric_ladder(radius, rungs)):
        grid = make_grid(M, count, r, times, seed=(seed, i))
        reports.append(check_supersolution(coeffs, jumps, M, lip, grid, slack_tol, threads, quiet))
    return reports


@dataclass(frozen=True)
class TangencyRatios:
    first: float
    second: float
    excluded: int


def tangency_ratio(coeffs, M, grid, fd_step=FD_STEP, analytic=True):
    """Largest |V_s d^2| / d^2 and |V_s V_s d^2| / d^2 over the grid and all
    diffusion columns s, with

        V_s d^2 = <D d^2, s>,   V_s V_s d^2 = s^T D^2 d^2 s + <D d^2, <D s, s>>.

    Points with d^2 < 1e-14 are excluded and counted.
    """
    first = second = 0.0
    excluded = 0
    for x in grid.points:
        d2 = dist2(M, x)
        if d2 < MIN_DIST2:
            excluded += 1
            continue
        g = grad_dist2(M, x)
        H = hess_dist2(M, x)
        for t in grid.times:
            for alpha in range(coeffs.dim_noise):
                s = coeffs.sigma_column(alpha, t, x)
                ds = directional_derivative_sigma(coeffs, alpha, t, x, fd_step, analytic)
                first = max(first, abs(g @ s) / d2)
                second = max(second, abs(s @ H @ s + g @ ds) / d2)
    return TangencyRatios(first, second, excluded)
