import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sp_stats

from manifold.implicit import distance
from sde.examples import BUILTIN_IDS, make_builtin_problem, oracle_for_path
from sde.simulator import simulate
from utils.errors import GeometryError, SimulationError
from utils.general_utils import is_geometric, path_seed
from utils.parallel import parallel_threads
from utils.stats_utils import compute_statistics, fmean


def distances_to(M, points):
    """d_K at every row of ``points``; vectorized for closed-form spheres."""
    points = np.atleast_2d(points)
    if M.is_unit_sphere:
        return np.abs(np.linalg.norm(points, axis=1) - 1.0)
    return np.array([distance(M, p) for p in points])


@dataclass(frozen=True)
class PathSummary:
    index: int
    seed: tuple
    ok: bool
    sup_dist: float = float("nan")
    terminal_dist: float = float("nan")
    n_jumps: int = 0
    strong_error: float = float("nan")
    node_dist: np.ndarray = None
    error: str = ""
    record: object = None


@dataclass
class EnsembleStats:
    """Statistics of one seeded ensemble; failed paths are counted and excluded."""

    paths: list
    times: np.ndarray
    sup_dist: np.ndarray = field(init=False)
    terminal_dist: np.ndarray = field(init=False)
    strong_errors: np.ndarray = field(init=False)

    def __post_init__(self):
        ok = [p for p in self.paths if p.ok]
        self.sup_dist = np.array([p.sup_dist for p in ok])
        self.terminal_dist = np.array([p.terminal_dist for p in ok])
        self.strong_errors = np.array([p.strong_error for p in ok])

    @property
    def n_paths(self):
        return len(self.paths)

    @property
    def n_failed(self):
        return sum(not p.ok for p in self.paths)

    @property
    def sup_stats(self):
        return compute_statistics(self.sup_dist)

    @property
    def terminal_stats(self):
        return compute_statistics(self.terminal_dist)

    @property
    def has_oracle(self):
        return bool(len(self.strong_errors)) and not np.all(np.isnan(self.strong_errors))

    @property
    def strong_error_stats(self):
        return compute_statistics(self.strong_errors) if self.has_oracle else None

    @property
    def mean_sup_dist(self):
        return fmean(self.sup_dist)

    @property
    def mean_terminal_dist(self):
        return fmean(self.terminal_dist)

    def node_distances(self):
        """(n_ok_paths, n_nodes) matrix of d_K at grid nodes."""
        return np.array([p.node_dist for p in self.paths if p.ok])

    def records(self):
        return [p.record for p in self.paths if p.ok and p.record is not None]

    def running_sup(self):
        """Running maximum of d_K along every successful path."""
        return np.maximum.accumulate(self.node_distances(), axis=1)


def _run_path(problem, M, n_steps, root_seed, index, oracle, keep_path=False):
    seed = path_seed(root_seed, index)
    try:
        path = simulate(problem, n_steps, seed)
        if M is None:
            node_dist = np.zeros(len(path.times))
        else:
            node_dist = distances_to(M, path.states)
        post = [j.post_state for j in path.jump_log]
        jump_dist = distances_to(M, np.array(post)) if post and M is not None else np.zeros(0)
    except (SimulationError, GeometryError) as err:
        return PathSummary(index, seed, False, error=str(err))
    sup = float(max(np.max(node_dist), np.max(jump_dist, initial=0.0)))
    strong = float("nan")
    if oracle is not None:
        example_id, beta = oracle
        exact = oracle_for_path(example_id, beta, path)
        strong = float(np.max(np.linalg.norm(path.states - exact, axis=1)))
    return PathSummary(
        index, seed, True, sup, float(node_dist[-1]), len(path.jump_log), strong, node_dist,
        record=path if keep_path else None,
    )


def run_ensemble(problem, M, n_paths, n_steps, root_seed, oracle=None, threads=1, quiet=True,
                 keep_paths=False):
    """Simulate ``n_paths`` independent paths and record d_K at every grid node
    and right after every jump.

    ``oracle`` = (example_id, beta) adds per-path max |X_sim - X_exact| with
    the exact path driven by the same noise. ``M`` may be None when only
    strong errors are wanted; ``keep_paths`` keeps every PathRecord for export. Path i uses the stream (root_seed, i), so
    results do not depend on ``threads``.
    """
    if n_paths < 1:
        raise ValueError(f"n_paths must be >= 1, got {n_paths}")
    summaries = parallel_threads(
        lambda i: _run_path(problem, M, n_steps, root_seed, i, oracle, keep_paths),
        range(n_paths),
        workers=threads,
        desc="Simulating paths",
        disable=quiet,
    )
    if problem.horizon > problem.t0:
        times = np.linspace(problem.t0, problem.horizon, n_steps + 1)
    else:
        times = np.array([problem.t0])
    return EnsembleStats(summaries, times)


@dataclass(frozen=True)
class ConvergenceResult:
    steps: tuple
    mean_errors: tuple
    slope: float
    intercept: float
    exact_match: bool = False


def convergence_rate(example_id, beta, lam, step_ladder, n_paths, seed, t0=0.0, T=1.0,
                     threads=1, quiet=True, x0=None):
    """Least-squares slope of log(mean strong error) against log(h).

    Each rung re-simulates the ensemble at step h and compares it with the
    closed-form path driven by the same Brownian and Poisson increments. ``x0`` only
    matters for drift_only, whose exact solution accepts any start.
    """
    steps = [float(h) for h in step_ladder]
    if len(steps) < 4:
        raise ValueError(f"step ladder needs at least 4 values, got {len(steps)}")
    if not is_geometric(steps):
        raise ValueError(f"step ladder {steps} is not geometric")
    if example_id not in BUILTIN_IDS:
        raise ValueError(f"convergence needs a closed-form example, got {example_id!r}")
    problem = make_builtin_problem(example_id, beta, lam, t0, T, x0)
    errors = []
    for level, h in enumerate(steps):
        n_steps = max(1, int(round((T - t0) / h)))
        ensemble = run_ensemble(problem, None, n_paths, n_steps, (seed, level),
                                oracle=(example_id, beta), threads=threads, quiet=quiet)
        errors.append(fmean(ensemble.strong_errors))
    if any(e == 0.0 for e in errors):
        return ConvergenceResult(tuple(steps), tuple(errors), math.nan, math.nan, True)
    fit = sp_stats.linregress(np.log(steps), np.log(errors))
    return ConvergenceResult(tuple(steps), tuple(errors), float(fit.slope), float(fit.intercept))


@dataclass(frozen=True)
class CoherenceTolerances:
    viab_stat_tol: float = 0.05
    fail_floor: float = 0.3


@dataclass(frozen=True)
class CoherenceVerdict:
    checker_passed: bool
    mean_sup_dist: float
    mean_terminal_dist: float
    coherent: bool

    @property
    def verdict(self):
        return "PASS" if self.coherent else "FAIL"


def coherence_verdict(checker_report, ensemble, tolerances=None):
    """Checker PASS must come with a small mean sup-distance, checker FAIL
    with a mean terminal distance bounded away from zero."""
    tol = tolerances or CoherenceTolerances()
    mean_sup = ensemble.mean_sup_dist
    mean_terminal = ensemble.mean_terminal_dist
    if checker_report.passed:
        coherent = mean_sup <= tol.viab_stat_tol
    else:
        coherent = mean_terminal >= tol.fail_floor
    return CoherenceVerdict(checker_report.passed, mean_sup, mean_terminal, coherent)


def coherence_test(scenario, tolerances=None, seed=None, threads=1, quiet=True):
    """Run the checker and the simulator of one scenario and compare verdicts."""
    from viability.checker import Tolerances, check_manifold

    numerics = scenario.numerics
    seed = numerics.seed if seed is None else seed
    report = check_manifold(
        scenario.coefficients, scenario.jumps, scenario.manifold, numerics.check_times,
        numerics.sample_count, Tolerances.from_profile(numerics.tolerance_profile),
        seed=seed, threads=threads, quiet=quiet,
    )
    ensemble = run_ensemble(scenario.problem, scenario.manifold, numerics.n_paths,
                            numerics.n_steps, seed, oracle=scenario.oracle,
                            threads=threads, quiet=quiet)
    return coherence_verdict(report, ensemble, tolerances), report, ensemble
