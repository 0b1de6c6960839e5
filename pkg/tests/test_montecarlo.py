import math

import numpy as np
import pytest

from conftest import scenario_path
from manifold.builtins import sphere
from manifold.implicit import AnalyticGeometry, ImplicitManifold, distance
from scenario import load_scenario, scenario_from_text
from sde.coefficients import CoefficientSet, JumpMeasure, SDEProblem
from sde.examples import ex34_radius, make_builtin_problem
from utils.errors import SimulationError
from viability import (
    CoherenceTolerances,
    check_manifold,
    coherence_test,
    coherence_verdict,
    convergence_rate,
    run_ensemble,
)
from viability.montecarlo import distances_to


def test_zero_coefficients_never_leave_the_sphere(s2):
    zero = CoefficientSet(3, 1, lambda t, x: np.zeros(3), (lambda t, x: np.zeros(3),))
    problem = SDEProblem(zero, JumpMeasure.empty(), 0.0, [0.0, 0.6, 0.8], 1.0)
    ensemble = run_ensemble(problem, s2, 5, 50, root_seed=1)
    assert ensemble.n_failed == 0
    assert np.all(ensemble.sup_dist <= 1e-15)
    assert ensemble.node_distances().shape == (5, 51)


@pytest.mark.slow
def test_ex33_paths_stay_close_to_the_sphere(s2):
    problem = make_builtin_problem("ex33")
    ensemble = run_ensemble(problem, s2, 500, 1000, root_seed=20240917,
                            oracle=("ex33", math.pi / 2))
    assert ensemble.n_failed == 0
    assert ensemble.mean_sup_dist <= 0.05
    assert ensemble.has_oracle
    assert ensemble.strong_error_stats["num_samples"] == 500


def test_ex33_refinement_does_not_increase_errors(s2):
    problem = make_builtin_problem("ex33")
    coarse, fine = (
        run_ensemble(problem, s2, 200, n_steps, root_seed=41, oracle=("ex33", math.pi / 2))
        for n_steps in (250, 500)
    )
    for key in ("sup_stats", "strong_error_stats"):
        a, b = getattr(coarse, key), getattr(fine, key)
        assert b["mean"] <= a["mean"] + 2.0 * math.hypot(a["stderr"], b["stderr"]), key


def test_ex34_terminal_distance_matches_the_deterministic_radius(s2):
    problem = make_builtin_problem("ex34")
    n_steps = 1000
    ensemble = run_ensemble(problem, s2, 100, n_steps, root_seed=5)
    assert ensemble.mean_terminal_dist == pytest.approx(1.0 - math.exp(-1.0), abs=0.02)
    h = 1.0 / n_steps
    expected = 1.0 - ex34_radius(math.pi / 2, ensemble.times)
    assert np.all(np.abs(ensemble.node_distances() - expected) <= 5.0 * math.sqrt(h))


@pytest.mark.slow
def test_ex35_jumps_are_counted_and_stay_viable(s2):
    problem = make_builtin_problem("ex35", lam=1.0)
    ensemble = run_ensemble(problem, s2, 500, 1000, root_seed=9, keep_paths=True)
    n_jumps = np.array([p.n_jumps for p in ensemble.paths])
    assert n_jumps.mean() == pytest.approx(1.0, abs=0.2)
    assert ensemble.mean_sup_dist <= 0.05
    records = ensemble.records()
    assert len(records) == 500
    for record, summary in zip(records, ensemble.paths):
        assert len(record.jump_log) == summary.n_jumps


def test_ensembles_are_reproducible_and_thread_independent(s2):
    problem = make_builtin_problem("ex35", lam=2.0)
    serial = run_ensemble(problem, s2, 12, 100, root_seed=77)
    again = run_ensemble(problem, s2, 12, 100, root_seed=77)
    threaded = run_ensemble(problem, s2, 12, 100, root_seed=77, threads=4)
    np.testing.assert_array_equal(serial.sup_dist, again.sup_dist)
    np.testing.assert_array_equal(serial.sup_dist, threaded.sup_dist)
    np.testing.assert_array_equal(serial.node_distances(), threaded.node_distances())
    assert [p.seed for p in threaded.paths] == [(77, i) for i in range(12)]
    other = run_ensemble(problem, s2, 12, 100, root_seed=78)
    assert not np.array_equal(serial.sup_dist, other.sup_dist)


def test_running_sup_is_monotone(s2):
    ensemble = run_ensemble(make_builtin_problem("ex33"), s2, 10, 200, root_seed=3)
    running = ensemble.running_sup()
    assert np.all(np.diff(running, axis=1) >= 0.0)
    np.testing.assert_array_equal(running[:, -1], np.max(ensemble.node_distances(), axis=1))
    assert np.all(ensemble.sup_dist >= running[:, -1])


def test_zero_horizon_gives_a_single_node(s2):
    problem = make_builtin_problem("ex33", T=0.0)
    ensemble = run_ensemble(problem, s2, 3, 10, root_seed=0)
    assert ensemble.times.tolist() == [0.0]
    assert np.all(ensemble.terminal_dist <= 1e-15)


def test_failed_paths_are_excluded(s2):
    def blow_up(t, x):
        return np.array([np.inf, 0.0, 0.0]) if t > 0.5 else np.zeros(3)

    coeffs = CoefficientSet(3, 0, blow_up, ())
    problem = SDEProblem(coeffs, JumpMeasure.empty(), 0.0, [0.0, 1.0, 0.0], 1.0)
    ensemble = run_ensemble(problem, s2, 4, 10, root_seed=0)
    assert ensemble.n_failed == 4
    assert len(ensemble.sup_dist) == 0
    assert "drift" in ensemble.paths[0].error
    with pytest.raises(ValueError):
        run_ensemble(problem, s2, 0, 10, root_seed=0)


OUT_OF_DOMAIN = """\
[dimensions]
m = 3
d = 0

[coefficients]
drift = ["0", "0", "-1 - sqrt(x3)"]

[initial]
x0 = [0.0, 0.0, 1.0]
"""


def test_expression_domain_errors_fail_single_paths():
    scenario = scenario_from_text(OUT_OF_DOMAIN)
    ensemble = run_ensemble(scenario.problem, scenario.manifold, 3, 1000, root_seed=0)
    assert ensemble.n_failed == ensemble.n_paths == 3
    assert "sqrt" in ensemble.paths[0].error
    with pytest.raises(SimulationError) as err:
        scenario.coefficients.b(0.5, np.array([0.0, 0.0, -1.0]))
    assert err.value.t == 0.5
    np.testing.assert_array_equal(err.value.x, [0.0, 0.0, -1.0])


def test_distances_vectorized_and_generic_agree(rng):
    points = rng.normal(size=(50, 3))
    points *= rng.uniform(0.9, 1.1, size=(50, 1)) / np.linalg.norm(points, axis=1, keepdims=True)
    np.testing.assert_allclose(distances_to(sphere(3), points),
                               [distance(sphere(3), p) for p in points], atol=1e-15)


def test_only_radial_geometry_takes_the_unit_sphere_shortcut(rng):
    def project(a):
        return 2.0 * a / np.linalg.norm(a)

    geometry = AnalyticGeometry(
        project=project,
        dist2=lambda x: (np.linalg.norm(x) - 2.0) ** 2,
        hessian=None,
        normal=lambda x: x / np.linalg.norm(x),
        sample=None,
    )
    M = ImplicitManifold(
        name="S2",
        ambient_dim=3,
        codim=1,
        constraint=lambda x: np.array([x @ x - 4.0]),
        constraint_jacobian=lambda x: 2.0 * np.asarray(x, dtype=float)[None, :],
        reach=2.0,
        analytic=geometry,
    )
    assert not M.is_unit_sphere
    assert sphere(3).is_unit_sphere
    points = rng.normal(size=(20, 3))
    points *= rng.uniform(1.9, 2.1, size=(20, 1)) / np.linalg.norm(points, axis=1, keepdims=True)
    np.testing.assert_allclose(distances_to(M, points),
                               np.abs(np.linalg.norm(points, axis=1) - 2.0), atol=1e-14)


def test_drift_only_converges_with_order_one():
    ladder = [2.0**-k for k in range(4, 8)]
    result = convergence_rate("drift_only", math.pi / 3, 1.0, ladder, n_paths=2, seed=0)
    assert result.slope == pytest.approx(1.0, abs=0.05)
    assert not result.exact_match
    assert list(result.mean_errors) == sorted(result.mean_errors, reverse=True)


@pytest.mark.slow
def test_ex33_converges_with_order_one_half():
    ladder = [2.0**-k for k in range(6, 13)]
    result = convergence_rate("ex33", math.pi / 2, 1.0, ladder, n_paths=200, seed=1)
    assert 0.35 <= result.slope <= 0.65


def test_convergence_ladder_validation():
    with pytest.raises(ValueError):
        convergence_rate("ex33", 1.0, 1.0, [0.1, 0.05, 0.025], 2, 0)
    with pytest.raises(ValueError):
        convergence_rate("ex33", 1.0, 1.0, [0.1, 0.05, 0.02, 0.01], 2, 0)
    with pytest.raises(ValueError):
        convergence_rate("torus", 1.0, 1.0, [0.1, 0.05, 0.025, 0.0125], 2, 0)


def test_coherence_of_the_sphere_examples():
    for name, checker_passed in (("ex33", True), ("ex34", False), ("ex35", True)):
        scenario = load_scenario(scenario_path(name)).with_numerics(
            n_paths=40, n_steps=1000, sample_count=20
        )
        verdict, report, ensemble = coherence_test(scenario)
        assert report.passed is checker_passed
        assert verdict.coherent, (name, verdict)
        assert ensemble.n_paths == 40


def test_coherence_verdict_flags_disagreement(s2, ex34):
    coeffs, jumps = ex34
    report = check_manifold(coeffs, jumps, s2, (0.0,), 5, seed=0)
    ensemble = run_ensemble(make_builtin_problem("ex33"), s2, 10, 200, root_seed=0)
    verdict = coherence_verdict(report, ensemble)
    assert not verdict.checker_passed
    assert not verdict.coherent
    assert verdict.verdict == "FAIL"
    loose = coherence_verdict(report, ensemble, CoherenceTolerances(fail_floor=0.0))
    assert loose.coherent
