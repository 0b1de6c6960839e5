import math

import numpy as np
import pytest

from conftest import polar_angle_sin2, scenario_path
from manifold.builtins import sphere
from manifold.implicit import ImplicitManifold
from manifold.sampling import sample_manifold
from scenario import load_scenario
from sde.examples import example_coefficients
from viability import (
    Tolerances,
    ViabilityReport,
    check_manifold,
    check_point,
    check_point_stratonovich,
    report_rows,
    sphere_form_residuals,
)

TIMES = (0.0, 0.5, 1.0)


@pytest.mark.parametrize("beta", [0.3, 0.7, math.pi / 2])
def test_ex33_passes_at_the_initial_point(ex33, s2, beta):
    coeffs, jumps = ex33
    x0 = np.array([math.cos(beta), math.sin(beta), 0.0])
    r = check_point(coeffs, jumps, s2, 0.0, x0)
    assert r.max_drift <= 1e-9
    assert r.max_tangency <= 1e-9
    assert r.max_jump == 0.0


def test_ex33_passes_on_the_sphere(ex33, s2):
    coeffs, jumps = ex33
    report = check_manifold(coeffs, jumps, s2, TIMES, 200, seed=1)
    assert report.passed
    assert report.max_drift <= 1e-9
    assert report.max_tangency <= 1e-9
    assert len(report.samples) == 600


def test_ex33_passes_with_finite_differences(ex33, s2):
    coeffs, jumps = ex33
    tol = Tolerances.from_profile("fd")
    report = check_manifold(coeffs.without_analytic_derivatives(), jumps, s2, TIMES, 200,
                            tolerances=tol, seed=2)
    assert report.passed
    assert report.max_drift <= 1e-4


def test_ex34_fails_in_the_drift_condition(ex34, s2):
    coeffs, jumps = ex34
    report = check_manifold(coeffs, jumps, s2, TIMES, 200, seed=3)
    assert not report.passed
    assert report.verdicts == {"drift": False, "tangency": True, "jump": True}
    for s in report.samples:
        expected = -2.0 * polar_angle_sin2(s.point)
        assert s.drift_residuals[0] == pytest.approx(expected, abs=1e-9)
    worst = report.worst("drift")
    assert worst.max_drift == pytest.approx(report.max_drift)


def test_ex34_drift_residual_on_the_equator(ex34, s2):
    coeffs, jumps = ex34
    r = check_point(coeffs, jumps, s2, 0.0, np.array([0.0, 1.0, 0.0]))
    assert r.drift_residuals[0] == pytest.approx(-2.0, abs=1e-12)
    r = check_point(coeffs, jumps, s2, 0.0, np.array([1.0, 0.0, 0.0]))
    assert abs(r.drift_residuals[0]) <= 1e-12


@pytest.mark.parametrize("lam", [0.5, 1.0, 4.0])
def test_ex35_passes_for_every_intensity(s2, lam):
    coeffs, jumps = example_coefficients("ex35", lam)
    report = check_manifold(coeffs, jumps, s2, TIMES, 100, seed=4)
    assert report.passed
    assert report.max_jump <= 1e-12
    assert report.max_drift <= 1e-9


def test_ex35_without_the_compensator_fails(s2):
    coeffs, _ = example_coefficients("ex35", 1.0)
    _, empty = example_coefficients("ex33")
    report = check_manifold(coeffs, empty, s2, TIMES, 50, seed=5)
    assert not report.verdicts["drift"]


@pytest.mark.parametrize("example_id", ["ex33", "ex34", "ex35"])
def test_sphere_form_agrees_with_the_general_form(s2, example_id):
    coeffs, jumps = example_coefficients(example_id)
    for x in sample_manifold(s2, 100, seed=6):
        general = check_point(coeffs, jumps, s2, 0.25, x)
        drift, tangency, jump = sphere_form_residuals(coeffs, jumps, 0.25, x)
        assert drift == pytest.approx(general.drift_residuals[0], abs=1e-10)
        np.testing.assert_allclose(tangency, general.tangency_residuals[:, 0], atol=1e-10)
        np.testing.assert_allclose(jump, general.jump_residuals, atol=1e-10)


@pytest.mark.parametrize("example_id", ["ex33", "ex34", "ex35"])
def test_stratonovich_form_gives_the_same_residuals(s2, example_id):
    coeffs, jumps = example_coefficients(example_id)
    for x in sample_manifold(s2, 50, seed=7):
        ito = check_point(coeffs, jumps, s2, 0.0, x)
        strat = check_point_stratonovich(coeffs, jumps, s2, 0.0, x)
        np.testing.assert_allclose(strat.drift_residuals, ito.drift_residuals, atol=1e-12)
        np.testing.assert_array_equal(strat.tangency_residuals, ito.tangency_residuals)


def test_dsl_coefficients_match_the_builtin_bitwise(s2):
    tol = Tolerances.from_profile("fd")
    dsl = load_scenario(scenario_path("ex33_dsl"))
    coeffs, jumps = example_coefficients("ex33")
    hard_coded = coeffs.without_analytic_derivatives()
    for t in TIMES:
        for x in sample_manifold(s2, 100, seed=8):
            a = check_point(dsl.coefficients, dsl.jumps, s2, t, x, tol)
            b = check_point(hard_coded, jumps, s2, t, x, tol)
            assert np.array_equal(a.drift_residuals, b.drift_residuals)
            assert np.array_equal(a.tangency_residuals, b.tangency_residuals)


def test_torus_rotation_is_viable():
    scenario = load_scenario(scenario_path("torus_rotation"))
    tol = Tolerances.from_profile(scenario.numerics.tolerance_profile)
    report = check_manifold(scenario.coefficients, scenario.jumps, scenario.manifold,
                            (0.0,), 30, tolerances=tol, seed=9)
    assert report.passed


def test_tangency_failure_is_reported():
    from sde.coefficients import CoefficientSet, JumpMeasure

    def radial(t, x):
        return np.asarray(x, dtype=float)

    coeffs = CoefficientSet(3, 1, lambda t, x: np.zeros(3), (radial,))
    r = check_point(coeffs, JumpMeasure.empty(), sphere(3), 0.0, np.array([0.0, 0.0, 1.0]),
                    Tolerances.from_profile("fd"))
    assert r.tangency_residuals[0, 0] == pytest.approx(1.0)


def test_report_rows_and_summary(ex35, s2):
    coeffs, jumps = ex35
    report = check_manifold(coeffs, jumps, s2, (0.0,), 3, seed=10)
    rows = list(report_rows(report))
    # per point: one drift, one tangency, one jump row
    assert len(rows) == 9
    assert [r[4] for r in rows[:3]] == ["drift", "tangency", "jump"]
    assert rows[1][5] == "0:0"
    assert report.summary().startswith("PASS")
    assert "not a proof" in report.summary()
    merged = report.merge(report)
    assert len(merged.samples) == 6


def test_empty_inputs_are_rejected(ex33, s2):
    coeffs, jumps = ex33
    with pytest.raises(ValueError):
        ViabilityReport([], Tolerances())
    with pytest.raises(ValueError):
        check_manifold(coeffs, jumps, s2, (), 10)
    with pytest.raises(ValueError):
        check_manifold(coeffs, jumps, s2, TIMES, 0)
    with pytest.raises(ValueError):
        Tolerances.from_profile("exact")


def _scaled_sphere(c):
    """S^2 as {c (|x|^2 - 1) = 0}, projected by Newton instead of in closed form."""
    return ImplicitManifold(
        name=f"S2[c={c}]",
        ambient_dim=3,
        codim=1,
        constraint=lambda x: np.array([c * (x @ x - 1.0)]),
        constraint_jacobian=lambda x: 2.0 * c * np.asarray(x, dtype=float)[None, :],
        reach=1.0,
        constraint_hessians=lambda x: 2.0 * c * np.eye(3)[None, :, :],
    )


@pytest.mark.parametrize("example_id", ["ex33", "ex34", "ex35"])
def test_verdicts_do_not_depend_on_normal_scale_or_sign(s2, example_id):
    coeffs, jumps = example_coefficients(example_id)
    points = sample_manifold(s2, 50, seed=8)
    reference = [check_point(coeffs, jumps, s2, 0.5, x) for x in points]
    for c in (1.0, -1.0, 4.0, -0.25):
        M = _scaled_sphere(c)
        samples = [check_point(coeffs, jumps, M, 0.5, x) for x in points]
        for s, ref in zip(samples, reference):
            np.testing.assert_allclose(s.normals, math.copysign(1.0, c) * ref.normals,
                                       atol=1e-12)
            assert s.max_drift == pytest.approx(ref.max_drift, abs=1e-10)
            assert s.max_tangency == pytest.approx(ref.max_tangency, abs=1e-12)
            assert s.max_jump <= 1e-8
        tol = Tolerances()
        assert ViabilityReport(samples, tol).verdicts == ViabilityReport(reference, tol).verdicts
