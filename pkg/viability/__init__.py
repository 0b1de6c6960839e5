from viability.checker import (
    ConditionResiduals,
    Tolerances,
    ViabilityReport,
    check_manifold,
    check_point,
    check_point_stratonovich,
    report_rows,
    sphere_form_residuals,
)
from viability.montecarlo import (
    CoherenceTolerances,
    ConvergenceResult,
    EnsembleStats,
    coherence_test,
    coherence_verdict,
    convergence_rate,
    run_ensemble,
)
from viability.supersolution import (
    SupersolutionReport,
    TangencyRatios,
    TubeGrid,
    check_radius_ladder,
    check_supersolution,
    first_order_coefficient,
    generator_apply,
    tangency_ratio,
)
