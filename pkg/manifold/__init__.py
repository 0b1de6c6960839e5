from manifold.builtins import BUILTIN_MANIFOLDS, circle, implicit_manifold, sphere, torus
from manifold.implicit import (
    ImplicitManifold,
    ManifoldTolerances,
    NormalBasis,
    dist2,
    distance,
    grad_dist2,
    hess_dist2,
    normal_basis,
    project,
)
from manifold.sampling import sample_manifold, sample_shell, sample_tube
