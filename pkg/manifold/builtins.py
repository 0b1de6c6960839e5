import numpy as np

from manifold.implicit import AnalyticGeometry, ImplicitManifold, ManifoldTolerances
from utils.errors import AmbiguityError

SINGULAR_RADIUS = 1e-12


def _sphere_geometry(dim):
    def project(a):
        r = np.linalg.norm(a)
        if r <= SINGULAR_RADIUS:
            raise AmbiguityError(f"{a} is equidistant from every point of S^{dim - 1}")
        return a / r

    def dist2(x):
        return (np.linalg.norm(x) - 1.0) ** 2

    def hessian(x):
        # d^2 = (r - 1)^2  =>  H = 2 n n^T + 2 (r - 1) / r (I - n n^T)
        r = np.linalg.norm(x)
        if r <= SINGULAR_RADIUS:
            raise AmbiguityError(f"d^2 is not differentiable at the center {x}")
        n = x / r
        P = np.outer(n, n)
        return 2.0 * P + 2.0 * (r - 1.0) / r * (np.eye(dim) - P)

    def normal(x):
        return x / np.linalg.norm(x)

    def sample(count, rng):
        g = rng.normal(size=(count, dim))
        norms = np.linalg.norm(g, axis=1)
        g = g[norms > SINGULAR_RADIUS]
        return g / np.linalg.norm(g, axis=1, keepdims=True)

    return AnalyticGeometry(project, dist2, hessian, normal, sample, radial=True)


def sphere(dim=3, tube_radius=None, tolerances=None):
    """Unit sphere S^{dim-1} in R^dim with closed-form geometry."""
    return ImplicitManifold(
        name=f"S{dim - 1}",
        ambient_dim=dim,
        codim=1,
        constraint=lambda x: np.array([x @ x - 1.0]),
        constraint_jacobian=lambda x: 2.0 * np.asarray(x, dtype=float)[None, :],
        reach=1.0,
        tube_radius=tube_radius,
        constraint_hessians=lambda x: 2.0 * np.eye(dim)[None, :, :],
        analytic=_sphere_geometry(dim),
        tolerances=tolerances or ManifoldTolerances(),
    )


def circle(tube_radius=None, tolerances=None):
    """Unit circle S^1 in R^2 through the generic Newton code path."""
    return ImplicitManifold(
        name="S1",
        ambient_dim=2,
        codim=1,
        constraint=lambda x: np.array([x @ x - 1.0]),
        constraint_jacobian=lambda x: 2.0 * np.asarray(x, dtype=float)[None, :],
        reach=1.0,
        tube_radius=tube_radius,
        constraint_hessians=lambda x: 2.0 * np.eye(2)[None, :, :],
        tolerances=tolerances or ManifoldTolerances(),
    )


def torus(major=2.0, minor=0.5, tube_radius=None, tolerances=None):
    """Torus (sqrt(x^2 + y^2) - R)^2 + z^2 = r^2 in R^3, implicit only."""
    if not 0 < minor < major:
        raise ValueError(f"need 0 < minor < major, got minor={minor}, major={major}")

    def F(x):
        rho = np.hypot(x[0], x[1])
        return np.array([(rho - major) ** 2 + x[2] ** 2 - minor**2])

    def J(x):
        rho = np.hypot(x[0], x[1])
        c = 2.0 * (rho - major) / rho
        return np.array([[c * x[0], c * x[1], 2.0 * x[2]]])

    def hessians(x):
        rho = np.hypot(x[0], x[1])
        u = (rho - major) / rho**3
        H = np.zeros((3, 3))
        H[0, 0] = 2.0 * (x[0] ** 2 / rho**2 + u * x[1] ** 2)
        H[1, 1] = 2.0 * (x[1] ** 2 / rho**2 + u * x[0] ** 2)
        H[0, 1] = H[1, 0] = 2.0 * (x[0] * x[1] / rho**2 - u * x[0] * x[1])
        H[2, 2] = 2.0
        return H[None, :, :]

    return ImplicitManifold(
        name="torus",
        ambient_dim=3,
        codim=1,
        constraint=F,
        constraint_jacobian=J,
        reach=min(minor, major - minor),
        tube_radius=tube_radius,
        constraint_hessians=hessians,
        tolerances=tolerances or ManifoldTolerances(),
        sampling_scale=major,
    )


def implicit_manifold(name, constraint, ambient_dim, codim, reach, tube_radius=None,
                      tolerances=None, sampling_center=None, sampling_scale=1.0):
    """Manifold from a bare constraint function; Jacobian by central differences."""
    tolerances = tolerances or ManifoldTolerances()
    step = tolerances.jac_fd_step

    def F(x):
        return np.atleast_1d(np.asarray(constraint(x), dtype=float))

    def J(x):
        x = np.asarray(x, dtype=float)
        out = np.empty((codim, ambient_dim))
        for j in range(ambient_dim):
            e = np.zeros(ambient_dim)
            e[j] = step
            out[:, j] = (F(x + e) - F(x - e)) / (2.0 * step)
        return out

    return ImplicitManifold(
        name=name,
        ambient_dim=ambient_dim,
        codim=codim,
        constraint=F,
        constraint_jacobian=J,
        reach=reach,
        tube_radius=tube_radius,
        tolerances=tolerances,
        sampling_center=None if sampling_center is None else np.asarray(sampling_center, float),
        sampling_scale=sampling_scale,
    )


BUILTIN_MANIFOLDS = {"sphere": sphere, "circle": circle, "torus": torus}
