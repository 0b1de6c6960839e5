from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from utils.errors import AmbiguityError, GeometryError, ProjectionError


@dataclass(frozen=True)
class ManifoldTolerances:
    proj_tol: float = 1e-10
    on_manifold_tol: float = 1e-9
    hess_fd_step: float = 1e-4
    jac_fd_step: float = 1e-6
    rank_tol: float = 1e-8
    max_iter: int = 50


@dataclass(frozen=True)
class AnalyticGeometry:
    """Closed-form replacements for the generic implicit-manifold routines.

    ``global_domain`` means ``project``/``dist2`` are valid on all of R^m
    minus the singular set (where ``project`` raises AmbiguityError).
    ``radial`` marks the unit sphere, where d_K(x) = ||x| - 1|.
    """

    project: Callable
    dist2: Callable
    hessian: Callable
    normal: Callable
    sample: Callable
    global_domain: bool = True
    radial: bool = False


@dataclass(frozen=True)
class ImplicitManifold:
    """Closed submanifold K = {F = 0} of R^m of codimension k.

    ``constraint_jacobian(x)`` is k x m; ``constraint_hessians(x)`` (optional)
    is k x m x m and only speeds up the Newton projection.
    """

    name: str
    ambient_dim: int
    codim: int
    constraint: Callable
    constraint_jacobian: Callable
    reach: float
    tube_radius: float = None
    constraint_hessians: Optional[Callable] = None
    analytic: Optional[AnalyticGeometry] = None
    tolerances: ManifoldTolerances = field(default_factory=ManifoldTolerances)
    sampling_center: np.ndarray = None
    sampling_scale: float = 1.0

    def __post_init__(self):
        if not 0 < self.codim <= self.ambient_dim:
            raise ValueError(f"codim must be in 1..{self.ambient_dim}, got {self.codim}")
        if self.reach <= 0:
            raise ValueError(f"reach must be > 0, got {self.reach}")
        if self.tube_radius is None:
            object.__setattr__(self, "tube_radius", 0.2 * self.reach)
        elif not 0 < self.tube_radius < self.reach:
            raise ValueError(
                f"tube_radius {self.tube_radius} must lie in (0, reach = {self.reach})"
            )
        if self.sampling_center is None:
            object.__setattr__(self, "sampling_center", np.zeros(self.ambient_dim))

    def F(self, x):
        return np.atleast_1d(np.asarray(self.constraint(x), dtype=float))

    def J(self, x):
        return np.atleast_2d(np.asarray(self.constraint_jacobian(x), dtype=float))

    @property
    def is_unit_sphere(self):
        return self.analytic is not None and self.analytic.radial

    def constraint_residual(self, x):
        return float(np.linalg.norm(self.F(x)))

    def on_manifold(self, x):
        return self.constraint_residual(x) <= self.tolerances.on_manifold_tol


@dataclass(frozen=True)
class NormalBasis:
    base_point: np.ndarray
    vectors: np.ndarray


def _constraint_hessians(M, b):
    if M.constraint_hessians is not None:
        return np.asarray(M.constraint_hessians(b), dtype=float).reshape(
            M.codim, M.ambient_dim, M.ambient_dim
        )
    step = M.tolerances.hess_fd_step
    m = M.ambient_dim
    out = np.empty((M.codim, m, m))
    for j in range(m):
        e = np.zeros(m)
        e[j] = step
        out[:, :, j] = (M.J(b + e) - M.J(b - e)) / (2.0 * step)
    return 0.5 * (out + out.transpose(0, 2, 1))


def newton_project(M, a):
    """Newton iteration on the Lagrange system

        b - a - J(b)^T eta = 0,   F(b) = 0

    started at (b, eta) = (a, 0). Converges to a critical point of |a - b|
    on K, not necessarily the nearest one; callers check the distance.
    """
    a = np.asarray(a, dtype=float)
    m, k = M.ambient_dim, M.codim
    tol = M.tolerances
    b = a.copy()
    eta = np.zeros(k)
    for _ in range(tol.max_iter):
        Jb = M.J(b)
        Fb = M.F(b)
        G = np.concatenate([b - a - Jb.T @ eta, Fb])
        A = np.zeros((m + k, m + k))
        A[:m, :m] = np.eye(m) - np.einsum("i,ijk->jk", eta, _constraint_hessians(M, b))
        A[:m, m:] = -Jb.T
        A[m:, :m] = Jb
        try:
            delta = scipy.linalg.solve(A, -G)
        except (scipy.linalg.LinAlgError, ValueError) as err:
            raise ProjectionError(f"singular Newton system while projecting {a}") from err
        b = b + delta[:m]
        eta = eta + delta[m:]
        if not np.all(np.isfinite(b)):
            break
        if np.linalg.norm(delta) <= tol.proj_tol * max(1.0, np.linalg.norm(b)):
            if np.linalg.norm(M.F(b)) <= tol.proj_tol:
                return b
    raise ProjectionError(
        f"projection of {a} did not converge after {tol.max_iter} iterations"
    )


def project(M, a):
    """Nearest point of K to ``a``."""
    a = np.asarray(a, dtype=float)
    if M.analytic is not None:
        return M.analytic.project(a)
    b = newton_project(M, a)
    if np.linalg.norm(a - b) > M.tube_radius:
        raise GeometryError(
            f"{a} lies outside the tube of radius {M.tube_radius} around {M.name}"
        )
    return b


def dist2(M, x):
    x = np.asarray(x, dtype=float)
    if M.analytic is not None:
        return float(M.analytic.dist2(x))
    r = x - project(M, x)
    return float(r @ r)


def distance(M, x):
    return float(np.sqrt(dist2(M, x)))


def grad_dist2(M, x):
    """2 (x - Pi_K(x))."""
    x = np.asarray(x, dtype=float)
    return 2.0 * (x - project(M, x))


def hess_dist2(M, x):
    x = np.asarray(x, dtype=float)
    if M.analytic is not None:
        return M.analytic.hessian(x)
    return fd_hess_dist2(M, x)


def fd_hess_dist2(M, x, step=None):
    """Central differences of grad_dist2, symmetrized."""
    x = np.asarray(x, dtype=float)
    step = M.tolerances.hess_fd_step if step is None else step
    m = M.ambient_dim
    H = np.empty((m, m))
    for j in range(m):
        e = np.zeros(m)
        e[j] = step
        H[:, j] = (grad_dist2(M, x + e) - grad_dist2(M, x - e)) / (2.0 * step)
    return 0.5 * (H + H.T)


def normal_basis(M, x_bar):
    """Orthonormal basis of the normal space at ``x_bar``, oriented like the
    rows of the constraint Jacobian."""
    x_bar = np.asarray(x_bar, dtype=float)
    if not M.on_manifold(x_bar):
        raise GeometryError(
            f"{x_bar} is not on {M.name} (|F| = {M.constraint_residual(x_bar):.3e})"
        )
    if M.analytic is not None:
        return NormalBasis(x_bar, np.atleast_2d(M.analytic.normal(x_bar)))
    J = M.J(x_bar)
    if scipy.linalg.svdvals(J).min() <= M.tolerances.rank_tol:
        raise GeometryError(f"constraint Jacobian of {M.name} is rank deficient at {x_bar}")
    q, r = scipy.linalg.qr(J.T, mode="economic")
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return NormalBasis(x_bar, (q * signs).T)


def tangent_basis(M, x_bar):
    """Orthonormal complement of the normal space at ``x_bar``."""
    normals = normal_basis(M, x_bar).vectors
    return scipy.linalg.null_space(normals).T


def check_projection(M, a, b):
    """Residuals of a projection: |F(b)| and the tangential part of a - b."""
    tangent = tangent_basis(M, b)
    return M.constraint_residual(b), float(np.linalg.norm(tangent @ (a - b)))
