import numpy as np

from manifold.implicit import newton_project, normal_basis
from utils.errors import GeometryError, SamplerStarvation
from utils.general_utils import make_rng

MAX_REJECTION_ROUNDS = 50


def sample_manifold(M, count, seed):
    """``count`` points on K.

    With closed-form geometry the analytic sampler is used; otherwise ambient
    Gaussian points around ``M.sampling_center`` are Newton-projected and kept
    when the projection converged onto K.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    rng = make_rng(seed)
    accepted = []
    n_accepted = 0
    for _ in range(MAX_REJECTION_ROUNDS):
        need = count - n_accepted
        if M.analytic is not None:
            batch = M.analytic.sample(need, rng)
        else:
            raw = M.sampling_center + M.sampling_scale * rng.normal(size=(need, M.ambient_dim))
            batch = []
            for a in raw:
                try:
                    b = newton_project(M, a)
                except GeometryError:
                    continue
                batch.append(b)
            batch = np.array(batch).reshape(-1, M.ambient_dim)
        batch = np.array([p for p in batch if M.on_manifold(p)]).reshape(-1, M.ambient_dim)
        accepted.append(batch)
        n_accepted += len(batch)
        if n_accepted >= count:
            return np.concatenate(accepted)[:count]
    raise SamplerStarvation(
        f"only {n_accepted}/{count} samples on {M.name} after {MAX_REJECTION_ROUNDS} rounds"
    )


def _unit_normals(M, base, rng):
    out = np.empty_like(base)
    for i, x_bar in enumerate(base):
        vectors = normal_basis(M, x_bar).vectors
        c = rng.normal(size=len(vectors))
        while not np.any(c):
            c = rng.normal(size=len(vectors))
        n = c @ vectors
        out[i] = n / np.linalg.norm(n)
    return out


def sample_tube(M, count, radius, seed):
    """Points x_bar + s n with x_bar on K, n a unit normal, 0 < |s| <= radius."""
    if not 0 < radius <= M.tube_radius:
        raise ValueError(f"radius must be in (0, {M.tube_radius}], got {radius}")
    rng = make_rng(seed)
    base = sample_manifold(M, count, rng)
    normals = _unit_normals(M, base, rng)
    s = radius * (1.0 - rng.random(count))
    s *= rng.choice([-1.0, 1.0], size=count)
    return base + s[:, None] * normals


def sample_shell(M, count, radius, seed):
    """Points at distance exactly ``radius`` from K, on both sides."""
    if not 0 < radius <= M.tube_radius:
        raise ValueError(f"radius must be in (0, {M.tube_radius}], got {radius}")
    rng = make_rng(seed)
    base = sample_manifold(M, count, rng)
    normals = _unit_normals(M, base, rng)
    s = radius * rng.choice([-1.0, 1.0], size=count)
    return base + s[:, None] * normals
