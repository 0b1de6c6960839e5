from dataclasses import dataclass

import numpy as np


def c_lower_bound(mu, rho_sq_integral):
    return 1.0 + 2.0 * mu + mu**2 + rho_sq_integral


@dataclass(frozen=True)
class LipschitzData:
    """Constants of the Lipschitz/growth assumptions and the PDE constant C.

    C defaults to its smallest admissible value 1 + 2mu + mu^2 + int rho^2 dn.
    """

    mu: float
    rho_sq_integral: float = 0.0
    C: float = None
    estimated: bool = False

    def __post_init__(self):
        if self.mu < 0 or self.rho_sq_integral < 0:
            raise ValueError(
                f"mu and rho_sq_integral must be >= 0, got {self.mu}, {self.rho_sq_integral}"
            )
        bound = c_lower_bound(self.mu, self.rho_sq_integral)
        if self.C is None:
            object.__setattr__(self, "C", bound)
        elif self.C < bound:
            raise ValueError(
                f"C = {self.C} violates C >= 1 + 2mu + mu^2 + int rho^2 = {bound}"
            )

    @classmethod
    def from_measure(cls, mu, jumps, C=None):
        return cls(mu, jumps.rho_sq_integral(), C)


def _pair_quotients(coeffs, jumps, t, xs, xps):
    lip, growth = [], []
    rho_lip = np.zeros(len(jumps))
    rho_growth = np.zeros(len(jumps))
    for x, xp in zip(xs, xps):
        dx = np.linalg.norm(x - xp)
        if dx == 0.0:
            continue
        b, bp = coeffs.b(t, x), coeffs.b(t, xp)
        s, sp = coeffs.sigma(t, x), coeffs.sigma(t, xp)
        lip.append((np.linalg.norm(b - bp) + np.linalg.norm(s - sp)) / dx)
        growth.append((np.linalg.norm(b) + np.linalg.norm(s)) / (1.0 + np.linalg.norm(x)))
        for i, e in enumerate(jumps.marks):
            g, gp = coeffs.gamma(t, x, e), coeffs.gamma(t, xp, e)
            rho_lip[i] = max(rho_lip[i], np.linalg.norm(g - gp) / dx)
            rho_growth[i] = max(rho_growth[i], np.linalg.norm(g) / (1.0 + np.linalg.norm(x)))
    return max(lip, default=0.0), max(growth, default=0.0), np.maximum(rho_lip, rho_growth)


def _sample_pairs(points, rng, scale):
    points = np.asarray(points, dtype=float)
    offsets = rng.normal(size=points.shape) * scale
    return points, points + offsets


def estimate_lipschitz(coeffs, jumps, points, times, seed=0, safety=1.25, scale=0.1):
    """mu and rho from the largest sampled difference and growth quotients.

    Pairs are (x, x + scale * N(0, I)) for every x in ``points`` and every t
    in ``times``; both mu and each rho(e) are inflated by ``safety``.
    """
    rng = np.random.default_rng(seed)
    mu = 0.0
    rho = np.zeros(len(jumps))
    for t in times:
        xs, xps = _sample_pairs(points, rng, scale)
        lip, growth, r = _pair_quotients(coeffs, jumps, t, xs, xps)
        mu = max(mu, lip, growth)
        rho = np.maximum(rho, r)
    mu *= safety
    rho *= safety
    rho_sq = float(np.sum(rho**2 * jumps.weights)) if len(jumps) else 0.0
    return LipschitzData(mu, rho_sq, estimated=True), rho


def verify_lipschitz(coeffs, jumps, lip, points, times, seed=0, scale=0.1):
    """Largest excess of sampled quotients over the declared mu (<= 0 means OK).

    rho is checked through its integral: the sampled per-mark quotients,
    squared and integrated, must not exceed ``lip.rho_sq_integral``.
    """
    rng = np.random.default_rng(seed)
    excess = -np.inf
    for t in times:
        xs, xps = _sample_pairs(points, rng, scale)
        lq, gq, r = _pair_quotients(coeffs, jumps, t, xs, xps)
        excess = max(excess, lq - lip.mu, gq - lip.mu)
        if len(jumps):
            excess = max(excess, float(np.sum(r**2 * jumps.weights)) - lip.rho_sq_integral)
    return excess
