import numpy as np

from utils.errors import SimulationError

FD_STEP = 1e-5


def directional_derivative_sigma(coeffs, alpha, t, x, fd_step=FD_STEP, analytic=True):
    """<D sigma_a, sigma_a>(t, x): derivative of column ``alpha`` along itself.

    Uses the attached analytic oracle when ``analytic`` and available, else the
    central difference along the unit direction of sigma_a, rescaled by |sigma_a|.
    """
    x = np.asarray(x, dtype=float)
    if analytic and coeffs.sigma_derivatives is not None:
        value = np.asarray(coeffs.sigma_derivatives[alpha](t, x), dtype=float)
        if not np.all(np.isfinite(value)):
            raise SimulationError(f"<D sigma_{alpha + 1}, sigma_{alpha + 1}> is not finite", t, x)
        return value
    s = coeffs.sigma_column(alpha, t, x)
    norm = np.linalg.norm(s)
    if norm == 0.0:
        return np.zeros_like(s)
    direction = s / norm
    plus = coeffs.sigma_column(alpha, t, x + fd_step * direction)
    minus = coeffs.sigma_column(alpha, t, x - fd_step * direction)
    value = (plus - minus) / (2.0 * fd_step) * norm
    if not np.all(np.isfinite(value)):
        raise SimulationError(
            f"finite difference of sigma_{alpha + 1} is not finite", t, x
        )
    return value


def ito_correction(coeffs, t, x, fd_step=FD_STEP, analytic=True):
    """sum_a <D sigma_a, sigma_a>(t, x)."""
    total = np.zeros(coeffs.dim_state)
    for alpha in range(coeffs.dim_noise):
        total = total + directional_derivative_sigma(coeffs, alpha, t, x, fd_step, analytic)
    return total


def ito_to_stratonovich_drift(coeffs, t, x, fd_step=FD_STEP, analytic=True):
    """Drift of the same SDE written with Stratonovich integrals:
    b - 1/2 sum_a <D sigma_a, sigma_a>."""
    return coeffs.b(t, x) - 0.5 * ito_correction(coeffs, t, x, fd_step, analytic)


def jump_compensator(coeffs, jumps, t, x):
    """sum_e gamma(t, x, e) n({e}); zero for an empty measure."""
    if not len(jumps):
        return np.zeros(coeffs.dim_state)
    return jumps.integrate(lambda e: coeffs.gamma(t, x, e))
