import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from utils.errors import DSLError, SimulationError

Field = Callable[[float, np.ndarray], np.ndarray]
JumpField = Callable[[float, np.ndarray, np.ndarray], np.ndarray]


def _evaluate(fn, args, what, t, x):
    try:
        return fn(*args)
    except DSLError as err:
        raise SimulationError(f"{what}: {err}", t, x) from err


def _finite_vector(value, m, what, t, x):
    v = np.asarray(value, dtype=float)
    if v.shape != (m,):
        raise SimulationError(f"{what} returned shape {v.shape}, expected ({m},)", t, x)
    if not np.all(np.isfinite(v)):
        raise SimulationError(f"{what} is not finite", t, x)
    return v


@dataclass(frozen=True)
class CoefficientSet:
    """The fields b, sigma = (sigma_1 .. sigma_d) and gamma of the jump SDE

        dX = b(t, X) dt + sum_a sigma_a(t, X) dW^a + int_E gamma(t, X-, e) N~(dt de)

    ``sigma_derivatives`` optionally holds, for each column, the analytic vector
    <D sigma_a, sigma_a>(t, x) (component i is D sigma_a^i . sigma_a).
    """

    dim_state: int
    dim_noise: int
    drift: Field
    diffusion_columns: tuple
    jump: Optional[JumpField] = None
    sigma_derivatives: Optional[tuple] = None
    lipschitz: Optional[object] = None
    name: str = ""

    def __post_init__(self):
        if self.dim_state < 1:
            raise ValueError(f"dim_state must be >= 1, got {self.dim_state}")
        if len(self.diffusion_columns) != self.dim_noise:
            raise ValueError(
                f"expected {self.dim_noise} diffusion columns, got {len(self.diffusion_columns)}"
            )
        if self.sigma_derivatives is not None and len(self.sigma_derivatives) != self.dim_noise:
            raise ValueError("one analytic <D sigma, sigma> per diffusion column is required")

    @property
    def has_analytic_derivatives(self):
        return self.sigma_derivatives is not None

    def b(self, t, x):
        return _finite_vector(
            _evaluate(self.drift, (t, x), "drift", t, x), self.dim_state, "drift", t, x
        )

    def sigma_column(self, alpha, t, x):
        return _finite_vector(
            _evaluate(self.diffusion_columns[alpha], (t, x), f"sigma_{alpha + 1}", t, x),
            self.dim_state,
            f"sigma_{alpha + 1}",
            t,
            x,
        )

    def sigma(self, t, x):
        """m x d matrix whose columns are the sigma_a."""
        out = np.zeros((self.dim_state, self.dim_noise))
        for alpha in range(self.dim_noise):
            out[:, alpha] = self.sigma_column(alpha, t, x)
        return out

    def gamma(self, t, x, e):
        if self.jump is None:
            return np.zeros(self.dim_state)
        return _finite_vector(
            _evaluate(self.jump, (t, x, e), "jump", t, x), self.dim_state, "jump", t, x
        )

    def with_lipschitz(self, lipschitz):
        return CoefficientSet(
            self.dim_state,
            self.dim_noise,
            self.drift,
            self.diffusion_columns,
            self.jump,
            self.sigma_derivatives,
            lipschitz,
            self.name,
        )

    def without_analytic_derivatives(self):
        return CoefficientSet(
            self.dim_state,
            self.dim_noise,
            self.drift,
            self.diffusion_columns,
            self.jump,
            None,
            self.lipschitz,
            self.name,
        )


@dataclass(frozen=True)
class JumpMeasure:
    """Finite discrete mark measure n(de) = sum_i weights[i] * delta_{marks[i]}.

    ``rho`` is the function of the Lipschitz assumption on gamma, either a
    callable e -> R+ or one value per mark.
    """

    marks: np.ndarray
    weights: np.ndarray
    rho: Optional[object] = None
    total_mass: float = field(init=False)

    def __post_init__(self):
        marks = np.atleast_2d(np.asarray(self.marks, dtype=float))
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if marks.size == 0:
            marks = marks.reshape(0, marks.shape[-1] if marks.ndim == 2 else 1)
        if len(marks) != len(weights):
            raise ValueError(f"{len(marks)} marks but {len(weights)} weights")
        if np.any(~np.isfinite(weights)) or np.any(weights <= 0):
            raise ValueError("mark weights must be finite and > 0")
        marks.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "marks", marks)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "total_mass", math.fsum(weights))

    @classmethod
    def empty(cls, mark_dim=1):
        return cls(np.zeros((0, mark_dim)), np.zeros(0))

    @classmethod
    def single(cls, intensity, mark=(1.0,), rho=None):
        return cls(np.array([mark], dtype=float), np.array([intensity]), rho)

    @property
    def mark_dim(self):
        return self.marks.shape[1]

    def __len__(self):
        return len(self.weights)

    def rho_values(self):
        if self.rho is None:
            return None
        if callable(self.rho):
            return np.array([float(self.rho(e)) for e in self.marks])
        values = np.asarray(self.rho, dtype=float).reshape(-1)
        if len(values) != len(self):
            raise ValueError(f"rho has {len(values)} values for {len(self)} marks")
        return values

    def rho_sq_integral(self):
        values = self.rho_values()
        if values is None:
            return 0.0
        return math.fsum(values**2 * self.weights)

    def integrate(self, fn):
        """Exact sum_e fn(e) n({e}) for vector-valued ``fn``."""
        total = None
        for e, w in zip(self.marks, self.weights):
            term = w * np.asarray(fn(e), dtype=float)
            total = term if total is None else total + term
        return total


@dataclass(frozen=True)
class SDEProblem:
    coefficients: CoefficientSet
    jumps: JumpMeasure
    t0: float
    x0: np.ndarray
    horizon: float

    def __post_init__(self):
        x0 = np.array(self.x0, dtype=float).reshape(-1)
        if x0.shape != (self.coefficients.dim_state,):
            raise ValueError(
                f"x0 has {x0.size} components, coefficients act on R^{self.coefficients.dim_state}"
            )
        if not np.all(np.isfinite(x0)):
            raise ValueError("x0 must be finite")
        if not (math.isfinite(self.t0) and math.isfinite(self.horizon)):
            raise ValueError("t0 and horizon must be finite")
        if self.horizon < self.t0:
            raise ValueError(f"horizon {self.horizon} is before t0 {self.t0}")
        if len(self.jumps) and self.coefficients.jump is None:
            raise ValueError("jump measure has marks but the coefficients define no jump field")
        x0.setflags(write=False)
        object.__setattr__(self, "x0", x0)

    @property
    def dim(self):
        return self.coefficients.dim_state
