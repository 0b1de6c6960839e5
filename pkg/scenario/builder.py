import dataclasses
import hashlib
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from dsl.evaluate import allowed_names, compile_field, compile_scalars
from dsl.nodes import FUNCTIONS
from manifold.builtins import circle, implicit_manifold, sphere, torus
from manifold.implicit import ImplicitManifold
from manifold.sampling import sample_tube
from scenario.loader import load_scenario_file, parse_scenario
from sde.coefficients import CoefficientSet, JumpMeasure, SDEProblem
from sde.examples import BUILTIN_IDS, example_coefficients, example_initial_point
from sde.lipschitz import LipschitzData, estimate_lipschitz
from utils.errors import DSLError, GeometryError

SCHEMA = {
    "scenario": ("name", "description"),
    "dimensions": ("m", "d", "l"),
    "coefficients": ("builtin", "beta", "lambda", "drift", "diffusion", "jump"),
    "params": None,
    "jumps": ("marks", "weights", "rho"),
    "lipschitz": ("mu", "C"),
    "manifold": ("kind", "dim", "major", "minor", "constraint", "reach", "tube_radius",
                 "sampling_scale", "sampling_center"),
    "horizon": ("t0", "T"),
    "initial": ("x0",),
    "numerics": ("n_steps", "n_paths", "sample_count", "check_times", "grid_radius",
                 "grid_count", "ladder_rungs", "slack_tol", "tolerance_profile", "seed",
                 "export_paths", "shell", "ladder"),
}
MANIFOLD_KINDS = ("sphere", "circle", "torus", "implicit")
TOLERANCE_PROFILES = ("analytic", "fd")


@dataclass(frozen=True)
class Numerics:
    """Run parameters of a scenario; ``None`` fields are filled in by the builder."""

    n_steps: int = 1000
    n_paths: int = 500
    sample_count: int = 64
    check_times: tuple = ()
    grid_radius: Optional[float] = None
    grid_count: int = 256
    ladder_rungs: int = 4
    slack_tol: float = 1e-9
    tolerance_profile: str = "analytic"
    seed: int = 0
    export_paths: int = 8
    shell: bool = False
    ladder: tuple = ()

    def __post_init__(self):
        for name in ("n_steps", "n_paths", "sample_count", "grid_count", "ladder_rungs"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ValueError(f"{name} must be an integer >= 1, got {value!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ValueError(f"seed must be an integer >= 0, got {self.seed!r}")
        if not isinstance(self.export_paths, int) or self.export_paths < 0:
            raise ValueError(f"export_paths must be an integer >= 0, got {self.export_paths!r}")
        if self.tolerance_profile not in TOLERANCE_PROFILES:
            raise ValueError(
                f"tolerance_profile must be one of {TOLERANCE_PROFILES}, "
                f"got {self.tolerance_profile!r}"
            )
        if self.grid_radius is not None and not self.grid_radius > 0:
            raise ValueError(f"grid_radius must be > 0, got {self.grid_radius}")
        if not self.slack_tol >= 0:
            raise ValueError(f"slack_tol must be >= 0, got {self.slack_tol}")
        object.__setattr__(self, "check_times", tuple(float(t) for t in self.check_times))
        object.__setattr__(self, "ladder", tuple(float(h) for h in self.ladder))

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def as_dict(self):
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class Scenario:
    name: str
    coefficients: CoefficientSet
    jumps: JumpMeasure
    manifold: ImplicitManifold
    problem: SDEProblem
    numerics: Numerics
    sha256: str = ""
    builtin: Optional[str] = None
    beta: Optional[float] = None
    lam: Optional[float] = None
    oracle: Optional[tuple] = None
    lipschitz: Optional[LipschitzData] = None
    params: dict = field(default_factory=dict)

    def with_numerics(self, **changes):
        """Copy with command-line overrides applied to the numerics."""
        numerics = self.numerics.replace(**changes)
        return dataclasses.replace(self, numerics=numerics)

    def lipschitz_data(self):
        """Declared constants, or constants estimated on tube samples."""
        if self.lipschitz is not None:
            return self.lipschitz
        if self.coefficients.lipschitz is not None:
            return self.coefficients.lipschitz
        points = sample_tube(self.manifold, self.numerics.sample_count,
                             self.manifold.tube_radius, (self.numerics.seed, 1))
        lip, _ = estimate_lipschitz(self.coefficients, self.jumps, points,
                                    self.numerics.check_times, seed=self.numerics.seed)
        return lip


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def _number(doc, section, key, default=None, positive=False):
    value = doc.get(section, key, default)
    if value is None:
        return None
    if not _is_number(value):
        raise doc.error(f"expected a finite number, got {value!r}", section, key)
    if positive and value <= 0:
        raise doc.error(f"must be > 0, got {value}", section, key)
    return float(value)


def _integer(doc, section, key, default=None, minimum=0):
    value = doc.get(section, key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise doc.error(f"expected an integer >= {minimum}, got {value!r}", section, key)
    return value


def _vector(doc, section, key, length=None):
    value = doc.get(section, key)
    if not isinstance(value, list) or not all(_is_number(v) for v in value):
        raise doc.error("expected a list of numbers", section, key)
    if length is not None and len(value) != length:
        raise doc.error(f"expected {length} numbers, got {len(value)}", section, key)
    return np.array(value, dtype=float)


def _strings(doc, section, key, length):
    value = doc.get(section, key)
    if isinstance(value, str):
        value = [value]
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise doc.error("expected a list of quoted expressions", section, key)
    if len(value) != length:
        raise doc.error(f"expected {length} expressions, got {len(value)}", section, key)
    return value


def check_schema(doc):
    """Unknown sections and keys are errors."""
    for section in doc.sections:
        if section not in SCHEMA:
            raise doc.error(f"unknown section, expected one of {sorted(SCHEMA)}", section)
        known = SCHEMA[section]
        if known is None:
            continue
        for key in doc.keys(section):
            if key not in known:
                raise doc.error(f"unknown key, expected one of {list(known)}", section, key)


def _params(doc):
    params = {}
    reserved = allowed_names(0) | set(FUNCTIONS)
    for key in doc.keys("params"):
        if key in reserved or (key[0] in "xe" and key[1:].isdigit()):
            raise doc.error("parameter name clashes with a variable", "params", key)
        params[key] = _number(doc, "params", key)
    return params


def _compile(doc, key, exprs, dim_state, mark_dim, params, with_mark=False):
    try:
        return compile_field(exprs, dim_state, mark_dim, params, with_mark)
    except DSLError as err:
        raise doc.error(f"in expression: {err}", "coefficients", key) from None


def _dsl_coefficients(doc, name, params):
    for key in ("m", "d"):
        if not doc.has("dimensions", key):
            raise doc.error(f"{key} is required with DSL coefficients", "dimensions")
    m = _integer(doc, "dimensions", "m", minimum=1)
    d = _integer(doc, "dimensions", "d", minimum=0)
    marks = doc.get("jumps", "marks") or []
    inferred = len(marks[0]) if marks and isinstance(marks[0], list) else int(bool(marks))
    lmark = _integer(doc, "dimensions", "l", default=inferred, minimum=0)
    if not doc.has("coefficients", "drift"):
        raise doc.error("drift is required with DSL coefficients", "coefficients")
    drift = _compile(doc, "drift", _strings(doc, "coefficients", "drift", m), m, 0, params)

    columns = []
    if d:
        raw = doc.get("coefficients", "diffusion")
        if not isinstance(raw, list) or len(raw) != d:
            raise doc.error(f"expected {d} diffusion columns", "coefficients",
                            "diffusion" if doc.has("coefficients", "diffusion") else None)
        for alpha, column in enumerate(raw):
            if not isinstance(column, list) or len(column) != m or not all(
                isinstance(c, str) for c in column
            ):
                raise doc.error(f"column {alpha + 1} needs {m} expressions", "coefficients",
                                "diffusion")
            columns.append(_compile(doc, "diffusion", column, m, 0, params))
    elif doc.has("coefficients", "diffusion"):
        raise doc.error("d = 0 but diffusion columns are given", "coefficients", "diffusion")

    jump = None
    if doc.has("coefficients", "jump"):
        jump = _compile(doc, "jump", _strings(doc, "coefficients", "jump", m), m, lmark,
                        params, with_mark=True)
    coeffs = CoefficientSet(m, d, drift, tuple(columns), jump, name=name)
    return coeffs, lmark


def _jump_measure(doc, mark_dim):
    if not doc.has("jumps"):
        return JumpMeasure.empty(max(mark_dim, 1))
    marks = doc.get("jumps", "marks", [])
    weights = doc.get("jumps", "weights", [])
    if not isinstance(marks, list) or not isinstance(weights, list):
        raise doc.error("marks and weights must be lists", "jumps")
    if doc.has("jumps", "rho") and not marks:
        raise doc.error("rho declared but the jump list is empty", "jumps", "rho")
    if not marks:
        return JumpMeasure.empty(max(mark_dim, 1))
    marks = [mk if isinstance(mk, list) else [mk] for mk in marks]
    if any(len(mk) != mark_dim or not all(_is_number(v) for v in mk) for mk in marks):
        raise doc.error(f"every mark needs {mark_dim} numbers (dimensions.l)", "jumps", "marks")
    if len(weights) != len(marks) or not all(_is_number(w) and w > 0 for w in weights):
        raise doc.error(f"expected {len(marks)} weights > 0", "jumps", "weights")
    rho = None
    if doc.has("jumps", "rho"):
        rho = _vector(doc, "jumps", "rho", len(marks))
        if np.any(rho < 0):
            raise doc.error("rho values must be >= 0", "jumps", "rho")
    return JumpMeasure(np.array(marks, dtype=float), np.array(weights, dtype=float), rho)


def _manifold(doc, m, params):
    kind = doc.get("manifold", "kind", "sphere")
    if kind not in MANIFOLD_KINDS:
        raise doc.error(f"kind must be one of {MANIFOLD_KINDS}", "manifold", "kind")
    tube = _number(doc, "manifold", "tube_radius", positive=True)
    try:
        if kind == "sphere":
            dim = _integer(doc, "manifold", "dim", default=m, minimum=2)
            M = sphere(dim, tube)
        elif kind == "circle":
            M = circle(tube)
        elif kind == "torus":
            M = torus(_number(doc, "manifold", "major", 2.0, True),
                      _number(doc, "manifold", "minor", 0.5, True), tube)
        else:
            if not doc.has("manifold", "constraint") or not doc.has("manifold", "reach"):
                raise doc.error("implicit manifolds need constraint and reach", "manifold")
            exprs = doc.get("manifold", "constraint")
            exprs = [exprs] if isinstance(exprs, str) else exprs
            try:
                F = compile_scalars(_strings(doc, "manifold", "constraint", len(exprs)), m, params)
            except DSLError as err:
                raise doc.error(f"in expression: {err}", "manifold", "constraint") from None
            center = (_vector(doc, "manifold", "sampling_center", m)
                      if doc.has("manifold", "sampling_center") else None)
            M = implicit_manifold("implicit", F, m, len(exprs),
                                  _number(doc, "manifold", "reach", positive=True), tube,
                                  sampling_center=center,
                                  sampling_scale=_number(doc, "manifold", "sampling_scale",
                                                         1.0, True))
    except (ValueError, GeometryError) as err:
        raise doc.error(str(err), "manifold") from None
    if M.ambient_dim != m:
        raise doc.error(f"manifold lives in R^{M.ambient_dim} but the state is in R^{m}",
                        "manifold", "kind" if doc.has("manifold", "kind") else None)
    return M


def _numerics(doc, t0, T, M):
    values = {}
    for key in SCHEMA["numerics"]:
        if doc.has("numerics", key):
            values[key] = doc.get("numerics", key)
    for key in ("check_times", "ladder"):
        if key in values:
            v = values[key]
            if not isinstance(v, list) or not all(_is_number(x) for x in v):
                raise doc.error("expected a list of numbers", "numerics", key)
    try:
        numerics = Numerics(**values)
    except (TypeError, ValueError) as err:
        raise doc.error(str(err), "numerics") from None
    if not numerics.check_times:
        numerics = numerics.replace(check_times=(t0, 0.5 * (t0 + T), T))
    if any(not t0 <= t <= T for t in numerics.check_times):
        raise doc.error(f"check_times must lie in [{t0}, {T}]", "numerics", "check_times")
    if numerics.grid_radius is None:
        numerics = numerics.replace(grid_radius=0.5 * M.tube_radius)
    elif numerics.grid_radius > M.tube_radius:
        raise doc.error(f"grid_radius exceeds the tube radius {M.tube_radius}", "numerics",
                        "grid_radius")
    return numerics


def build_scenario(doc, sha256=""):
    """Validate a parsed document and assemble coefficients, manifold and problem."""
    check_schema(doc)
    name = doc.get("scenario", "name", "scenario")
    if not isinstance(name, str):
        raise doc.error("expected a quoted name", "scenario", "name")
    params = _params(doc)

    builtin = doc.get("coefficients", "builtin")
    beta = lam = None
    if builtin is not None:
        if builtin not in BUILTIN_IDS:
            raise doc.error(f"unknown builtin, expected one of {BUILTIN_IDS}", "coefficients",
                            "builtin")
        for key in ("drift", "diffusion", "jump"):
            if doc.has("coefficients", key):
                raise doc.error("cannot be combined with builtin", "coefficients", key)
        if doc.has("jumps"):
            raise doc.error("builtin examples carry their own jump measure", "jumps")
        beta = _number(doc, "coefficients", "beta", math.pi / 2)
        lam = _number(doc, "coefficients", "lambda", 1.0)
        if lam < 0:
            raise doc.error("lambda must be >= 0", "coefficients", "lambda")
        coeffs, jumps = example_coefficients(builtin, lam)
        for key, expected in zip(("m", "d", "l"), (3, coeffs.dim_noise, jumps.mark_dim)):
            if doc.has("dimensions", key) and doc.get("dimensions", key) != expected:
                raise doc.error(f"builtin {builtin} has {key} = {expected}", "dimensions", key)
    else:
        for key in ("beta", "lambda"):
            if doc.has("coefficients", key):
                raise doc.error("only meaningful with builtin; use [params]", "coefficients",
                                key)
        coeffs, mark_dim = _dsl_coefficients(doc, name, params)
        jumps = _jump_measure(doc, mark_dim)
        if len(jumps) and coeffs.jump is None:
            raise doc.error("jump marks are given but no jump field", "jumps")
    m = coeffs.dim_state

    lipschitz = None
    if doc.has("lipschitz"):
        try:
            lipschitz = LipschitzData.from_measure(
                _number(doc, "lipschitz", "mu", 0.0), jumps, _number(doc, "lipschitz", "C")
            )
        except ValueError as err:
            raise doc.error(str(err), "lipschitz") from None
        coeffs = coeffs.with_lipschitz(lipschitz)

    M = _manifold(doc, m, params)

    t0 = _number(doc, "horizon", "t0", 0.0)
    T = _number(doc, "horizon", "T", 1.0)
    if T < t0:
        raise doc.error(f"T = {T} is before t0 = {t0}", "horizon", "T")

    oracle = None
    if doc.has("initial", "x0"):
        x0 = _vector(doc, "initial", "x0", m)
    elif builtin is not None:
        x0 = example_initial_point(beta)
    else:
        raise doc.error("x0 is required with DSL coefficients", "initial")
    if builtin == "drift_only" or (builtin is not None and not doc.has("initial", "x0")):
        oracle = (builtin, beta)

    numerics = _numerics(doc, t0, T, M)
    problem = SDEProblem(coeffs, jumps, t0, x0, T)
    return Scenario(name, coeffs, jumps, M, problem, numerics, sha256, builtin, beta, lam,
                    oracle, lipschitz, params)


def scenario_from_text(text):
    data = text.encode("utf-8")
    return build_scenario(parse_scenario(text), hashlib.sha256(data).hexdigest())


def load_scenario(file_path):
    doc, data = load_scenario_file(file_path)
    return build_scenario(doc, hashlib.sha256(data).hexdigest())
