"""Exception hierarchy shared by the simulator, the geometry layer, the
checkers, the coefficient language and the scenario loader.

Entry scripts turn any ``ViabilityToolkitError`` into exit code 2.
"""

import numpy as np


class ViabilityToolkitError(Exception):
    pass


class SimulationError(ViabilityToolkitError):
    """A coefficient evaluated to a non-finite value during time stepping."""

    def __init__(self, message, t=None, x=None, step=None):
        self.t = t
        self.x = None if x is None else np.array(x, dtype=float)
        self.step = step
        where = []
        if step is not None:
            where.append(f"step={step}")
        if t is not None:
            where.append(f"t={t:.17g}")
        if x is not None:
            where.append(f"x={np.array2string(self.x, precision=17)}")
        super().__init__(message + (f" ({', '.join(where)})" if where else ""))


class GeometryError(ViabilityToolkitError):
    pass


class ProjectionError(GeometryError):
    pass


class AmbiguityError(GeometryError):
    pass


class SamplerStarvation(GeometryError):
    pass


class DomainError(ViabilityToolkitError):
    """A post-jump point left the region where d_K^2 can be evaluated."""

    def __init__(self, message, mark_index=None):
        self.mark_index = mark_index
        super().__init__(
            message if mark_index is None else f"{message} (mark {mark_index})"
        )


class ScenarioError(ViabilityToolkitError):
    def __init__(self, message, line=None, offset=None):
        self.line = line
        self.offset = offset
        if line is not None:
            message = f"line {line}, byte {offset}: {message}"
        super().__init__(message)


class DSLError(ViabilityToolkitError):
    def __init__(self, message, offset=None):
        self.offset = offset
        if offset is not None:
            message = f"{message} at byte {offset}"
        super().__init__(message)


class LexError(DSLError):
    pass


class ParseError(DSLError):
    pass


class ArityError(DSLError):
    pass


class UnboundVariableError(DSLError):
    pass


class EvalDomainError(DSLError):
    pass
