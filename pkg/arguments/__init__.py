from argparse import ArgumentParser, Namespace

from scenario import load_scenario
from utils.general_utils import geometric_ladder

NOT_GIVEN = (-1, -1.0, "")


class GroupParams:
    pass


class ParamGroup:
    def __init__(self, parser: ArgumentParser, name: str):
        group = parser.add_argument_group(name)
        for key, value in vars(self).items():
            shorthand = False
            if key.startswith("_"):
                shorthand = True
                key = key[1:]
            flag = "--" + key.replace("_", "-")
            t = type(value)
            if shorthand:
                if t == bool:
                    group.add_argument(
                        flag, ("-" + key[0:1]), dest=key, default=value, action="store_true"
                    )
                else:
                    group.add_argument(flag, ("-" + key[0:1]), dest=key, default=value, type=t)
            else:
                if t == bool:
                    group.add_argument(flag, dest=key, default=value, action="store_true")
                else:
                    group.add_argument(flag, dest=key, default=value, type=t)

    def extract(self, args):
        group = GroupParams()
        for arg in vars(args).items():
            if arg[0] in vars(self) or ("_" + arg[0]) in vars(self):
                setattr(group, arg[0], arg[1])
        return group


class RunParams(ParamGroup):
    def __init__(self, parser):
        self._scenario = ""
        self._out = ""
        self.seed = -1
        self.threads = 1
        self.tolerance_profile = ""
        self._quiet = False
        super().__init__(parser, "Run Parameters")


class NumericsParams(ParamGroup):
    """Overrides of the scenario [numerics] section; -1 / "" keep the file value."""

    def __init__(self, parser):
        self.n_steps = -1
        self.n_paths = -1
        self.sample_count = -1
        self.grid_radius = -1.0
        self.grid_count = -1
        self.ladder_rungs = -1
        self.slack_tol = -1.0
        self.export_paths = -1
        super().__init__(parser, "Numerics Parameters")


class ConvergenceParams(ParamGroup):
    def __init__(self, parser):
        self.ladder = ""
        super().__init__(parser, "Convergence Parameters")


def parse_ladder(spec):
    """Step ladder from ``"a:b"`` (h = 2^-a .. 2^-b) or a comma list of steps."""
    spec = spec.strip()
    if ":" in spec:
        first, last = (int(v) for v in spec.split(":"))
        if last < first:
            raise ValueError(f"ladder {spec!r}: last exponent is below the first")
        return geometric_ladder(2.0 ** -first, last - first + 1)
    steps = [float(v) for v in spec.split(",") if v.strip()]
    if not steps:
        raise ValueError(f"empty ladder {spec!r}")
    return steps


def numerics_overrides(args: Namespace):
    """Command-line values that were actually given."""
    keys = ("n_steps", "n_paths", "sample_count", "grid_radius", "grid_count", "ladder_rungs",
            "slack_tol", "export_paths", "seed", "tolerance_profile")
    merged = {}
    for k in keys:
        v = getattr(args, k, None)
        if v is not None and v not in NOT_GIVEN:
            merged[k] = v
    ladder = getattr(args, "ladder", "")
    if ladder:
        merged["ladder"] = tuple(parse_ladder(ladder))
    return merged


def get_combined_scenario(args: Namespace):
    """Scenario file values first, then the command-line overrides on top."""
    if not args.scenario:
        raise ValueError("--scenario is required")
    print("Loading scenario {}".format(args.scenario))
    scenario = load_scenario(args.scenario)
    overrides = numerics_overrides(args)
    if overrides:
        scenario = scenario.with_numerics(**overrides)
        if scenario.numerics.grid_radius > scenario.manifold.tube_radius:
            raise ValueError(
                f"grid radius {scenario.numerics.grid_radius} exceeds the tube radius "
                f"{scenario.manifold.tube_radius}"
            )
    return scenario
