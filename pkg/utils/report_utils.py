import os
import sys
from argparse import ArgumentParser

from utils.errors import ViabilityToolkitError
from utils.general_utils import safe_state
from utils.system_utils import mkdir_p

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_ERROR = 2


class ToolkitArgumentParser(ArgumentParser):
    """ArgumentParser whose usage errors raise instead of exiting, so they
    map onto exit code 2 together with every other operational error."""

    def error(self, message):
        raise ValueError(f"{self.prog}: {message}")


def verdict_code(passed):
    return EXIT_PASS if passed else EXIT_FAIL


def output_dir(args, scenario, command):
    out = args.out or os.path.join("output", scenario.name, command)
    mkdir_p(out)
    return out


def run_info(command, scenario, **extra):
    info = {
        "command": command,
        "scenario": scenario.name,
        "scenario_sha256": scenario.sha256,
        "seed": scenario.numerics.seed,
        "numerics": scenario.numerics.as_dict(),
    }
    info.update(extra)
    return info


def write_summary(out_dir, lines):
    with open(os.path.join(out_dir, "summary.txt"), "w") as f:
        for line in lines:
            f.write(line + "\n")
    for line in lines:
        print(line)


def run_command(command, parser, body, argv=None):
    """Parse ``argv``, run ``body(args)`` and map the outcome to an exit code."""
    argv = sys.argv[1:] if argv is None else list(argv)
    quiet = "-q" in argv or "--quiet" in argv
    old = safe_state(quiet)
    try:
        args = parser.parse_args(argv)
        return body(args)
    except (ViabilityToolkitError, ValueError, OSError) as err:
        print(f"{command}: error: {err}", file=sys.stderr)
        return EXIT_ERROR
    finally:
        sys.stdout = old

