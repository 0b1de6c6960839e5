#
# Strong convergence order of the Euler scheme against the closed-form
# solution of a built-in example, fitted over a geometric step ladder.
#

import os
import sys

from arguments import ConvergenceParams, NumericsParams, RunParams, get_combined_scenario
from utils.csv_utils import write_csv
from utils.report_utils import (
    EXIT_PASS,
    ToolkitArgumentParser,
    output_dir,
    run_command,
    run_info,
    write_summary,
)
from utils.system_utils import write_run_info
from viability.montecarlo import convergence_rate


def convergence_scenario(scenario, out_dir, threads=1, quiet=False):
    numerics = scenario.numerics
    if scenario.oracle is None:
        raise ValueError("convergence needs a builtin scenario with a closed-form solution")
    if not numerics.ladder:
        raise ValueError("no step ladder: set [numerics] ladder or pass --ladder")
    result = convergence_rate(
        scenario.builtin,
        scenario.beta,
        scenario.lam,
        numerics.ladder,
        numerics.n_paths,
        numerics.seed,
        t0=scenario.problem.t0,
        T=scenario.problem.horizon,
        threads=threads,
        quiet=quiet,
        x0=scenario.problem.x0 if scenario.builtin == "drift_only" else None,
    )
    write_csv(
        os.path.join(out_dir, "convergence.csv"),
        ["h", "mean_strong_error"],
        zip(result.steps, result.mean_errors),
    )
    write_csv(
        os.path.join(out_dir, "fit.csv"),
        ["slope", "intercept", "exact_match"],
        [[result.slope, result.intercept, result.exact_match]],
    )
    if result.exact_match:
        lines = [f"{scenario.name}: exact match (zero strong error on the ladder)"]
    else:
        lines = [f"{scenario.name}: strong order {result.slope:.4f} over {len(result.steps)} steps"]
    write_summary(out_dir, lines)
    write_run_info(out_dir, run_info("convergence", scenario, slope=result.slope,
                                     exact_match=result.exact_match))
    return result


def main(argv=None):
    parser = ToolkitArgumentParser(description="Strong convergence rate estimation")
    rp = RunParams(parser)
    NumericsParams(parser)
    ConvergenceParams(parser)

    def body(args):
        run = rp.extract(args)
        scenario = get_combined_scenario(args)
        out_dir = output_dir(run, scenario, "convergence")
        print("Estimating convergence rate for " + scenario.name)
        convergence_scenario(scenario, out_dir, run.threads, run.quiet)
        return EXIT_PASS

    return run_command("convergence", parser, body, argv)


if __name__ == "__main__":
    sys.exit(main())
