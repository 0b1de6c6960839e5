#
# Reduced supersolution test of d_K^2 on a ladder of tube radii, together with
# the near-K ratios |V d^2| / d^2 and |V V d^2| / d^2 on shells of the same radii.
#

import os
import sys

from arguments import NumericsParams, RunParams, get_combined_scenario
from utils.csv_utils import write_csv
from utils.report_utils import (
    ToolkitArgumentParser,
    output_dir,
    run_command,
    run_info,
    verdict_code,
    write_summary,
)
from utils.system_utils import write_run_info
from viability.checker import Tolerances
from viability.supersolution import TubeGrid, check_radius_ladder, tangency_ratio


def supersolution_scenario(scenario, out_dir, threads=1, quiet=False):
    numerics = scenario.numerics
    M = scenario.manifold
    lip = scenario.lipschitz_data()
    reports = check_radius_ladder(
        scenario.coefficients,
        scenario.jumps,
        M,
        lip,
        numerics.grid_radius,
        numerics.grid_count,
        numerics.check_times,
        seed=numerics.seed,
        rungs=numerics.ladder_rungs,
        slack_tol=numerics.slack_tol,
        threads=threads,
        quiet=quiet,
        shell=numerics.shell,
    )
    coords = [f"x{i + 1}" for i in range(M.ambient_dim)]
    for k, report in enumerate(reports):
        write_csv(
            os.path.join(out_dir, f"slack_r{k}.csv"),
            ["t", *coords, "d_K", "generator", "slack"],
            report.rows,
        )

    tol = Tolerances.from_profile(numerics.tolerance_profile)
    ratios = []
    for k, report in enumerate(reports):
        shell = TubeGrid.shell(M, numerics.sample_count, report.radius, numerics.check_times,
                               seed=(numerics.seed, 100 + k))
        ratios.append(tangency_ratio(scenario.coefficients, M, shell, tol.fd_step, tol.analytic))
    write_csv(
        os.path.join(out_dir, "ladder.csv"),
        ["rung", "radius", "C", "max_slack", "passed", "points", "skipped", "ratio_first",
         "ratio_second"],
        ([k, r.radius, r.C, r.max_slack, r.passed, len(r.rows), r.skipped, q.first, q.second]
         for k, (r, q) in enumerate(zip(reports, ratios))),
    )
    passed = all(r.passed for r in reports)
    lines = [f"{scenario.name}: {'PASS' if passed else 'FAIL'} over {len(reports)} radii"]
    lines += ["  " + r.summary() for r in reports]
    if lip.estimated:
        lines.append(f"  Lipschitz constants estimated on tube samples (mu = {lip.mu:.4g})")
    write_summary(out_dir, lines)
    write_run_info(out_dir, run_info("supersolution", scenario, C=lip.C, mu=lip.mu,
                                     lipschitz_estimated=lip.estimated))
    return reports, ratios


def main(argv=None):
    parser = ToolkitArgumentParser(description="Supersolution checker for d_K^2")
    rp = RunParams(parser)
    NumericsParams(parser)

    def body(args):
        run = rp.extract(args)
        scenario = get_combined_scenario(args)
        out_dir = output_dir(run, scenario, "supersolution")
        print("Checking supersolution inequality for " + scenario.name)
        reports, _ = supersolution_scenario(scenario, out_dir, run.threads, run.quiet)
        return verdict_code(all(r.passed for r in reports))

    return run_command("supersolution", parser, body, argv)


if __name__ == "__main__":
    sys.exit(main())
