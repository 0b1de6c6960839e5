#
# Sampled check of the viability conditions of a scenario: drift residual
# <n, b - 1/2 sum <D s, s> - int gamma dn>, tangency <n, s_a> and post-jump
# distance at every (t, x_bar) of the check grid.
#

import os
import sys

from arguments import NumericsParams, RunParams, get_combined_scenario
from manifold.sampling import sample_manifold
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
from viability.checker import Tolerances, check_manifold, report_rows, sphere_form_residuals


def sphere_form_rows(scenario, points):
    for t in scenario.numerics.check_times:
        for x in points:
            drift, tangency, jump = sphere_form_residuals(
                scenario.coefficients, scenario.jumps, t, x
            )
            yield [t, *x, drift, max(abs(v) for v in tangency) if len(tangency) else 0.0,
                   max(jump, default=0.0)]


def check(scenario, out_dir, threads=1, quiet=False):
    numerics = scenario.numerics
    M = scenario.manifold
    tol = Tolerances.from_profile(numerics.tolerance_profile)
    report = check_manifold(
        scenario.coefficients,
        scenario.jumps,
        M,
        numerics.check_times,
        numerics.sample_count,
        tol,
        seed=numerics.seed,
        threads=threads,
        quiet=quiet,
    )
    coords = [f"x{i + 1}" for i in range(M.ambient_dim)]
    write_csv(
        os.path.join(out_dir, "residuals.csv"),
        ["t", *coords, "kind", "index", "residual"],
        report_rows(report),
    )
    lines = [f"{scenario.name}: {report.summary()}"]
    for kind in ("drift", "tangency", "jump"):
        worst = report.worst(kind)
        value = getattr(worst, f"max_{kind}")
        point = ", ".join(f"{v:.6g}" for v in worst.point)
        lines.append(f"  worst {kind} {value:.3e} at t={worst.time:.6g} x=({point})")

    if M.is_unit_sphere and M.ambient_dim == 3:
        points = sample_manifold(M, numerics.sample_count, numerics.seed)
        write_csv(
            os.path.join(out_dir, "sphere_form.csv"),
            ["t", *coords, "drift", "tangency", "jump"],
            sphere_form_rows(scenario, points),
        )
        lines.append("  sphere form written to sphere_form.csv")

    write_summary(out_dir, lines)
    write_run_info(out_dir, run_info("check", scenario, verdict=report.verdict))
    return report


def main(argv=None):
    parser = ToolkitArgumentParser(description="Viability condition checker")
    rp = RunParams(parser)
    NumericsParams(parser)

    def body(args):
        run = rp.extract(args)
        scenario = get_combined_scenario(args)
        out_dir = output_dir(run, scenario, "check")
        print("Checking " + scenario.name)
        report = check(scenario, out_dir, run.threads, run.quiet)
        return verdict_code(report.passed)

    return run_command("check", parser, body, argv)


if __name__ == "__main__":
    sys.exit(main())
