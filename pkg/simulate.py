#
# Monte Carlo ensemble of a scenario: per-path summaries, ensemble statistics,
# time bands of d_K, radius curves for spheres and the first paths in full.
#

import os
import sys

import numpy as np

from arguments import NumericsParams, RunParams, get_combined_scenario
from sde.examples import ex34_radius
from utils.csv_utils import write_csv
from utils.report_utils import (
    EXIT_PASS,
    ToolkitArgumentParser,
    output_dir,
    run_command,
    run_info,
    write_summary,
)
from utils.stats_utils import QUANTILE_LEVELS, compute_statistics, quantile_bands
from utils.system_utils import write_run_info
from viability.montecarlo import run_ensemble

QUANTILE_NAMES = [f"q{int(round(q * 100)):02d}" for q in QUANTILE_LEVELS]
STAT_KEYS = ["mean", "stderr", "median", "std", "min", "max", "rmse", *QUANTILE_NAMES,
             "num_samples"]


def _coords(prefix, dim):
    return [f"{prefix}{i + 1}" for i in range(dim)]


def path_rows(ensemble):
    for p in ensemble.paths:
        yield [p.index, *p.seed, p.ok, p.sup_dist, p.terminal_dist, p.n_jumps,
               p.strong_error, p.error]


def ensemble_rows(ensemble):
    columns = [compute_statistics(ensemble.sup_dist), compute_statistics(ensemble.terminal_dist)]
    if ensemble.has_oracle:
        columns.append(compute_statistics(ensemble.strong_errors))
    for key in STAT_KEYS:
        yield [key, *(c[key] for c in columns)]
    yield ["n_paths", *([ensemble.n_paths] * len(columns))]
    yield ["n_failed", *([ensemble.n_failed] * len(columns))]


def jump_rows(records):
    for k, path in enumerate(records):
        for j in path.jump_log:
            yield [k, j.time, j.mark_index, *j.mark, *j.displacement, *j.pre_state,
                   *j.post_state]


def write_path(file_path, path, distances):
    dim = path.states.shape[1]
    radius = np.linalg.norm(path.states, axis=1)
    write_csv(
        file_path,
        ["t", *_coords("x", dim), "d_K", "radius", "jumps_so_far"],
        ([t, *x, d, r, n] for t, x, d, r, n in
         zip(path.times, path.states, distances, radius, path.jump_counts())),
    )


def simulate_scenario(scenario, out_dir, threads=1, quiet=False):
    numerics = scenario.numerics
    M = scenario.manifold
    dim = scenario.problem.dim
    ensemble = run_ensemble(
        scenario.problem,
        M,
        numerics.n_paths,
        numerics.n_steps,
        numerics.seed,
        oracle=scenario.oracle,
        threads=threads,
        quiet=quiet,
        keep_paths=True,
    )
    write_csv(
        os.path.join(out_dir, "paths.csv"),
        ["path", "seed_root", "seed_index", "ok", "sup_dist", "terminal_dist", "n_jumps",
         "strong_error", "error"],
        path_rows(ensemble),
    )
    header = ["statistic", "sup_dist", "terminal_dist"]
    if ensemble.has_oracle:
        header.append("strong_error")
    write_csv(os.path.join(out_dir, "ensemble.csv"), header, ensemble_rows(ensemble))

    records = ensemble.records()
    lines = [
        f"{scenario.name}: {ensemble.n_paths} paths, {ensemble.n_failed} failed, "
        f"h = {(scenario.problem.horizon - scenario.problem.t0) / numerics.n_steps:.3g}"
    ]
    if records:
        node_dist = ensemble.node_distances()
        bands = quantile_bands(node_dist)
        write_csv(
            os.path.join(out_dir, "bands.csv"),
            ["t", *QUANTILE_NAMES, "mean"],
            ([t, *bands[:, k], float(np.mean(node_dist[:, k]))]
             for k, t in enumerate(ensemble.times)),
        )
        if M.is_unit_sphere:
            radii = np.array([np.linalg.norm(p.states, axis=1) for p in records])
            radius_bands = quantile_bands(radii)
            reference = None
            if scenario.builtin == "ex34" and scenario.oracle is not None:
                reference = ex34_radius(scenario.beta, ensemble.times - scenario.problem.t0)
            write_csv(
                os.path.join(out_dir, "radius.csv"),
                ["t", *QUANTILE_NAMES, "reference"],
                ([t, *radius_bands[:, k], "" if reference is None else reference[k]]
                 for k, t in enumerate(ensemble.times)),
            )
        exported = records[: numerics.export_paths]
        write_csv(
            os.path.join(out_dir, "jumps.csv"),
            ["path", "time", "mark_index", *_coords("e", scenario.jumps.mark_dim),
             *_coords("g", dim), *_coords("pre", dim), *_coords("post", dim)],
            jump_rows(exported),
        )
        ok_paths = [p for p in ensemble.paths if p.ok]
        for k, path in enumerate(exported):
            write_path(os.path.join(out_dir, f"path_{k:03d}.csv"), path, ok_paths[k].node_dist)
        sup = compute_statistics(ensemble.sup_dist)
        terminal = compute_statistics(ensemble.terminal_dist)
        lines.append(
            f"  sup d_K: mean {sup['mean']:.4e} +- {sup['stderr']:.1e}, "
            f"q95 {sup['q95']:.4e}, max {sup['max']:.4e}"
        )
        lines.append(f"  terminal d_K: mean {terminal['mean']:.4e}, median {terminal['median']:.4e}")
        if ensemble.has_oracle:
            strong = compute_statistics(ensemble.strong_errors)
            lines.append(f"  strong error: mean {strong['mean']:.4e}, max {strong['max']:.4e}")
    write_summary(out_dir, lines)
    write_run_info(out_dir, run_info("simulate", scenario, n_failed=ensemble.n_failed))
    return ensemble


def main(argv=None):
    parser = ToolkitArgumentParser(description="Path ensemble simulator")
    rp = RunParams(parser)
    NumericsParams(parser)

    def body(args):
        run = rp.extract(args)
        scenario = get_combined_scenario(args)
        out_dir = output_dir(run, scenario, "simulate")
        print("Simulating " + scenario.name)
        simulate_scenario(scenario, out_dir, run.threads, run.quiet)
        return EXIT_PASS

    return run_command("simulate", parser, body, argv)


if __name__ == "__main__":
    sys.exit(main())
