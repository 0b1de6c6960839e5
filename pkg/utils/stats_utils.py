import math

import numpy as np

QUANTILE_LEVELS = (0.05, 0.25, 0.5, 0.75, 0.95)


def fmean(values):
    """Compensated mean; independent of the order paths were merged in."""
    values = list(values)
    if not values:
        return float("nan")
    return math.fsum(values) / len(values)


def standard_error(values):
    values = np.asarray(values, dtype=float)
    if len(values) < 2:
        return 0.0
    mean = fmean(values)
    var = math.fsum((v - mean) ** 2 for v in values) / (len(values) - 1)
    return math.sqrt(var / len(values))


def compute_statistics(data_vec):
    stats = dict()
    data_vec = np.asarray(data_vec, dtype=float)
    if len(data_vec) > 0:
        stats["rmse"] = math.sqrt(math.fsum(data_vec * data_vec) / len(data_vec))
        stats["mean"] = fmean(data_vec)
        stats["median"] = float(np.median(data_vec))
        stats["std"] = float(np.std(data_vec))
        stats["stderr"] = standard_error(data_vec)
        stats["min"] = float(np.min(data_vec))
        stats["max"] = float(np.max(data_vec))
        for q, v in zip(QUANTILE_LEVELS, np.quantile(data_vec, QUANTILE_LEVELS)):
            stats[f"q{int(round(q * 100)):02d}"] = float(v)
        stats["num_samples"] = int(len(data_vec))
    else:
        for key in ("rmse", "mean", "median", "std", "stderr", "min", "max"):
            stats[key] = 0
        for q in QUANTILE_LEVELS:
            stats[f"q{int(round(q * 100)):02d}"] = 0
        stats["num_samples"] = 0

    return stats


def quantile_bands(matrix, levels=QUANTILE_LEVELS):
    """Per-column quantiles of a (n_paths, n_nodes) array, shape (len(levels), n_nodes)."""
    matrix = np.asarray(matrix, dtype=float)
    return np.quantile(matrix, levels, axis=0)
