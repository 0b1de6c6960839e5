import sys
from datetime import datetime

import numpy as np


def safe_state(silent):
    """Timestamp every line printed to stdout, or swallow it when ``silent``.

    Returns the previous stream so callers can put it back with
    ``sys.stdout = old``.
    """
    old_f = sys.stdout

    class F:
        def __init__(self, silent):
            self.silent = silent

        def write(self, x):
            if not self.silent:
                if x.endswith("\n"):
                    old_f.write(
                        x.replace(
                            "\n",
                            " [{}]\n".format(
                                str(datetime.now().strftime("%d/%m %H:%M:%S"))
                            ),
                        )
                    )
                else:
                    old_f.write(x)

        def flush(self):
            old_f.flush()

    sys.stdout = F(silent)
    return old_f


def path_seed(root_seed, index):
    """Entropy for the random stream of path ``index`` under ``root_seed``.

    Counter scheme: stream i is ``default_rng(SeedSequence((root_seed, i)))``,
    so any subset of paths can be regenerated in any order.
    """
    if isinstance(root_seed, (tuple, list)):
        return (*(int(r) for r in root_seed), int(index))
    return (int(root_seed), int(index))


def make_rng(seed):
    """Generator from an int, a (root, index) pair or an existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, (tuple, list)):
        return np.random.default_rng(np.random.SeedSequence(list(seed)))
    return np.random.default_rng(seed)


def geometric_ladder(first, count, ratio=0.5):
    return [first * ratio**i for i in range(count)]


def is_geometric(values, rtol=1e-9):
    values = np.asarray(values, dtype=float)
    if len(values) < 2 or np.any(values <= 0):
        return False
    ratios = values[1:] / values[:-1]
    return bool(np.allclose(ratios, ratios[0], rtol=rtol, atol=0.0))
