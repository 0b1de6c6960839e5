# --------------------------------------------------------
# thread-pool helpers for path ensembles and checker sweeps
# --------------------------------------------------------
from multiprocessing import cpu_count
from multiprocessing.dummy import Pool as ThreadPool

from tqdm import tqdm


def parallel_threads(
    function,
    args,
    workers=0,
    star_args=False,
    front_num=1,
    **tqdm_kw,
):
    """tqdm but with parallel execution.

    Will essentially return
      res = [ function(arg) # default
              function(*arg) # if star_args is True
              for arg in args]

    Results keep the order of ``args`` whatever the number of workers.

    Note:
        the <front_num> first elements of args will not be parallelized.
        With workers == 1 everything runs in the calling thread.
    """
    while workers <= 0:
        workers += cpu_count()
    if workers == 1:
        front_num = float("inf")

    args = list(args)
    n_args_parallel = max(len(args) - front_num, 0) if front_num != float("inf") else 0
    it = iter(args)

    front = []
    bar = tqdm(total=len(args), **tqdm_kw) if workers == 1 else None
    while len(front) < front_num:
        try:
            a = next(it)
        except StopIteration:
            if bar is not None:
                bar.close()
            return front
        front.append(function(*a) if star_args else function(a))
        if bar is not None:
            bar.update(1)

    out = []
    with ThreadPool(workers) as pool:
        if star_args:
            futures = pool.imap(starcall, [(function, a) for a in it])
        else:
            futures = pool.imap(function, it)
        for f in tqdm(futures, total=n_args_parallel, **tqdm_kw):
            out.append(f)
    return front + out


def starcall(args):
    """convenient wrapper for Pool.imap"""
    function, args = args
    return function(*args)
