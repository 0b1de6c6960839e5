import json
from errno import EEXIST
from os import makedirs, path


def mkdir_p(folder_path):
    # Creates a directory. equivalent to using mkdir -p on the command line
    try:
        makedirs(folder_path)
    except OSError as exc:
        if exc.errno == EEXIST and path.isdir(folder_path):
            pass
        else:
            raise


def write_run_info(out_dir, info):
    """Write ``run_info.json`` (command, scenario hash, seed, numerics)."""
    mkdir_p(out_dir)
    with open(path.join(out_dir, "run_info.json"), "w") as f:
        json.dump(info, f, indent=2, sort_keys=True)
        f.write("\n")
