import json
import os
import tempfile
from contextlib import contextmanager


def format_float(value, digits=6):
    """
    Formats a float for terminal reports, e.g. 0.0301234 -> "0.030123".
    None stays "n/a" so summaries with missing predictions still print.
    """
    if value is None:
        return "n/a"
    return f"{value:.{digits}f}"


def json_text(payload):
    """Canonical JSON: sorted keys, two-space indent, trailing newline."""
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


@contextmanager
def atomic_outputs(paths):
    """
    Yields a dict mapping each target path to a temporary sibling file.

    The temporaries are renamed onto their targets only when the block exits
    without an exception; otherwise they are removed and no target is touched.
    """
    staged = {}
    try:
        for path in paths:
            directory = os.path.dirname(os.path.abspath(path))
            os.makedirs(directory, exist_ok=True)
            fd, tmp = tempfile.mkstemp(
                prefix="." + os.path.basename(path) + ".", suffix=".tmp", dir=directory
            )
            os.close(fd)
            staged[path] = tmp
        yield staged
    except BaseException:
        for tmp in staged.values():
            if os.path.exists(tmp):
                os.remove(tmp)
        raise
    for path, tmp in staged.items():
        os.replace(tmp, path)


def write_text_atomic(path, text):
    with atomic_outputs([path]) as staged:
        with open(staged[path], "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
