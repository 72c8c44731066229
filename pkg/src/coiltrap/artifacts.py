"""Deterministic CSV/JSON text and the run manifest."""
import csv
import hashlib
import io
import json
import math
import platform

import numpy as np

from . import __version__
from .constants import CODATA


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


def csv_text(header, rows):
    """CSV with full-precision floats (repr) and '\\n' line endings."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def json_text(obj):
    """Sorted-key JSON; non-finite floats become the strings 'inf'/'nan'."""
    return json.dumps(_plain(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def table_json(header, rows):
    return json_text({"columns": list(header), "rows": [list(r) for r in rows]})


def versions():
    import numpy
    import pint
    import scipy

    return {"coiltrap": __version__, "python": platform.python_version(),
            "numpy": numpy.__version__, "scipy": scipy.__version__, "pint": pint.__version__}


def manifest(verb, cfg, outputs, backend, threads):
    """Constants, config hash, versions and a digest of every output file."""
    return {
        "verb": verb,
        "config_sha256": cfg.sha256(),
        "config_name": cfg.raw("run", "name"),
        "constants": CODATA.as_dict(),
        "versions": versions(),
        "backend": backend,
        "threads": threads,
        "outputs": {name: hashlib.sha256(text.encode("utf-8")).hexdigest()
                    for name, text in sorted(outputs.items())},
    }
