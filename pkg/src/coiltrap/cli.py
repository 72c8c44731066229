"""Command-line front end.

    coiltrap <verb> --config run.toml [--out DIR] [--format csv|json] [--threads N]

Exit status: 0 on success, 2 for configuration errors, 3 for runtime errors.
"""
import argparse
import logging
import os
import sys

from . import __version__
from .artifacts import json_text, manifest
from .config import VERBS, ConfigError, load
from .fieldcore import backend as kernel_backend
from .runner import VERB_FUNCS

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3
log = logging.getLogger("coiltrap")


def build_parser():
    p = argparse.ArgumentParser(prog="coiltrap", description="Microcoil ion-trap array design runs.")
    p.add_argument("--version", action="version", version=f"coiltrap {__version__}")
    sub = p.add_subparsers(dest="verb", required=True, metavar="verb")
    helps = {
        "field": "coil-array magnetic field over the scan",
        "force": "dipole force map (x, y, z, Fx, Fy, Fz, log10|Fx|, log10|Fz|)",
        "couple": "spin-spin couplings: tables, maps or a coupling matrix",
        "spin": "spin-model dynamics, gamma sweeps and cluster states",
        "report": "design summary: binding, adiabaticity, power, crosstalk, scaling",
        "layout": "lattice layout document, distance ratios and size thresholds",
    }
    for verb in VERBS:
        s = sub.add_parser(verb, help=helps[verb])
        s.add_argument("--config", required=True, metavar="PATH")
        s.add_argument("--out", default=".", metavar="DIR")
        s.add_argument("--format", choices=("csv", "json"), default=None)
        s.add_argument("--threads", type=int, default=None, metavar="N")
        s.add_argument("--backend", choices=("auto", "compiled", "python"), default=None)
        s.add_argument("-v", "--verbose", action="store_true")
    return p


def _provenance(exc):
    tb = exc.__traceback__
    module = "coiltrap"
    while tb is not None:
        name = tb.tb_frame.f_globals.get("__name__", "")
        if name.startswith("coiltrap"):
            module = name
        tb = tb.tb_next
    return module


def run(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        cfg = load(args.config)
        if args.format:
            cfg.doc.setdefault("run", {})["format"] = args.format
        threads = args.threads if args.threads is not None else cfg.raw("run", "threads")
        if threads < 1:
            raise ConfigError("--threads: must be at least 1")
        backend = args.backend or cfg.raw("run", "backend")
        kernel_backend.get(backend)
    except ConfigError as exc:
        print(f"coiltrap: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ImportError as exc:
        print(f"coiltrap: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    backend_name = "python" if kernel_backend.get(backend).__name__.endswith("_pykernel") else "compiled"
    try:
        outputs = VERB_FUNCS[args.verb](cfg, threads=threads, backend=backend)
    except ConfigError as exc:
        print(f"coiltrap: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # surfaced with the raising module
        print(f"coiltrap: runtime error in {_provenance(exc)}: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return EXIT_RUNTIME

    try:
        os.makedirs(args.out, exist_ok=True)
        man = manifest(args.verb, cfg, outputs, backend_name, threads)
        outputs = dict(outputs, **{"manifest.json": json_text(man)})
        for name, text in sorted(outputs.items()):
            with open(os.path.join(args.out, name), "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            log.info("wrote %s", os.path.join(args.out, name))
    except OSError as exc:
        print(f"coiltrap: runtime error writing outputs: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    if args.verb == "report":
        sys.stdout.write(outputs["report.txt"])
    return EXIT_OK


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
