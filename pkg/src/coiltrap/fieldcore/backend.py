"""Kernel selection.

The compiled kernel is used when importable; ``COILTRAP_BACKEND=python``
forces the numpy fallback. Both expose ``bfield`` and ``bfield_jacobian``
with the same signature (the compiled one also accepts ``threads``).
"""
import os

from . import _pykernel

try:
    from . import _ckernel
except ImportError:  # extension not built
    _ckernel = None

_forced = os.environ.get("COILTRAP_BACKEND", "").strip().lower()


def available():
    names = ["python"]
    if _ckernel is not None:
        names.insert(0, "compiled")
    return names


def get(name=None):
    """Return the kernel module for ``name`` ('compiled', 'python' or None = default)."""
    name = (name or _forced or "").lower()
    if name in ("", "auto"):
        return _ckernel if _ckernel is not None else _pykernel
    if name == "python":
        return _pykernel
    if name == "compiled":
        if _ckernel is None:
            raise ImportError("compiled kernel is not built; reinstall with a C compiler and Cython")
        return _ckernel
    raise ValueError(f"unknown kernel backend {name!r}")


def default_name():
    return "compiled" if get() is _ckernel and _ckernel is not None else "python"


def call_bfield(kernel, points, packed, threads=1):
    args = (points, packed.centers, packed.frames, packed.radius, packed.current)
    if kernel is _pykernel:
        return kernel.bfield(*args)
    return kernel.bfield(*args, threads=threads)


def call_bfield_jacobian(kernel, points, packed, h_min, h_rel, threads=1):
    args = (points, packed.centers, packed.frames, packed.radius, packed.current)
    if kernel is _pykernel:
        return kernel.bfield_jacobian(*args, h_min=h_min, h_rel=h_rel)
    return kernel.bfield_jacobian(*args, h_min=h_min, h_rel=h_rel, threads=threads)
