"""Kernel backend selection.

The compiled extension is used when it imports; otherwise, or when the
``RPRETURN_PURE_PYTHON`` environment variable is set to a non-empty value,
the numpy fallback is used. ``load("compiled")`` / ``load("python")`` give
explicit access for tests and benchmarks.
"""

import importlib
import os

from . import _pykernels


def load(name):
    if name == "python":
        return _pykernels
    if name == "compiled":
        return importlib.import_module("rpreturn._kernels")
    raise ValueError(f"unknown backend {name!r}")


def available():
    names = ["python"]
    try:
        load("compiled")
    except ImportError:
        pass
    else:
        names.insert(0, "compiled")
    return names


if os.environ.get("RPRETURN_PURE_PYTHON"):
    kernels = _pykernels
else:
    try:
        kernels = load("compiled")
    except ImportError:
        kernels = _pykernels

BACKEND = "python" if kernels is _pykernels else "compiled"
