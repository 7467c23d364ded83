"""Backend selection for the Q-series kernel.

The compiled extension is used when it imports; otherwise the numpy
implementation is used.  Setting ``THERMAL_JCM_PURE_PYTHON=1`` forces the
fallback.
"""
import importlib
import os

_BACKENDS = {"cython": "thermal_jcm._qseries", "python": "thermal_jcm._qseries_py"}


def load_backend(name):
    """Import and return the kernel module for ``name`` ('cython' or 'python')."""
    return importlib.import_module(_BACKENDS[name])


def _select():
    if os.environ.get("THERMAL_JCM_PURE_PYTHON", "") not in ("", "0"):
        return "python", load_backend("python")
    try:
        return "cython", load_backend("cython")
    except ImportError:
        return "python", load_backend("python")


BACKEND, _impl = _select()
q_block = _impl.q_block


def available_backends():
    names = ["python"]
    try:
        load_backend("cython")
        names.insert(0, "cython")
    except ImportError:
        pass
    return names
