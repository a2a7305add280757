"""Kernel selection: compiled extension when importable, numpy fallback otherwise.

Set ``HUBFLOW_KERNELS=python`` to force the fallback.
"""
import logging
import os

from . import _pykernels

log = logging.getLogger(__name__)

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

AT_LOWER = _pykernels.AT_LOWER
AT_UPPER = _pykernels.AT_UPPER
FREE = _pykernels.FREE
BASIC = 0
FIXED = 4

COMPILED_AVAILABLE = _ckernels is not None


def get(name=None):
    """Return the kernel module for ``name`` ("compiled", "python" or None)."""
    if name is None:
        name = os.environ.get("HUBFLOW_KERNELS", "compiled")
    if name == "python":
        return _pykernels
    if name != "compiled":
        raise ValueError(f"unknown kernel set {name!r}")
    if _ckernels is None:
        log.debug("compiled kernels unavailable, using numpy fallback")
        return _pykernels
    return _ckernels


def active_name(name=None) -> str:
    return "compiled" if get(name) is _ckernels and _ckernels is not None else "python"
