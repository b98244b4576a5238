"""Kernel backend selection.

The compiled Cython module is preferred; the numpy fallback is used when the
extension is missing or the environment variable ``CARLEMAN_LCU_PURE_PYTHON``
is set to a non-empty value other than ``0``.
"""
from __future__ import annotations

import os
from types import ModuleType

from . import _pykernels


def _load() -> tuple[ModuleType, str]:
    if os.environ.get("CARLEMAN_LCU_PURE_PYTHON", "") not in ("", "0"):
        return _pykernels, "python"
    try:
        from . import _kernels  # type: ignore[attr-defined]
    except ImportError:
        return _pykernels, "python"
    return _kernels, "compiled"


_impl, BACKEND = _load()

apply_mcx = _impl.apply_mcx
apply_swap = _impl.apply_swap
apply_1q = _impl.apply_1q
pauli_coefficients = _impl.pauli_coefficients


def backends() -> dict[str, ModuleType]:
    """All importable backends, keyed by name (used by tests and the benchmark)."""
    found = {"python": _pykernels}
    try:
        from . import _kernels  # type: ignore[attr-defined]
    except ImportError:
        pass
    else:
        found["compiled"] = _kernels
    return found
