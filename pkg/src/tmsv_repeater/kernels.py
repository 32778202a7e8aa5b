"""Kernel dispatch: compiled extension when available, numpy fallback otherwise.

Set ``TMSV_REPEATER_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _pykernels

_compiled: ModuleType | None
try:
    from . import _ckernels as _compiled  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover - depends on build
    _compiled = None

_BACKENDS: dict[str, ModuleType] = {"python": _pykernels}
if _compiled is not None:
    _BACKENDS["cython"] = _compiled

if os.environ.get("TMSV_REPEATER_PURE_PYTHON", "") not in ("", "0") or _compiled is None:
    BACKEND = "python"
else:
    BACKEND = "cython"

_active = _BACKENDS[BACKEND]


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def get_backend(name: str) -> ModuleType:
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown or unavailable kernel backend {name!r}") from None


def attempt_moments(p: float, M: int, tol: float, max_terms: int) -> tuple[float, float, int]:
    return _active.attempt_moments(float(p), int(M), float(tol), int(max_terms))


def bell_branches(a, b, bell):
    return _active.bell_branches(a, b, bell)
