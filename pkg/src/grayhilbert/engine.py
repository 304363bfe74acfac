"""Kernel engine selection: compiled extension if available, numpy fallback otherwise.

Set ``GRAYHILBERT_ENGINE=python`` or ``=compiled`` to force a choice (the
latter raises if the extension is missing).
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _engine_py

_FORCE = os.environ.get("GRAYHILBERT_ENGINE", "").strip().lower()


def _load_compiled() -> ModuleType | None:
    try:
        from . import _engine_c  # type: ignore[attr-defined]
    except ImportError:
        return None
    return _engine_c


def _select() -> ModuleType:
    if _FORCE == "python":
        return _engine_py
    compiled = _load_compiled()
    if compiled is None:
        if _FORCE == "compiled":
            raise ImportError(
                "GRAYHILBERT_ENGINE=compiled but the grayhilbert._engine_c extension "
                "is not built; run `pip install -e .` or `python setup.py build_ext --inplace`"
            )
        return _engine_py
    return compiled


_ACTIVE = _select()


def active_engine() -> ModuleType:
    """Engine module used by default for new builds."""
    return _ACTIVE


def active_engine_name() -> str:
    return _ACTIVE.ENGINE


def available_engines() -> tuple[str, ...]:
    names = ["python"]
    if _load_compiled() is not None:
        names.append("compiled")
    return tuple(names)


def get_engine(name: str | None = None) -> ModuleType:
    """Engine by name ('python' or 'compiled'); default engine when None."""
    if name is None:
        return _ACTIVE
    if name == "python":
        return _engine_py
    if name == "compiled":
        compiled = _load_compiled()
        if compiled is None:
            raise ValueError("compiled engine requested but the extension is not built")
        return compiled
    raise ValueError(f"unknown engine {name!r}; expected 'python' or 'compiled'")
