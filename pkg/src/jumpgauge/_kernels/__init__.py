"""Kernel backend selection.

Two interchangeable implementations of the hot kernels exist: a
vectorized numpy module and a numba-compiled twin. Selection order:

1. an explicit ``set_backend`` call wins,
2. otherwise the ``JUMPGAUGE_BACKEND`` environment variable
   (``numba``, ``numpy``, or ``auto``),
3. ``auto`` (the default) picks numba when it imports cleanly and
   falls back to numpy.

``JUMPGAUGE_THREADS`` caps the numba thread pool. Both backends return
bitwise-identical results; the benchmark subcommand measures the
speed difference.
"""

from __future__ import annotations

import os

_modules: dict = {}
_forced: str | None = None
_active_name: str | None = None


def _load(name: str):
    if name in _modules:
        return _modules[name]
    if name == "numpy":
        from . import numpy_impl as mod
    elif name == "numba":
        from . import numba_impl as mod  # ImportError propagates
        _apply_thread_cap()
    else:
        raise ValueError(f"unknown kernel backend {name!r}")
    _modules[name] = mod
    return mod


def _apply_thread_cap() -> None:
    raw = os.environ.get("JUMPGAUGE_THREADS")
    if not raw:
        return
    try:
        want = int(raw)
    except ValueError:
        return
    try:
        import numba

        limit = numba.config.NUMBA_NUM_THREADS
        numba.set_num_threads(max(1, min(want, limit)))
    except Exception:
        pass


def has_numba() -> bool:
    try:
        _load("numba")
    except ImportError:
        return False
    return True


def set_backend(name: str) -> None:
    """Force a backend for the rest of the process ('numpy'/'numba')."""
    global _forced, _active_name
    if name not in ("numpy", "numba"):
        raise ValueError(f"unknown kernel backend {name!r}")
    _load(name)
    _forced = name
    _active_name = name


def active_name() -> str:
    """Name of the backend kernels() will return."""
    global _active_name
    if _forced is not None:
        return _forced
    if _active_name is None:
        env = os.environ.get("JUMPGAUGE_BACKEND", "auto").strip().lower()
        if env in ("numpy", "numba"):
            _load(env)  # raises if a forced backend is unavailable
            _active_name = env
        elif env in ("auto", ""):
            _active_name = "numba" if has_numba() else "numpy"
        else:
            raise ValueError(
                f"JUMPGAUGE_BACKEND={env!r} not recognized; "
                "use numba, numpy, or auto"
            )
    return _active_name


def kernels():
    """The active kernel module."""
    return _load(active_name())


def backend_module(name: str):
    """Load a specific backend regardless of the active selection."""
    return _load(name)
