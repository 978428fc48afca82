"""Kernel backends for the combining recursion.

Three implementations share one interface (``combine`` / ``batch_totals``):

* ``compiled``  - Cython extension, used by default when built
* ``pure``      - NumPy fallback, same rank-K reduction
* ``reference`` - literal direct-solve path kept as a cross-check

The default is picked at import time: the compiled kernel when importable,
else pure.  Set ``UESA_BACKEND`` to force a choice.
"""

from __future__ import annotations

import os

from . import pure, reference

try:
    from . import _fastcomb as compiled
except ImportError:  # extension not built; NumPy fallback serves
    compiled = None

_BACKENDS = {"pure": pure, "reference": reference}
if compiled is not None:
    _BACKENDS["compiled"] = compiled

_env = os.environ.get("UESA_BACKEND", "").strip().lower()
if _env:
    if _env not in _BACKENDS:
        raise ImportError(
            f"UESA_BACKEND={_env!r} is not available; choices: {sorted(_BACKENDS)}"
        )
    _DEFAULT = _env
else:
    _DEFAULT = "compiled" if compiled is not None else "pure"


def available_backends() -> tuple:
    return tuple(sorted(_BACKENDS))


def default_backend_name() -> str:
    return _DEFAULT


def get_backend(name: str | None = None):
    """Resolve a backend module by name (None means the import-time default)."""
    if name is None:
        name = _DEFAULT
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(
            f"unknown backend {name!r}; available: {sorted(_BACKENDS)}"
        ) from None
