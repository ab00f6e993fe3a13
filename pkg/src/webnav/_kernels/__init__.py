"""Hot numeric kernels with a compiled core and a NumPy fallback.

The Cython extension is tried first; when it is unavailable (no compiler at
install time) the NumPy reference implementation takes over with identical
semantics. ``BACKEND`` names the active implementation; ``use()`` switches
it explicitly, which the equivalence tests and the kernel benchmark rely
on, and ``WEBNAV_KERNELS=python|compiled`` forces a backend at import time.
"""

from __future__ import annotations

import os

from . import _pyref

try:
    from . import _core
except ImportError:  # extension not built; plain NumPy (slower training)
    _core = None

_FUNCTIONS = (
    "affine_tanh_fwd",
    "affine_tanh_bwd",
    "lstm_step_fwd",
    "lstm_step_bwd",
    "cbow_epoch",
)

BACKEND = os.environ.get(
    "WEBNAV_KERNELS", "compiled" if _core is not None else "python"
)


def available_backends() -> tuple[str, ...]:
    return ("python", "compiled") if _core is not None else ("python",)


def use(backend: str) -> None:
    """Select the kernel implementation ('python' or 'compiled')."""
    global BACKEND
    if backend == "python":
        impl = _pyref
    elif backend == "compiled":
        if _core is None:
            raise RuntimeError("compiled kernels are not built")
        impl = _core
    else:
        raise ValueError(f"unknown kernel backend {backend!r}")
    for name in _FUNCTIONS:
        globals()[name] = getattr(impl, name)
    BACKEND = backend


use(BACKEND)
