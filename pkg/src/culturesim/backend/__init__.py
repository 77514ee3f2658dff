"""Numeric backend selection for the dense network kernels.

The kernels exist twice with identical signatures and semantics: a compiled
Cython extension (``_kernel``) and a pure-NumPy fallback
(``_numpy_backend``). The compiled one is preferred when importable. Set
``CULTURESIM_BACKEND=numpy`` to force the fallback, or ``=cython`` to fail
loudly when the extension is missing.
"""

from __future__ import annotations

import os

from culturesim.backend import _numpy_backend

_choice = os.environ.get("CULTURESIM_BACKEND", "auto").strip().lower()

if _choice in ("", "auto"):
    try:
        from culturesim.backend import _kernel as ops

        BACKEND_NAME = "cython"
    except ImportError:
        ops = _numpy_backend
        BACKEND_NAME = "numpy"
elif _choice == "numpy":
    ops = _numpy_backend
    BACKEND_NAME = "numpy"
elif _choice == "cython":
    from culturesim.backend import _kernel as ops

    BACKEND_NAME = "cython"
else:
    raise ValueError(
        f"unknown CULTURESIM_BACKEND={_choice!r}; expected auto, cython or numpy"
    )


def available_backends() -> list[str]:
    """Importable backend names, preferred first."""
    names = ["numpy"]
    try:
        from culturesim.backend import _kernel  # noqa: F401

        names.insert(0, "cython")
    except ImportError:
        pass
    return names
