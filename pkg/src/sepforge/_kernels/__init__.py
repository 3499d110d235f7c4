"""Backend selection for the GRU recurrence kernels.

The compiled Cython kernels are preferred when the extension was built;
otherwise the pure-numpy fallback is used. Set FORGE_BACKEND=python or
FORGE_BACKEND=compiled to force one (forcing an unavailable compiled
backend raises ImportError). The active choice is exposed as
ACTIVE_BACKEND. Both backends implement the same contract and agree to
floating-point rounding, not bit-exactly.
"""

import os

_VALID = ("auto", "compiled", "python")
_mode = os.environ.get("FORGE_BACKEND", "auto").strip().lower() or "auto"
if _mode not in _VALID:
    raise ImportError(f"FORGE_BACKEND must be one of {_VALID}, got {_mode!r}")

if _mode == "python":
    from .pygru import gru_backward_seq, gru_forward_seq
    ACTIVE_BACKEND = "python"
else:
    try:
        from ._gru_cy import gru_backward_seq, gru_forward_seq
        ACTIVE_BACKEND = "compiled"
    except ImportError:
        if _mode == "compiled":
            raise
        from .pygru import gru_backward_seq, gru_forward_seq
        ACTIVE_BACKEND = "python"


def load_backend(name: str):
    """Import one backend module by name ('python' or 'compiled')."""
    if name == "python":
        from . import pygru
        return pygru
    if name == "compiled":
        from . import _gru_cy
        return _gru_cy
    raise ValueError(f"unknown backend {name!r}")


def available_backends() -> list[str]:
    names = ["python"]
    try:
        from . import _gru_cy  # noqa: F401
        names.insert(0, "compiled")
    except ImportError:
        pass
    return names
