"""Hot byte-level kernels: AES-CBC chaining and byte histograms.

Two interchangeable backends exist. ``SCMCI_KERNELS=numpy`` forces the
pure-numpy path; ``SCMCI_KERNELS=numba`` (the default when numba imports)
uses the compiled loops. Both produce identical bytes.
"""

from __future__ import annotations

import os

from . import _numpy
from ._tables import expand_key

_requested = os.environ.get("SCMCI_KERNELS", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"SCMCI_KERNELS must be 'numba' or 'numpy', got {_requested!r}")

_jit = None
if _requested == "numba":
    try:
        from . import _numba as _jit
    except ImportError:  # numba not installed
        _jit = None

_impl = _jit if _jit is not None else _numpy
BACKEND = "numba" if _jit is not None else "numpy"

cbc_encrypt = _impl.cbc_encrypt
cbc_decrypt = _impl.cbc_decrypt
byte_histogram = _impl.byte_histogram


def warmup() -> None:
    """Compile the numba kernels ahead of the first timed call. No-op for numpy."""
    if _jit is not None:
        _jit.warmup()


def backends() -> dict:
    """All importable backends by name, for benchmarks and equivalence tests."""
    out = {"numpy": _numpy}
    try:
        from . import _numba as nb
    except ImportError:
        return out
    out["numba"] = nb
    return out


__all__ = ["BACKEND", "backends", "byte_histogram", "cbc_decrypt", "cbc_encrypt", "expand_key", "warmup"]
