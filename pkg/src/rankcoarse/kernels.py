"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``RANKCOARSE_PURE_PYTHON`` is set to a non-empty value
other than ``0``, the numpy fallback is used. ``BACKEND`` names the choice.
"""

import importlib
import os

from . import _kernels_py


def _load():
    if os.environ.get("RANKCOARSE_PURE_PYTHON", "") not in ("", "0"):
        return _kernels_py, "python"
    try:
        from . import _ckernels
    except ImportError:
        return _kernels_py, "python"
    return _ckernels, "compiled"


_impl, BACKEND = _load()

pl_sample_orderings = _impl.pl_sample_orderings
rim_sample_orderings = _impl.rim_sample_orderings
pair_counts = _impl.pair_counts
all_pair_counts = _impl.all_pair_counts
q_accumulate = _impl.q_accumulate
fas_dp = _impl.fas_dp
btl_mm = _impl.btl_mm
ht_fixed_point = _impl.ht_fixed_point


def compiled_available() -> bool:
    try:
        importlib.import_module(f"{__package__}._ckernels")
    except ImportError:
        return False
    return True


def get_backend(name: str):
    """Return the kernel module for ``"python"`` or ``"compiled"``."""
    if name == "python":
        return _kernels_py
    if name == "compiled":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")
