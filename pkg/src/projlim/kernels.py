"""Kernel backend selection.

The compiled extension is used when it was built; otherwise the numpy
fallback is imported.  Set ``PROJLIM_PURE_PYTHON=1`` to force the fallback.
"""
import os

if os.environ.get("PROJLIM_PURE_PYTHON", "") not in ("", "0"):
    from projlim import _pykernels as _impl
else:
    try:
        from projlim import _ckernels as _impl
    except ImportError:
        from projlim import _pykernels as _impl

BACKEND = _impl.BACKEND
block_sum = _impl.block_sum
stick_aggregate = _impl.stick_aggregate
ig_two_root = _impl.ig_two_root
ks_statistic = _impl.ks_statistic

__all__ = ["BACKEND", "block_sum", "stick_aggregate", "ig_two_root", "ks_statistic"]
