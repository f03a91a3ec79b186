"""Backend selection for the sweep hot path.

The compiled extension is used when available; set FSMAC_BACKEND=python to
force the numpy reference (or FSMAC_BACKEND=compiled to require the
extension).  Both backends implement `pair_directed_infos` with identical
semantics; `benchmarks/bench_hot.py` compares their throughput.
"""
from __future__ import annotations

import os

from . import _ref

BACKEND = "python"
pair_directed_infos = _ref.pair_directed_infos
pair_sum_info = _ref.pair_sum_info

_pref = os.environ.get("FSMAC_BACKEND", "auto")
if _pref in ("auto", "compiled"):
    try:
        from . import _fast  # compiled extension

        BACKEND = "compiled"
        pair_directed_infos = _fast.pair_directed_infos
        pair_sum_info = _fast.pair_sum_info
    except ImportError:
        if _pref == "compiled":
            raise
