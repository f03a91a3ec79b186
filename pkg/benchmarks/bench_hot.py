"""Throughput comparison of the compiled and pure-numpy sweep kernels.

Run after installing the package:

    python benchmarks/bench_hot.py [--n 2] [--pairs 2000]

Both backends are called on identical policy-pair batches for a binary
additive channel law; the report shows per-pair latency and agreement.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from fsmac.channels import NoiseChain, additive_modq_mac
from fsmac.hot import _ref
from fsmac.probcore import CausalKernel, channel_causal_law


def _backends():
    out = [("python", _ref.pair_directed_infos)]
    try:
        from fsmac.hot import _fast

        out.append(("compiled", _fast.pair_directed_infos))
    except ImportError:
        print("compiled backend unavailable; benchmarking the fallback only")
    return out


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--pairs", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    ch = additive_modq_mac(2, NoiseChain.iid_bernoulli(0.1))
    law = channel_causal_law(ch, s0=0, n=args.n)
    W = np.ascontiguousarray(law.tensor)
    rng = np.random.default_rng(args.seed)
    pol = []
    for _ in range(args.pairs):
        Q1 = CausalKernel.random(1, args.n, ch.in1, ch.out, rng)
        Q2 = CausalKernel.random(2, args.n, ch.in2, ch.out, rng)
        pol.append((np.ascontiguousarray(Q1.history_tensor_for_output(None, ch.out)),
                    np.ascontiguousarray(Q2.history_tensor_for_output(None, ch.out))))

    a1, a2, b = ch.in1.size, ch.in2.size, ch.out.size
    results = {}
    for name, fn in _backends():
        t0 = time.perf_counter()
        acc = np.zeros(3)
        for q1y, q2y in pol:
            acc += fn(q1y, q2y, W, args.n, a1, a2, b)
        dt = time.perf_counter() - t0
        results[name] = (dt, acc)
        print(f"{name:>9}: {dt:8.3f} s total, {dt / args.pairs * 1e6:9.1f} us/pair")

    if len(results) == 2:
        diff = np.abs(results["python"][1] - results["compiled"][1]).max()
        speedup = results["python"][0] / results["compiled"][0]
        print(f"max |sum difference| = {diff:.3g}, speedup x{speedup:.1f}")


if __name__ == "__main__":
    main()
