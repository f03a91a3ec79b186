"""Acceptance criteria.

Each test evaluates one numbered criterion end-to-end with pinned tolerances
and prints a single CRITERION line (visible with `pytest -s` or on failure).
"""
import numpy as np
import pytest

from fsmac import hot
from fsmac.channels import (
    FeedbackFn,
    NoiseChain,
    additive_modq_mac,
    erasure_p2p,
    gilbert_elliott_mac,
    mux_p2p_compose,
)
from fsmac.dirinfo import (
    binary_entropy,
    causal_policy_grid,
    ge_sumrate_identity_check,
)
from fsmac.probcore import CausalKernel, channel_causal_law
from fsmac.regions import (
    PolicyGrid,
    RateRegion,
    hausdorff_distance,
    limit_region_estimate,
    region_union,
)
from fsmac.simulate import SimConfig, run_ensemble
from fsmac.verify import run_suite


def _report(num: int, ok: bool, detail: str) -> None:
    print(f"CRITERION {num}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


def test_criterion_1_sum_rate_identity():
    """Additive-MAC sum-rate identity on Markov-noise channels, n = 1..4."""
    params = [(0.25, 0.35, 0.08, 0.42), (0.1, 0.2, 0.05, 0.4),
              (0.5, 0.5, 0.0, 0.5), (0.3, 0.7, 0.2, 0.2),
              (0.05, 0.9, 0.01, 0.49)]
    worst = 0.0
    for p in params:
        ch = gilbert_elliott_mac(*p)
        for n in range(1, 5):
            worst = max(worst, ge_sumrate_identity_check(ch, n))
    _report(1, worst <= 1e-9, f"max residual {worst:.3g} (tol 1e-9), "
            f"{len(params)} channels, n=1..4")


def test_criterion_2_additive_region():
    """Additive binary MAC: sum capacity 1 - h(p), and perfect feedback does
    not enlarge it on a depth-2 causal policy grid."""
    worst_corner = 0.0
    worst_excess = -np.inf
    for p in (0.0, 0.1, 0.3):
        ch = additive_modq_mac(2, NoiseChain.iid_bernoulli(p))
        cap = 1.0 - binary_entropy(p)
        grid = PolicyGrid("iid", 64)
        for variant in ("inner", "outer"):
            r = region_union(ch, 1, grid, variant=variant)
            worst_corner = max(worst_corner, abs(r.max_sum_rate() - cap))
        # perfect-feedback sweep at n = 2
        n = 2
        W = np.ascontiguousarray(channel_causal_law(ch, s0=0, n=n).tensor)
        best = 0.0
        pol2 = [np.ascontiguousarray(Q.history_tensor_for_output(None, ch.out))
                for Q in causal_policy_grid(2, n, ch.in2, ch.out, 8)]
        for Q1 in causal_policy_grid(1, n, ch.in1, ch.out, 8):
            q1y = np.ascontiguousarray(Q1.history_tensor_for_output(None, ch.out))
            for q2y in pol2:
                best = max(best, hot.pair_sum_info(q1y, q2y, W, n, 2, 2, 2))
        worst_excess = max(worst_excess, best / n - cap)
    ok = worst_corner <= 1e-3 and worst_excess <= 1e-3
    _report(2, ok, f"corner error {worst_corner:.3g} (tol 1e-3), "
            f"feedback excess {worst_excess:.3g} (tol 1e-3)")


def test_criterion_3_zero_capacity():
    """Zero-capacity dichotomy on 20 useless + 20 random channels, n = 2."""
    rep = run_suite("zero", seed=0, count=20)
    _report(3, rep["ok"], f"{rep['count']} useless + {rep['count']} random "
            f"channels, failures: {rep['failures'] or 'none'}")


def test_criterion_4_erasure_mux():
    """XOR multiplexer into a binary erasure channel: sum capacity 1 - pe."""
    worst = 0.0
    for pe in (0.0, 0.25, 0.5):
        ch = mux_p2p_compose(np.array([[0, 1], [1, 0]]),
                             erasure_p2p(2, np.array([[1 - pe, pe],
                                                      [1 - pe, pe]])))
        r = region_union(ch, 1, PolicyGrid("iid", 64), variant="outer",
                         s0_mode="given:0")
        worst = max(worst, abs(r.max_sum_rate() - (1.0 - pe)))
    _report(4, worst <= 1e-3, f"max corner error {worst:.3g} (tol 1e-3), "
            "pe in {0, 0.25, 0.5}")


def test_criterion_5_lemma_suite():
    """Decomposition/equivalence identities on 100 random instances."""
    rep = run_suite("lemmas", seed=0, count=100)
    _report(5, rep["ok"], f"{rep['count']} instances, slack 1e-10, "
            f"failures: {rep['failures'] or 'none'}")


def test_criterion_6_exponent_suite():
    """Exponent properties (E(0)=0, slope, monotone, F sup-additive) on 25
    random instances."""
    rep = run_suite("exponents", seed=0, count=25)
    _report(6, rep["ok"], f"{rep['count']} instances, "
            f"failures: {rep['failures'] or 'none'}")


def _sim(channel, n, K, M1, M2, trials, seed, attach_bounds=True):
    Q1 = CausalKernel.uniform(1, n, channel.in1, channel.out)
    Q2 = CausalKernel.uniform(2, n, channel.in2, channel.out)
    f1 = FeedbackFn.perfect(1, channel.out)
    f2 = FeedbackFn.perfect(2, channel.out)
    cfg = SimConfig(channel, Q1, Q2, f1, f2, n=n, K=K, M1=M1, M2=M2,
                    trials=trials, seed=seed, attach_bounds=attach_bounds)
    return run_ensemble(cfg)


def test_criterion_7_ensemble_vs_bound():
    """Monte Carlo error rates stay below the exact ensemble bounds, and the
    total error rate does not grow along a fixed-rate block-length ladder."""
    ch = additive_modq_mac(2, NoiseChain.iid_bernoulli(0.1))
    r = _sim(ch, n=1, K=6, M1=2, M2=2, trials=10_000, seed=0)
    details = []
    ok = True
    for i in (1, 2, 3):
        ucl = r.rates[f"pe{i}"]["wilson95"][1]
        bound = r.bounds[f"type{i}"]["bound"]
        details.append(f"type{i} UCL {ucl:.4f} <= bound {bound:.4f}")
        ok = ok and ucl <= bound
    ladder = [(4, 4, 2, 1), (8, 8, 2, 2), (12, 12, 4, 2)]
    pes = []
    for N, K, M1, M2 in ladder:
        rr = _sim(ch, n=1, K=K, M1=M1, M2=M2, trials=4000, seed=0,
                  attach_bounds=False)
        pes.append(rr.rates["pe"]["estimate"])
    trend_ok = all(b <= a for a, b in zip(pes, pes[1:]))
    ok = ok and trend_ok
    _report(7, ok, "; ".join(details)
            + f"; ladder pe {['%.4f' % v for v in pes]} non-increasing: {trend_ok}")


def test_criterion_8_geometry():
    """Geometry suite on 50 random polygons plus convergence of a synthetic
    sup-additive region family to its limit."""
    rep = run_suite("geometry", seed=0, count=50)
    theta = np.linspace(0.0, np.pi / 2, 33)
    regions = {}
    for n in range(1, 41):
        rad = 1.0 - 1.0 / n
        pts = np.stack([rad * np.cos(theta), rad * np.sin(theta)], axis=1)
        regions[n] = RateRegion(pts)
    nested = all(all(regions[n + 1].contains(v, tol=1e-9)
                     for v in regions[n].vertices) for n in range(1, 40))
    est = limit_region_estimate([regions[n] for n in range(1, 41)])
    gaps_ok = all(hausdorff_distance(regions[n], est.region) < 1.0 / n
                  for n in range(1, 41))
    ok = rep["ok"] and nested and gaps_ok
    _report(8, ok, f"suite failures: {rep['failures'] or 'none'}; "
            f"family nested: {nested}; gap < 1/n for n<=40: {gaps_ok}")


def test_criterion_9_bound_gap_shrinks():
    """Inner/outer region gap strictly decreases in the block length for a
    two-state Markov-noise channel."""
    ch = gilbert_elliott_mac(0.2, 0.2, 0.05, 0.1)
    grid = PolicyGrid("iid", 16)
    gaps = []
    for n in (1, 2, 3):
        inner = region_union(ch, n, grid, variant="inner")
        outer = region_union(ch, n, grid, variant="outer", s0_mode="worst")
        gaps.append(hausdorff_distance(inner, outer))
    ok = gaps[0] > gaps[1] > gaps[2]
    _report(9, ok, "Hausdorff gaps n=1..3: "
            + ", ".join(f"{g:.4f}" for g in gaps) + " strictly decreasing")
