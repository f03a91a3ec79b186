"""Machine-checkable verification suites for the identities and inequalities
the library is built on.  Each suite runs seeded random instances and returns
a report dict with a pass flag and the list of failures; the CLI `verify`
command and the test suite both consume these.
"""
from __future__ import annotations

from itertools import product as iproduct

import numpy as np

from . import geometry, rand
from .dirinfo import (
    directed_info,
    directed_info_cc,
    directed_info_given_state,
    entropy_bits,
    functional_I,
    mutual_info,
    zero_region_check,
)
from .exponents import (
    F_supadditivity_check,
    gallager_E,
    lemma8_properties,
)
from .probcore import CausalKernel, channel_causal_law, joint_law

SLACK = 1e-10


def _marginal_fn(joint):
    """Scalar prefix-marginal lookup m(a, b, c) = P(x1^a, x2^b, y^c)."""
    cache = {}

    def m(a, b, c, x1, x2, y):
        key = (a, b, c)
        if key not in cache:
            cache[key] = joint.prefix_marginal(a, b, c)
        s1, s2, sy = joint.in1.size, joint.in2.size, joint.out.size
        i = sum(s * s1**k for k, s in enumerate(reversed(x1[:a]))) if a else 0
        j = sum(s * s2**k for k, s in enumerate(reversed(x2[:b]))) if b else 0
        k = sum(s * sy**k_ for k_, s in enumerate(reversed(y[:c]))) if c else 0
        return float(cache[key][i, j, k])

    return m


def _sequences(size, n):
    return list(iproduct(range(size), repeat=n))


def check_lemma1(joint, tol=SLACK) -> float:
    """Max violation of the two decomposition identities over all sequences."""
    n = joint.n
    m = _marginal_fn(joint)
    worst = 0.0
    for x1 in _sequences(joint.in1.size, n):
        for x2 in _sequences(joint.in2.size, n):
            for y in _sequences(joint.out.size, n):
                # plain form: P(x1^n, y^n) = Q(x1^n||y^{n-1}) P(y^n||x1^n)
                if x2 == tuple([0] * n):
                    q = p = 1.0
                    ok = True
                    for i in range(1, n + 1):
                        den_q = m(i - 1, 0, i - 1, x1, x2, y)
                        den_p = m(i, 0, i - 1, x1, x2, y)
                        if den_q <= 0 or den_p <= 0:
                            ok = False
                            break
                        q *= m(i, 0, i - 1, x1, x2, y) / den_q
                        p *= m(i, 0, i, x1, x2, y) / den_p
                    if ok:
                        worst = max(worst, abs(m(n, 0, n, x1, x2, y) - q * p))
                # causally conditioned form, per-step product vs. split product
                lhs = rhs = 1.0
                ok = True
                for i in range(1, n + 1):
                    den = m(i - 1, i, i - 1, x1, x2, y)
                    mid = m(i, i, i - 1, x1, x2, y)
                    if den <= 0 or mid <= 0:
                        ok = False
                        break
                    lhs *= m(i, i, i, x1, x2, y) / den
                    rhs *= (mid / den) * (m(i, i, i, x1, x2, y) / mid)
                if ok:
                    worst = max(worst, abs(lhs - rhs))
    return worst


def suite_lemmas(seed: int = 0, count: int = 100) -> dict:
    rng = np.random.default_rng(seed)
    failures = []
    for t in range(count):
        n = 1 + t % 3
        ch = rand.random_markov_fsmac(rng)
        Q1, Q2 = rand.random_policy_pair(rng, n, ch)
        law = channel_causal_law(ch, s0=0, n=n)
        joint = joint_law(Q1, Q2, law)

        v = check_lemma1(joint)
        if v > SLACK:
            failures.append(f"[{t}] decomposition violation {v:.3g}")

        for src, fn in (("x1x2", directed_info), ("x1", directed_info_cc),
                        ("x2", directed_info_cc)):
            bd = fn(joint, src)
            if abs(bd.total - bd.total_expectation) > SLACK:
                failures.append(f"[{t}] {src}: form mismatch "
                                f"{abs(bd.total - bd.total_expectation):.3g}")
            if min(bd.per_step) < -1e-12:
                failures.append(f"[{t}] {src}: negative per-step term")

        # state conditioning shifts the value by at most the state entropy
        psd = directed_info_given_state(Q1, Q2, ch, "x1x2", n=n)
        hs = entropy_bits(psd.weights)
        if abs(psd.averaged - psd.conditioned) > hs + SLACK:
            failures.append(f"[{t}] state-conditioning gap exceeds H(S)")

        # the functional evaluated on policies equals the induced quantity
        fv = functional_I(Q1, Q2, law)
        dv = directed_info_cc(joint, "x1").total
        if abs(fv - dv) > SLACK:
            failures.append(f"[{t}] functional mismatch {abs(fv - dv):.3g}")

        # without feedback, mutual information is directed information
        P1, P2 = rand.random_no_feedback_pair(rng, n, ch)
        jnf = joint_law(P1, P2, law)
        mi = mutual_info(jnf, ("x1",), ("y",), ("x2",))
        di = directed_info_cc(jnf, "x1").total
        if abs(mi - di) > SLACK:
            failures.append(f"[{t}] no-feedback mismatch {abs(mi - di):.3g}")
        mi3 = mutual_info(jnf, ("x1", "x2"), ("y",))
        di3 = directed_info(jnf, "x1x2").total
        if abs(mi3 - di3) > SLACK:
            failures.append(f"[{t}] no-feedback sum mismatch {abs(mi3 - di3):.3g}")
    return {"suite": "lemmas", "count": count, "seed": seed,
            "failures": failures, "ok": not failures}


def suite_exponents(seed: int = 0, count: int = 25) -> dict:
    rng = np.random.default_rng(seed)
    failures = []
    for t in range(count):
        n = 1 + t % 2
        ch = rand.random_markov_fsmac(rng)
        Q1, Q2 = rand.random_policy_pair(rng, n, ch)
        i = 1 + t % 3
        law = channel_causal_law(ch, s0=0, n=n)
        if gallager_E(i, 0.0, Q1, Q2, law) != 0.0:
            failures.append(f"[{t}] E(0) != 0")
        rep = lemma8_properties(i, Q1, Q2, ch, n,
                                rho_grid=np.arange(0.0, 1.0001, 0.05))
        if abs(rep.E0) > 1e-12:
            failures.append(f"[{t}] E(0) = {rep.E0:.3g}")
        if abs(rep.slope_gap) > 1e-4:
            failures.append(f"[{t}] slope gap {rep.slope_gap:.3g}")
        if not rep.monotone:
            failures.append(f"[{t}] E not monotone (min step {rep.min_increment:.3g})")
        margin = F_supadditivity_check(i, Q1, Q2, Q1, Q2, ch,
                                       rho=float(rng.uniform(0.1, 1.0)))
        if margin < -SLACK:
            failures.append(f"[{t}] sup-additivity margin {margin:.3g}")
    return {"suite": "exponents", "count": count, "seed": seed,
            "failures": failures, "ok": not failures}


def suite_geometry(seed: int = 0, count: int = 50) -> dict:
    rng = np.random.default_rng(seed)
    failures = []
    for t in range(count):
        A = rand.random_polygon(rng, int(rng.integers(3, 12)))
        B = rand.random_polygon(rng, int(rng.integers(3, 12)))
        hullA = geometry.convex_hull(A)
        hullB = geometry.convex_hull(B)
        if not all(geometry.contains_point(hullA, p, tol=1e-9) for p in A):
            failures.append(f"[{t}] hull misses an input point")
        ms = geometry.minkowski_sum(hullA, hullB)
        brute = geometry.convex_hull((A[:, None, :] + B[None, :, :]).reshape(-1, 2))
        if geometry.hausdorff_distance(ms, brute) > 1e-9:
            failures.append(f"[{t}] Minkowski sum disagrees with brute force")
        if geometry.hausdorff_distance(hullA, hullA) > 1e-12:
            failures.append(f"[{t}] d(A, A) != 0")
        d_ab = geometry.hausdorff_distance(hullA, hullB)
        d_ba = geometry.hausdorff_distance(hullB, hullA)
        if abs(d_ab - d_ba) > 1e-12:
            failures.append(f"[{t}] Hausdorff asymmetric")
        C = geometry.convex_hull(rand.random_polygon(rng, 6))
        if geometry.hausdorff_distance(hullA, hullB) > (
                geometry.hausdorff_distance(hullA, C)
                + geometry.hausdorff_distance(C, hullB) + 1e-12):
            failures.append(f"[{t}] triangle inequality violated")
        c = float(rng.uniform(0.1, 3.0))
        if geometry.hausdorff_distance(geometry.scale(hullA, c),
                                       geometry.convex_hull(A * c)) > 1e-9:
            failures.append(f"[{t}] scaling disagrees")
    return {"suite": "geometry", "count": count, "seed": seed,
            "failures": failures, "ok": not failures}


def suite_zero(seed: int = 0, count: int = 20) -> dict:
    rng = np.random.default_rng(seed)
    failures = []
    for t in range(count):
        useless = rand.random_useless_fsmac(rng)
        v = zero_region_check(useless, n=2)
        if not (v.is_zero and v.equivalence_ok):
            failures.append(f"[{t}] useless channel not detected as zero")
        elif v.law_deviation is None or v.law_deviation > 1e-9:
            failures.append(f"[{t}] law deviation {v.law_deviation}")
        ch = rand.random_fsmac(rng)
        w = zero_region_check(ch, n=2)
        if not w.equivalence_ok:
            failures.append(f"[{t}] equivalence violated on a random channel")
    return {"suite": "zero", "count": count, "seed": seed,
            "failures": failures, "ok": not failures}


SUITES = {"lemmas": suite_lemmas, "exponents": suite_exponents,
          "geometry": suite_geometry, "zero": suite_zero}


def run_suite(name: str, seed: int = 0, count: int | None = None) -> dict:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    fn = SUITES[name]
    return fn(seed=seed, count=count) if count is not None else fn(seed=seed)
