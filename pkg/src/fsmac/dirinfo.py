"""Directed information, its causally conditioned variants, zero-capacity
checks, and hidden-Markov entropy-rate brackets.

All returned rates are in bits; internal computation is in natural log.
Every directed information is computed two ways (per-step conditional mutual
information sums and the log-ratio expectation) so the two forms can be
checked against each other.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import hot
from .channels import FsMac, NoiseChain, markov_factorization_check
from .errors import SizingError, SpecError
from .probcore import (
    Alphabet,
    CausalChannelLaw,
    CausalKernel,
    JointLaw,
    causal_conditional,
    channel_causal_law,
    joint_law,
)

_LN2 = np.log(2.0)


def entropy_bits(pmf: np.ndarray) -> float:
    p = np.asarray(pmf, dtype=float).ravel()
    p = p[p > 0]
    return float(-(p * np.log(p)).sum() / _LN2)


def binary_entropy(p: float) -> float:
    return entropy_bits([p, 1.0 - p])


# ---------------------------------------------------------------------------
# Directed information on a joint law
# ---------------------------------------------------------------------------
@dataclass
class DirInfoBreakdown:
    n: int
    per_step: list[float]  # bits
    total: float  # sum of per_step
    total_expectation: float  # log-ratio expectation form

    def __float__(self) -> float:
        return self.total


def _h(marg: np.ndarray) -> float:
    p = marg[marg > 0]
    return float(-(p * np.log(p)).sum())


def _expectation_form(joint: JointLaw, num: np.ndarray, den: np.ndarray) -> float:
    """E[log num/den] under the joint, with 0 log(0/0) = 0."""
    J = joint.tensor
    mask = J > 0
    num_b = np.broadcast_to(num, J.shape)[mask]
    den_b = np.broadcast_to(den, J.shape)[mask]
    return float((J[mask] * (np.log(num_b) - np.log(den_b))).sum() / _LN2)


def directed_info(joint: JointLaw, source: str = "x1x2") -> DirInfoBreakdown:
    """I(X^n -> Y^n) for X the chosen source set ('x1', 'x2', or 'x1x2')."""
    if source not in ("x1", "x2", "x1x2"):
        raise SpecError(f"source must be x1, x2, or x1x2, got {source!r}")
    n = joint.n
    keep1 = source in ("x1", "x1x2")
    keep2 = source in ("x2", "x1x2")
    per_step = []
    for i in range(1, n + 1):
        hy_i = _h(joint.prefix_marginal(0, 0, i))
        hy_p = _h(joint.prefix_marginal(0, 0, i - 1))
        i1 = i if keep1 else 0
        i2 = i if keep2 else 0
        hxy = _h(joint.prefix_marginal(i1, i2, i))
        hxy_p = _h(joint.prefix_marginal(i1, i2, i - 1))
        per_step.append(((hy_i - hy_p) - (hxy - hxy_p)) / _LN2)
    given = tuple(v for v, k in (("x1", keep1), ("x2", keep2)) if k)
    pyx = causal_conditional(joint, "y", given).tensor
    if source == "x1":
        pyx = pyx[:, None, :]
    elif source == "x2":
        pyx = pyx[None, :, :]
    py = joint.y_marginal()
    total_exp = _expectation_form(joint, pyx, py[None, None, :])
    return DirInfoBreakdown(n, per_step, float(sum(per_step)), total_exp)


def directed_info_cc(joint: JointLaw, source: str) -> DirInfoBreakdown:
    """I(X_source^n -> Y^n || X_other^n), the causally conditioned variant."""
    if source not in ("x1", "x2"):
        raise SpecError("source must be x1 or x2")
    other = "x2" if source == "x1" else "x1"
    n = joint.n
    per_step = []
    for i in range(1, n + 1):
        io1 = i if other == "x1" else 0
        io2 = i if other == "x2" else 0
        h_other = _h(joint.prefix_marginal(io1, io2, i))
        h_other_p = _h(joint.prefix_marginal(io1, io2, i - 1))
        h_both = _h(joint.prefix_marginal(i, i, i))
        h_both_p = _h(joint.prefix_marginal(i, i, i - 1))
        per_step.append(((h_other - h_other_p) - (h_both - h_both_p)) / _LN2)
    p_full = causal_conditional(joint, "y", ("x1", "x2")).tensor
    p_other = causal_conditional(joint, "y", (other,)).tensor
    p_other = p_other[:, None, :] if other == "x1" else p_other[None, :, :]
    total_exp = _expectation_form(joint, p_full, p_other)
    return DirInfoBreakdown(n, per_step, float(sum(per_step)), total_exp)


def mutual_info(joint: JointLaw, a, b, given=()) -> float:
    """Classical I(A; B | C) in bits over full-length sequence variables."""
    a, b, given = set(a), set(b), set(given)
    if a & b or a & given or b & given:
        raise SpecError("variable sets must be disjoint")

    def h_of(vars_: set) -> float:
        lens = tuple(joint.n if v in vars_ else 0 for v in ("x1", "x2", "y"))
        return _h(joint.prefix_marginal(*lens))

    return (h_of(a | given) + h_of(b | given) - h_of(a | b | given) - h_of(given)) / _LN2


# ---------------------------------------------------------------------------
# Per-initial-state directed information
# ---------------------------------------------------------------------------
@dataclass
class PerStateDirInfo:
    source: str
    per_state: list[float]  # bits, indexed by s0
    weights: np.ndarray  # stationary (or declared) weights over s0
    conditioned: float  # I(... | S_0) = weighted average of per_state
    averaged: float  # directed info of the state-averaged law

    @property
    def min(self) -> float:
        return min(self.per_state)

    @property
    def max(self) -> float:
        return max(self.per_state)


def _one_directed(joint: JointLaw, source: str) -> float:
    if source == "x1x2":
        return directed_info(joint, "x1x2").total
    return directed_info_cc(joint, source).total


def directed_info_given_state(
    Q1: CausalKernel, Q2: CausalKernel, channel: FsMac, source: str = "x1x2",
    f1=None, f2=None, n: int | None = None, weights: np.ndarray | None = None,
) -> PerStateDirInfo:
    """Per-s0 directed information (single-user sources are causally
    conditioned on the other user, as in the region bounds)."""
    n = n or Q1.n
    S = channel.states.size
    if weights is None:
        if S == 1:
            weights = np.ones(1)
        else:
            try:
                weights = channel.stationary_state_distribution()
            except SpecError:
                weights = np.full(S, 1.0 / S)
    per_state = []
    for s0 in range(S):
        law = channel_causal_law(channel, s0=s0, n=n)
        per_state.append(_one_directed(joint_law(Q1, Q2, law, f1, f2), source))
    avg_law = CausalChannelLaw(channel, n, np.asarray(weights, float), "averaged")
    averaged = _one_directed(joint_law(Q1, Q2, avg_law, f1, f2), source)
    conditioned = float(np.dot(weights, per_state))
    return PerStateDirInfo(source, per_state, np.asarray(weights, float),
                           conditioned, averaged)


# ---------------------------------------------------------------------------
# The causal-conditioning functional
# ---------------------------------------------------------------------------
def functional_I(Q1, Q2, law: CausalChannelLaw, f1=None, f2=None) -> float:
    """Directed-information functional of two feedback policies and a channel
    law, evaluated directly from its defining sum (in bits).

    Q1/Q2 may be CausalKernel instances or arrays of shape (A^n, B^(n-1))
    already indexed by output-history codes.
    """
    n = law.n
    B = law.out.size
    q1 = Q1.history_tensor_for_output(f1, law.out) if isinstance(Q1, CausalKernel) else np.asarray(Q1, float)
    q2 = Q2.history_tensor_for_output(f2, law.out) if isinstance(Q2, CausalKernel) else np.asarray(Q2, float)
    hist = np.arange(B**n) // B if n > 1 else np.zeros(B, dtype=np.intp)
    q1y = q1[:, hist]  # (A1^n, B^n)
    q2y = q2[:, hist]
    W = law.tensor
    joint = q1y[:, None, :] * q2y[None, :, :] * W
    denom = np.einsum("ay,aby->by", q1y, W)  # sum over x1' of Q1 P
    mask = joint > 0
    num = np.broadcast_to(W, joint.shape)[mask]
    den = np.broadcast_to(denom[None, :, :], joint.shape)[mask]
    return float((joint[mask] * (np.log(num) - np.log(den))).sum() / _LN2)


# ---------------------------------------------------------------------------
# Zero-capacity region check
# ---------------------------------------------------------------------------
@dataclass
class ZeroRegionVerdict:
    uniform_value: float  # bits, uniform iid inputs
    is_zero: bool
    law_deviation: float | None  # max |P(y^n||x) - P(y^n)| when zero
    grid_max: float  # bits, max over the feedback-policy grid
    policies_tested: int
    equivalence_ok: bool


def pmf_grid(size: int, resolution: int) -> np.ndarray:
    """All pmfs over `size` symbols with entries that are multiples of 1/resolution."""
    out = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            out.append(prefix + [remaining])
            return
        for k in range(remaining + 1):
            rec(prefix + [k], remaining - k, slots - 1)

    rec([], resolution, size)
    return np.asarray(out, dtype=float) / resolution


def causal_policy_grid(user: int, n: int, input_alphabet: Alphabet,
                       feedback_alphabet: Alphabet, resolution: int):
    """All causal kernels whose every history row comes from the pmf grid."""
    rows_per_step = [feedback_alphabet.size**i for i in range(n)]
    grid = pmf_grid(input_alphabet.size, resolution)
    total_rows = sum(rows_per_step)
    for combo in product(range(len(grid)), repeat=total_rows):
        rows = []
        k = 0
        for cnt in rows_per_step:
            rows.append(grid[list(combo[k:k + cnt])])
            k += cnt
        yield CausalKernel(user, n, input_alphabet, feedback_alphabet, rows)


def zero_region_check(channel: FsMac, n: int, grid_resolution: int = 8,
                      tol: float = 1e-12, s0: int = 0,
                      max_pairs: int = 2_000_000) -> ZeroRegionVerdict:
    """Evaluate the zero-capacity dichotomy at depth n.

    Uniform iid inputs probe the no-feedback side; when that value is zero the
    channel law must be input-independent and a grid of perfect-feedback
    policies must also stay at zero.
    """
    law = channel_causal_law(channel, s0=s0, n=n)
    U1 = CausalKernel.uniform(1, n, channel.in1, channel.out)
    U2 = CausalKernel.uniform(2, n, channel.in2, channel.out)
    uniform_value = directed_info(joint_law(U1, U2, law), "x1x2").total
    is_zero = uniform_value <= tol

    law_dev = None
    if is_zero:
        py = law.tensor.sum(axis=(0, 1)) / (channel.in1.size * channel.in2.size) ** n
        law_dev = float(np.abs(law.tensor - py[None, None, :]).max())

    count_single = len(pmf_grid(channel.in1.size, grid_resolution)) ** sum(
        channel.out.size**i for i in range(n))
    count2 = len(pmf_grid(channel.in2.size, grid_resolution)) ** sum(
        channel.out.size**i for i in range(n))
    if is_zero:
        if count_single * count2 > max_pairs:
            raise SizingError(
                f"feedback policy grid has {count_single * count2} pairs, "
                f"budget {max_pairs}")
        grid_max = 0.0
        tested = 0
        W = np.ascontiguousarray(law.tensor)
        a1, a2, b = channel.in1.size, channel.in2.size, channel.out.size
        policies2 = [np.ascontiguousarray(Q.history_tensor_for_output(None, channel.out))
                     for Q in causal_policy_grid(2, n, channel.in2, channel.out,
                                                 grid_resolution)]
        for Q1 in causal_policy_grid(1, n, channel.in1, channel.out, grid_resolution):
            q1y = np.ascontiguousarray(Q1.history_tensor_for_output(None, channel.out))
            for q2y in policies2:
                isum = hot.pair_sum_info(q1y, q2y, W, n, a1, a2, b)
                grid_max = max(grid_max, isum)
                tested += 1
    else:
        # the uniform iid policy lies on every even-resolution grid, so the
        # grid max is at least the uniform value; no sweep needed to decide
        grid_max = uniform_value
        tested = 1

    equivalence_ok = (is_zero and grid_max <= 1e-9) or (not is_zero and grid_max > 1e-9)
    return ZeroRegionVerdict(uniform_value, is_zero, law_dev, grid_max, tested,
                             equivalence_ok)


# ---------------------------------------------------------------------------
# Hidden-Markov entropy-rate brackets
# ---------------------------------------------------------------------------
def entropy_rate_bounds(noise: NoiseChain, n: int) -> tuple[float, float]:
    """Bracket the noise entropy rate at horizon n (bits/symbol).

    upper = H(V_n | V^{n-1}) with a stationary start, non-increasing in n;
    lower = H(V_n | V^{n-1}, S_0), non-decreasing in n; the two pinch the
    entropy rate and collapse to the marginal entropy for iid noise.
    """
    if n < 1:
        raise SpecError("horizon must be >= 1")
    pi = noise.stationary()
    upper = entropy_bits(noise.sequence_pmf(n, pi))
    if n > 1:
        upper -= entropy_bits(noise.sequence_pmf(n - 1, pi))
    S = noise.transition.shape[0]
    lower = 0.0
    for s0 in range(S):
        e = np.zeros(S)
        e[s0] = 1.0
        h_n = entropy_bits(noise.sequence_pmf(n, e))
        h_prev = entropy_bits(noise.sequence_pmf(n - 1, e)) if n > 1 else 0.0
        lower += pi[s0] * (h_n - h_prev)
    return lower, upper


# ---------------------------------------------------------------------------
# Additive-MAC sum-rate identity
# ---------------------------------------------------------------------------
def _noise_chain_of_additive(channel: FsMac) -> NoiseChain:
    q = channel.in1.size
    if channel.in2.size != q or channel.out.size != q:
        raise SpecError("not an additive MAC: alphabets differ")
    ok, violation = markov_factorization_check(channel)
    if not ok:
        raise SpecError(f"state chain input-dependent ({violation:.2g}); not additive")
    pv = channel.output_marginal()[0, 0]  # (S, y) with x1=x2=0 -> v = y
    # verify the additive structure on all inputs
    full = channel.output_marginal()
    for x1 in range(q):
        for x2 in range(q):
            shifted = np.stack([pv[:, (y - x1 - x2) % q] for y in range(q)], axis=1)
            if np.abs(full[x1, x2] - shifted).max() > 1e-10:
                raise SpecError("channel is not additive mod q")
    return NoiseChain(channel.state_marginal()[0, 0], pv, q)


def ge_sumrate_identity_check(channel: FsMac, n: int) -> float:
    """|I((X1,X2)^n -> Y^n) - (n log q - H(V^n))| for an additive MAC with
    uniform iid inputs and stationary initial state."""
    noise = _noise_chain_of_additive(channel)
    q = channel.in1.size
    law = channel_causal_law(channel, n=n, average_over_stationary=True)
    U1 = CausalKernel.uniform(1, n, channel.in1, channel.out)
    U2 = CausalKernel.uniform(2, n, channel.in2, channel.out)
    info = directed_info(joint_law(U1, U2, law), "x1x2").total
    h_vn = entropy_bits(noise.sequence_pmf(n))
    return abs(info - (n * np.log2(q) - h_vn))
