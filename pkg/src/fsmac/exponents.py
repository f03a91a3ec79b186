"""Random-coding error exponents for the three error types of a two-user
feedback ensemble: E curves per initial state, state-penalized F functions,
achievability certificates, and the analytic properties they must satisfy.

All values are in bits; powers of sequence probabilities are evaluated in the
log domain so long blocks do not underflow.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .channels import FsMac
from .dirinfo import directed_info, directed_info_cc
from .errors import SpecError
from .probcore import (
    Alphabet,
    CausalChannelLaw,
    CausalKernel,
    channel_causal_law,
    joint_law,
)

_LN2 = np.log(2.0)


def _policy_log(Q, law: CausalChannelLaw, f) -> np.ndarray:
    """log Q indexed by full-output-sequence codes, shape (A^n, B^n)."""
    if isinstance(Q, CausalKernel):
        q = Q.history_tensor_for_output(f, law.out)
    else:
        q = np.asarray(Q, dtype=float)
    n, B = law.n, law.out.size
    hist = np.arange(B**n) // B if n > 1 else np.zeros(B, dtype=np.intp)
    with np.errstate(divide="ignore"):
        return np.log(q[:, hist])


def gallager_E(i: int, rho: float, Q1, Q2, law: CausalChannelLaw,
               f1=None, f2=None) -> float:
    """Ensemble exponent of error type i at parameter rho, in bits.

    Type 1 treats user 1's message as the one in error (inner sum over x1),
    type 2 is the mirror image, type 3 sums over both users inside.
    """
    if i not in (1, 2, 3):
        raise SpecError(f"error type must be 1, 2, or 3, got {i}")
    if not 0.0 <= rho <= 1.0:
        raise SpecError(f"rho={rho} outside [0, 1]")
    if rho == 0.0:
        return 0.0  # the sum collapses to the total probability mass
    return -_log_sum(i, rho, Q1, Q2, law, f1, f2) / (law.n * _LN2)


def _log_sum(i: int, rho: float, Q1, Q2, law: CausalChannelLaw, f1, f2) -> float:
    """log of the type-i triple sum (natural log)."""
    lq1 = _policy_log(Q1, law, f1)  # (A1^n, B^n)
    lq2 = _policy_log(Q2, law, f2)
    with np.errstate(divide="ignore"):
        logW = np.log(law.tensor)  # (A1^n, A2^n, B^n)
    if i == 1:
        inner = logsumexp(lq1[:, None, :] + logW / (1.0 + rho), axis=0)
        return float(logsumexp(lq2 + (1.0 + rho) * inner))
    if i == 2:
        inner = logsumexp(lq2[None, :, :] + logW / (1.0 + rho), axis=1)
        return float(logsumexp(lq1 + (1.0 + rho) * inner))
    inner = logsumexp(lq1[:, None, :] + lq2[None, :, :] + logW / (1.0 + rho),
                      axis=(0, 1))
    return float(logsumexp((1.0 + rho) * inner))


def gallager_E_per_state(i, rho, Q1, Q2, channel: FsMac, N: int,
                         f1=None, f2=None) -> list[float]:
    return [gallager_E(i, rho, Q1, Q2, channel_causal_law(channel, s0=s, n=N),
                       f1, f2)
            for s in range(channel.states.size)]


def gallager_F(i, rho, Q1, Q2, channel: FsMac, N: int, f1=None, f2=None) -> float:
    """Worst-initial-state exponent minus the state-cardinality penalty."""
    penalty = rho * np.log2(channel.states.size) / N
    return min(gallager_E_per_state(i, rho, Q1, Q2, channel, N, f1, f2)) - penalty


def error_bound(i: int, N: int, R_i: float, rho: float, F_value: float,
                n_states: int = 1) -> float:
    """Ensemble error-probability bound |S| 2^{-N(F - rho R)} for type i."""
    if not 0.0 <= rho <= 1.0:
        raise SpecError(f"rho={rho} outside [0, 1]")
    return float(n_states * 2.0 ** (-N * (-rho * R_i + F_value)))


DEFAULT_RHO_GRID = tuple(np.round(np.arange(0.0, 1.0001, 0.05), 10))


# ---------------------------------------------------------------------------
# Sampled curves
# ---------------------------------------------------------------------------
@dataclass
class ExponentEval:
    """E and F sampled on a rho grid for one error type.

    E has shape (len(rho_grid), |S|); F has shape (len(rho_grid),).
    """

    error_type: int
    rho_grid: list[float]
    E: np.ndarray
    F: np.ndarray
    N: int
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.E = np.asarray(self.E, dtype=float)
        self.F = np.asarray(self.F, dtype=float)
        if self.E.shape[0] != len(self.rho_grid) or self.F.shape != (len(self.rho_grid),):
            raise SpecError("curve shapes inconsistent with the rho grid")
        if not (np.isfinite(self.E).all() and np.isfinite(self.F).all()):
            raise SpecError("exponent curves must be finite")
        k0 = [k for k, r in enumerate(self.rho_grid) if r == 0.0]
        for k in k0:
            if np.abs(self.E[k]).max() > 1e-12:
                raise SpecError("E at rho=0 must vanish")

    def best_rho(self, R_i: float) -> tuple[float, float]:
        """(rho*, max margin F - rho R) over the grid."""
        margins = self.F - np.asarray(self.rho_grid) * R_i
        k = int(np.argmax(margins))
        return float(self.rho_grid[k]), float(margins[k])


def exponent_curve(i: int, Q1, Q2, channel: FsMac, N: int,
                   rho_grid: Sequence[float] = DEFAULT_RHO_GRID,
                   f1=None, f2=None) -> ExponentEval:
    S = channel.states.size
    laws = [channel_causal_law(channel, s0=s, n=N) for s in range(S)]
    E = np.zeros((len(rho_grid), S))
    F = np.zeros(len(rho_grid))
    for k, rho in enumerate(rho_grid):
        E[k] = [gallager_E(i, rho, Q1, Q2, law, f1, f2) for law in laws]
        F[k] = E[k].min() - rho * np.log2(S) / N
    return ExponentEval(i, list(rho_grid), E, F, N,
                        metadata={"states": S})


def save_exponent_curve(ev: ExponentEval, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        S = ev.E.shape[1]
        writer.writerow(["rho"] + [f"E_s0_{s}" for s in range(S)] + ["F"])
        for k, rho in enumerate(ev.rho_grid):
            row = [f"{rho:.12g}"] + [f"{v:.12g}" for v in ev.E[k]]
            row.append(f"{ev.F[k]:.12g}")
            writer.writerow(row)


# ---------------------------------------------------------------------------
# Achievability by positive exponent
# ---------------------------------------------------------------------------
@dataclass
class AchievabilityVerdict:
    certified: bool
    rho_star: float | None
    margins: tuple[float, float, float] | None  # at rho_star
    rates: tuple[float, float, float]


def exponent_achievability(R1: float, R2: float, Q1n, Q2n, channel: FsMac,
                           n: int, rho_grid: Sequence[float] = DEFAULT_RHO_GRID,
                           f1=None, f2=None) -> AchievabilityVerdict:
    """Certify (R1, R2) by finding a rho with positive margins for all three
    error types at block length n (concatenation can only improve F)."""
    if R1 < 0 or R2 < 0:
        raise SpecError("rates must be >= 0")
    rates = (R1, R2, R1 + R2)
    curves = [exponent_curve(i, Q1n, Q2n, channel, n, rho_grid, f1, f2)
              for i in (1, 2, 3)]
    best = None
    for k, rho in enumerate(rho_grid):
        margins = tuple(curves[i].F[k] - rho * rates[i] for i in range(3))
        if best is None or min(margins) > min(best[1]):
            best = (rho, margins)
    rho_star, margins = best
    certified = all(m > 0 for m in margins) or (R1 == 0 and R2 == 0
                                                and all(m >= 0 for m in margins))
    return AchievabilityVerdict(certified, float(rho_star) if certified else None,
                                margins if certified else None, rates)


# ---------------------------------------------------------------------------
# Analytic properties of E
# ---------------------------------------------------------------------------
@dataclass
class ExponentPropertyReport:
    error_type: int
    s0: int
    E0: float
    slope_at_0: float
    dirinfo_per_symbol: float  # matching directed information / N, bits
    slope_gap: float  # dirinfo_per_symbol - slope_at_0
    monotone: bool
    min_increment: float
    curvature_sign: int  # sign of the measured second difference pattern
    curvatures: list[float]

    @property
    def ok(self) -> bool:
        return (abs(self.E0) <= 1e-12 and abs(self.slope_gap) <= 1e-4
                and self.monotone)


def _matching_dirinfo(i: int, Q1, Q2, law: CausalChannelLaw, f1, f2) -> float:
    joint = joint_law(Q1, Q2, law, f1, f2)
    if i == 1:
        return directed_info_cc(joint, "x1").total
    if i == 2:
        return directed_info_cc(joint, "x2").total
    return directed_info(joint, "x1x2").total


def lemma8_properties(i: int, Q1: CausalKernel, Q2: CausalKernel, channel: FsMac,
                      N: int, rho_grid: Sequence[float] = DEFAULT_RHO_GRID,
                      s0: int = 0, f1=None, f2=None,
                      fd_step: float = 1e-6) -> ExponentPropertyReport:
    """Measure the defining properties of E for one (error type, s0):
    E(0) = 0, slope at 0 equal to the matching directed information per
    symbol, monotonicity on the grid, and the sign of the curvature."""
    law = channel_causal_law(channel, s0=s0, n=N)
    E0 = gallager_E(i, 0.0, Q1, Q2, law, f1, f2)
    slope = (gallager_E(i, fd_step, Q1, Q2, law, f1, f2) - E0) / fd_step
    dirinfo = _matching_dirinfo(i, Q1, Q2, law, f1, f2) / N

    vals = np.array([gallager_E(i, r, Q1, Q2, law, f1, f2) for r in rho_grid])
    inc = np.diff(vals)
    monotone = bool((inc >= -1e-10).all())
    min_inc = float(inc.min()) if inc.size else 0.0
    curv = np.diff(vals, 2).tolist()
    if all(c > 1e-12 for c in curv):
        sign = 1
    elif all(c < -1e-12 for c in curv):
        sign = -1
    else:
        sign = 0
    return ExponentPropertyReport(i, s0, E0, float(slope), dirinfo,
                                  float(dirinfo - slope), monotone, min_inc,
                                  sign, curv)


# ---------------------------------------------------------------------------
# Concatenation and sup-additivity of F
# ---------------------------------------------------------------------------
def concatenate_kernels(Qa: CausalKernel, Qb: CausalKernel) -> CausalKernel:
    """Depth-(na+nb) policy that runs Qa, then restarts with Qb using only the
    feedback received within the second block."""
    if Qa.input_alphabet.size != Qb.input_alphabet.size:
        raise SpecError("concatenated kernels need a common input alphabet")
    if Qa.feedback_alphabet.size != Qb.feedback_alphabet.size:
        raise SpecError("concatenated kernels need a common feedback alphabet")
    Z = Qa.feedback_alphabet.size
    rows = [r.copy() for r in Qa.rows]
    for j, table in enumerate(Qb.rows):
        # step na+j+1 sees history z^{na+j}; only the last j symbols matter
        rows.append(np.tile(table, (Z**Qa.n, 1)))
    return CausalKernel(Qa.user, Qa.n + Qb.n, Qa.input_alphabet,
                        Qa.feedback_alphabet, rows)


def concatenation_power(Q: CausalKernel, K: int) -> CausalKernel:
    if K < 1:
        raise SpecError("need at least one block")
    out = Q
    for _ in range(K - 1):
        out = concatenate_kernels(out, Q)
    return out


def F_supadditivity_check(i: int, Q1n, Q2n, Q1l, Q2l, channel: FsMac,
                          rho: float, f1=None, f2=None) -> float:
    """F_{n+l} minus the block-length-weighted mean of F_n and F_l; the
    returned margin must be >= -1e-10."""
    n, l = Q1n.n, Q1l.n
    F_n = gallager_F(i, rho, Q1n, Q2n, channel, n, f1, f2)
    F_l = gallager_F(i, rho, Q1l, Q2l, channel, l, f1, f2)
    Q1c = concatenate_kernels(Q1n, Q1l)
    Q2c = concatenate_kernels(Q2n, Q2l)
    F_nl = gallager_F(i, rho, Q1c, Q2c, channel, n + l, f1, f2)
    return F_nl - (n * F_n + l * F_l) / (n + l)
