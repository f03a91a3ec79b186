"""Monte Carlo validation of the random code-tree ensemble: sample trees,
drive the channel with per-symbol feedback, decode by maximum likelihood, and
compare empirical error rates of the three error types against the exact
ensemble bounds.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channels import FeedbackFn, FsMac
from .errors import SpecError, max_cells
from .exponents import DEFAULT_RHO_GRID, _log_sum, concatenation_power
from .probcore import CausalChannelLaw, CausalKernel, channel_causal_law


class LazyCodeTree:
    """Complete depth-N code tree over a feedback alphabet, materialised only
    along visited histories.

    The tree is a concatenation of K independent depth-n subtrees: the input
    at time i depends only on the feedback received within the current block.
    Branches are sampled on first visit from the per-step policy rows, so the
    realised path distribution matches the concatenated causal pmf.
    """

    def __init__(self, user: int, kernel: CausalKernel, K: int, rng):
        self.user = user
        self.kernel = kernel
        self.n = kernel.n
        self.K = K
        self.N = kernel.n * K
        self.rng = rng
        self._cache: dict[tuple[int, int, int], int] = {}

    def symbol(self, i: int, z_history: Sequence[int]) -> int:
        """Input symbol at time i (0-based) given the feedback z^{i}...z_{i-1}."""
        if not 0 <= i < self.N:
            raise SpecError(f"time {i} outside the tree depth {self.N}")
        if len(z_history) != i:
            raise SpecError("feedback history length must equal the time index")
        k, j = divmod(i, self.n)
        Z = self.kernel.feedback_alphabet.size
        code = 0
        for z in z_history[k * self.n:]:  # within-block history only
            code = code * Z + int(z)
        key = (k, j, code)
        if key not in self._cache:
            pmf = self.kernel.rows[j][code]
            self._cache[key] = int(self.rng.choice(pmf.size, p=pmf))
        return self._cache[key]

    def path(self, z_seq: Sequence[int]) -> list[int]:
        """Input sequence produced against a full feedback sequence z^N
        (feedback enters with unit delay, so z_seq[i] affects time i+1 on)."""
        return [self.symbol(i, z_seq[:i]) for i in range(self.N)]


@dataclass
class CodeBook:
    user: int
    trees: list[LazyCodeTree]

    @property
    def M(self) -> int:
        return len(self.trees)

    def rate(self) -> float:
        return float(np.log2(self.M)) / self.trees[0].N


def sample_code_trees(Qn: CausalKernel, K: int, M: int, rng,
                      user: int | None = None) -> CodeBook:
    if M < 1:
        raise SpecError("codebook needs at least one message")
    user = Qn.user if user is None else user
    return CodeBook(user, [LazyCodeTree(user, Qn, K, rng) for _ in range(M)])


def transmit(channel: FsMac, s0: int, tree1: LazyCodeTree, tree2: LazyCodeTree,
             f1: FeedbackFn, f2: FeedbackFn, rng):
    """Run one block through the channel; feedback has unit delay."""
    if tree1.N != tree2.N:
        raise SpecError("tree depths disagree")
    N = tree1.N
    YS = channel.out.size * channel.states.size
    x1s, x2s, ys = [], [], []
    z1: list[int] = []
    z2: list[int] = []
    s = s0
    for i in range(N):
        a = tree1.symbol(i, z1)
        b = tree2.symbol(i, z2)
        flat = channel.kernel[a, b, s].ravel()
        draw = int(rng.choice(YS, p=flat))
        y, s = divmod(draw, channel.states.size)
        x1s.append(a)
        x2s.append(b)
        ys.append(y)
        z1.append(f1.map[y])
        z2.append(f2.map[y])
    return x1s, x2s, ys


def ml_decode(y: Sequence[int], book1: CodeBook, book2: CodeBook,
              law: CausalChannelLaw, f1: FeedbackFn, f2: FeedbackFn
              ) -> tuple[int, int]:
    """Most likely message pair under the law; ties go to the lowest pair."""
    z1 = [f1.map[v] for v in y]
    z2 = [f2.map[v] for v in y]
    paths1 = [t.path(z1) for t in book1.trees]
    paths2 = [t.path(z2) for t in book2.trees]
    best = (-np.inf, 0, 0)
    for m1, x1 in enumerate(paths1):
        for m2, x2 in enumerate(paths2):
            score = law.seq_logprob(x1, x2, y)
            if score > best[0]:
                best = (score, m1, m2)
    return best[1], best[2]


# ---------------------------------------------------------------------------
# Exact ensemble bounds
# ---------------------------------------------------------------------------
def theorem6_bound(i: int, M1: int, M2: int, rho: float, Q1, Q2,
                   law: CausalChannelLaw, f1=None, f2=None) -> float:
    """Exact ensemble bound on the type-i error probability at parameter rho.

    prefactor (M-1)^rho for the users in error, times the triple sum over
    sequences with inner exponent 1/(1+rho) and outer power 1+rho.
    """
    if i not in (1, 2, 3):
        raise SpecError(f"error type must be 1, 2, or 3, got {i}")
    if not 0.0 <= rho <= 1.0:
        raise SpecError(f"rho={rho} outside [0, 1]")
    if i == 1:
        pref = float(M1 - 1) ** rho
    elif i == 2:
        pref = float(M2 - 1) ** rho
    else:
        pref = (float(M1 - 1) * float(M2 - 1)) ** rho
    if pref == 0.0:
        return 0.0
    return float(pref * np.exp(_log_sum(i, rho, Q1, Q2, law, f1, f2)))


def best_theorem6_bounds(M1, M2, Q1N, Q2N, law, f1=None, f2=None,
                         rho_grid=DEFAULT_RHO_GRID) -> dict:
    """Per error type, minimise the exact bound over the rho grid (rho > 0)."""
    out = {}
    for i in (1, 2, 3):
        best, best_rho = np.inf, None
        for rho in rho_grid:
            if rho == 0.0:
                continue  # the bound is vacuous (value >= 1) at rho = 0
            v = theorem6_bound(i, M1, M2, rho, Q1N, Q2N, law, f1, f2)
            if v < best:
                best, best_rho = v, float(rho)
        out[i] = {"bound": float(min(best, 1.0)), "rho": best_rho}
    return out


# ---------------------------------------------------------------------------
# Ensemble runner
# ---------------------------------------------------------------------------
@dataclass
class SimConfig:
    channel: FsMac
    Q1n: CausalKernel
    Q2n: CausalKernel
    f1: FeedbackFn
    f2: FeedbackFn
    n: int
    K: int
    M1: int
    M2: int
    trials: int
    seed: int
    s0_mode: str = "given:0"  # given:ID or stationary
    attach_bounds: bool = True  # skipped anyway when the dense law is too big

    def __post_init__(self):
        if self.Q1n.n != self.n or self.Q2n.n != self.n:
            raise SpecError("policy depth must equal the block length n")
        if self.trials < 1:
            raise SpecError("need at least one trial")
        if self.M1 < 1 or self.M2 < 1:
            raise SpecError("message counts must be >= 1")

    @property
    def N(self) -> int:
        return self.n * self.K

    @property
    def rates(self) -> tuple[float, float, float]:
        r1 = float(np.log2(self.M1)) / self.N
        r2 = float(np.log2(self.M2)) / self.N
        return r1, r2, r1 + r2


@dataclass
class SimResult:
    config_echo: dict
    trials: int
    counts: dict  # correct, e1, e2, e3
    rates: dict  # empirical pe1..pe3, pe with Wilson 95% intervals
    bounds: dict | None  # best-rho exact bounds per type, when computable

    def to_json(self) -> str:
        return json.dumps({"config": self.config_echo, "trials": self.trials,
                           "counts": self.counts, "rates": self.rates,
                           "bounds": self.bounds}, indent=1)


def wilson_interval(k: int, n: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if n == 0:
        return 0.0, 1.0
    p = k / n
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(centre - half, 0.0), min(centre + half, 1.0)


def _decoder_law(config: SimConfig) -> CausalChannelLaw:
    if config.s0_mode == "stationary":
        return channel_causal_law(config.channel, n=config.N,
                                  average_over_stationary=True)
    if config.s0_mode.startswith("given:"):
        s0 = int(config.s0_mode.split(":", 1)[1])
        return channel_causal_law(config.channel, s0=s0, n=config.N)
    raise SpecError(f"unknown s0 mode {config.s0_mode!r}")


def run_ensemble(config: SimConfig) -> SimResult:
    """Fresh codebooks per trial, uniform messages, ML decoding, exact error
    typing; deterministic given the seed."""
    law = _decoder_law(config)
    ch = config.channel
    stationary = None
    if config.s0_mode == "stationary":
        stationary = ch.stationary_state_distribution()
        s0_fixed = None
    else:
        s0_fixed = int(config.s0_mode.split(":", 1)[1])

    counts = {"correct": 0, "e1": 0, "e2": 0, "e3": 0}
    for trial in range(config.trials):
        rng = np.random.default_rng([config.seed, trial])
        book1 = sample_code_trees(config.Q1n, config.K, config.M1, rng, user=1)
        book2 = sample_code_trees(config.Q2n, config.K, config.M2, rng, user=2)
        m1 = int(rng.integers(config.M1))
        m2 = int(rng.integers(config.M2))
        s0 = s0_fixed if s0_fixed is not None else int(rng.choice(stationary.size,
                                                                  p=stationary))
        _, _, y = transmit(ch, s0, book1.trees[m1], book2.trees[m2],
                           config.f1, config.f2, rng)
        h1, h2 = ml_decode(y, book1, book2, law, config.f1, config.f2)
        if h1 == m1 and h2 == m2:
            counts["correct"] += 1
        elif h1 != m1 and h2 == m2:
            counts["e1"] += 1
        elif h1 == m1 and h2 != m2:
            counts["e2"] += 1
        else:
            counts["e3"] += 1

    T = config.trials
    rates = {}
    for key, k in (("pe1", counts["e1"]), ("pe2", counts["e2"]),
                   ("pe3", counts["e3"]),
                   ("pe", counts["e1"] + counts["e2"] + counts["e3"])):
        lo, hi = wilson_interval(k, T)
        rates[key] = {"estimate": k / T, "wilson95": [lo, hi]}

    bounds = None
    A = ch.in1.size * ch.in2.size * ch.out.size
    if config.attach_bounds and A**config.N <= max_cells():
        Q1N = concatenation_power(config.Q1n, config.K)
        Q2N = concatenation_power(config.Q2n, config.K)
        bounds = best_theorem6_bounds(config.M1, config.M2, Q1N, Q2N, law,
                                      config.f1, config.f2)
        bounds = {f"type{i}": v for i, v in bounds.items()}

    echo = {"n": config.n, "K": config.K, "N": config.N, "M1": config.M1,
            "M2": config.M2, "trials": config.trials, "seed": config.seed,
            "s0_mode": config.s0_mode,
            "rates": dict(zip(("R1", "R2", "R3"), config.rates)),
            "feedback": {"f1": list(config.f1.map), "f2": list(config.f2.map)}}
    return SimResult(echo, T, counts, rates, bounds)


def save_result(result: SimResult, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(result.to_json())
