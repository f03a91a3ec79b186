"""Finite-state MAC constructors, diagnostics, and spec-file I/O."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import gcd
from typing import Sequence

import numpy as np

from .errors import SpecError, check_cells
from .probcore import Alphabet, PMF_TOL, clean_pmf


# ---------------------------------------------------------------------------
# Core channel types
# ---------------------------------------------------------------------------
class FsMac:
    """Two-sender finite-state channel kernel P(y, s' | x1, x2, s).

    kernel axes: (x1, x2, s_prev, y, s_next).  A point-to-point channel is the
    special case in2.size == 1.
    """

    def __init__(self, states: Alphabet, in1: Alphabet, in2: Alphabet, out: Alphabet,
                 kernel: np.ndarray, initial_dist=None, builder: dict | None = None):
        kernel = np.asarray(kernel, dtype=float)
        shape = (in1.size, in2.size, states.size, out.size, states.size)
        if kernel.shape != shape:
            raise SpecError(f"kernel shape {kernel.shape}, expected {shape}")
        sums = kernel.sum(axis=(3, 4))
        if np.any(np.abs(sums - 1.0) > PMF_TOL) or np.any(kernel < -PMF_TOL):
            raise SpecError("channel kernel rows must be pmfs over (y, s')")
        self.states = states
        self.in1 = in1
        self.in2 = in2
        self.out = out
        self.kernel = np.clip(kernel, 0.0, None)
        self.initial_dist = None if initial_dist is None else clean_pmf(np.asarray(initial_dist))
        self.builder = builder

    def state_marginal(self) -> np.ndarray:
        """P(s' | x1, x2, s) with the output summed out; axes (x1, x2, s, s')."""
        return self.kernel.sum(axis=3)

    def output_marginal(self) -> np.ndarray:
        """P(y | x1, x2, s); axes (x1, x2, s, y)."""
        return self.kernel.sum(axis=4)

    def stationary_state_distribution(self) -> np.ndarray:
        ok, violation = markov_factorization_check(self, tol=1e-9)
        if not ok:
            raise SpecError(
                f"state chain is input-dependent (violation {violation:.3g}); "
                "no input-free stationary distribution"
            )
        chain = self.state_marginal()[0, 0]
        return stationary_distribution(chain)


@dataclass(frozen=True)
class FeedbackFn:
    """Deterministic time-invariant per-symbol feedback z = map[y]."""

    user: int
    map: tuple[int, ...]

    @classmethod
    def perfect(cls, user: int, out: Alphabet) -> "FeedbackFn":
        return cls(user, tuple(range(out.size)))

    @classmethod
    def null(cls, user: int, out: Alphabet) -> "FeedbackFn":
        return cls(user, (0,) * out.size)

    @classmethod
    def quantized(cls, user: int, out: Alphabet, levels: int) -> "FeedbackFn":
        table = tuple(min(y * levels // out.size, levels - 1) for y in range(out.size))
        return cls(user, table)

    @property
    def range_size(self) -> int:
        return max(self.map) + 1


@dataclass
class NoiseChain:
    """Hidden-Markov additive-noise process: v_i emitted from s_{i-1}."""

    transition: np.ndarray  # (S, S)
    emission: np.ndarray  # (S, q)
    arity: int

    def __post_init__(self):
        self.transition = np.asarray(self.transition, dtype=float)
        self.emission = np.asarray(self.emission, dtype=float)
        S = self.transition.shape[0]
        if self.transition.shape != (S, S):
            raise SpecError("noise transition matrix must be square")
        if self.emission.shape != (S, self.arity):
            raise SpecError("noise emission shape inconsistent with arity")
        for m, name in ((self.transition, "transition"), (self.emission, "emission")):
            if np.any(np.abs(m.sum(axis=1) - 1.0) > PMF_TOL) or np.any(m < -PMF_TOL):
                raise SpecError(f"noise {name} rows must be pmfs")

    @classmethod
    def iid(cls, pmf) -> "NoiseChain":
        pmf = np.asarray(pmf, dtype=float)
        return cls(np.ones((1, 1)), pmf.reshape(1, -1), pmf.size)

    @classmethod
    def iid_bernoulli(cls, p: float) -> "NoiseChain":
        return cls.iid([1.0 - p, p])

    def stationary(self) -> np.ndarray:
        if self.transition.shape[0] == 1:
            return np.ones(1)
        return stationary_distribution(self.transition)

    def sequence_pmf(self, n: int, initial: np.ndarray | None = None) -> np.ndarray:
        """Exact pmf of v^n (length q^n) by forward recursion."""
        q, S = self.arity, self.transition.shape[0]
        check_cells(q**n * S, "noise sequence pmf")
        p0 = self.stationary() if initial is None else np.asarray(initial, dtype=float)
        F = p0.reshape(1, S)
        for _ in range(n):
            # F[v^i, s_i] -> F[v^{i+1}, s_{i+1}]
            F = np.einsum("ps,sv,st->pvt", F, self.emission, self.transition)
            F = F.reshape(-1, S)
        return F.sum(axis=1)


@dataclass
class LimitedIsiSpec:
    """Markov exogenous state plus an order-m input window on both users."""

    m: int
    z_chain: np.ndarray  # (Z, Z)
    out_kernel: np.ndarray  # (Z, A1^(m+1), A2^(m+1), B)
    in1: Alphabet
    in2: Alphabet
    out: Alphabet
    init1: np.ndarray | None = None  # pmf over A1^m initial windows
    init2: np.ndarray | None = None

    def __post_init__(self):
        self.z_chain = np.asarray(self.z_chain, dtype=float)
        self.out_kernel = np.asarray(self.out_kernel, dtype=float)
        Z = self.z_chain.shape[0]
        want = (Z, self.in1.size ** (self.m + 1), self.in2.size ** (self.m + 1), self.out.size)
        if self.out_kernel.shape != want:
            raise SpecError(f"output kernel shape {self.out_kernel.shape}, expected {want}")
        if np.any(np.abs(self.z_chain.sum(axis=1) - 1.0) > PMF_TOL):
            raise SpecError("z-chain rows must be pmfs")
        if np.any(np.abs(self.out_kernel.sum(axis=3) - 1.0) > PMF_TOL):
            raise SpecError("output kernel rows must be pmfs")


# ---------------------------------------------------------------------------
# Stationary distributions
# ---------------------------------------------------------------------------
def _is_irreducible_aperiodic(P: np.ndarray) -> tuple[bool, bool]:
    S = P.shape[0]
    adj = (P > 0).astype(np.int64)
    reach = ((np.eye(S, dtype=np.int64) + adj) > 0).astype(np.int64)
    for _ in range(S):
        reach = ((reach + reach @ reach) > 0).astype(np.int64)
    irreducible = bool(reach.all())
    # period = gcd of return-time lengths via powers of the adjacency matrix
    period = 0
    power = np.eye(S, dtype=np.int64)
    for k in range(1, 2 * S + 1):
        power = ((power @ adj) > 0).astype(np.int64)
        if power.diagonal().any():
            period = gcd(period, k)
    aperiodic = period == 1
    return irreducible, aperiodic


def stationary_distribution(chain: np.ndarray) -> np.ndarray:
    """Unique pmf with pi P = pi for an irreducible aperiodic chain."""
    P = np.asarray(chain, dtype=float)
    S = P.shape[0]
    if P.shape != (S, S) or np.any(np.abs(P.sum(axis=1) - 1.0) > PMF_TOL):
        raise SpecError("chain must be a square stochastic matrix")
    if S == 1:
        return np.ones(1)
    irreducible, aperiodic = _is_irreducible_aperiodic(P)
    if not irreducible:
        raise SpecError("chain is not irreducible")
    if not aperiodic:
        raise SpecError("chain is periodic")
    A = np.vstack([P.T - np.eye(S), np.ones(S)])
    b = np.zeros(S + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(A, b, rcond=None)
    pi = np.clip(pi, 0.0, None)
    pi = pi / pi.sum()
    if np.abs(pi @ P - pi).max() > 1e-12:
        raise SpecError("stationary solve did not converge")
    return pi


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------
def additive_modq_mac(q: int, noise: NoiseChain) -> FsMac:
    """y = x1 + x2 + v (mod q) with hidden-Markov noise as the channel state."""
    if q < 2:
        raise SpecError("q must be >= 2")
    if noise.arity != q:
        raise SpecError(f"noise arity {noise.arity} != q={q}")
    S = noise.transition.shape[0]
    kernel = np.zeros((q, q, S, q, S))
    for x1 in range(q):
        for x2 in range(q):
            for s in range(S):
                for v in range(q):
                    y = (x1 + x2 + v) % q
                    kernel[x1, x2, s, y, :] += noise.emission[s, v] * noise.transition[s]
    ch = FsMac(Alphabet(S), Alphabet(q), Alphabet(q), Alphabet(q), kernel,
               builder={"kind": "additive_modq", "q": q,
                        "transition": noise.transition.tolist(),
                        "emission": noise.emission.tolist()})
    ch.noise_chain = noise
    return ch


def gilbert_elliott_mac(alpha: float, beta: float, p_good: float, p_bad: float) -> FsMac:
    """Two-state additive binary MAC; state flips G->B w.p. alpha, B->G w.p. beta."""
    for name, v in (("alpha", alpha), ("beta", beta), ("p_good", p_good), ("p_bad", p_bad)):
        if not 0.0 <= v <= 1.0:
            raise SpecError(f"{name}={v} outside [0, 1]")
    noise = NoiseChain(
        transition=np.array([[1 - alpha, alpha], [beta, 1 - beta]]),
        emission=np.array([[1 - p_good, p_good], [1 - p_bad, p_bad]]),
        arity=2,
    )
    ch = additive_modq_mac(2, noise)
    ch.builder = {"kind": "gilbert_elliott", "alpha": alpha, "beta": beta,
                  "p_good": p_good, "p_bad": p_bad}
    return ch


def check_multiplexer(mux: np.ndarray, alphabet_size: int) -> tuple[bool, tuple | None]:
    """Each user must be able to force y = own input by fixing the other's."""
    mux = np.asarray(mux, dtype=int)
    q = alphabet_size
    ok1 = any(all(mux[x1, x2] == x1 for x1 in range(q)) for x2 in range(q))
    ok2 = any(all(mux[x1, x2] == x2 for x2 in range(q)) for x1 in range(q))
    if not ok1:
        return False, (1, "no fixing of x2 makes y = x1")
    if not ok2:
        return False, (2, "no fixing of x1 makes y = x2")
    return True, None


def mux_p2p_compose(mux: np.ndarray, p2p: FsMac) -> FsMac:
    """Feed mux(x1, x2) into a single-user finite-state channel."""
    mux = np.asarray(mux, dtype=int)
    if p2p.in2.size != 1:
        raise SpecError("p2p must be a single-user channel (in2 size 1)")
    q = p2p.in1.size
    if mux.shape != (q, q) or mux.min() < 0 or mux.max() >= q:
        raise SpecError("mux must map a common alphabet onto itself")
    ok, witness = check_multiplexer(mux, q)
    if not ok:
        raise SpecError(f"not a multiplexer: user {witness[0]}: {witness[1]}")
    kernel = p2p.kernel[mux, 0]  # (A1, A2, S, B, S')
    ch = FsMac(p2p.states, Alphabet(q), Alphabet(q), p2p.out, kernel,
               initial_dist=p2p.initial_dist,
               builder={"kind": "mux_p2p", "mux": mux.tolist(),
                        "p2p": channel_to_dict(p2p)})
    return ch


def erasure_p2p(q: int, z_chain: np.ndarray) -> FsMac:
    """Single-user erasure channel; output alphabet is q symbols plus erasure.

    State 0 passes the input through, state 1 erases.  The state used at time
    i is the post-transition state, so an iid z-chain gives iid erasures.
    """
    z_chain = np.asarray(z_chain, dtype=float)
    if z_chain.shape != (2, 2):
        raise SpecError("erasure z-chain must be 2x2")
    kernel = np.zeros((q, 1, 2, q + 1, 2))
    for x in range(q):
        for s in range(2):
            for s_next in range(2):
                y = x if s_next == 0 else q
                kernel[x, 0, s, y, s_next] += z_chain[s, s_next]
    return FsMac(Alphabet(2), Alphabet(q), Alphabet(1), Alphabet(q + 1), kernel,
                 builder={"kind": "erasure", "q": q, "z_chain": z_chain.tolist()})


def limited_isi_to_fsmac(spec: LimitedIsiSpec) -> FsMac:
    """Composite-state construction: state = (z, input windows of order m)."""
    m = spec.m
    A1, A2, B = spec.in1.size, spec.in2.size, spec.out.size
    Z = spec.z_chain.shape[0]
    W1, W2 = A1**m, A2**m
    S = Z * W1 * W2
    check_cells(A1 * A2 * S * B * S, "limited-ISI composite kernel")
    kernel = np.zeros((A1, A2, S, B, S))
    for z in range(Z):
        for w1 in range(W1):
            for w2 in range(W2):
                s = (z * W1 + w1) * W2 + w2
                for x1 in range(A1):
                    for x2 in range(A2):
                        win1 = w1 * A1 + x1  # window codes for x_{i-m..i}
                        win2 = w2 * A2 + x2
                        w1_next = win1 % W1  # drop the oldest symbol
                        w2_next = win2 % W2
                        py = spec.out_kernel[z, win1, win2]  # depends on z_{i-1}
                        for z_next in range(Z):
                            s_next = (z_next * W1 + w1_next) * W2 + w2_next
                            kernel[x1, x2, s, :, s_next] += py * spec.z_chain[z, z_next]
    pi_z = stationary_distribution(spec.z_chain) if Z > 1 else np.ones(1)
    init1 = np.full(W1, 1.0 / W1) if spec.init1 is None else np.asarray(spec.init1, float)
    init2 = np.full(W2, 1.0 / W2) if spec.init2 is None else np.asarray(spec.init2, float)
    initial = np.einsum("z,a,b->zab", pi_z, init1, init2).reshape(S)
    return FsMac(Alphabet(S), spec.in1, spec.in2, spec.out, kernel, initial_dist=initial)


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------
def markov_factorization_check(channel: FsMac, tol: float = 1e-10) -> tuple[bool, float]:
    """True iff P(y,s'|x1,x2,s) = P(s'|s) P(y|x1,x2,s) within tol."""
    T = channel.state_marginal()  # (A1, A2, S, S')
    spread = float(np.abs(T - T[0, 0]).max())
    chain = T[0, 0]
    recomposed = np.einsum("st,abso->absot", chain, channel.output_marginal())
    violation = max(spread, float(np.abs(channel.kernel - recomposed).max()))
    return violation <= tol, violation


def indecomposability_diagnostic(channel: FsMac, n: int, eps: float = 1e-2
                                 ) -> tuple[bool, float]:
    """Max spread of P(s_n | x1^n, x2^n, s0) over initial states at horizon n."""
    A1, A2, S = channel.in1.size, channel.in2.size, channel.states.size
    check_cells((A1 * A2) ** n * S * S, "indecomposability recursion")
    M = channel.state_marginal()  # (A1, A2, S, S')
    T = np.broadcast_to(np.eye(S), (1, 1, S, S)).copy()  # [x1^i, x2^i, s0, s_i]
    for _ in range(n):
        T = np.einsum("pqot,abts->paqbos", T, M)
        p1, _, p2, _, _, _ = T.shape
        T = T.reshape(p1 * A1, p2 * A2, S, S)
    spread = float(np.abs(T[:, :, :, None, :] - T[:, :, None, :, :]).max())
    return spread <= eps, spread


# ---------------------------------------------------------------------------
# Channel spec files (JSON)
# ---------------------------------------------------------------------------
def channel_to_dict(channel: FsMac) -> dict:
    d = {
        "alphabets": {"s": channel.states.size, "x1": channel.in1.size,
                      "x2": channel.in2.size, "y": channel.out.size},
        "kernel": channel.kernel.ravel().tolist(),  # row-major (x1,x2,s_prev,y,s)
    }
    if channel.initial_dist is not None:
        d["initial_dist"] = channel.initial_dist.tolist()
    if channel.builder is not None:
        d["builder"] = channel.builder
    return d


def channel_from_dict(d: dict) -> FsMac:
    builder = d.get("builder")
    if builder is not None and "kernel" not in d:
        return _build(builder, d.get("initial_dist"))
    try:
        sizes = d["alphabets"]
        S, A1, A2, B = sizes["s"], sizes["x1"], sizes["x2"], sizes["y"]
        kernel = np.asarray(d["kernel"], dtype=float).reshape(A1, A2, S, B, S)
    except (KeyError, ValueError) as exc:
        raise SpecError(f"malformed channel spec: {exc}") from exc
    return FsMac(Alphabet(S), Alphabet(A1), Alphabet(A2), Alphabet(B), kernel,
                 initial_dist=d.get("initial_dist"), builder=builder)


def _build(builder: dict, initial_dist) -> FsMac:
    kind = builder.get("kind")
    if kind == "gilbert_elliott":
        ch = gilbert_elliott_mac(builder["alpha"], builder["beta"],
                                 builder["p_good"], builder["p_bad"])
    elif kind == "additive_modq":
        noise = NoiseChain(np.asarray(builder["transition"], float),
                           np.asarray(builder["emission"], float), builder["q"])
        ch = additive_modq_mac(builder["q"], noise)
    elif kind == "mux_p2p":
        ch = mux_p2p_compose(np.asarray(builder["mux"], int),
                             channel_from_dict(builder["p2p"]))
    elif kind == "erasure":
        ch = erasure_p2p(builder["q"], np.asarray(builder["z_chain"], float))
    elif kind == "limited_isi":
        spec = LimitedIsiSpec(
            m=builder["m"],
            z_chain=np.asarray(builder["z_chain"], float),
            out_kernel=np.asarray(builder["out_kernel"], float),
            in1=Alphabet(builder["x1"]), in2=Alphabet(builder["x2"]),
            out=Alphabet(builder["y"]),
            init1=None if builder.get("init1") is None else np.asarray(builder["init1"], float),
            init2=None if builder.get("init2") is None else np.asarray(builder["init2"], float),
        )
        ch = limited_isi_to_fsmac(spec)
    else:
        raise SpecError(f"unknown builder kind {kind!r}")
    if initial_dist is not None:
        ch.initial_dist = clean_pmf(np.asarray(initial_dist, float))
    return ch


def save_channel(channel: FsMac, path) -> None:
    with open(path, "w") as fh:
        json.dump(channel_to_dict(channel), fh, indent=1)


def load_channel(path) -> FsMac:
    try:
        with open(path) as fh:
            d = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"cannot read channel spec {path}: {exc}") from exc
    return channel_from_dict(d)
