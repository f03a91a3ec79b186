"""Exact finite-alphabet probability engine.

Everything is a dense tensor indexed by sequence codes.  A length-n sequence
over an alphabet of size A is identified with an integer in [0, A^n) using
most-significant-first radix order, so the first i symbols of a code q are
recovered as q // A**(n-i).  This makes prefix marginalisation a reshape-and-sum
and keeps all probability computations exact up to double rounding.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import SizingError, SpecError, check_cells

PMF_TOL = 1e-12
CLAMP_EPS = 1e-15


# ---------------------------------------------------------------------------
# Alphabets and sequence indexing
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Alphabet:
    """A finite alphabet; symbols are 0 .. size-1."""

    size: int

    def __post_init__(self):
        if self.size < 1:
            raise SpecError(f"alphabet size must be >= 1, got {self.size}")

    def __pow__(self, n: int) -> int:
        return self.size**n


@dataclass(frozen=True)
class SeqIndex:
    """Integer code of a fixed-length symbol tuple, MSB-first radix order."""

    alphabet: Alphabet
    length: int
    code: int

    def __post_init__(self):
        if self.length < 0:
            raise SpecError("sequence length must be >= 0")
        if not 0 <= self.code < self.alphabet**self.length:
            raise SpecError(
                f"code {self.code} out of range for length {self.length} "
                f"over alphabet of size {self.alphabet.size}"
            )

    def symbols(self) -> tuple[int, ...]:
        return seq_decode(self)


def seq_encode(symbols: Sequence[int], alphabet: Alphabet) -> SeqIndex:
    code = 0
    for s in symbols:
        if not 0 <= int(s) < alphabet.size:
            raise SpecError(f"symbol {s} out of range for alphabet size {alphabet.size}")
        code = code * alphabet.size + int(s)
    return SeqIndex(alphabet, len(symbols), code)


def seq_decode(index: SeqIndex) -> tuple[int, ...]:
    out = []
    code = index.code
    for _ in range(index.length):
        out.append(code % index.alphabet.size)
        code //= index.alphabet.size
    return tuple(reversed(out))


def code_to_symbols(code: int, size: int, length: int) -> tuple[int, ...]:
    return seq_decode(SeqIndex(Alphabet(size), length, code))


# ---------------------------------------------------------------------------
# pmf hygiene
# ---------------------------------------------------------------------------
def clean_pmf(row: np.ndarray, *, where: str = "pmf") -> np.ndarray:
    """Validate a pmf row; clamp entries below 1e-15 to 0 and renormalise."""
    row = np.asarray(row, dtype=float)
    if np.any(row < -PMF_TOL):
        raise SpecError(f"{where}: negative probability {row.min()}")
    total = row.sum()
    if abs(total - 1.0) > PMF_TOL:
        raise SpecError(f"{where}: row sums to {total}, expected 1")
    row = np.where(row < CLAMP_EPS, 0.0, row)
    return row / row.sum()


def _as_feedback_map(fn, out_size: int) -> np.ndarray:
    """Accept a FeedbackFn, an int array, or None (identity feedback)."""
    if fn is None:
        return np.arange(out_size, dtype=np.intp)
    table = getattr(fn, "map", fn)
    table = np.asarray(table, dtype=np.intp)
    if table.shape != (out_size,):
        raise SpecError(
            f"feedback map must cover the output alphabet (size {out_size}), "
            f"got shape {table.shape}"
        )
    return table


# ---------------------------------------------------------------------------
# Causal input policies (code-tree distributions)
# ---------------------------------------------------------------------------
class CausalKernel:
    """Input policy Q(x^n || z^{n-1}): per time step i a pmf row for every
    feedback history z^{i-1}.

    rows[i] has shape (Z**i, A): row for step i+1, indexed by the code of the
    feedback history.  Rows are required for every history, including ones the
    channel may never produce (code trees are complete).
    """

    def __init__(
        self,
        user: int,
        n: int,
        input_alphabet: Alphabet,
        feedback_alphabet: Alphabet,
        rows: Sequence[np.ndarray],
    ):
        if user not in (1, 2):
            raise SpecError(f"user must be 1 or 2, got {user}")
        if n < 1:
            raise SpecError("kernel depth must be >= 1")
        if len(rows) != n:
            raise SpecError(f"expected {n} row tables, got {len(rows)}")
        self.user = user
        self.n = n
        self.input_alphabet = input_alphabet
        self.feedback_alphabet = feedback_alphabet
        A, Z = input_alphabet.size, feedback_alphabet.size
        self.rows: list[np.ndarray] = []
        for i, table in enumerate(rows):
            table = np.asarray(table, dtype=float)
            if table.shape != (Z**i, A):
                raise SpecError(
                    f"step {i + 1}: row table shape {table.shape}, expected {(Z**i, A)}"
                )
            cleaned = np.stack(
                [clean_pmf(table[h], where=f"Q step {i + 1} history {h}") for h in range(Z**i)]
            )
            self.rows.append(cleaned)

    # -- constructors ------------------------------------------------------
    @classmethod
    def iid(cls, user, n, pmf, feedback_alphabet: Alphabet) -> "CausalKernel":
        """Same marginal pmf at every step, ignoring feedback."""
        pmf = np.asarray(pmf, dtype=float)
        A = pmf.size
        Z = feedback_alphabet.size
        rows = [np.tile(pmf, (Z**i, 1)) for i in range(n)]
        return cls(user, n, Alphabet(A), feedback_alphabet, rows)

    @classmethod
    def uniform(cls, user, n, input_alphabet: Alphabet, feedback_alphabet: Alphabet):
        pmf = np.full(input_alphabet.size, 1.0 / input_alphabet.size)
        return cls.iid(user, n, pmf, feedback_alphabet)

    @classmethod
    def null_feedback(cls, user, n, step_pmfs) -> "CausalKernel":
        """Time-varying product policy with no feedback dependence."""
        step_pmfs = [np.asarray(p, dtype=float) for p in step_pmfs]
        A = step_pmfs[0].size
        rows = [p.reshape(1, A) for p in step_pmfs]
        return cls(1, len(step_pmfs), Alphabet(A), Alphabet(1), rows)

    @classmethod
    def random(cls, user, n, input_alphabet, feedback_alphabet, rng) -> "CausalKernel":
        A, Z = input_alphabet.size, feedback_alphabet.size
        rows = [rng.dirichlet(np.ones(A), size=Z**i) for i in range(n)]
        return cls(user, n, input_alphabet, feedback_alphabet, rows)

    # -- dense views -------------------------------------------------------
    def causal_tensor(self) -> np.ndarray:
        """Q[x-code, z-history-code] = prod_i Q(x_i | z^{i-1}); shape (A^n, Z^{n-1})."""
        A, Z = self.input_alphabet.size, self.feedback_alphabet.size
        T = np.ones((1, 1))
        for i, table in enumerate(self.rows):
            # T: (A^i, Z^{i-1}) -> (A^{i+1}, Z^i); the new feedback symbol z_i
            # extends the history used from step i+1 on.
            if i == 0:
                T = table[0].reshape(A, 1) * T  # history is empty at step 1
                continue
            prev = table.reshape(Z ** (i - 1), Z, A)
            new = np.einsum("xz,zwa->xazw", T, prev)
            T = new.reshape(A ** (i + 1), Z**i)
        return T

    def history_tensor_for_output(self, feedback_fn, out_alphabet: Alphabet) -> np.ndarray:
        """Q[x-code, y-history-code] for y^{n-1} codes, via z_i = f(y_i).

        Shape (A^n, B^{n-1}) with B the channel output alphabet size.
        """
        B = out_alphabet.size
        if self.feedback_alphabet.size == 1:
            fmap = np.zeros(B, dtype=np.intp)  # feedback-blind policy
        else:
            fmap = _as_feedback_map(feedback_fn, B)
        if fmap.max(initial=0) >= self.feedback_alphabet.size:
            raise SpecError("feedback map range exceeds the kernel's feedback alphabet")
        T = self.causal_tensor()
        if self.n == 1:
            return T  # (A, 1); no history
        Z = self.feedback_alphabet.size
        ycodes = np.arange(B ** (self.n - 1))
        zcodes = np.zeros_like(ycodes)
        rest = ycodes.copy()
        for pos in range(self.n - 1):
            digit = rest // B ** (self.n - 2 - pos)
            rest = rest % B ** (self.n - 2 - pos)
            zcodes = zcodes * Z + fmap[digit]
        return T[:, zcodes]


# ---------------------------------------------------------------------------
# Causal channel law P(y^n || x1^n, x2^n, s0)
# ---------------------------------------------------------------------------
class CausalChannelLaw:
    """Causally factorised channel law with the state marginalised out.

    The dense tensor has shape (A1^n, A2^n, B^n) and is materialised lazily
    (it is subject to the sizing bound); sequence probabilities are always
    available through the stepwise state recursion, which is what the ML
    decoder uses at block lengths where the tensor would not fit.
    """

    def __init__(self, channel, n: int, initial_dist: np.ndarray, label: str):
        if n < 1:
            raise SpecError("law depth must be >= 1")
        self.channel = channel
        self.n = n
        self.in1 = channel.in1
        self.in2 = channel.in2
        self.out = channel.out
        self.initial_dist = clean_pmf(initial_dist, where="initial state distribution")
        self.label = label
        self._tensor: np.ndarray | None = None

    # -- exact dense law ---------------------------------------------------
    @property
    def tensor(self) -> np.ndarray:
        if self._tensor is None:
            self._tensor = self._materialize()
        return self._tensor

    def _materialize(self) -> np.ndarray:
        A1, A2, B = self.in1.size, self.in2.size, self.out.size
        S = self.channel.states.size
        check_cells((A1 * A2 * B) ** self.n, "causal channel law")
        K = self.channel.kernel  # (A1, A2, S, B, S')
        M = self.initial_dist.reshape(1, 1, 1, S)
        for _ in range(self.n):
            # M[x1^i, x2^i, y^i, s_i] -> extend one step
            M = np.einsum("pqrs,absct->paqbrct", M, K)
            p1, _, p2, _, py, _, _ = M.shape
            M = M.reshape(p1 * A1, p2 * A2, py * B, S)
        return M.sum(axis=3)

    # -- stepwise evaluation ----------------------------------------------
    def seq_prob(self, x1: Sequence[int], x2: Sequence[int], y: Sequence[int]) -> float:
        """P(y^n || x1^n, x2^n) by forward state recursion (no dense tensor)."""
        if not (len(x1) == len(x2) == len(y) == self.n):
            raise SpecError("sequence lengths must equal the law depth")
        K = self.channel.kernel
        alpha = self.initial_dist.copy()
        prob = 1.0
        for a, b, c in zip(x1, x2, y):
            step = alpha @ K[a, b, :, c, :]  # joint P(y_i, s_i | past)
            p = step.sum()
            if p <= 0.0:
                return 0.0
            prob *= p
            alpha = step / p
        return prob

    def seq_logprob(self, x1, x2, y) -> float:
        p = self.seq_prob(x1, x2, y)
        return float(np.log(p)) if p > 0 else -np.inf

    def for_state(self, s0: int) -> "CausalChannelLaw":
        S = self.channel.states.size
        e = np.zeros(S)
        e[s0] = 1.0
        return CausalChannelLaw(self.channel, self.n, e, f"s0={s0}")

    def validate(self) -> float:
        """Max deviation of any P(.|x1^n,x2^n) row from total mass 1."""
        sums = self.tensor.sum(axis=2)
        return float(np.abs(sums - 1.0).max())


def channel_causal_law(
    channel, s0: int | None = None, n: int = 1, average_over_stationary: bool = False
) -> CausalChannelLaw:
    """Causal law of a finite-state MAC at depth n for a fixed or averaged s0."""
    S = channel.states.size
    if average_over_stationary:
        pi = channel.stationary_state_distribution()
        return CausalChannelLaw(channel, n, pi, "stationary")
    if s0 is None:
        if channel.initial_dist is not None:
            return CausalChannelLaw(channel, n, channel.initial_dist, "initial")
        raise SpecError("s0 required (or set average_over_stationary)")
    if not 0 <= s0 < S:
        raise SpecError(f"s0={s0} out of range for {S} states")
    e = np.zeros(S)
    e[s0] = 1.0
    return CausalChannelLaw(channel, n, e, f"s0={s0}")


def memoryless_law_from_tensor(tensor: np.ndarray, n: int) -> CausalChannelLaw:
    """Wrap an explicit per-sequence law P(y^n || x1^n, x2^n) (|S| = 1 view).

    Used by tests that start from an arbitrary causal tensor rather than a
    channel; the tensor must already satisfy the causal factorisation.
    """
    law = object.__new__(CausalChannelLaw)
    A1n, A2n, Bn = tensor.shape

    class _Stub:
        pass

    stub = _Stub()
    stub.states = Alphabet(1)
    law.channel = stub
    law.n = n
    law.in1 = Alphabet(round(A1n ** (1 / n)))
    law.in2 = Alphabet(round(A2n ** (1 / n)))
    law.out = Alphabet(round(Bn ** (1 / n)))
    law.initial_dist = np.ones(1)
    law.label = "explicit"
    law._tensor = np.asarray(tensor, dtype=float)
    return law


# ---------------------------------------------------------------------------
# Joint law over (x1^n, x2^n, y^n)
# ---------------------------------------------------------------------------
class JointLaw:
    """Exact joint pmf P(x1^n, x2^n, y^n | s0) as a dense tensor."""

    def __init__(self, tensor: np.ndarray, n: int, in1: Alphabet, in2: Alphabet, out: Alphabet,
                 provenance: dict | None = None):
        tensor = np.asarray(tensor, dtype=float)
        if tensor.shape != (in1**n, in2**n, out**n):
            raise SpecError(f"joint tensor shape {tensor.shape} inconsistent with alphabets")
        total = tensor.sum()
        if abs(total - 1.0) > 1e-10 or np.any(tensor < -PMF_TOL):
            raise SpecError(f"joint law not a pmf (mass {total})")
        self.tensor = np.clip(tensor, 0.0, None)
        self.n = n
        self.in1 = in1
        self.in2 = in2
        self.out = out
        self.provenance = provenance or {}

    def prefix_marginal(self, i1: int, i2: int, iy: int) -> np.ndarray:
        """Marginal pmf of (x1^i1, x2^i2, y^iy); shape (A1^i1, A2^i2, B^iy)."""
        return prefix_marginal(self.tensor, self.n, (self.in1.size, self.in2.size, self.out.size),
                               (i1, i2, iy))

    def y_marginal(self) -> np.ndarray:
        return self.tensor.sum(axis=(0, 1))


def prefix_marginal(tensor: np.ndarray, n: int, sizes: tuple[int, ...],
                    prefixes: tuple[int, ...]) -> np.ndarray:
    """Prefix marginal of a sequence-indexed tensor.

    tensor axes correspond to full length-n sequence codes over alphabets of
    the given sizes (possibly with leading batch axes); prefixes[k] is the
    prefix length kept along the k-th sequence axis.
    """
    nseq = len(sizes)
    batch = tensor.shape[: tensor.ndim - nseq]
    new_shape = list(batch)
    sum_axes = []
    ax = len(batch)
    for size, keep in zip(sizes, prefixes):
        if not 0 <= keep <= n:
            raise SpecError(f"prefix length {keep} outside [0, {n}]")
        new_shape.extend([size**keep, size ** (n - keep)])
        sum_axes.append(ax + 1)
        ax += 2
    reshaped = tensor.reshape(new_shape)
    return reshaped.sum(axis=tuple(sum_axes))


def joint_law(Q1: CausalKernel, Q2: CausalKernel, law: CausalChannelLaw,
              f1=None, f2=None) -> JointLaw:
    """P(x1^n, x2^n, y^n) = Q1(x1^n||z1^{n-1}) Q2(x2^n||z2^{n-1}) P(y^n||x1^n,x2^n)."""
    n = law.n
    if Q1.n != n or Q2.n != n:
        raise SpecError(f"kernel depths ({Q1.n}, {Q2.n}) disagree with law depth {n}")
    B = law.out.size
    if Q1.input_alphabet.size != law.in1.size or Q2.input_alphabet.size != law.in2.size:
        raise SpecError("kernel input alphabets disagree with the channel law")
    q1 = Q1.history_tensor_for_output(f1, law.out)  # (A1^n, B^{n-1})
    q2 = Q2.history_tensor_for_output(f2, law.out)
    hist = np.arange(B**n) // B  # y^n code -> y^{n-1} history code
    tensor = (
        q1[:, hist][:, None, :] * q2[:, hist][None, :, :] * law.tensor
    )
    return JointLaw(tensor, n, law.in1, law.in2, law.out,
                    provenance={"law": law.label})


# ---------------------------------------------------------------------------
# Causal conditional extraction
# ---------------------------------------------------------------------------
@dataclass
class CausalTable:
    """Product-form causal conditional extracted from a joint law.

    tensor multiplies the per-step conditionals; entries whose conditioning
    history has zero probability are set to 0 and flagged in `defined`.
    """

    target: str
    given: tuple[str, ...]
    delay: int
    n: int
    tensor: np.ndarray
    defined: np.ndarray
    axes: tuple[str, ...]


_SUPPORTED = {
    ("y", (), 0),
    ("y", ("x2",), 0),
    ("y", ("x1",), 0),
    ("y", ("x1", "x2"), 0),
    ("x1", ("y",), 1),
    ("x2", ("y",), 1),
    ("x1", ("y", "x2"), 1),
    ("x2", ("y", "x1"), 1),
}


def causal_conditional(joint: JointLaw, target: str, given: Iterable[str] = (),
                       delay: int = 0) -> CausalTable:
    """Extract e.g. P(y^n||x1^n,x2^n) or Q(x1^n||y^{n-1}) from a joint law.

    delay applies to the 'y' conditioning sequence (d=1 means y enters only up
    to time i-1, the code-tree convention).
    """
    given = tuple(sorted(given, key=lambda v: {"y": 0, "x1": 1, "x2": 2}[v]))
    if (target, given, delay) not in _SUPPORTED:
        raise SpecError(f"unsupported causal conditional: {target} || {given} (d={delay})")

    n = joint.n
    sizes = {"x1": joint.in1.size, "x2": joint.in2.size, "y": joint.out.size}
    vars_ = [v for v in ("x1", "x2", "y") if v == target or v in given]

    def lengths(i: int, include_target: bool) -> tuple[int, int, int]:
        out = []
        for v in ("x1", "x2", "y"):
            if v == target:
                out.append(i if include_target else i - 1)
            elif v in given:
                d = delay if v == "y" else 0
                out.append(max(i - d, 0))
            else:
                out.append(0)
        return tuple(out)

    shape = tuple(sizes[v] ** n for v in vars_)
    tensor = np.ones(shape)
    defined = np.ones(shape, dtype=bool)
    for i in range(1, n + 1):
        num = joint.prefix_marginal(*lengths(i, True))
        den = joint.prefix_marginal(*lengths(i, False))
        # align denominator with numerator (target axis loses one symbol)
        ax = vars_.index(target)
        num_v = _drop_unused(num, vars_)
        den_v = _drop_unused(den, vars_)
        den_b = np.repeat(den_v, sizes[target], axis=ax)
        ok = den_b > 0
        cond = np.zeros_like(num_v)
        np.divide(num_v, den_b, out=cond, where=ok)
        tensor = tensor * _expand_to_full(cond, vars_, sizes, n, lengths(i, True))
        defined &= _expand_to_full(ok, vars_, sizes, n, lengths(i, True)).astype(bool)
    tensor = np.where(defined, tensor, 0.0)
    return CausalTable(target, given, delay, n, tensor, defined, tuple(vars_))


def _drop_unused(marg: np.ndarray, vars_: list[str]) -> np.ndarray:
    keep = [i for i, v in enumerate(("x1", "x2", "y")) if v in vars_]
    drop = tuple(i for i in range(3) if i not in keep)
    return marg.sum(axis=drop) if drop else marg
    # unused axes have prefix length 0 (size-1 axes); sum just squeezes them


def _expand_to_full(arr: np.ndarray, vars_: list[str], sizes: dict, n: int,
                    lens3: tuple[int, int, int]) -> np.ndarray:
    """Broadcast a prefix-indexed array to full-sequence-code axes."""
    lens = [lens3[("x1", "x2", "y").index(v)] for v in vars_]
    shape = []
    for v, ln in zip(vars_, lens):
        shape.extend([sizes[v] ** max(ln, 0), 1])
    out = arr.reshape([s for s in shape[::2]])
    # interleave broadcast axes for the suffix positions
    full = out.reshape([d for pair in zip([sizes[v] ** max(ln, 0) for v, ln in zip(vars_, lens)],
                                          [1] * len(vars_)) for d in pair])
    reps = []
    for v, ln in zip(vars_, lens):
        reps.extend([1, sizes[v] ** (n - max(ln, 0))])
    tiled = np.tile(full, reps)
    return tiled.reshape([sizes[v] ** n for v in vars_])
