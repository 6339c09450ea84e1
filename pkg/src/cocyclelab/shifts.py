"""Subshifts of finite type, eventually periodic points, Markov and Gibbs measures.

Points are stored exactly as (left period, core, right period, core offset),
so metric evaluations, orbit comparisons and holonomy base points involve no
floating error in the symbolic part.  Words are tuples of small ints; string
spellings use digits then lowercase letters (alphabets up to 36).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_SYMS = "0123456789abcdefghijklmnopqrstuvwxyz"


def parse_word(word) -> tuple:
    """Normalize a word given as a string, an int sequence, or a tuple."""
    if isinstance(word, str):
        try:
            return tuple(_SYMS.index(ch) for ch in word)
        except ValueError:
            raise ValueError(f"unknown symbol in word {word!r}") from None
    return tuple(int(s) for s in word)


def spell_word(word) -> str:
    return "".join(_SYMS[s] for s in word)


def _primitive(word: tuple) -> tuple:
    """Smallest cyclic root of a word."""
    n = len(word)
    for p in range(1, n + 1):
        if n % p == 0 and word == word[:p] * (n // p):
            return word[:p]
    return word


@dataclass(frozen=True, eq=False)
class SftSpec:
    """Alphabet size, allowed-transition matrix and base contraction rate."""

    alphabet_size: int
    transitions: np.ndarray
    theta: float

    def __eq__(self, other):
        if not isinstance(other, SftSpec):
            return NotImplemented
        return (
            self.alphabet_size == other.alphabet_size
            and self.theta == other.theta
            and np.array_equal(self.transitions, other.transitions)
        )

    def __hash__(self):
        return hash((self.alphabet_size, self.theta, self.transitions.tobytes()))

    def __post_init__(self):
        m = self.alphabet_size
        T = np.asarray(self.transitions, dtype=int)
        if T.shape != (m, m) or not np.isin(T, (0, 1)).all():
            raise ValueError("transitions must be an m x m 0/1 matrix")
        if (T.sum(axis=1) == 0).any() or (T.sum(axis=0) == 0).any():
            raise ValueError("transition matrix has an empty row or column")
        if not (0.0 < self.theta < 1.0):
            raise ValueError("theta must lie in (0, 1)")
        object.__setattr__(self, "transitions", T)

    @classmethod
    def full_shift(cls, m: int, theta: float = 0.5) -> "SftSpec":
        return cls(m, np.ones((m, m), dtype=int), theta)

    @classmethod
    def golden_mean(cls, theta: float = 0.5) -> "SftSpec":
        """Two symbols, the word 11 forbidden."""
        return cls(2, np.array([[1, 1], [1, 0]]), theta)

    @property
    def is_primitive(self) -> bool:
        m = self.alphabet_size
        power = np.eye(m, dtype=bool)
        T = self.transitions.astype(bool)
        for _ in range((m - 1) ** 2 + 1):
            power = power @ T
            if power.all():
                return True
        return False

    def is_allowed(self, i: int, j: int) -> bool:
        return bool(self.transitions[i, j])

    def word_admissible(self, word, cyclic: bool = False) -> bool:
        w = parse_word(word)
        if any(not 0 <= s < self.alphabet_size for s in w):
            return False
        pairs = zip(w, w[1:])
        if cyclic and len(w) >= 1:
            pairs = zip(w, w[1:] + w[:1])
        return all(self.is_allowed(a, b) for a, b in pairs)

    def admissible_words(self, length: int) -> list:
        """All admissible words of the given length, lexicographic order."""
        if length == 0:
            return [()]
        words = [(s,) for s in range(self.alphabet_size)]
        for _ in range(length - 1):
            words = [
                w + (s,)
                for w in words
                for s in range(self.alphabet_size)
                if self.is_allowed(w[-1], s)
            ]
        return words


@dataclass(frozen=True, eq=False)
class SymbolicPoint:
    """Bi-infinite eventually periodic sequence.

    left repeats to -infinity and is aligned so left[-1] occupies index
    core_start - 1; core occupies [core_start, core_start + len(core));
    right repeats from core_start + len(core) onward.  Instances are
    canonical: periods primitive, core minimal, fully periodic points
    rotated so core_start = 0.
    """

    left: tuple
    core: tuple
    right: tuple
    core_start: int = 0

    def symbol_at(self, i: int) -> int:
        b = self.core_start
        if i < b:
            return self.left[(i - b) % len(self.left) - len(self.left)]
        if i < b + len(self.core):
            return self.core[i - b]
        return self.right[(i - b - len(self.core)) % len(self.right)]

    def word_at(self, start: int, length: int) -> tuple:
        return tuple(self.symbol_at(start + j) for j in range(length))

    def shift(self, k: int = 1) -> "SymbolicPoint":
        return make_point(self.left, self.core, self.right, self.core_start - k)

    @property
    def is_periodic(self) -> bool:
        return not self.core and self.left == self.right

    @property
    def period(self) -> int:
        if not self.is_periodic:
            raise ValueError("point is not periodic")
        return len(self.right)

    def _compare_bound(self, other: "SymbolicPoint") -> int:
        ext = max(
            abs(self.core_start) + len(self.core),
            abs(other.core_start) + len(other.core),
        )
        lcm_r = math.lcm(len(self.right), len(other.right))
        lcm_l = math.lcm(len(self.left), len(other.left))
        return ext + 2 * max(lcm_r, lcm_l) + 4

    def __eq__(self, other):
        if not isinstance(other, SymbolicPoint):
            return NotImplemented
        bound = self._compare_bound(other)
        return all(
            self.symbol_at(i) == other.symbol_at(i) for i in range(-bound, bound + 1)
        )

    __hash__ = None

    def __repr__(self):
        return (
            f"SymbolicPoint({spell_word(self.left)}^inf."
            f"{spell_word(self.core)}.{spell_word(self.right)}^inf"
            f"@{self.core_start})"
        )


def make_point(left, core, right, core_start: int = 0) -> SymbolicPoint:
    """Canonicalized eventually periodic point."""
    left = parse_word(left)
    core = parse_word(core)
    right = parse_word(right)
    if not left or not right:
        raise ValueError("periodic tails must be nonempty")
    left = _primitive(left)
    right = _primitive(right)
    # absorb core symbols that already match the periodic continuations
    while core and core[-1] == right[-1]:
        core = core[:-1]
        right = right[-1:] + right[:-1]
    while core and core[0] == left[0]:
        core = core[1:]
        left = left[1:] + left[:1]
        core_start += 1
    if not core:
        # fully periodic iff the left tail continues the right word backwards
        span = math.lcm(len(left), len(right))
        if all(
            left[(-1 - j) % len(left) - len(left)] == right[(-1 - j) % len(right)]
            for j in range(span)
        ):
            p = len(right)
            rot = tuple(right[(i - core_start) % p] for i in range(p))
            rot = _primitive(rot)
            return SymbolicPoint(rot, (), rot, 0)
    return SymbolicPoint(left, core, right, core_start)


def check_point(spec: SftSpec, x: SymbolicPoint) -> SymbolicPoint:
    """Validate that every adjacent pair of x is an allowed transition."""
    b = x.core_start
    lo = b - len(x.left) - 1
    hi = b + len(x.core) + len(x.right) + 1
    for i in range(lo, hi):
        if not spec.is_allowed(x.symbol_at(i), x.symbol_at(i + 1)):
            raise ValueError(
                f"inadmissible transition {x.symbol_at(i)}->{x.symbol_at(i + 1)} at {i}"
            )
    return x


def metric(x: SymbolicPoint, y: SymbolicPoint, spec: SftSpec) -> float:
    """theta^N where N is the largest symmetric window radius of agreement.

    Zero for equal points; one when the points already differ at index 0.
    """
    if x == y:
        return 0.0
    bound = x._compare_bound(y)
    for r in range(bound + 1):
        if x.symbol_at(r) != y.symbol_at(r) or x.symbol_at(-r) != y.symbol_at(-r):
            return spec.theta**r
    raise AssertionError("distinct points must differ within the comparison bound")


def periodic_point(spec: SftSpec, word) -> SymbolicPoint:
    w = parse_word(word)
    if not w:
        raise ValueError("empty word")
    if not spec.word_admissible(w, cyclic=True):
        raise ValueError(f"word {spell_word(w)} is not cyclically admissible")
    return check_point(spec, make_point(w, (), w, 0))


def homoclinic_point(spec: SftSpec, p_word, bridge):
    """Point equal to p-tails on both sides with bridge inserted at [0, |bridge|).

    Returns (z, exit_time) where exit_time is |bridge| rounded up to a
    multiple of |p_word|; shift(z, exit_time) lies in the local stable set
    of a point on the p-orbit.
    """
    p = parse_word(p_word)
    b = parse_word(bridge)
    if not b:
        raise ValueError("bridge must be nonempty")
    if not p:
        raise ValueError("empty periodic word")
    if len(b) % len(p) == 0 and b == p * (len(b) // len(p)):
        raise ValueError("bridge is a power of the periodic word")
    if not spec.word_admissible(p, cyclic=True):
        raise ValueError("periodic word is not cyclically admissible")
    if not spec.word_admissible(p + b + p):
        raise ValueError("bridge junction is not admissible")
    z = check_point(spec, make_point(p, b, p, 0))
    orbit = periodic_point(spec, p)
    if any(z == orbit.shift(k) for k in range(len(p))):
        raise ValueError("bridge reproduces the periodic orbit")
    exit_time = math.ceil(len(b) / len(p)) * len(p)
    return z, exit_time


# ---------------------------------------------------------------------------
# Markov and Gibbs measures
# ---------------------------------------------------------------------------

def _perron(L: np.ndarray):
    """Leading eigenvalue with positive right and left eigenvectors."""
    eig, vec = np.linalg.eig(L)
    i = int(np.argmax(eig.real))
    lam = float(eig[i].real)
    r = vec[:, i].real
    eig_l, vec_l = np.linalg.eig(L.T)
    j = int(np.argmax(eig_l.real))
    l = vec_l[:, j].real
    if np.all(r < 0):
        r = -r
    if np.all(l < 0):
        l = -l
    if lam <= 0 or np.any(r <= 0) or np.any(l <= 0):
        raise ValueError("transfer matrix is not primitive enough for Perron data")
    return lam, r, l


@dataclass(frozen=True)
class MarkovMeasure:
    """Shift-invariant Markov measure with its thermodynamic data."""

    spec: SftSpec
    P: np.ndarray                  # row-stochastic, supported on transitions
    pi: np.ndarray                 # stationary distribution
    entropy: float
    pressure: float
    potential: np.ndarray | None = field(default=None)

    def __post_init__(self):
        P = np.asarray(self.P, dtype=float)
        pi = np.asarray(self.pi, dtype=float)
        T = self.spec.transitions
        if np.any(P[T == 0] != 0.0):
            raise ValueError("stochastic matrix charges a forbidden transition")
        if not np.allclose(P.sum(axis=1), 1.0, atol=1e-10):
            raise ValueError("rows of P must sum to one")
        if not np.allclose(pi @ P, pi, atol=1e-10) or not np.isclose(pi.sum(), 1.0):
            raise ValueError("pi is not the stationary distribution of P")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "pi", pi)

    def cylinder(self, word) -> float:
        """Measure of the cylinder fixing word at coordinates [0, len(word))."""
        w = parse_word(word)
        if not w:
            return 1.0
        out = self.pi[w[0]]
        for a, b in zip(w, w[1:]):
            out *= self.P[a, b]
        return float(out)

    def sample_orbit(self, length: int, seed: int) -> np.ndarray:
        """Deterministic stationary sample path of the chain."""
        rng = np.random.default_rng(seed)
        u = rng.random(length)
        cum = np.cumsum(self.P, axis=1)
        cum[:, -1] = 1.0
        cum_rows = [tuple(row) for row in cum]
        out = np.empty(length, dtype=np.int64)
        s = int(np.searchsorted(np.cumsum(self.pi), u[0], side="right"))
        s = min(s, self.spec.alphabet_size - 1)
        out[0] = s
        for t in range(1, length):
            row = cum_rows[s]
            ut = u[t]
            ns = 0
            while row[ns] <= ut:
                ns += 1
            s = ns
            out[t] = s
        return out


def parry_measure(spec: SftSpec) -> MarkovMeasure:
    """Measure of maximal entropy from the Perron data of the transition matrix."""
    if not spec.is_primitive:
        raise ValueError("transition matrix must be primitive")
    T = spec.transitions.astype(float)
    lam, r, l = _perron(T)
    P = T * r[None, :] / (lam * r[:, None])
    pi = l * r
    pi /= pi.sum()
    h = float(np.log(lam))
    return MarkovMeasure(spec=spec, P=P, pi=pi, entropy=h, pressure=h)


def gibbs_locally_constant(spec: SftSpec, phi) -> MarkovMeasure:
    """Equilibrium state of a two-coordinate potential phi(x) = phi(x_0, x_1).

    phi may be an m x m array or a dict keyed by (i, j) or two-symbol words.
    The tilted transfer matrix L_ij = T_ij exp(phi_ij) yields the pressure
    log(lam) and a Markov measure through its Perron eigendata.
    """
    if not spec.is_primitive:
        raise ValueError("transition matrix must be primitive")
    m = spec.alphabet_size
    if isinstance(phi, dict):
        mat = np.zeros((m, m))
        for key, val in phi.items():
            i, j = parse_word(key) if isinstance(key, str) else key
            mat[i, j] = float(val)
        phi = mat
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (m, m):
        raise ValueError("potential must assign a value to each transition")
    T = spec.transitions.astype(float)
    L = T * np.exp(phi)
    lam, r, l = _perron(L)
    P = L * r[None, :] / (lam * r[:, None])
    pi = l * r
    pi /= pi.sum()
    pressure = float(np.log(lam))
    mean_phi = float(np.sum(pi[:, None] * P * phi))
    return MarkovMeasure(
        spec=spec, P=P, pi=pi, entropy=pressure - mean_phi, pressure=pressure,
        potential=phi,
    )


def gibbs_bound_constant(mu: MarkovMeasure, max_len: int = 12) -> float:
    """Empirical constant C with C^-1 <= mu[w] / exp(-|w| P + S_phi) <= C.

    Scans all admissible words up to max_len.  For phi = 0 this inspects the
    Parry measure against exp(-|w| h_top).
    """
    phi = mu.potential if mu.potential is not None else np.zeros_like(mu.P)
    worst = 1.0
    for n in range(1, max_len + 1):
        for w in mu.spec.admissible_words(n):
            m_w = mu.cylinder(w)
            s_phi = sum(phi[a, b] for a, b in zip(w, w[1:]))
            ref = math.exp(-n * mu.pressure + s_phi)
            ratio = m_w / ref
            worst = max(worst, ratio, 1.0 / ratio)
    return worst
