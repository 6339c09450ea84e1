"""Suspension flows over subshifts.

Roof functions, flow in normal form on the mapping torus, periods of
periodic words, exact height-polynomial integrals (induced potentials and
measure lifts), and the time-change scalar linking discrete and flow
Lyapunov spectra.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import fractional_matrix_power

from .cocycles import CocycleSpec
from .shifts import MarkovMeasure, SftSpec, SymbolicPoint, parse_word, periodic_point, spell_word

MIN_ROOF = 1e-3
MAX_POLY_DEGREE = 3
_REAL_POWER_TOL = 1e-10


@dataclass(frozen=True)
class RoofFunction:
    """Strictly positive locally constant return time, one value per
    admissible window-word."""

    base: SftSpec
    window: int
    values: dict

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be at least 1")
        vals = {parse_word(w): float(v) for w, v in self.values.items()}
        need = set(self.base.admissible_words(self.window))
        if set(vals) != need:
            raise ValueError("roof must assign a value to every admissible window-word")
        if min(vals.values()) < MIN_ROOF:
            raise ValueError(f"roof values must be at least {MIN_ROOF}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, base: SftSpec, value: float, window: int = 1) -> "RoofFunction":
        words = base.admissible_words(window)
        return cls(base, window, {w: value for w in words})

    def at(self, x: SymbolicPoint) -> float:
        return self.values[x.word_at(0, self.window)]

    def to_dict(self) -> dict:
        return {spell_word(w): v for w, v in sorted(self.values.items())}

    @classmethod
    def from_dict(cls, base: SftSpec, window: int, data: dict) -> "RoofFunction":
        return cls(base, window, dict(data))


@dataclass(frozen=True)
class SuspensionSystem:
    base: SftSpec
    roof: RoofFunction

    def __post_init__(self):
        if self.roof.base != self.base:
            raise ValueError("roof is defined over a different base shift")


def flow(sys: SuspensionSystem, x: SymbolicPoint, s: float, t: float):
    """Advance (x, s) by time t in the mapping torus, returning the normal
    form representative (point, height) with 0 <= height < roof(point).

    Heights accumulate through a compensated sum so that composing two flows
    agrees with one combined flow whenever the roof values and times are
    exactly representable.
    """
    roof = sys.roof
    r = roof.at(x)
    if not 0.0 <= s < r:
        raise ValueError("height must lie in [0, roof(x))")
    acc = 0.0
    comp = 0.0

    def add(v: float):
        nonlocal acc, comp
        tmp = acc + v
        if abs(acc) >= abs(v):
            comp += (acc - tmp) + v
        else:
            comp += (v - tmp) + acc
        acc = tmp

    add(s)
    add(t)
    budget = int(abs(s + t) / MIN_ROOF) + 2
    for _ in range(budget):
        h = acc + comp
        r = roof.at(x)
        if h >= r:
            add(-r)
            x = x.shift(1)
        elif h < 0.0:
            x = x.shift(-1)
            add(roof.at(x))
        else:
            return x, h
    raise ArithmeticError("flow failed to reach normal form within the step budget")


def period(sys: SuspensionSystem, word) -> float:
    """Total roof time over one cyclic traversal of a periodic word."""
    w = parse_word(word)
    p = periodic_point(sys.base, w)
    win = sys.roof.window
    return math.fsum(sys.roof.values[p.word_at(k, win)] for k in range(len(w)))


@dataclass(frozen=True)
class HeightPolynomial:
    """Function on the mapping torus, locally constant in the base point and
    polynomial of degree <= 3 in the height coordinate."""

    base: SftSpec
    window: int
    coeffs: dict          # word -> coefficient tuple (c0, c1, ...), low degree first

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be at least 1")
        parsed = {}
        for w, c in self.coeffs.items():
            c = tuple(float(v) for v in np.atleast_1d(c))
            if len(c) > MAX_POLY_DEGREE + 1:
                raise ValueError(f"height polynomials have degree at most {MAX_POLY_DEGREE}")
            parsed[parse_word(w)] = c
        need = set(self.base.admissible_words(self.window))
        if set(parsed) != need:
            raise ValueError("coefficients required for every admissible window-word")
        object.__setattr__(self, "coeffs", parsed)

    @classmethod
    def constant(cls, base: SftSpec, value: float, window: int = 1) -> "HeightPolynomial":
        words = base.admissible_words(window)
        return cls(base, window, {w: (value,) for w in words})

    def value(self, word, height: float) -> float:
        c = self.coeffs[parse_word(word)]
        return math.fsum(cj * height**j for j, cj in enumerate(c))

    def integral(self, word, height: float) -> float:
        """Exact integral of the height polynomial over [0, height]."""
        c = self.coeffs[parse_word(word)]
        return math.fsum(cj * height ** (j + 1) / (j + 1) for j, cj in enumerate(c))


def _refined(sys: SuspensionSystem, other_window: int):
    win = max(sys.roof.window, other_window)
    words = sys.base.admissible_words(win)
    return win, words


def induced_potential(sys: SuspensionSystem, rho: HeightPolynomial, pressure: float) -> dict:
    """Potential on the base shift whose equilibrium data matches the flow
    potential: integral of rho over one roof interval minus pressure times
    the roof, per refined cylinder word."""
    _, words = _refined(sys, rho.window)
    rw, pw = sys.roof.window, rho.window
    out = {}
    for w in words:
        r = sys.roof.values[w[:rw]]
        out[w] = rho.integral(w[:pw], r) - pressure * r
    return out


def roof_integral(mu: MarkovMeasure, roof: RoofFunction) -> float:
    """Mean return time: integral of the roof against the base measure."""
    return math.fsum(mu.cylinder(w) * v for w, v in sorted(roof.values.items()))


def lift_measure_integral(sys: SuspensionSystem, mu: MarkovMeasure, F: HeightPolynomial) -> float:
    """Integral of F against the lifted flow measure: cylinder-exact ratio of
    the fiberwise integral of F to the mean roof."""
    _, words = _refined(sys, F.window)
    rw, fw = sys.roof.window, F.window
    num = math.fsum(
        mu.cylinder(w) * F.integral(w[:fw], sys.roof.values[w[:rw]]) for w in words
    )
    return num / roof_integral(mu, sys.roof)


def time_change_scaling(discrete_exponents, mu: MarkovMeasure, roof: RoofFunction) -> np.ndarray:
    """Flow exponents from discrete ones: divide by the mean return time."""
    return np.asarray(discrete_exponents, dtype=float) / roof_integral(mu, roof)


# ---------------------------------------------------------------------------
# flow cocycles and their first-return reduction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FlowCocycle:
    """Flow cocycle in canonical form: a per-unit-time generator for each
    window-word; the action over a return interval is the matrix raised to
    the roof value."""

    system: SuspensionSystem
    window: int
    per_unit: dict

    def __post_init__(self):
        parsed = {}
        for w, M in self.per_unit.items():
            M = np.asarray(M, dtype=float)
            if M.ndim != 2 or M.shape[0] != M.shape[1]:
                raise ValueError("generators must be square matrices")
            parsed[parse_word(w)] = M
        need = set(self.system.base.admissible_words(self.window))
        if set(parsed) != need:
            raise ValueError("per-unit generator required for every admissible window-word")
        dims = {M.shape[0] for M in parsed.values()}
        if len(dims) != 1:
            raise ValueError("generators must share one dimension")
        object.__setattr__(self, "per_unit", parsed)


def _real_power(M: np.ndarray, t: float) -> np.ndarray:
    k = round(t)
    if abs(t - k) < 1e-12 and k >= 0:
        return np.linalg.matrix_power(M, int(k))
    G = fractional_matrix_power(M, t)
    scale = max(1.0, np.max(np.abs(G)))
    if np.max(np.abs(G.imag)) > _REAL_POWER_TOL * scale:
        raise ValueError("generator admits no real fractional power")
    return np.ascontiguousarray(G.real)


def return_cocycle(sys: SuspensionSystem, flow_cocycle: FlowCocycle) -> CocycleSpec:
    """First-return discrete cocycle: each refined window-word maps to the
    per-unit generator raised to its roof value."""
    win, words = _refined(sys, flow_cocycle.window)
    rw, fw = sys.roof.window, flow_cocycle.window
    gen = {}
    for w in words:
        M = flow_cocycle.per_unit[w[:fw]]
        gen[w] = _real_power(M, sys.roof.values[w[:rw]])
    return CocycleSpec(sys.base, win, gen)


def suspend_cocycle(sys: SuspensionSystem, A: CocycleSpec) -> FlowCocycle:
    """Inverse packaging of return_cocycle: per-unit generators whose
    roof-powers recover the discrete generators."""
    if A.base != sys.base:
        raise ValueError("cocycle lives over a different base shift")
    win, words = _refined(sys, A.window)
    rw, aw = sys.roof.window, A.window
    per_unit = {}
    for w in words:
        G = A.generator[w[:aw]]
        per_unit[w] = _real_power(G, 1.0 / sys.roof.values[w[:rw]])
    return FlowCocycle(sys, win, per_unit)
