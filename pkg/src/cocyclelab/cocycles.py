"""Linear cocycles over subshifts: evaluation, holonomies, simplicity tests.

A cocycle is a window-w locally constant generator dict plus an optional
Hoelder perturbation given by cylinder-anchored bump fields.  The bump field
for word u is S(x) = sum_k theta^(nu |k|) [x sees u at position k]; it is
evaluated exactly on eventually periodic points (geometric tails summed in
closed form), which keeps holonomy limits and transition maps reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg as la
from .shifts import SftSpec, SymbolicPoint, homoclinic_point, parse_word, periodic_point

HOLONOMY_DEPTH_CAP = 10**4
# enumeration budget for exact cylinder sups in the domination search
_DOMINATION_BUDGET = 150_000


def _skew_plane(d: int) -> np.ndarray:
    D = np.zeros((d, d))
    D[0, 1], D[1, 0] = -1.0, 1.0
    return D


@dataclass(frozen=True)
class HoelderBump:
    """One cylinder-anchored bump: amplitude * sum_k theta^(nu|k|) 1[word at k]."""

    word: tuple
    amplitude: float
    direction: np.ndarray | None = None

    def direction_for(self, d: int) -> np.ndarray:
        if self.direction is None:
            return _skew_plane(d)
        D = np.asarray(self.direction, dtype=float)
        if D.shape != (d, d):
            raise ValueError("bump direction has wrong shape")
        return D


@dataclass(frozen=True)
class HoelderPerturbation:
    nu: float
    bumps: tuple

    def __post_init__(self):
        if not (0.0 < self.nu <= 1.0):
            raise ValueError("Hoelder exponent must lie in (0, 1]")
        object.__setattr__(self, "bumps", tuple(self.bumps))


def _bump_field_exact(x: SymbolicPoint, word: tuple, theta: float, nu: float) -> float:
    """Exact value of sum_k theta^(nu |k|) [x matches word at position k]."""
    L = len(word)
    q = theta**nu

    def matches(k):
        return all(x.symbol_at(k + j) == word[j] for j in range(L))

    B = abs(x.core_start) + len(x.core) + L + 2
    total = sum(q ** abs(k) for k in range(-B, B + 1) if matches(k))
    # geometric tails: beyond +-B the window sits inside a periodic tail
    p_r = len(x.right)
    ratio_r = q**p_r
    for k0 in range(B + 1, B + p_r + 1):
        if matches(k0):
            total += q**k0 / (1.0 - ratio_r)
    p_l = len(x.left)
    ratio_l = q**p_l
    for k0 in range(-B - p_l, -B):
        if matches(k0):
            total += q ** (-k0) / (1.0 - ratio_l)
    return total


@dataclass(frozen=True)
class CocycleSpec:
    """Window-w locally constant generator with optional Hoelder bumps."""

    base: SftSpec
    window: int
    generator: dict
    perturbation: HoelderPerturbation | None = None

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be at least 1")
        gen = {}
        dim = None
        for word, mat in self.generator.items():
            w = parse_word(word)
            if len(w) != self.window:
                raise ValueError(f"generator word {word!r} has wrong length")
            M = la.check_invertible(mat)
            if dim is None:
                dim = M.shape[0]
            elif M.shape[0] != dim:
                raise ValueError("generator matrices have mixed dimensions")
            gen[w] = M
        for w in self.base.admissible_words(self.window):
            if w not in gen:
                raise ValueError(f"generator missing admissible word {w}")
        object.__setattr__(self, "generator", gen)

    @property
    def dim(self) -> int:
        return next(iter(self.generator.values())).shape[0]

    @property
    def is_locally_constant(self) -> bool:
        return self.perturbation is None or not self.perturbation.bumps

    # -- pointwise evaluation ------------------------------------------------

    def bump_log_field(self, x: SymbolicPoint) -> list:
        """Exact per-bump field values a_b S_b(x) at the point x."""
        if self.is_locally_constant:
            return []
        nu = self.perturbation.nu
        return [
            b.amplitude * _bump_field_exact(x, b.word, self.base.theta, nu)
            for b in self.perturbation.bumps
        ]

    def value_at(self, x: SymbolicPoint) -> np.ndarray:
        word = x.word_at(0, self.window)
        try:
            M = self.generator[word]
        except KeyError:
            raise ValueError(f"point visits inadmissible window {word}") from None
        if self.is_locally_constant:
            return M
        d = self.dim
        out = M
        for b, g in zip(self.perturbation.bumps, self.bump_log_field(x)):
            D = b.direction_for(d)
            lam, V = np.linalg.eig(D)
            E = (V @ np.diag(np.exp(g * lam)) @ np.linalg.inv(V)).real
            out = out @ E
        return out

    # -- norm envelopes ------------------------------------------------------

    def norm_envelope(self):
        """(sup ||A||, sup ||A^-1||) upper bounds over all points."""
        sup_a = max(float(np.linalg.norm(M, 2)) for M in self.generator.values())
        sup_inv = max(
            float(np.linalg.norm(np.linalg.inv(M), 2)) for M in self.generator.values()
        )
        if self.is_locally_constant:
            return sup_a, sup_inv
        q = self.base.theta**self.perturbation.nu
        s_max = (1.0 + q) / (1.0 - q)
        bump = sum(
            abs(b.amplitude) * s_max * float(np.linalg.norm(b.direction_for(self.dim), 2))
            for b in self.perturbation.bumps
        )
        return sup_a * np.exp(bump), sup_inv * np.exp(bump)

    def bump_hoelder_constant(self) -> float:
        """Hoelder constant of x -> A(x) restricted to the bump factors."""
        if self.is_locally_constant:
            return 0.0
        q = self.base.theta**self.perturbation.nu
        field_const = 2.0 / (1.0 - q)
        sup_a, _ = self.norm_envelope()
        total = 0.0
        for b in self.perturbation.bumps:
            nd = float(np.linalg.norm(b.direction_for(self.dim), 2))
            total += abs(b.amplitude) * field_const * nd
        return sup_a * total

    # -- fast path for orbit samples ----------------------------------------

    def path_matrices(self, symbols: np.ndarray):
        """(steps, d, d) step matrices and per-step log|det| along a sample path.

        Bump fields are evaluated by convolution with the theta^(nu|k|)
        kernel truncated at double precision; path ends contribute nothing
        outside the sampled stretch.
        """
        symbols = np.asarray(symbols, dtype=np.int64)
        m = self.base.alphabet_size
        w = self.window
        steps = len(symbols) - w + 1
        if steps <= 0:
            raise ValueError("path shorter than the window")
        codes = np.zeros(steps, dtype=np.int64)
        for j in range(w):
            codes += symbols[j : j + steps] * m**j
        code_of = {}
        mats = []
        dets = []
        for word, M in sorted(self.generator.items()):
            code_of[sum(s * m**j for j, s in enumerate(word))] = len(mats)
            mats.append(M)
            dets.append(np.log(abs(np.linalg.det(M))))
        lookup = np.full(m**w, -1, dtype=np.int64)
        for c, i in code_of.items():
            lookup[c] = i
        idx = lookup[codes]
        if np.any(idx < 0):
            raise ValueError("path visits an inadmissible window")
        out = np.stack(mats)[idx]
        logdet = np.asarray(dets)[idx]
        if self.is_locally_constant:
            return out, logdet
        nu = self.perturbation.nu
        theta = self.base.theta
        K = int(np.ceil(-40.0 / (nu * np.log(theta))))  # theta^(nu K) < e^-40
        kernel = theta ** (nu * np.abs(np.arange(-K, K + 1)))
        d = self.dim
        for b in self.perturbation.bumps:
            bw = b.word
            bl = len(bw)
            positions = len(symbols) - bl + 1
            ind = np.ones(max(positions, 0), dtype=float)
            for j, s in enumerate(bw):
                ind *= symbols[j : j + positions] == s
            ind_full = np.zeros(len(symbols))
            ind_full[: len(ind)] = ind
            g = b.amplitude * np.convolve(ind_full, kernel, mode="same")[:steps]
            D = b.direction_for(d)
            lam, V = np.linalg.eig(D)
            Vinv = np.linalg.inv(V)
            phase = np.exp(g[:, None] * lam[None, :])
            E = np.einsum("ij,tj,jk->tik", V, phase, Vinv).real
            out = out @ E
            logdet = logdet + g * float(np.trace(D))
        return out, logdet


def evaluate(A: CocycleSpec, x: SymbolicPoint, n: int) -> np.ndarray:
    """n-step cocycle product at x; negative n inverts the forward product
    taken from the shifted point, so the cocycle identity holds for all signs."""
    d = A.dim
    if n == 0:
        return np.eye(d)
    if n < 0:
        return np.linalg.inv(evaluate(A, x.shift(n), -n))
    out = np.eye(d)
    for k in range(n):
        out = A.value_at(x.shift(k)) @ out
    return out


# ---------------------------------------------------------------------------
# domination
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DominationResult:
    dominated: bool
    power: int | None
    margin: float
    locally_constant: bool


def domination_check(A: CocycleSpec, nu: float | None = None, max_power: int = 64) -> DominationResult:
    """Search for the smallest power N with sup ||A^N|| ||(A^N)^-1|| theta^(nu N) < 1.

    Cylinder sups are exact for enumerable powers; beyond the enumeration
    budget they are bounded through submultiplicative composition, which can
    only under-report domination, never fake it.
    """
    if nu is None:
        nu = A.perturbation.nu if A.perturbation is not None else 1.0
    theta = A.base.theta
    m = A.base.alphabet_size
    w = A.window
    if A.is_locally_constant:
        env_factor = 1.0
    else:
        sup_a, sup_inv = A.norm_envelope()
        base_a = max(float(np.linalg.norm(M, 2)) for M in A.generator.values())
        base_i = max(float(np.linalg.norm(np.linalg.inv(M), 2)) for M in A.generator.values())
        env_factor = (sup_a / base_a) * (sup_inv / base_i)

    # products over cylinders, extended one symbol at a time
    best = {}
    products = {w_: A.generator[w_].copy() for w_ in A.base.admissible_words(w)}
    N = 1
    while True:
        cost = len(products) * m
        if N > 1 and cost > _DOMINATION_BUDGET:
            break
        ratio = max(
            float(np.linalg.norm(P, 2) * np.linalg.norm(np.linalg.inv(P), 2))
            for P in products.values()
        )
        best[N] = ratio * env_factor**N * theta ** (nu * N)
        if best[N] < 1.0:
            return DominationResult(True, N, 1.0 - best[N], A.is_locally_constant)
        if N >= max_power:
            break
        nxt = {}
        for word, P in products.items():
            for s in range(m):
                if not A.base.is_allowed(word[-1], s):
                    continue
                new_word = word + (s,)
                step = A.generator[new_word[-w:]]
                nxt[new_word] = step @ P
        products = nxt
        N += 1

    for target in range(2, max_power + 1):
        if target in best:
            continue
        composed = min(
            (best[a] * best[target - a] for a in best if (target - a) in best),
            default=np.inf,
        )
        best[target] = composed
        if composed < 1.0:
            return DominationResult(True, target, 1.0 - composed, A.is_locally_constant)
    return DominationResult(False, None, 0.0, A.is_locally_constant)


# ---------------------------------------------------------------------------
# holonomies
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HolonomyResult:
    matrix: np.ndarray
    depth: int
    truncation_error: float


def _forward_agreement_index(x: SymbolicPoint, y: SymbolicPoint) -> int:
    """Least i0 >= 0 with x_i = y_i for all i >= i0."""
    bound = x._compare_bound(y)
    # agreement across [bound, 2 bound] is decisive: both tails are periodic
    # with the joint period folded into the comparison bound
    if any(x.symbol_at(i) != y.symbol_at(i) for i in range(bound, 2 * bound + 1)):
        raise ValueError("points are not forward asymptotic")
    i0 = bound
    while i0 > 0 and x.symbol_at(i0 - 1) == y.symbol_at(i0 - 1):
        i0 -= 1
    return i0


def _backward_agreement_index(x: SymbolicPoint, y: SymbolicPoint) -> int:
    """Least i0 >= 0 with x_i = y_i for all i <= -i0."""
    bound = x._compare_bound(y)
    if any(x.symbol_at(-i) != y.symbol_at(-i) for i in range(bound, 2 * bound + 1)):
        raise ValueError("points are not backward asymptotic")
    i0 = bound
    while i0 > 0 and x.symbol_at(-(i0 - 1)) == y.symbol_at(-(i0 - 1)):
        i0 -= 1
    return i0


def _holonomy_series(step_x, step_y, tol):
    """Limit of (prod step_y)^-1 (prod step_x) via its telescoping series.

    step_x(k), step_y(k) give the k-th step matrices.  Terms are
    conj-sandwiched differences, summed until the geometric tail estimate
    drops below tol.  Returns (matrix, depth, tail_estimate).
    """
    d = step_x(0).shape[0]
    H = np.eye(d)
    Px = np.eye(d)
    Py_inv = np.eye(d)
    scale_x = 0.0
    scale_y = 0.0
    last_norms = []
    for k in range(HOLONOMY_DEPTH_CAP):
        Sx = step_x(k)
        Sy = step_y(k)
        C = np.linalg.solve(Sy, Sx)
        T = Py_inv @ (C - np.eye(d)) @ Px * np.exp(scale_x - scale_y)
        H = H + T
        tn = float(np.linalg.norm(T, 2))
        last_norms.append(tn)
        if len(last_norms) >= 3:
            prev = last_norms[-2]
            rho = min(0.95, tn / prev) if prev > 0 else 0.5
            tail = tn * rho / (1.0 - rho)
            if tn + tail < tol:
                return H, k + 1, tail
        Px = Sx @ Px
        nx = float(np.linalg.norm(Px, 2))
        Px /= nx
        scale_x += np.log(nx)
        Py_inv = Py_inv @ np.linalg.inv(Sy)
        ny = float(np.linalg.norm(Py_inv, 2))
        Py_inv /= ny
        scale_y -= np.log(ny)
    raise ArithmeticError("holonomy series did not converge within the depth cap")


def stable_holonomy(A: CocycleSpec, x: SymbolicPoint, y: SymbolicPoint, tol: float = 1e-12) -> HolonomyResult:
    """Holonomy fiber(x) -> fiber(y) along the stable set, the limit of
    (A^n_y)^-1 A^n_x.

    Exact (identity conjugated through the agreement prefix) for locally
    constant cocycles; a dominated-convergent series otherwise.
    """
    i0 = _forward_agreement_index(x, y)
    if A.is_locally_constant:
        n = i0
        H = np.linalg.solve(evaluate(A, y, n), evaluate(A, x, n))
        return HolonomyResult(H, n, 0.0)
    dom = domination_check(A)
    if not dom.dominated:
        raise ValueError("non-dominated cocycle without the locally constant fallback")
    H, depth, tail = _holonomy_series(
        lambda k: A.value_at(x.shift(k)),
        lambda k: A.value_at(y.shift(k)),
        tol,
    )
    return HolonomyResult(H, depth, tail)


def unstable_holonomy(A: CocycleSpec, x: SymbolicPoint, y: SymbolicPoint, tol: float = 1e-12) -> HolonomyResult:
    """Holonomy fiber(x) -> fiber(y) along the unstable set, the limit of
    A^n(shift^-n y) (A^n(shift^-n x))^-1."""
    i0 = _backward_agreement_index(x, y)
    if A.is_locally_constant:
        n = i0 + A.window - 1
        H = evaluate(A, y.shift(-n), n) @ np.linalg.inv(evaluate(A, x.shift(-n), n))
        return HolonomyResult(H, n, 0.0)
    dom = domination_check(A)
    if not dom.dominated:
        raise ValueError("non-dominated cocycle without the locally constant fallback")
    # feeding inverse backward steps into the stable-side series gives
    # lim prod_y (prod_x)^-1 directly, which is the unstable holonomy
    H, depth, tail = _holonomy_series(
        lambda k: np.linalg.inv(A.value_at(x.shift(-k - 1))),
        lambda k: np.linalg.inv(A.value_at(y.shift(-k - 1))),
        tol,
    )
    return HolonomyResult(H, depth, tail)


def holonomy_constants(A: CocycleSpec, nu: float | None = None):
    """(C1, rate) with ||holonomy - id|| <= C1 d(x, y)^nu for asymptotic pairs.

    rate is the per-step contraction ratio*theta^nu used by the series bound;
    C1 folds the bump Hoelder constant and the inverse-norm envelope.
    """
    if nu is None:
        nu = A.perturbation.nu if A.perturbation is not None else 1.0
    sup_a, sup_inv = A.norm_envelope()
    rate = sup_a * sup_inv * A.base.theta**nu
    if rate >= 1.0:
        dom = domination_check(A, nu=nu)
        if not dom.dominated:
            return (np.inf, rate) if not A.is_locally_constant else (0.0, rate)
        rate = (1.0 - dom.margin) ** (1.0 / dom.power)
    hold = A.bump_hoelder_constant()
    c1 = sup_inv * hold / (1.0 - rate) if rate < 1.0 else np.inf
    return c1, rate


# ---------------------------------------------------------------------------
# homoclinic transitions and simplicity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HomoclinicTransition:
    psi: np.ndarray
    exit_time: int
    stable_part: np.ndarray
    unstable_part: np.ndarray
    truncation_error: float


def psi_transition(A: CocycleSpec, p: SymbolicPoint, z: SymbolicPoint, exit_time: int, tol: float = 1e-12) -> HomoclinicTransition:
    """Transition map at p through its homoclinic point z: the stable
    holonomy pulled back through the exit composed with the unstable holonomy.

    Requires shift(z, exit_time) to agree with p itself on all i >= 0, i.e.
    a phase-aligned exit; anything else raises the misaligned-exit error.
    """
    if not p.is_periodic:
        raise ValueError("base point must be periodic")
    ell = p.period
    N = exit_time
    if N % ell != 0:
        raise ValueError("misaligned exit time")
    zN = z.shift(N)
    bound = zN._compare_bound(p)
    if any(zN.symbol_at(i) != p.symbol_at(i) for i in range(bound + 1)):
        raise ValueError("misaligned exit time")
    phi_u = unstable_holonomy(A, p, z, tol)
    phi_s_loc = stable_holonomy(A, zN, p.shift(N), tol)
    Ap = evaluate(A, p, N)
    Az = evaluate(A, z, N)
    stable_part = np.linalg.solve(Ap, phi_s_loc.matrix @ Az)
    psi = stable_part @ phi_u.matrix
    return HomoclinicTransition(
        psi=psi,
        exit_time=N,
        stable_part=stable_part,
        unstable_part=phi_u.matrix,
        truncation_error=phi_u.truncation_error + phi_s_loc.truncation_error,
    )


def periodic_eigendata(A: CocycleSpec, p: SymbolicPoint):
    """(return matrix, SpectrumRecord) over one period at p."""
    if not p.is_periodic:
        raise ValueError("base point must be periodic")
    M = evaluate(A, p, p.period)
    return M, la.sorted_spectrum(M)


PINCHING_GAP_TOL = 1e-9


def pinching_check(A: CocycleSpec, p: SymbolicPoint) -> bool:
    """Real return spectrum with pairwise distinct moduli (relative gap tol)."""
    _, rec = periodic_eigendata(A, p)
    return rec.all_real() and rec.min_relative_gap() > PINCHING_GAP_TOL


def _normalized_eigenbasis(M: np.ndarray, rec: la.SpectrumRecord) -> np.ndarray:
    """Real eigenbasis ordered by decreasing modulus, unit length, first
    nonzero coordinate positive.  Requires a real simple spectrum."""
    if not rec.all_real():
        raise ValueError("return matrix has non-real spectrum")
    cols = []
    for lam in rec.eigenvalues.real:
        B = M - lam * np.eye(M.shape[0])
        _, _, vh = np.linalg.svd(B)
        v = vh[-1]
        v = v / np.linalg.norm(v)
        nz = np.argmax(np.abs(v) > 1e-10)
        if v[nz] < 0:
            v = -v
        cols.append(v)
    Q = np.column_stack(cols)
    if abs(np.linalg.det(Q)) < 1e-12:
        raise ArithmeticError("eigenbasis is numerically singular")
    return Q


@dataclass(frozen=True)
class SimplicityReport:
    pinching: bool
    twisting: bool
    verdict: bool
    spectrum: la.SpectrumRecord
    failing_pairs: tuple
    psi: np.ndarray | None


def simplicity_check(A: CocycleSpec, p_word, bridge) -> SimplicityReport:
    """Pinching at the periodic word plus twisting of the bridge transition,
    the two halves of the simplicity criterion for the periodic pair."""
    p = periodic_point(A.base, p_word)
    z, N = homoclinic_point(A.base, parse_word(p_word), parse_word(bridge))
    M, rec = periodic_eigendata(A, p)
    pinching = rec.all_real() and rec.min_relative_gap() > PINCHING_GAP_TOL
    if not pinching:
        return SimplicityReport(False, False, False, rec, (), None)
    Q = _normalized_eigenbasis(M, rec)
    trans = psi_transition(A, p, z, N)
    psi_eig = np.linalg.solve(Q, trans.psi @ Q)
    ok, failing = la.twisting_check(psi_eig)
    return SimplicityReport(
        pinching=True,
        twisting=ok,
        verdict=ok,
        spectrum=rec,
        failing_pairs=tuple(failing),
        psi=psi_eig,
    )


# ---------------------------------------------------------------------------
# invariant splittings along homoclinic orbits
# ---------------------------------------------------------------------------

def _subspace_intersection(U: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Basis of the intersection of two column spans."""
    from scipy.linalg import null_space

    ns = null_space(np.hstack([U, -V]), rcond=1e-10)
    if ns.size == 0:
        return np.zeros((U.shape[0], 0))
    basis = U @ ns[: U.shape[1]]
    q, r = np.linalg.qr(basis)
    rank = int(np.sum(np.abs(np.diag(r)) > 1e-10 * max(1.0, abs(r[0, 0]))))
    return q[:, :rank]


def _principal_angle(U: np.ndarray, V: np.ndarray) -> float:
    """Smallest principal angle between two column spans (orthonormalized)."""
    qu, _ = np.linalg.qr(U)
    qv, _ = np.linalg.qr(V)
    s = np.linalg.svd(qu.T @ qv, compute_uv=False)
    s = np.clip(s, -1.0, 1.0)
    return float(np.arccos(np.max(s))) if s.size else np.pi / 2


@dataclass(frozen=True)
class SplittingExtension:
    blocks_at_z: tuple           # tuple of (d, dim_j) bases at z
    min_angle: float

    def blocks_along(self, A: CocycleSpec, z: SymbolicPoint, k: int) -> list:
        T = evaluate(A, z, k)
        return [T @ B for B in self.blocks_at_z]


def extend_splitting(
    A: CocycleSpec,
    p: SymbolicPoint,
    z: SymbolicPoint,
    splitting=None,
    min_angle: float = 1e-6,
) -> SplittingExtension:
    """Transport a splitting of the fiber at p to the homoclinic point z.

    Block j at z is the intersection of the stable-holonomy image of the fast
    partial sum with the unstable-holonomy image of the slow partial sum.
    When ``splitting`` is None the eigensplitting of the return matrix is
    used (requires a real simple return spectrum); otherwise pass a sequence
    of (d, k_j) basis arrays whose columns jointly span the fiber, ordered
    from fastest to slowest block.  Raises when a transversality failure
    collapses a block.
    """
    d = A.dim
    if splitting is None:
        M, rec = periodic_eigendata(A, p)
        if not (rec.all_real() and rec.min_relative_gap() > PINCHING_GAP_TOL):
            raise ValueError("splitting requires a real simple return spectrum")
        Q = _normalized_eigenbasis(M, rec)
        blocks_at_p = [Q[:, j : j + 1] for j in range(d)]
    else:
        blocks_at_p = [np.atleast_2d(np.asarray(B, dtype=float)) for B in splitting]
        dims = [B.shape[1] for B in blocks_at_p]
        if any(B.shape[0] != d for B in blocks_at_p) or sum(dims) != d:
            raise ValueError("splitting blocks must partition the fiber dimension")
        if np.linalg.matrix_rank(np.hstack(blocks_at_p)) != d:
            raise ValueError("splitting blocks are not in general position")
    phi_s = np.linalg.inv(stable_holonomy(A, z, p).matrix)    # fiber p -> fiber z
    # reuse the exit-aligned stable comparison: z -> p inverted
    phi_u = unstable_holonomy(A, p, z).matrix
    m = len(blocks_at_p)
    blocks = []
    for j in range(m):
        F = np.hstack(blocks_at_p[: j + 1])   # fast sum through block j
        G = np.hstack(blocks_at_p[j:])        # slow sum from block j
        E = _subspace_intersection(phi_s @ F, phi_u @ G)
        if E.shape[1] != blocks_at_p[j].shape[1]:
            raise ArithmeticError("splitting extension failed: non-transversal intersection")
        blocks.append(E)
    angle = min(
        _principal_angle(blocks[i], blocks[j])
        for i in range(m)
        for j in range(i + 1, m)
    )
    if angle < min_angle:
        raise ArithmeticError("splitting extension failed: blocks nearly collapse")
    return SplittingExtension(blocks_at_z=tuple(blocks), min_angle=angle)


# ---------------------------------------------------------------------------
# structured perturbations
# ---------------------------------------------------------------------------

def cylinder_perturb(A: CocycleSpec, word, G, constraint: str | None = None) -> CocycleSpec:
    """Post-compose the generator on one cylinder word with G."""
    w = parse_word(word)
    if w not in A.generator:
        raise ValueError(f"word {word!r} is not a generator cylinder")
    G = la.check_invertible(G)
    if constraint == "symplectic" and not la.is_symplectic(G):
        raise ValueError("perturbation violates the symplectic constraint")
    if constraint == "det" and abs(np.linalg.det(G) - 1.0) > 1e-10:
        raise ValueError("perturbation violates the determinant constraint")
    gen = dict(A.generator)
    gen[w] = G @ gen[w]
    return CocycleSpec(A.base, A.window, gen, A.perturbation)


@dataclass(frozen=True)
class RotationFamily:
    """One-parameter family rotating an invariant conformal block of the
    return matrix at the support cylinder; at(0) is the base cocycle."""

    base_cocycle: CocycleSpec
    p_word: tuple
    support_word: tuple
    theta0: float
    plane: np.ndarray            # (d, 2) tracked-plane basis at the base point
    symplectic: bool
    insertion_basis: np.ndarray  # full-rank basis used to build insertions
    block_slots: tuple
    visits_per_period: int
    orientation: float = 1.0     # sign making arg(lam) increase with s

    def insertion(self, s: float) -> np.ndarray:
        d = self.base_cocycle.dim
        a = s * self.theta0 * self.orientation
        if self.symplectic:
            n = d // 2
            R = np.eye(d)
            c_, s_ = np.cos(a), np.sin(a)
            rot = np.array([[c_, s_], [-s_, c_]])
            if len(self.block_slots) == 2:
                i, j = self.block_slots
                R[np.ix_([i, j], [i, j])] = rot
                R[np.ix_([n + i, n + j], [n + i, n + j])] = rot
            else:
                i = self.block_slots[0]
                R[np.ix_([i, n + i], [i, n + i])] = rot
            W = self.insertion_basis
            return W @ R @ np.linalg.inv(W)
        W = self.insertion_basis
        c_, s_ = np.cos(a), np.sin(a)
        R = np.eye(d)
        R[:2, :2] = [[c_, s_], [-s_, c_]]
        return W @ R @ np.linalg.inv(W)

    def at(self, s: float) -> CocycleSpec:
        if s == 0.0:
            return self.base_cocycle
        return cylinder_perturb(self.base_cocycle, self.support_word, self.insertion(s))


def rotation_perturb_family(
    A: CocycleSpec,
    p_word,
    theta0: float,
    support_word=None,
    pair_index: int = 0,
) -> RotationFamily:
    """Family A_s inserting a rotation by s*theta0 of a complex eigenplane of
    the return matrix (the ``pair_index``-th conformal pair in decreasing
    modulus order), applied on the support cylinder.

    For symplectic-valued cocycles the insertion is built inside a symplectic
    block basis so every A_s stays symplectic.  The block argument at p moves
    continuously in s, exactly linearly in the conformal commuting case.
    """
    p = periodic_point(A.base, p_word)
    M, rec = periodic_eigendata(A, p)
    candidates = [
        i
        for i in range(rec.dim)
        if not rec.is_real[i] and rec.eigenvalues[i].imag > 0
    ]
    if not candidates:
        raise ValueError("return matrix has real spectrum: no conformal block to rotate")
    if pair_index >= len(candidates):
        raise ValueError(
            f"pair_index {pair_index} out of range: {len(candidates)} conformal pair(s)"
        )
    lam = rec.eigenvalues[candidates[pair_index]]
    if support_word is None:
        support = p.word_at(0, A.window)
    else:
        support = parse_word(support_word)
    visits = sum(
        1 for k in range(p.period) if p.word_at(k, A.window) == support
    )
    symplectic = all(la.is_symplectic(G) for G in A.generator.values()) and A.dim % 2 == 0

    eig, vec = np.linalg.eig(M)
    vi = int(np.argmin(np.abs(eig - lam)))
    v = vec[:, vi]
    plane = np.column_stack([v.real, v.imag])

    if symplectic:
        form = la.symplectic_diagonalize(M)
        slots = None
        for blk in form.blocks:
            if any(abs(ev - lam) < 1e-8 * max(1.0, abs(lam)) for ev in blk.eigenvalues):
                slots = blk.e_slots
                break
        if slots is None:
            raise ArithmeticError("could not locate the conformal block symplectically")
        # orientation of the conformal block basis: the off-diagonal entry of
        # the restricted return block carries the sign of Im(lam)
        coords = np.linalg.solve(form.P, M @ form.P)
        n = A.dim // 2
        if len(slots) == 2:
            off = coords[slots[0], slots[1]]
        else:
            off = coords[slots[0], n + slots[0]]
        return RotationFamily(
            base_cocycle=A,
            p_word=parse_word(p_word),
            support_word=support,
            theta0=theta0,
            plane=plane,
            symplectic=True,
            insertion_basis=form.P,
            block_slots=tuple(slots),
            visits_per_period=visits,
            orientation=1.0 if off >= 0 else -1.0,
        )
    # complete the plane to a basis with the other real-Jordan directions
    W, blocks = la._real_jordan_basis(M)
    cols = [plane[:, 0], plane[:, 1]]
    for kind, pos, lam_b in blocks:
        take = [pos] if kind == "real" else [pos, pos + 1]
        for c in take:
            cand = W[:, c]
            test = np.column_stack(cols + [cand])
            if np.linalg.matrix_rank(test, tol=1e-10) == test.shape[1]:
                cols.append(cand)
    Wfull = np.column_stack(cols[: A.dim])
    if np.linalg.matrix_rank(Wfull, tol=1e-10) < A.dim:
        raise ArithmeticError("could not complete the rotation plane to a basis")
    return RotationFamily(
        base_cocycle=A,
        p_word=parse_word(p_word),
        support_word=support,
        theta0=theta0,
        plane=plane,
        symplectic=False,
        insertion_basis=Wfull,
        block_slots=(0, 1),
        visits_per_period=visits,
    )
