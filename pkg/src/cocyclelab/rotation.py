"""Rotation numbers of projectivized 2x2 blocks over suspension flows.

Circle maps come from matrices acting on lines through the origin,
parametrized by the doubled line-angle so the projective circle has full
length 2*pi.  Lifts are pinned through the polar decomposition: the
rotation factor contributes its doubled angle and the positive definite
factor moves directions by strictly less than a quarter turn, which fixes
the branch.  All user-facing rotation numbers are reported in the halved
(line-angle) convention per unit flow time, so they compare directly with
eigenvalue arguments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cocycles import CocycleSpec, evaluate
from .shifts import parse_word, periodic_point
from .suspension import SuspensionSystem
from . import linalg as la

TWO_PI = 2.0 * math.pi
GRID_SIZE = 512
REFINE_TOL = 1e-8
RHO_TOL = 1e-10
MAX_LIFT_ITER = 10_000
_RENORM_SPREAD = 0.2
_RENORM_SCAN = 512
_MAX_RENORM_DEPTH = 60
_REAL_DISC_TOL = 1e-12
_BLOCK_GAP_TOL = 1e-6


def _polar2(M: np.ndarray):
    """Rotation angle beta and SPD factor P of the polar form M = R(beta) P.

    Closed form for 2x2 matrices with positive determinant.
    """
    c1 = M[0, 0] + M[1, 1]
    c2 = M[1, 0] - M[0, 1]
    beta = math.atan2(c2, c1)
    n = math.hypot(c1, c2)
    R = np.array([[c1, -c2], [c2, c1]]) / n
    P = R.T @ M
    P = 0.5 * (P + P.T)
    return beta, P


def _spread(M: np.ndarray) -> float:
    """Half-spread of the doubled displacement of the circle map of M around
    its polar rotation angle: the maximal line-angle tilt of the SPD factor,
    doubled.  Exact for Moebius maps."""
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    f2 = float(np.sum(M * M)) / det
    s2 = 0.5 * (f2 + math.sqrt(max(f2 * f2 - 4.0, 0.0)))
    return 2.0 * math.asin(min((s2 - 1.0) / (s2 + 1.0), 1.0))


@dataclass(frozen=True)
class CircleMap:
    """Orientation-preserving Moebius circle map in the doubled-angle chart."""

    matrix: np.ndarray
    beta: float            # rotation half of the polar form
    spd: np.ndarray        # positive definite half

    def lift(self, phi):
        """Canonical continuous lift; commutes with phi -> phi + 2*pi."""
        a = np.asarray(phi, dtype=float) / 2.0
        v = np.stack([np.cos(a), np.sin(a)], axis=-1)
        u = v @ self.spd.T
        delta = np.arctan2(
            v[..., 0] * u[..., 1] - v[..., 1] * u[..., 0],
            v[..., 0] * u[..., 0] + v[..., 1] * u[..., 1],
        )
        out = np.asarray(phi, dtype=float) + 2.0 * self.beta + 2.0 * delta
        return out if out.ndim else float(out)

    def displacement(self, phi):
        return self.lift(phi) - phi

    def __call__(self, phi):
        return np.mod(self.lift(phi), TWO_PI)


def projectivize_block(M) -> CircleMap:
    """Projective action of a 2x2 matrix on the doubled line-angle circle."""
    M = np.asarray(M, dtype=float)
    if M.shape != (2, 2):
        raise ValueError("projective circle maps need 2x2 matrices")
    if np.linalg.det(M) <= 0.0:
        raise ValueError("orientation-reversing block: determinant must be positive")
    beta, P = _polar2(M)
    return CircleMap(matrix=M, beta=beta, spd=P)


def _fractional_map(M: np.ndarray, u: float) -> np.ndarray:
    """Continuous interpolation M^u through the polar form: rotation angle
    scales linearly, the SPD factor is raised to the power u."""
    if u == 0.0:
        return np.eye(2)
    if u == 1.0:
        return np.asarray(M, dtype=float)
    beta, P = _polar2(M)
    w, V = np.linalg.eigh(P)
    Pu = (V * w**u) @ V.T
    b = beta * u
    R = np.array([[math.cos(b), -math.sin(b)], [math.sin(b), math.cos(b)]])
    return R @ Pu


def _normalize_det(M: np.ndarray) -> np.ndarray:
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    if det <= 0.0:
        raise ValueError("orientation-reversing block: determinant must be positive")
    return M / math.sqrt(det)


def doubled_rotation_number(M, tol: float = RHO_TOL, max_iter: int = MAX_LIFT_ITER) -> float:
    """Poincare rotation number, in [0, 2*pi), of the circle map of M.

    Iterates the canonical lift; at each step the polar data of the
    accumulated power gives a rigorous displacement bracket, and after a
    bounded scan the computation renormalizes onto the closest return seen,
    dividing the remaining error by the iterate count.  Matrices with real
    spectrum have circle fixed points and return 0 exactly.  The requested
    tolerance is honoured down to the conditioning floor of double
    precision, roughly eps times the squared condition number of the
    conjugacy that makes M a rotation.
    """
    M = _normalize_det(np.asarray(M, dtype=float))
    rho = _doubled_rho(M, tol, max_iter, 0)
    return float(np.mod(rho, TWO_PI))


def _doubled_rho(M: np.ndarray, tol: float, max_iter: int, depth: int) -> float:
    tr = M[0, 0] + M[1, 1]
    if tr * tr >= 4.0 - _REAL_DISC_TOL:
        return 0.0
    f = projectivize_block(M)
    w = 0.0
    Mk = np.eye(2)
    best_center, best_width = None, math.inf
    # closest return seen so far, as (spread, k, j, beta, power); recursing on
    # any k >= 2 power divides the remaining error by k, so once the scan
    # budget runs out the best candidate is worth taking even if its spread
    # never dipped below the fast-path threshold
    candidate = None
    renorm = depth < _MAX_RENORM_DEPTH
    for k in range(1, max_iter + 1):
        w = f.lift(w)
        Mk = _normalize_det(Mk @ M)
        beta, _ = _polar2(Mk)
        half = _spread(Mk)
        j = round((w - 2.0 * beta) / TWO_PI)
        center = (TWO_PI * j + 2.0 * beta) / k
        if half / k < best_width:
            best_center, best_width = center, half / k
        if best_width <= tol:
            return best_center
        if k >= 2 and (candidate is None or half < candidate[0]):
            candidate = (half, k, j, beta, Mk.copy())
        if renorm and candidate is not None and (
            candidate[0] < _RENORM_SPREAD or k >= _RENORM_SCAN
        ):
            half_r, k_r, j_r, beta_r, M_r = candidate
            # the child's tolerance must stay inside the branch margin so the
            # rounding below pins the correct lift of the child's value
            child_tol = min(tol * k_r, 0.5, 0.25 * (math.pi - half_r))
            child = _doubled_rho(M_r, child_tol, max_iter, depth + 1)
            child += TWO_PI * round((2.0 * beta_r - child) / TWO_PI)
            return (TWO_PI * j_r + child) / k_r
    return best_center


@dataclass(frozen=True)
class CircleCocycle:
    """Projectivized 2x2 block along a periodic orbit of a suspension flow:
    one circle map and one return time per step of the word."""

    word: tuple
    roofs: tuple
    maps: tuple              # 2x2 matrices, one per step, det > 0

    def __post_init__(self):
        if not (len(self.word) == len(self.roofs) == len(self.maps)):
            raise ValueError("word, roofs and maps must have equal length")
        mats = tuple(np.asarray(M, dtype=float) for M in self.maps)
        for M in mats:
            if M.shape != (2, 2) or np.linalg.det(M) <= 0.0:
                raise ValueError("orientation-reversing block: determinant must be positive")
        object.__setattr__(self, "maps", mats)
        object.__setattr__(self, "roofs", tuple(float(r) for r in self.roofs))

    @property
    def period(self) -> float:
        """Total flow time over one traversal of the word."""
        return math.fsum(self.roofs)

    def composite(self) -> np.ndarray:
        out = np.eye(2)
        for M in self.maps:
            out = M @ out
        return out

    def step_map(self, k: int) -> CircleMap:
        return projectivize_block(self.maps[k % len(self.maps)])


def circle_cocycle(A: CocycleSpec, sys: SuspensionSystem, word, block_index: int = 0) -> CircleCocycle:
    """Projectivize a matrix cocycle along the periodic orbit of a word.

    In dimension two the step matrices act directly.  In higher dimension
    the invariant 2D block of the return matrix (the block_index-th complex
    pair, in decreasing modulus) is transported with orthonormal frames; the
    per-step maps are the triangular factors, and the closing frame rotation
    is folded into the last step so the composite equals the restriction of
    the return matrix.
    """
    w = parse_word(word)
    p = periodic_point(A.base, w)
    ell = len(w)
    steps = [evaluate(A, p.shift(k), 1) for k in range(ell)]
    roofs = [sys.roof.at(p.shift(k)) for k in range(ell)]
    if A.dim == 2:
        return CircleCocycle(w, tuple(roofs), tuple(steps))
    M = evaluate(A, p, ell)
    rec = la.sorted_spectrum(M)
    pairs = [
        i for i in range(rec.dim)
        if not rec.is_real[i] and rec.eigenvalues[i].imag > 0
    ]
    if block_index >= len(pairs):
        raise ValueError(
            f"block_index {block_index} out of range: {len(pairs)} complex pair(s)"
        )
    lam = rec.eigenvalues[pairs[block_index]]
    eig, vec = np.linalg.eig(M)
    v = vec[:, int(np.argmin(np.abs(eig - lam)))]
    Q, _ = np.linalg.qr(np.column_stack([v.real, v.imag]))
    frames = [Q]
    factors = []
    for k in range(ell):
        Qn, R = np.linalg.qr(steps[k] @ frames[-1])
        sign = np.sign(np.diag(R))
        sign[sign == 0] = 1.0
        factors.append(sign[:, None] * R)
        frames.append(Qn * sign[None, :])
    U, _, Vt = np.linalg.svd(frames[0].T @ frames[-1])
    O = U @ Vt
    if np.linalg.det(O) <= 0.0:
        raise ArithmeticError("tracked block returned with reversed orientation")
    factors[-1] = O @ factors[-1]
    return CircleCocycle(w, tuple(roofs), tuple(factors))


@dataclass(frozen=True)
class LiftRecord:
    """Lift of one projective trajectory sampled at return times."""

    times: np.ndarray
    values: np.ndarray
    theta: float

    @property
    def displacement(self) -> float:
        return float(self.values[-1] - self.values[0])


def lift_record(C: CircleCocycle, theta: float, n_returns: int) -> LiftRecord:
    times = [0.0]
    values = [float(theta)]
    w = float(theta)
    acc = 0.0
    for k in range(n_returns):
        w = C.step_map(k).lift(w)
        acc += C.roofs[k % len(C.roofs)]
        times.append(acc)
        values.append(w)
    return LiftRecord(np.array(times), np.array(values), float(theta))


def _time_slice(C: CircleCocycle, t: float, start: int):
    """Per-step matrices covering flow time t from step index start, the
    last one interpolated fractionally."""
    if t < 0:
        raise ValueError("flow time must be nonnegative")
    mats = []
    acc = 0.0
    k = start
    n = len(C.roofs)
    while True:
        r = C.roofs[k % n]
        if acc + r <= t:
            mats.append(C.maps[k % n])
            acc += r
            k += 1
            if acc == t:
                break
        else:
            u = (t - acc) / r
            if u > 0.0:
                mats.append(_fractional_map(C.maps[k % n], u))
            break
    return mats


def _displacement_fn(mats):
    lifts = [projectivize_block(M) for M in mats]

    def disp(phi):
        w = np.asarray(phi, dtype=float)
        for f in lifts:
            w = f.lift(w)
        return w - phi

    return disp


def _refine_extremum(fn, grid, idx, sign):
    """Golden-section refinement of fn*sign around grid index idx."""
    step = grid[1] - grid[0]
    a = grid[idx] - step
    b = grid[idx] + step
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc = sign * fn(c)
    fd = sign * fn(d)
    while b - a > REFINE_TOL:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = sign * fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = sign * fn(d)
    return sign * max(fc, fd)


def sigma_tau(C: CircleCocycle, t: float, start: int = 0):
    """Extremal doubled lift displacements over all start angles at flow
    time t: a 512-point grid bracket refined by golden-section search."""
    mats = _time_slice(C, t, start)
    if not mats:
        return 0.0, 0.0
    disp = _displacement_fn(mats)
    grid = np.linspace(0.0, TWO_PI, GRID_SIZE, endpoint=False)
    vals = disp(grid)
    sigma = _refine_extremum(disp, grid, int(np.argmax(vals)), 1.0)
    tau = _refine_extremum(disp, grid, int(np.argmin(vals)), -1.0)
    sigma = max(sigma, float(np.max(vals)))
    tau = min(tau, float(np.min(vals)))
    return float(sigma), float(tau)


def rho_periodic(C: CircleCocycle, tol: float = RHO_TOL) -> float:
    """Rotation number of the periodic-orbit return map, halved to the
    line-angle convention and divided by the flow period."""
    return doubled_rotation_number(C.composite(), tol=tol) / 2.0 / C.period


def eigen_argument(M) -> float:
    """|arg| of the complex eigenvalue pair, in (0, pi)."""
    ev = np.linalg.eigvals(np.asarray(M, dtype=float))
    im = np.abs(ev.imag)
    scale = np.max(np.abs(ev))
    if np.max(im) <= 1e-12 * max(scale, 1.0):
        raise ValueError("real spectrum: no eigenvalue argument")
    lam = ev[int(np.argmax(ev.imag))]
    return float(abs(np.angle(lam)))


@dataclass(frozen=True)
class ThetaEllRhoReport:
    residual: float
    theta: float | None
    rho: float
    period: float
    skipped: bool


def theta_ell_rho_check(A: CocycleSpec, sys: SuspensionSystem, word,
                        block_index: int = 0, tol: float = RHO_TOL) -> ThetaEllRhoReport:
    """Compare the eigenvalue argument of the return block against period
    times the iterated-lift rotation number, folding the rotation sign.

    Returns a skipped report when the block has real spectrum.
    """
    C = circle_cocycle(A, sys, word, block_index=block_index)
    M = C.composite()
    rho = rho_periodic(C, tol=tol)
    try:
        theta = eigen_argument(M)
    except ValueError:
        return ThetaEllRhoReport(math.nan, None, rho, C.period, True)
    doubled = 2.0 * C.period * rho

    def circ(a):
        return abs((a + math.pi) % TWO_PI - math.pi)

    residual = min(circ(doubled - 2.0 * theta), circ(doubled + 2.0 * theta)) / 2.0
    return ThetaEllRhoReport(float(residual), theta, rho, C.period, False)


# ---------------------------------------------------------------------------
# parameter families: continuous argument lifts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThetaLift:
    """Continuous argument lift of a 2D block along a one-parameter family."""

    s_values: np.ndarray
    theta_values: np.ndarray
    crossings: tuple          # s where the tracked pair had real spectrum

    @property
    def total_change(self) -> float:
        return float(self.theta_values[-1] - self.theta_values[0])


def _tracked_raw_angle(A: CocycleSpec, word, prev_modulus: float | None):
    """(raw |arg| in [0, pi], modulus, is_real) of the tracked pair of the
    return matrix, matching blocks to the previous modulus when given."""
    p = periodic_point(A.base, parse_word(word))
    M = evaluate(A, p, len(parse_word(word)))
    rec = la.sorted_spectrum(M)
    pairs = []
    for i in range(rec.dim):
        ev = rec.eigenvalues[i]
        if not rec.is_real[i] and ev.imag > 0:
            pairs.append((abs(ev), abs(np.angle(ev)), False))
    reals = [i for i in range(rec.dim) if rec.is_real[i]]
    for a in range(0, len(reals) - 1, 2):
        lam1 = rec.eigenvalues[reals[a]].real
        lam2 = rec.eigenvalues[reals[a + 1]].real
        if lam1 * lam2 > 0:
            m = math.sqrt(abs(lam1 * lam2))
            pairs.append((m, 0.0 if lam1 > 0 else math.pi, True))
    if not pairs:
        raise ValueError("return matrix has no trackable 2D block")
    if prev_modulus is None:
        cand = [p_ for p_ in pairs if not p_[2]]
        if not cand:
            raise ValueError("tracked block must start with a complex pair")
        mod, ang, is_real = cand[0]
    else:
        mod, ang, is_real = min(pairs, key=lambda q: abs(q[0] - prev_modulus))
    gap = math.inf
    for m2 in (abs(ev) for ev in rec.eigenvalues):
        if abs(m2 - mod) > 1e-14:
            gap = min(gap, abs(m2 - mod))
    return ang, mod, is_real, gap


def lift_theta_family(family, sys: SuspensionSystem, word, grid,
                      max_depth: int = 40) -> ThetaLift:
    """Continuous lift s -> theta(s) of the tracked block argument along a
    family of cocycles, anchored at s = grid[0] to period * rho of the
    projectivized block there.

    Each step picks the branch 2*pi*m +/- raw_angle closest to the previous
    value, refining the s grid until every increment is below pi/4.  Grid
    points where the pair collides into a real pair are recorded as
    crossing events.
    """
    grid = [float(s) for s in grid]
    if len(grid) < 2:
        raise ValueError("grid needs at least two parameter values")
    A0 = family(grid[0])
    C0 = circle_cocycle(A0, sys, word)
    anchor_halved = rho_periodic(C0) * C0.period
    raw0, mod0, real0, _ = _tracked_raw_angle(A0, word, None)
    if real0:
        raise ValueError("family must start with a complex pair on the tracked block")
    # match the anchor to the signed branch consistent with the raw angle

    def circ(a):
        return abs((a + math.pi) % TWO_PI - math.pi)

    theta0 = raw0 if circ(2 * anchor_halved - 2 * raw0) <= circ(2 * anchor_halved + 2 * raw0) else -raw0
    s_out = [grid[0]]
    th_out = [theta0]
    crossings = []
    prev_mod = mod0

    def branch(target, raw):
        best = None
        for sgn in (1.0, -1.0):
            c = sgn * raw + TWO_PI * round((target - sgn * raw) / TWO_PI)
            if best is None or abs(c - target) < abs(best - target):
                best = c
        return best

    def advance(s_a, th_a, s_b, depth):
        nonlocal prev_mod
        A = family(s_b)
        raw, mod, is_real, gap = _tracked_raw_angle(A, word, prev_mod)
        if gap < _BLOCK_GAP_TOL and not is_real:
            raise ValueError("tracked block modulus gap degenerated")
        # aim at the linear continuation of the lift: near a fold of the
        # unsigned argument the reflected and the continuing branch are both
        # close to the previous value, and only the direction of motion
        # separates them
        if len(s_out) >= 2 and s_out[-1] > s_out[-2]:
            slope = (th_out[-1] - th_out[-2]) / (s_out[-1] - s_out[-2])
            pred = th_a + slope * (s_b - s_a)
        else:
            pred = th_a
        cand = branch(pred, raw)
        if abs(cand - th_a) >= math.pi / 4.0:
            if depth >= max_depth:
                raise ArithmeticError("could not resolve the argument branch")
            mid = 0.5 * (s_a + s_b)
            th_mid = advance(s_a, th_a, mid, depth + 1)
            return advance(mid, th_mid, s_b, depth + 1)
        prev_mod = mod
        if is_real:
            crossings.append(s_b)
        s_out.append(s_b)
        th_out.append(cand)
        return cand

    for a, b in zip(grid, grid[1:]):
        advance(a, th_out[-1], b, 0)
    order = np.argsort(s_out)
    return ThetaLift(
        np.asarray(s_out)[order], np.asarray(th_out)[order], tuple(crossings)
    )


# ---------------------------------------------------------------------------
# measure-averaged rotation numbers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RhoMeasureEstimate:
    value: float
    lower: float
    upper: float
    width: float
    t: float
    exact: bool


def _path_extremes(mats):
    """Exact (sigma, tau) of the composed displacement: polar center plus or
    minus the spread, branch pinned by one lift iteration."""
    w = 0.0
    comp = np.eye(2)
    for M in mats:
        w = projectivize_block(M).lift(w)
        comp = _normalize_det(M) @ comp
    beta, _ = _polar2(comp)
    half = _spread(comp)
    j = round((w - 2.0 * beta) / TWO_PI)
    center = TWO_PI * j + 2.0 * beta
    return center + half, center - half


def rho_measure(A: CocycleSpec, sys: SuspensionSystem, mu, t: float,
                path_limit: int = 200_000, seed: int = 0, n_samples: int = 2000) -> RhoMeasureEstimate:
    """Measure-averaged rotation number with a monotone bracket: the upper
    bound integrates the per-path supremum displacement at time t, the lower
    one the infimum; halved convention per unit flow time.

    Paths are enumerated cylinder-exactly while their count stays within
    path_limit, otherwise sampled from the measure with the given seed.
    """
    if A.dim != 2:
        raise ValueError("measure-averaged rotation numbers need a 2x2 cocycle")
    win = max(A.window, sys.roof.window)
    aw, rw = A.window, sys.roof.window

    def step_data(wrd):
        return A.generator[wrd[:aw]], sys.roof.values[wrd[:rw]]

    # iterative DFS over stopping-time paths: extend until roof sum >= t
    start_words = A.base.admissible_words(win)
    stack = [(w, mu.cylinder(w), 0.0, []) for w in start_words]
    num_hi = 0.0
    num_lo = 0.0
    exact = True
    expanded = 0
    while stack:
        wrd, weight, acc, mats = stack.pop()
        expanded += 1
        if expanded > path_limit:
            exact = False
            break
        M, r = step_data(wrd)
        if acc + r >= t:
            u = (t - acc) / r
            path = mats + [_fractional_map(M, u)] if u > 0 else mats
            hi, lo = _path_extremes(path) if path else (0.0, 0.0)
            num_hi += weight * hi
            num_lo += weight * lo
            continue
        a = wrd[-1]
        for b in range(A.base.alphabet_size):
            if A.base.is_allowed(a, b):
                p = mu.P[a, b]
                if p > 0:
                    nxt = (wrd[1:] + (b,)) if win > 1 else (b,)
                    stack.append((nxt, weight * p, acc + r, mats + [M]))
    if not exact:
        rng_orbit_len = int(t / min(sys.roof.values.values())) + win + 2
        his, los = [], []
        for i in range(n_samples):
            symbols = tuple(int(s) for s in mu.sample_orbit(rng_orbit_len, seed=seed + i))
            acc = 0.0
            mats = []
            k = 0
            while True:
                wrd = symbols[k : k + win]
                M, r = step_data(wrd)
                if acc + r >= t:
                    u = (t - acc) / r
                    if u > 0:
                        mats.append(_fractional_map(M, u))
                    break
                mats.append(M)
                acc += r
                k += 1
            hi, lo = _path_extremes(mats) if mats else (0.0, 0.0)
            his.append(hi)
            los.append(lo)
        num_hi = float(np.mean(his))
        num_lo = float(np.mean(los))
    upper = num_hi / (2.0 * t)
    lower = num_lo / (2.0 * t)
    return RhoMeasureEstimate(
        value=0.5 * (upper + lower),
        lower=lower,
        upper=upper,
        width=upper - lower,
        t=float(t),
        exact=exact,
    )
