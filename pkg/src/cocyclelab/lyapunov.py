"""Lyapunov spectra of sampled cocycle orbits via blocked QR accumulation.

The sampled step matrices are tree-reduced into short block products with
per-matrix scale tracking, then a single QR recurrence walks the blocks.
Block length adapts to the per-step conditioning so block products never
exceed a safe condition number before re-orthonormalization.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

import numpy as np

from . import linalg as la
from .cocycles import CocycleSpec
from .shifts import MarkovMeasure

MAX_BLOCK_LOG_COND = 30.0
DEFAULT_BATCHES = 20
VOLUME_TOL = 1e-8
MIN_STEPS = 1000


@dataclass(frozen=True)
class LyapunovEstimate:
    exponents: np.ndarray        # descending
    stderr: np.ndarray
    n_steps: int
    block_size: int
    volume_residual: float       # |sum of exponents - mean log|det||
    multiplicities: tuple | None = None
    seed: int | None = None

    @property
    def dim(self) -> int:
        return len(self.exponents)


def _adaptive_block(A: CocycleSpec, n_steps: int, n_batches: int) -> int:
    sup_a, sup_inv = A.norm_envelope()
    log_cond = max(np.log(sup_a * sup_inv), 0.05)
    B = 1
    while B * 2 * log_cond <= MAX_BLOCK_LOG_COND and B < 64:
        B *= 2
    while B > 1 and n_steps // B < 4 * n_batches:
        B //= 2
    return B


def _tree_reduce(mats: np.ndarray, B: int):
    """Collapse rows of (nb, B, d, d) into normalized block products.

    Returns (products (nb, d, d), logscale (nb,)) with true product
    equal to products * exp(logscale)."""
    nb, width, d, _ = mats.shape
    P = mats
    logs = np.zeros(nb)
    while width > 1:
        P = P[:, 1::2] @ P[:, 0::2]
        width //= 2
        s = np.abs(P).max(axis=(2, 3))
        s = np.maximum(s, 1e-300)
        P = P / s[..., None, None]
        logs += np.log(s).sum(axis=1)
    return P[:, 0], logs


def qr_spectrum(mats: np.ndarray, logdet: np.ndarray, block_size: int, n_batches: int = DEFAULT_BATCHES) -> LyapunovEstimate:
    """Blocked QR estimate from explicit step matrices along one path."""
    T, d, _ = mats.shape
    B = block_size
    nb = T // B
    if nb < n_batches:
        n_batches = max(1, nb)
    used = nb * B
    prods, logs = _tree_reduce(mats[:used].reshape(nb, B, d, d), B)
    Q = np.eye(d)
    batch_sums = np.zeros((n_batches, d))
    batch_steps = np.zeros(n_batches)
    for i in range(nb):
        M = prods[i] @ Q
        Q, R = np.linalg.qr(M)
        diag = np.abs(np.diag(R))
        b = i * n_batches // nb
        batch_sums[b] += np.log(diag) + logs[i]
        batch_steps[b] += B
    total = batch_sums.sum(axis=0)
    exponents = total / used
    means = batch_sums / batch_steps[:, None]
    if n_batches > 1:
        stderr = means.std(axis=0, ddof=1) / np.sqrt(n_batches)
    else:
        stderr = np.full(d, np.inf)
    # equal exponents leave the trailing QR diagonals ordered only up to
    # sampling noise; report the descending order statistics
    order = np.argsort(-exponents, kind="stable")
    exponents = exponents[order]
    stderr = stderr[order]
    vol = abs(float(exponents.sum() - logdet[:used].mean()))
    return LyapunovEstimate(
        exponents=exponents,
        stderr=stderr,
        n_steps=used,
        block_size=B,
        volume_residual=vol,
    )


def lyapunov_qr(A: CocycleSpec, mu: MarkovMeasure, n_steps: int, seed: int, n_batches: int = DEFAULT_BATCHES) -> LyapunovEstimate:
    """Sample a mu-orbit of the base shift and accumulate the QR spectrum."""
    if n_steps < MIN_STEPS:
        raise ValueError(f"need at least {MIN_STEPS} steps for a stable estimate")
    symbols = mu.sample_orbit(n_steps + A.window - 1, seed)
    mats, logdet = A.path_matrices(np.asarray(symbols))
    B = _adaptive_block(A, n_steps, n_batches)
    est = qr_spectrum(mats, logdet, B, n_batches)
    mult = tuple(multiplicity_cluster(est.exponents, n_steps=est.n_steps))
    return replace(est, multiplicities=mult, seed=seed)


# ---------------------------------------------------------------------------
# closed-form oracles for structured generators
# ---------------------------------------------------------------------------

_STRUCT_TOL = 1e-12


def _is_upper_triangular(M: np.ndarray) -> bool:
    scale = max(1.0, float(np.abs(M).max()))
    return bool(np.all(np.abs(np.tril(M, -1)) <= _STRUCT_TOL * scale))


def _conformal_blocks(M: np.ndarray, tol_factor: float = _STRUCT_TOL):
    """Per-block log moduli if M is block diagonal with 1x1 and paired
    conformal 2x2 blocks on the standard axes; None otherwise."""
    d = M.shape[0]
    scale = max(1.0, float(np.abs(M).max()))
    tol = tol_factor * scale
    logs = []
    i = 0
    while i < d:
        off_row = np.abs(M[i, :]).sum() - np.abs(M[i, i : min(i + 2, d)]).sum()
        scalar_ok = (
            np.abs(np.delete(M[i, :], i)).max(initial=0.0) <= tol
            and np.abs(np.delete(M[:, i], i)).max(initial=0.0) <= tol
        )
        if scalar_ok:
            if abs(M[i, i]) <= tol:
                return None
            logs.append(np.log(abs(M[i, i])))
            i += 1
            continue
        if i + 1 >= d:
            return None
        blk = M[i : i + 2, i : i + 2]
        outside = np.abs(M[i : i + 2, :]).sum() + np.abs(M[:, i : i + 2]).sum() - 2 * np.abs(blk).sum()
        conformal = (
            outside <= 4 * tol
            and abs(blk[0, 0] - blk[1, 1]) <= tol
            and abs(blk[0, 1] + blk[1, 0]) <= tol
        )
        if not conformal:
            return None
        r = np.hypot(blk[0, 0], blk[0, 1])
        if r <= tol:
            return None
        logs.extend([np.log(r), np.log(r)])
        i += 2
    return np.asarray(logs)


def _commuting_block_logs(generators: dict):
    """Per-word log moduli after a shared real block-diagonalizing change of
    basis, for pairwise commuting generator families; None if unavailable."""
    mats = list(generators.values())
    scale = max(1.0, max(float(np.abs(M).max()) for M in mats))
    for M, N in itertools.combinations(mats, 2):
        if np.abs(M @ N - N @ M).max() > 1e-9 * scale**2:
            return None
    rng = np.random.default_rng(0)
    for _ in range(4):
        combo = sum(float(c) * M for c, M in zip(rng.normal(size=len(mats)), mats))
        try:
            W, _ = la._real_jordan_basis(combo)
        except (ValueError, np.linalg.LinAlgError):
            continue
        Winv = np.linalg.inv(W)
        cond = float(np.linalg.cond(W))
        logs = {}
        for word, G in generators.items():
            blocks = _conformal_blocks(Winv @ G @ W, tol_factor=1e-10 * cond)
            if blocks is None:
                break
            logs[word] = blocks
        else:
            return logs
    return None


def closed_form_oracle(A: CocycleSpec, mu: MarkovMeasure):
    """Exact frequency-weighted spectrum for generators that are
    simultaneously triangular or block-conformal (standard axes or any
    shared basis for commuting families).

    Only locally constant cocycles qualify (bump factors shift log moduli
    pointwise and have no finite closed form)."""
    if not A.is_locally_constant:
        raise ValueError("closed form requires a locally constant cocycle")
    if mu.spec is not A.base and mu.spec != A.base:
        raise ValueError("measure lives on a different shift")
    words = A.base.admissible_words(A.window)
    freqs = {w: mu.cylinder(w) for w in words}

    if all(_is_upper_triangular(G) for G in A.generator.values()):
        d = A.dim
        if all(np.abs(np.diag(G)).min() > 0 for G in A.generator.values()):
            per = np.zeros(d)
            for w, f in freqs.items():
                per += f * np.log(np.abs(np.diag(A.generator[w])))
            return np.sort(per)[::-1]

    blocks = {w: _conformal_blocks(A.generator[w]) for w in A.generator}
    if any(b is None for b in blocks.values()):
        blocks = _commuting_block_logs(A.generator)
    if blocks is not None:
        per = np.zeros(A.dim)
        for w, f in freqs.items():
            per += f * blocks[w]
        return np.sort(per)[::-1]
    raise ValueError("generators are not simultaneously block-diagonal")


def multiplicity_cluster(exponents: np.ndarray, n_steps: int | None = None, gap_tol: float | None = None) -> list:
    """Group a descending exponent list into clusters of nearly equal values.

    The default tolerance scales with the Monte Carlo resolution 1/sqrt(N)."""
    exponents = np.asarray(exponents, dtype=float)
    if gap_tol is None:
        if n_steps is None:
            raise ValueError("need either n_steps or an explicit gap tolerance")
        gap_tol = 10.0 / np.sqrt(n_steps)
    if np.any(np.diff(exponents) > 1e-12):
        raise ValueError("exponents must be sorted in descending order")
    sizes = [1]
    for i in range(1, len(exponents)):
        if exponents[i - 1] - exponents[i] < gap_tol:
            sizes[-1] += 1
        else:
            sizes.append(1)
    return sizes


# ---------------------------------------------------------------------------
# exterior-power consistency
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExteriorCheck:
    k: int
    top_sum: float               # sum of the k largest base exponents
    exterior_top: float          # leading exponent of the k-th exterior power
    residual: float
    tolerance: float
    consistent: bool


def _exterior_path(mats: np.ndarray, k: int) -> np.ndarray:
    d = mats.shape[1]
    combos = list(itertools.combinations(range(d), k))
    T = mats.shape[0]
    out = np.empty((T, len(combos), len(combos)))
    for a, rows in enumerate(combos):
        sub_rows = mats[:, rows, :]
        for b, cols in enumerate(combos):
            out[:, a, b] = np.linalg.det(sub_rows[:, :, cols])
    return out


def exterior_sum_check(A: CocycleSpec, mu: MarkovMeasure, k: int, n_steps: int, seed: int, n_batches: int = DEFAULT_BATCHES) -> ExteriorCheck:
    """Same-path comparison of sum of top-k exponents against the top
    exponent of the k-th exterior power."""
    d = A.dim
    if not (1 <= k <= d):
        raise ValueError("exterior order out of range")
    symbols = np.asarray(mu.sample_orbit(n_steps + A.window - 1, seed))
    mats, logdet = A.path_matrices(symbols)
    B = _adaptive_block(A, n_steps, n_batches)
    base = qr_spectrum(mats, logdet, B, n_batches)
    from math import comb

    mats_k = _exterior_path(mats, k)
    logdet_k = logdet * comb(d - 1, k - 1)
    Bk = max(1, B // 2)
    ext = qr_spectrum(mats_k, logdet_k, Bk, n_batches)
    top_sum = float(base.exponents[:k].sum())
    ext_top = float(ext.exponents[0])
    tol = 3.0 * float(np.sqrt((base.stderr[:k] ** 2).sum()) + ext.stderr[0]) + 1e-6
    residual = abs(top_sum - ext_top)
    return ExteriorCheck(
        k=k,
        top_sum=top_sum,
        exterior_top=ext_top,
        residual=residual,
        tolerance=tol,
        consistent=residual <= tol,
    )
