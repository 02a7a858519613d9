"""Batched polynomial roots and branch tracking along continuation paths.

The gap equations define b(w) implicitly as one root of a w-dependent
polynomial.  The physical branch is selected by continuity along a path
from the large-|w| asymptote, which requires following one root through
regions where branches approach each other.  The tracker accepts a
nearest-root step only when the move is unambiguous (the root moved by
less than half its distance to the nearest other root); otherwise the
step is bisected adaptively.  A step that cannot be disambiguated down
to the smallest subdivision is a genuine branch-point encounter and is
reported, never guessed.
"""

from __future__ import annotations

import numpy as np

COLLISION_TOL = 1e-12
MAX_REFINE_EVALS = 4000

_OMEGA = np.exp(2j * np.pi / 3.0)


class BranchPointProximity(RuntimeError):
    """Two branches could not be told apart along the continuation path."""


def depressed_cubic_roots(p, q):
    """Roots of t^3 + p t + q = 0, vectorized; shape (..., 3)."""
    p = np.asarray(p, dtype=complex)
    q = np.asarray(q, dtype=complex)
    s = np.sqrt(q * q + 4.0 * p**3 / 27.0)
    c3 = (-q + s) / 2.0
    alt = (-q - s) / 2.0
    c3 = np.where(np.abs(c3) >= np.abs(alt), c3, alt)
    c = c3 ** (1.0 / 3.0)
    roots = np.empty(np.shape(p) + (3,), dtype=complex)
    for k in range(3):
        ck = c * _OMEGA**k
        with np.errstate(divide="ignore", invalid="ignore"):
            roots[..., k] = np.where(ck != 0, ck - p / (3.0 * ck), 0.0)
    return roots


def roots_batch(coeffs: np.ndarray) -> np.ndarray:
    """Roots of a batch of polynomials; coeffs (n, deg+1), highest power first.

    Degrees 1-3 use closed forms (vectorized); higher degrees fall back
    to companion-matrix eigenvalues.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    n, width = coeffs.shape
    deg = width - 1
    monic = coeffs / coeffs[:, :1]
    if deg == 1:
        return -monic[:, 1:2]
    if deg == 2:
        b, c = monic[:, 1], monic[:, 2]
        disc = np.sqrt(b * b - 4.0 * c)
        return np.stack([(-b + disc) / 2.0, (-b - disc) / 2.0], axis=-1)
    if deg == 3:
        a2, a1, a0 = monic[:, 1], monic[:, 2], monic[:, 3]
        shift = a2 / 3.0
        p = a1 - a2 * a2 / 3.0
        q = 2.0 * a2**3 / 27.0 - a2 * a1 / 3.0 + a0
        return depressed_cubic_roots(p, q) - shift[:, None]
    comp = np.zeros((n, deg, deg), dtype=complex)
    comp[:, 1:, :-1] = np.eye(deg - 1)
    comp[:, 0, :] = -monic[:, 1:]
    return np.linalg.eigvals(comp)


def _nearest_and_gap(roots_row: np.ndarray, b_prev: complex):
    dist = np.abs(roots_row - b_prev)
    order = np.argsort(dist)
    nearest = roots_row[order[0]]
    if len(roots_row) == 1:
        return nearest, np.inf, dist[order[0]]
    gap = float(np.min(np.abs(np.delete(roots_row, order[0]) - nearest)))
    return nearest, gap, float(dist[order[0]])


def _refine_step(coeff_fn, wa: complex, ba: complex, wb: complex,
                 max_evals: int = MAX_REFINE_EVALS) -> complex:
    """Walk from (wa, ba) to wb, bisecting the segment adaptively."""
    w_cur, b_cur = wa, ba
    stack = [wb]
    evals = 0
    seg = abs(wb - wa)
    while stack:
        tgt = stack[-1]
        evals += 1
        if evals > max_evals:
            raise BranchPointProximity(
                f"cannot disambiguate branches between w={wa} and w={wb}"
            )
        roots_row = roots_batch(coeff_fn(np.array([tgt])))[0]
        nearest, gap, move = _nearest_and_gap(roots_row, b_cur)
        if gap < COLLISION_TOL * (1.0 + abs(nearest)):
            raise BranchPointProximity(f"branch collision near w={tgt}")
        if move < 0.5 * gap:
            w_cur, b_cur = tgt, nearest
            stack.pop()
            continue
        mid = (w_cur + tgt) / 2.0
        if abs(tgt - w_cur) < 1e-14 * (seg + abs(tgt)):
            raise BranchPointProximity(f"branch collision near w={tgt}")
        stack.append(mid)
    return b_cur


def track(coeff_fn, path: np.ndarray, b_start: np.ndarray):
    """Follow one root of coeff_fn(w) along per-point paths.

    Parameters
    ----------
    coeff_fn : callable
        Maps an array of points w (shape (n,)) to polynomial
        coefficients (shape (n, deg+1), highest power first).
    path : ndarray, shape (L, n)
        Waypoints per tracked point, starting where ``b_start`` holds.
    b_start : ndarray, shape (n,)
        Root values at ``path[0]``.

    Returns
    -------
    b : ndarray, shape (n,)
        Tracked root at ``path[-1]``.
    failed : ndarray of bool, shape (n,)
        Points where branch-point proximity could not be resolved.
    """
    path = np.asarray(path, dtype=complex)
    b = np.asarray(b_start, dtype=complex).copy()
    n = path.shape[1]
    failed = np.zeros(n, dtype=bool)
    for j in range(1, path.shape[0]):
        roots = roots_batch(coeff_fn(path[j]))
        dist = np.abs(roots - b[:, None])
        order = np.argsort(dist, axis=-1)
        nearest = np.take_along_axis(roots, order[:, :1], axis=-1)[:, 0]
        move = np.take_along_axis(dist, order[:, :1], axis=-1)[:, 0]
        if roots.shape[1] > 1:
            second = np.take_along_axis(roots, order[:, 1:2], axis=-1)[:, 0]
            gap = np.abs(second - nearest)
        else:
            gap = np.full(n, np.inf)
        ambiguous = ~(move < 0.5 * gap) & ~failed
        for i in np.flatnonzero(ambiguous):
            try:
                nearest[i] = _refine_step(
                    coeff_fn, complex(path[j - 1, i]), complex(b[i]), complex(path[j, i])
                )
            except BranchPointProximity:
                failed[i] = True
        b = np.where(failed, b, nearest)
    return b, failed
