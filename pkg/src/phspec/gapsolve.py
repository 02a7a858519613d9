"""Gap-equation solver for an arbitrary invertible diagonal metric.

Two coupled unknowns describe the averaged resolvent of phi = A*B at a
point w of the complex plane:

* the order parameter a = i*alpha, nonzero exactly where complex
  eigenvalues condense (the non-holomorphic region D), and
* the generalized self-energy b, holomorphic outside D, pure imaginary
  i*beta inside.

Outside D the self-consistency collapses to a single equation for b,

    m^2 b + (1/N) tr 1/(b + w B^{-1}) = 0,

an algebraic equation of degree d+1 for a metric with d distinct
eigenvalues (transcendental for continuum metrics).  The physical
branch is fixed by continuation from the large-|w| asymptote
b ~ -(tr B / N)/(m^2 w); if tr B = 0, the branch on the component of
the holomorphic region containing infinity is b = 0 identically.

Inside D the unknowns (alpha^2, beta) solve two real equations,

    (1/(N m^2)) tr 1/(|i beta + w B^{-1}|^2 + alpha^2) = 1,
    tr B^{-1} / (|i beta + w B^{-1}|^2 + alpha^2) = 0,

handled by a damped (Armijo-backtracked) Newton iteration on the
sign-free unknowns (alpha^2, beta); ``alpha^2 <= 0`` at convergence is
the clean no-solution exit that marks w as holomorphic.

Both phases satisfy one unified identity through the map argument
zeta:  w G = zeta G_B(zeta) = 1 + m^2 (a^2 + b^2).  ``unified_check``
evaluates it as an independent residual against the metric's Cauchy
transform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _roots
from . import metric as metric_mod
from .metric import FlatContinuum, Metric

HOLOMORPHIC = "holomorphic"
NONHOLOMORPHIC = "nonholomorphic"

PATH_STEPS = 128
START_RADIUS_FACTOR = 100.0
NEWTON_TOL = 1e-10
NEWTON_STEP_TOL = 1e-12
NEWTON_MAX_ITER = 50
NEWTON_RESTARTS = 4
TRACELESS_TOL = 1e-14
FLAT_QUAD_NODES = 64

BranchPointProximity = _roots.BranchPointProximity


class GapSolveError(RuntimeError):
    pass


@dataclass
class GapSolution:
    """Solved gap-equation data at one point w."""

    w: complex
    phase: str
    b: complex                    # i*beta in the non-holomorphic phase
    alpha: float                  # Im a >= 0; zero in the holomorphic phase
    beta: float                   # Im b
    zeta: complex                 # map argument feeding G_B (inf when b = 0)
    green: complex
    residual: float
    note: str = ""

    @property
    def alpha2(self) -> float:
        return self.alpha * self.alpha

    @property
    def map_xi(self) -> float:
        """Imaginary part of the map argument (xi in the non-holomorphic phase)."""
        z = complex(self.zeta)
        return z.imag if np.isfinite(z) else np.inf


# ---------------------------------------------------------------------------
# holomorphic-phase polynomial
# ---------------------------------------------------------------------------

def _prod_coeffs(shifts: np.ndarray) -> np.ndarray:
    """Coefficients of prod_j (b + shifts[:, j]), highest power first."""
    npts = shifts.shape[0]
    coeffs = np.ones((npts, 1), dtype=complex)
    for j in range(shifts.shape[1]):
        nxt = np.zeros((npts, coeffs.shape[1] + 1), dtype=complex)
        nxt[:, :-1] = coeffs
        nxt[:, 1:] += shifts[:, j : j + 1] * coeffs
        coeffs = nxt
    return coeffs


def _holomorphic_poly(metric: Metric, w: np.ndarray, m: float) -> np.ndarray:
    """Cleared-denominator form of the holomorphic gap equation, per point."""
    vals, wts = metric_mod.atoms(metric)
    d = len(vals)
    shifts = w[:, None] / vals[None, :]
    poly = np.zeros((len(w), d + 2), dtype=complex)
    poly[:, :-1] += m * m * _prod_coeffs(shifts)           # m^2 b * prod_j
    for j in range(d):
        others = np.delete(shifts, j, axis=1)
        poly[:, 2:] += wts[j] * _prod_coeffs(others)       # degree d-1 terms
    return poly


# ---------------------------------------------------------------------------
# holomorphic phase
# ---------------------------------------------------------------------------

def _default_paths(w: np.ndarray, metric: Metric, m: float, steps: int) -> np.ndarray:
    """Geometric rays from far outside the spectrum down to each target."""
    start = START_RADIUS_FACTOR * max(
        2.0 * metric_mod.support_radius(metric) / m, float(np.max(np.abs(w)))
    )
    t = np.linspace(0.0, 1.0, steps + 1)[:, None]
    r = np.maximum(np.abs(w), 1e-12 * start)   # keep w = 0 off the division
    return (r[None, :] * (start / r)[None, :] ** (1.0 - t)) * np.exp(1j * np.angle(w))[None, :]


def _bh_residual(metric: Metric, w, b, m: float):
    """Residual of m^2 b + (1/N) tr 1/(b + w B^{-1})."""
    if metric_mod.is_atomic(metric):
        vals, wts = metric_mod.atoms(metric)
        tr = (wts[None, :] / (np.asarray(b)[..., None] + np.asarray(w)[..., None] / vals[None, :])).sum(axis=-1)
    else:
        mu, qw = _flat_nodes(metric)
        tr = (qw[None, :] * mu[None, :] / (mu[None, :] * np.asarray(b)[..., None] + np.asarray(w)[..., None])).sum(axis=-1)
    return m * m * np.asarray(b) + tr


def _bh_residual_deriv(metric: Metric, w, b, m: float):
    if metric_mod.is_atomic(metric):
        vals, wts = metric_mod.atoms(metric)
        dtr = -(wts[None, :] / (np.asarray(b)[..., None] + np.asarray(w)[..., None] / vals[None, :]) ** 2).sum(axis=-1)
    else:
        mu, qw = _flat_nodes(metric)
        dtr = -(qw[None, :] * mu[None, :] ** 2 / (mu[None, :] * np.asarray(b)[..., None] + np.asarray(w)[..., None]) ** 2).sum(axis=-1)
    return m * m + dtr


def _holomorphic_green(metric: Metric, w, b, m: float):
    """G = (1/N) tr 1/(b B + w) for the selected branch."""
    b = np.asarray(b)
    w = np.asarray(w)
    if metric_mod.is_atomic(metric):
        vals, wts = metric_mod.atoms(metric)
        return (wts[None, :] / (b[..., None] * vals[None, :] + w[..., None])).sum(axis=-1)
    mu, qw = _flat_nodes(metric)
    return (qw[None, :] / (b[..., None] * mu[None, :] + w[..., None])).sum(axis=-1)


def solve_holomorphic_batch(
    metric: Metric,
    w: np.ndarray,
    m: float = 1.0,
    paths: np.ndarray | None = None,
    steps: int = PATH_STEPS,
    polish: int = 3,
):
    """Branch-tracked holomorphic solutions over a batch of points.

    ``paths`` overrides the default straight-ray continuation with
    explicit waypoints (shape (L, len(w))); callers that know the
    geometry of the non-holomorphic region use this to route around it,
    since continuation through it can end on a wrong sheet.

    Returns (b, green, residual, collided) arrays; ``collided`` flags
    points whose track passed within COLLISION_TOL of another branch
    (branch-point proximity -- those values are not trustworthy).
    """
    w = np.asarray(w, dtype=complex).ravel()
    summ = metric_mod.summary(metric)
    if abs(summ.tr_b_over_n) <= TRACELESS_TOL:
        b = np.zeros_like(w)
        green = _holomorphic_green(metric, w, b, m)
        res = np.abs(_bh_residual(metric, w, b, m)) * 0.0  # b = 0 is exact
        return b, green, res, np.zeros(len(w), dtype=bool)

    if paths is None:
        paths = _default_paths(w, metric, m, steps)
    if not metric_mod.is_atomic(metric):
        return _solve_holomorphic_flat(metric, w, m, paths, polish)

    coeff_fn = lambda ws: _holomorphic_poly(metric, np.asarray(ws, complex), m)
    asym = -summ.tr_b_over_n / (m * m * paths[0])
    roots = _roots.roots_batch(coeff_fn(paths[0]))
    b0 = np.take_along_axis(
        roots, np.argmin(np.abs(roots - asym[:, None]), axis=-1)[:, None], axis=-1
    )[:, 0]
    b, collided = _roots.track(coeff_fn, paths, b0)
    for _ in range(polish):
        b = b - _bh_residual(metric, w, b, m) / _bh_residual_deriv(metric, w, b, m)
    green = _holomorphic_green(metric, w, b, m)
    res = np.abs(_bh_residual(metric, w, b, m))
    return b, green, res, collided


def _solve_holomorphic_flat(metric, w, m, paths, polish):
    """Warm-started Newton homotopy for the transcendental continuum case."""
    b = -metric_mod.summary(metric).tr_b_over_n / (m * m * paths[0])
    for j in range(paths.shape[0]):
        wj = paths[j]
        for _ in range(30):
            f = _bh_residual(metric, wj, b, m)
            step = f / _bh_residual_deriv(metric, wj, b, m)
            b = b - step
            if np.all(np.abs(step) < 1e-14 * (1.0 + np.abs(b))):
                break
    for _ in range(polish):
        b = b - _bh_residual(metric, w, b, m) / _bh_residual_deriv(metric, w, b, m)
    green = _holomorphic_green(metric, w, b, m)
    res = np.abs(_bh_residual(metric, w, b, m))
    return b, green, res, np.zeros(len(w), dtype=bool)


def solve_holomorphic(
    metric: Metric,
    w: complex,
    m: float = 1.0,
    paths: np.ndarray | None = None,
    steps: int = PATH_STEPS,
) -> GapSolution:
    """Holomorphic-phase solution at a single point.

    Raises BranchPointProximity when the continuation track cannot
    distinguish two branches (e.g. for w exactly on the real-eigenvalue
    band, where the physical b has a jump; evaluate side limits with an
    explicit +-i eps instead).
    """
    wa = np.array([w], dtype=complex)
    b, green, res, collided = solve_holomorphic_batch(metric, wa, m, paths=paths, steps=steps)
    if collided[0]:
        raise BranchPointProximity(f"branch collision on the continuation path to w={w}")
    return _package_holomorphic(metric, complex(w), complex(b[0]), complex(green[0]), float(res[0]), m)


def _package_holomorphic(metric, w, b, green, residual, m, note=""):
    zeta = complex(np.inf, np.inf) if b == 0 else -w / b
    return GapSolution(
        w=w, phase=HOLOMORPHIC, b=b, alpha=0.0, beta=b.imag,
        zeta=zeta, green=green, residual=residual, note=note,
    )


# ---------------------------------------------------------------------------
# non-holomorphic phase
# ---------------------------------------------------------------------------

_flat_node_cache: dict = {}


def _flat_nodes(metric: FlatContinuum):
    """Gauss-Legendre nodes/weights over the support, weights include rho."""
    key = (metric.mu1, metric.lminus, metric.mu2, metric.lplus)
    if key not in _flat_node_cache:
        base_x, base_w = np.polynomial.legendre.leggauss(FLAT_QUAD_NODES)
        nodes, weights = [], []
        for lo, hi in metric.segments():
            mid, half = (hi + lo) / 2.0, (hi - lo) / 2.0
            nodes.append(mid + half * base_x)
            weights.append(half * base_w * metric.density_value)
        _flat_node_cache[key] = (np.concatenate(nodes), np.concatenate(weights))
    return _flat_node_cache[key]


def _nh_terms(metric: Metric):
    """(mu, weight) pairs representing the eigenvalue density of B."""
    if metric_mod.is_atomic(metric):
        return metric_mod.atoms(metric)
    return _flat_nodes(metric)


def _nh_residual_jac(mu, wt, x, y, s, beta, m):
    """Residuals and Jacobian of the two real non-holomorphic equations.

    Uses the B^2-scaled form with denominator
    E = x^2 + (y + beta mu)^2 + s mu^2, positive for s > 0.
    """
    e = x * x + (y + beta * mu) ** 2 + s * mu * mu
    if np.any(e <= 0.0):
        return None, None, None
    f1 = (wt * mu * mu / e).sum() / (m * m) - 1.0
    f2 = (wt * mu / e).sum()
    de_db = 2.0 * mu * (y + beta * mu)
    j11 = -(wt * mu**4 / e**2).sum() / (m * m)
    j12 = -(wt * mu * mu * de_db / e**2).sum() / (m * m)
    j21 = -(wt * mu**3 / e**2).sum()
    j22 = -(wt * mu * de_db / e**2).sum()
    return np.array([f1, f2]), np.array([[j11, j12], [j21, j22]]), e


def _nh_radius_bound(metric: Metric, m: float) -> float:
    """Outer radius that can support a non-holomorphic solution.

    Any solution has |w|^2 * tr(B^{-2}(...))/N = 1 - m^2(alpha^2+beta^2) < 1
    with the trace bounded below by m^2/max(mu)^2, hence |w| < max|mu|/m.
    """
    return metric_mod.support_radius(metric) / m


def _nh_seeds(metric: Metric, x: float, y: float, m: float):
    s0 = 1.0 / (2.0 * m * m)
    tr = metric_mod.summary(metric).tr_b_over_n
    seeds = [(s0, 0.0)]
    if y != 0.0 and tr != 0.0:
        # continuation-root guess; exact for unit-modulus metric eigenvalues,
        # and valid on both sides of the boundary (s of either sign)
        b0 = tr / (2.0 * m * m * y)
        sg = 1.0 / (m * m) - x * x - y * y - b0 * b0
        seeds = [(sg, b0), (s0, b0), (s0, 0.0), (s0, -b0)]
    return seeds


def solve_nonholomorphic(metric: Metric, w: complex, m: float = 1.0) -> GapSolution | None:
    """Damped-Newton solve for (alpha^2, beta) at a point w.

    Returns None when no solution with alpha^2 > 0 exists (w is outside
    the non-holomorphic region) or when the iteration fails to converge
    from every start; the caller distinguishes those by attempting the
    holomorphic phase next.
    """
    x, y = float(np.real(w)), float(np.imag(w))
    mu, wt = _nh_terms(metric)
    if np.all(mu > 0) or np.all(mu < 0):
        return None  # definite metric: the trace equation has a fixed sign
    if abs(w) >= _nh_radius_bound(metric, m):
        return None
    if x == 0.0 and y == 0.0:
        # degenerate center point: the two equations collapse to one
        if abs((wt / mu).sum()) > 1e-12:
            return None
        return _package_nonholomorphic(metric, w, 1.0 / (m * m), 0.0, 0.0, m)
    best = None
    negatives = 0
    for s_init, b_init in _iter_seeds(metric, x, y, m):
        out = _newton_2d(mu, wt, x, y, s_init, b_init, m)
        if out is None:
            continue
        s, beta, res = out
        if res <= NEWTON_TOL and (best is None or res < best[2]):
            best = (s, beta, res)
            if s > 0:
                break
            negatives += 1
            if negatives >= 2:
                break  # two starts agree that the continuation root has alpha^2 <= 0
    if best is None:
        return None
    s, beta, res = best
    if s <= 0.0:
        return None
    return _package_nonholomorphic(metric, w, s, beta, res, m)


def solve_nonholomorphic_batch(metric: Metric, w: np.ndarray, m: float = 1.0):
    """Vectorized variant over a batch of points.

    Returns (s, beta, residual, success): ``success`` marks points with
    a converged alpha^2 > 0 solution; everything else belongs to the
    holomorphic phase or needs the scalar fallback.
    """
    w = np.asarray(w, dtype=complex).ravel()
    x, y = w.real.copy(), w.imag.copy()
    mu, wt = _nh_terms(metric)
    n = len(w)
    s = np.full(n, np.nan)
    beta = np.full(n, np.nan)
    res = np.full(n, np.inf)
    done = np.zeros(n, dtype=bool)
    if np.all(mu > 0) or np.all(mu < 0):
        return s, beta, res, done
    out_of_reach = np.abs(w) >= _nh_radius_bound(metric, m)
    s[out_of_reach] = -np.inf
    done[out_of_reach] = True

    tr = metric_mod.summary(metric).tr_b_over_n
    s0 = np.full(n, 1.0 / (2.0 * m * m))
    with np.errstate(divide="ignore", invalid="ignore"):
        b_guess = np.where(y != 0.0, tr / (2.0 * m * m * np.where(y != 0.0, y, 1.0)), 0.0)
    s_guess = 1.0 / (m * m) - x * x - y * y - b_guess * b_guess
    for s_seed, b_seed in ((s_guess, b_guess), (s0, b_guess), (s0, np.zeros(n)), (s0, -b_guess)):
        todo = ~done
        if not np.any(todo):
            break
        sj, bj, rj, ok = _newton_batch(mu, wt, x[todo], y[todo], s_seed[todo].copy(),
                                       b_seed[todo].copy(), m)
        idx = np.flatnonzero(todo)[ok]
        s[idx], beta[idx], res[idx] = sj[ok], bj[ok], rj[ok]
        done[idx] = True
    # scalar damped fallback for stragglers (rare)
    for i in np.flatnonzero(~done):
        sol = solve_nonholomorphic(metric, complex(w[i]), m)
        if sol is not None:
            s[i], beta[i], res[i], done[i] = sol.alpha2, sol.beta, sol.residual, True
        else:
            done[i] = True
            s[i] = -np.inf  # treated as non-solution below
    success = done & (s > 0.0) & (res <= NEWTON_TOL)
    return s, beta, res, success


def _newton_batch(mu, wt, x, y, s, beta, m, iters=40):
    """Lockstep Newton with positivity-guarded step halving."""
    n = len(x)
    act = np.ones(n, dtype=bool)
    mu2 = mu * mu
    res = np.full(n, np.inf)

    def fjac(s_, beta_, xa, ya):
        e = xa[:, None] ** 2 + (ya[:, None] + beta_[:, None] * mu) ** 2 + s_[:, None] * mu2
        bad = np.any(e <= 0.0, axis=1) | ~np.all(np.isfinite(e), axis=1)
        inv = np.where(e > 0.0, 1.0 / np.where(e > 0.0, e, 1.0), 0.0)
        f1 = (wt * mu2 * inv).sum(axis=1) / (m * m) - 1.0
        f2 = (wt * mu * inv).sum(axis=1)
        de_db = 2.0 * mu * (ya[:, None] + beta_[:, None] * mu)
        inv2 = inv * inv
        j11 = -(wt * mu2 * mu2 * inv2).sum(axis=1) / (m * m)
        j12 = -(wt * mu2 * de_db * inv2).sum(axis=1) / (m * m)
        j21 = -(wt * mu * mu2 * inv2).sum(axis=1)
        j22 = -(wt * mu * de_db * inv2).sum(axis=1)
        return f1, f2, j11, j12, j21, j22, bad

    for _ in range(iters):
        if not np.any(act):
            break
        ia = np.flatnonzero(act)
        f1, f2, j11, j12, j21, j22, bad = fjac(s[ia], beta[ia], x[ia], y[ia])
        norm = np.maximum(np.abs(f1), np.abs(f2))
        res[ia] = np.where(bad, np.inf, norm)
        conv = norm <= NEWTON_TOL
        act[ia[conv | bad]] = False
        ia = ia[~(conv | bad)]
        if len(ia) == 0:
            continue
        f1, f2 = f1[~(conv | bad)], f2[~(conv | bad)]
        det = j11[~(conv | bad)] * j22[~(conv | bad)] - j12[~(conv | bad)] * j21[~(conv | bad)]
        sing = np.abs(det) < 1e-300
        det = np.where(sing, 1.0, det)
        ds = (-f1 * j22[~(conv | bad)] + f2 * j12[~(conv | bad)]) / det
        db = (-f2 * j11[~(conv | bad)] + f1 * j21[~(conv | bad)]) / det
        ds[sing] = 0.0
        db[sing] = 0.0
        act[ia[sing]] = False
        # step halving until the denominators stay positive and residual drops
        t = np.ones(len(ia))
        phi0 = f1 * f1 + f2 * f2
        for _ in range(12):
            cs, cb = s[ia] + t * ds, beta[ia] + t * db
            g1, g2, *_rest, bad2 = fjac(cs, cb, x[ia], y[ia])
            worse = bad2 | (g1 * g1 + g2 * g2 > phi0)
            if not np.any(worse):
                break
            t = np.where(worse, t / 2.0, t)
        s[ia] = s[ia] + t * ds
        beta[ia] = beta[ia] + t * db
    ok = res <= NEWTON_TOL
    return s, beta, res, ok


def _iter_seeds(metric, x, y, m):
    seeds = list(_nh_seeds(metric, x, y, m))
    for k in range(NEWTON_RESTARTS):
        fac = 1.0 + 0.35 * (k + 1)
        seeds.extend((s * fac, b / fac) for (s, b) in _nh_seeds(metric, x, y, m))
    return seeds


def _newton_2d(mu, wt, x, y, s, beta, m):
    v = np.array([s, beta], dtype=float)
    f, jac, _ = _nh_residual_jac(mu, wt, x, y, v[0], v[1], m)
    if f is None:
        return None
    for _ in range(NEWTON_MAX_ITER):
        norm = np.max(np.abs(f))
        if norm <= NEWTON_TOL:
            return v[0], v[1], norm
        try:
            step = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            return None
        phi0 = float(f @ f)
        t = 1.0
        while t >= 2.0**-24:
            cand = v + t * step
            fc, jc, _ = _nh_residual_jac(mu, wt, x, y, cand[0], cand[1], m)
            if fc is not None and float(fc @ fc) <= phi0 * (1.0 - 1e-4 * t):
                v, f, jac = cand, fc, jc
                break
            t /= 2.0
        else:
            return None
        if np.max(np.abs(t * step)) < NEWTON_STEP_TOL * (1.0 + np.max(np.abs(v))):
            norm = np.max(np.abs(f))
            return (v[0], v[1], norm) if norm <= NEWTON_TOL else None
    norm = np.max(np.abs(f))
    return (v[0], v[1], norm) if norm <= NEWTON_TOL else None


def _package_nonholomorphic(metric, w, s, beta, res, m):
    x, y = float(np.real(w)), float(np.imag(w))
    mu, wt = _nh_terms(metric)
    e = x * x + (y + beta * mu) ** 2 + s * mu * mu
    green = complex(np.conj(w) * (wt / e).sum())
    denom = s + beta * beta
    xi = np.sqrt(s * (x * x + y * y) + beta * beta * x * x) / denom
    zeta = complex(-beta * y / denom, xi)
    return GapSolution(
        w=complex(w), phase=NONHOLOMORPHIC, b=complex(0.0, beta),
        alpha=float(np.sqrt(s)), beta=float(beta), zeta=zeta,
        green=green, residual=float(res),
    )


# ---------------------------------------------------------------------------
# phase classification, boundary, densities, identities
# ---------------------------------------------------------------------------

def classify_phase(metric: Metric, w: complex, m: float = 1.0,
                   paths: np.ndarray | None = None) -> GapSolution:
    """Non-holomorphic solve first; holomorphic fallback.

    For w exactly on the real axis inside the holomorphic cut the
    branch is ambiguous; the upper side limit is returned and noted on
    the solution.
    """
    sol = solve_nonholomorphic(metric, w, m)
    if sol is not None:
        return sol
    try:
        return solve_holomorphic(metric, w, m, paths=paths)
    except BranchPointProximity:
        if float(np.imag(w)) == 0.0:
            # Side limit just above the cut.  The offset leans mostly along
            # the real axis so the continuation ray keeps a tiny angle and
            # stays in the eigenvalue-free cone around the axis.
            eps = 1e-9 * max(1.0, 2.0 * metric_mod.support_radius(metric) / m)
            shift = eps * (1.0 if float(np.real(w)) >= 0.0 else -1.0)
            side = solve_holomorphic(metric, complex(w) + shift + 1j * eps * 1e-3, m)
            side.w = complex(w)
            side.note = "real-axis cut: upper side limit"
            return side
        raise


def classify_grid(metric: Metric, w, m: float = 1.0, paths_fn=None) -> list[GapSolution]:
    """Classify a batch of points, batching each phase's solver.

    ``paths_fn(w_subset) -> (L, len(w_subset))`` optionally supplies
    blob-avoiding continuation waypoints for the holomorphic leftover
    points (used when the caller knows the geometry, e.g. signature
    metrics).  Points exactly on a real-axis cut get upper side limits,
    marked in ``note``.
    """
    w = np.asarray(w, dtype=complex).ravel()
    out: list[GapSolution | None] = [None] * len(w)
    s, beta, res, success = solve_nonholomorphic_batch(metric, w, m)
    for i in np.flatnonzero(success):
        out[i] = _package_nonholomorphic(metric, complex(w[i]), s[i], beta[i], res[i], m)
    rest = np.flatnonzero(~success)
    # exact real-axis points may sit on a cut; handle them one by one
    on_axis = rest[np.imag(w[rest]) == 0.0]
    for i in on_axis:
        out[i] = classify_phase(metric, complex(w[i]), m)
    rest = rest[np.imag(w[rest]) != 0.0]
    if len(rest):
        wr = w[rest]
        paths = paths_fn(wr) if paths_fn is not None else None
        b, green, hres, collided = solve_holomorphic_batch(metric, wr, m, paths=paths)
        for k, i in enumerate(rest):
            if not collided[k]:
                out[i] = _package_holomorphic(metric, complex(wr[k]), complex(b[k]),
                                              complex(green[k]), float(hres[k]), m)
            else:
                out[i] = classify_phase(metric, complex(wr[k]), m)  # cut side limit
    return out


def phase_boundary(metric: Metric, thetas, m: float = 1.0,
                   r_max: float | None = None, scan: int = 64,
                   tol: float = 1e-9) -> list[tuple[float, list[float]]]:
    """Radial crossings of the phase boundary along each direction.

    Scans r on each ray for changes of non-holomorphic solvability and
    bisects every bracket to ``tol``.  Rays that never enter the
    non-holomorphic region contribute an empty crossing list.
    """
    if r_max is None:
        r_max = 1.5 * (2.0 / m) * max(metric_mod.support_radius(metric), 1.0)
    out = []
    for theta in np.atleast_1d(thetas):
        e = np.exp(1j * float(theta))
        rs = np.linspace(r_max / scan, r_max, scan)
        inside = np.array([solve_nonholomorphic(metric, r * e, m) is not None for r in rs])
        crossings = []
        for i in np.flatnonzero(inside[:-1] != inside[1:]):
            lo, hi = rs[i], rs[i + 1]
            flo = inside[i]
            while hi - lo > tol:
                mid = (lo + hi) / 2.0
                if (solve_nonholomorphic(metric, mid * e, m) is not None) == flo:
                    lo = mid
                else:
                    hi = mid
            crossings.append((lo + hi) / 2.0)
        out.append((float(theta), crossings))
    return out


def rho2_numeric(metric: Metric, xs: np.ndarray, ys: np.ndarray, m: float = 1.0):
    """Pair density by Gauss's law: rho = (1/pi) Re[(dG/dx + i dG/dy)/2].

    Every grid point (and thus a one-cell margin around the returned
    interior) must solve in the non-holomorphic phase; a point that
    does not means the grid touches the phase boundary and is refused.
    """
    xs = np.asarray(xs, float)
    ys = np.asarray(ys, float)
    g = np.empty((len(xs), len(ys)), dtype=complex)
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            sol = solve_nonholomorphic(metric, complex(x, y), m)
            if sol is None:
                raise GapSolveError(
                    f"grid point ({x}, {y}) is not interior to the non-holomorphic region"
                )
            g[i, j] = sol.green
    hx = xs[1] - xs[0]
    hy = ys[1] - ys[0]
    gx = (g[2:, 1:-1] - g[:-2, 1:-1]) / (2.0 * hx)
    gy = (g[1:-1, 2:] - g[1:-1, :-2]) / (2.0 * hy)
    rho = ((gx + 1j * gy) / 2.0 / np.pi).real
    return xs[1:-1], ys[1:-1], rho


def unified_check(sol: GapSolution, metric: Metric, m: float = 1.0) -> float:
    """Residual of the unified identity w G = zeta G_B(zeta) = 1 + m^2(a^2+b^2)."""
    if sol.phase == NONHOLOMORPHIC:
        ab2 = -(sol.alpha2 + sol.beta**2)
    else:
        ab2 = complex(sol.b) ** 2
    rhs = 1.0 + m * m * ab2
    if not np.isfinite(sol.zeta):
        zg = 1.0 + 0.0j   # b = 0 branch: zeta at infinity, zeta*G_B -> 1
    else:
        zg = sol.zeta * metric_mod.green_b(metric, sol.zeta)
    return float(max(abs(zg - rhs), abs(sol.w * sol.green - zg)))


def island_green(curve: np.ndarray, ibeta: np.ndarray, w: complex) -> complex:
    """Cauchy reconstruction b(w) = (1/2 pi i) oint i*beta(w')/(w - w') dw'.

    ``curve`` samples a closed boundary of a holomorphic island (no
    repeated endpoint; traversal must keep the island on the left of
    the kernel's orientation, i.e. clockwise for this kernel sign) and
    ``ibeta`` holds the matching boundary values.  Trapezoidal rule on
    the closed polyline; returns ~0 for w outside the island.
    """
    curve = np.asarray(curve, dtype=complex)
    ibeta = np.asarray(ibeta, dtype=complex)
    if curve.shape != ibeta.shape or curve.ndim != 1 or len(curve) < 3:
        raise ValueError("curve and boundary values must be matching 1-d arrays")
    if np.abs(curve[0] - curve[-1]) < 1e-12 * np.max(np.abs(curve)):
        curve, ibeta = curve[:-1], ibeta[:-1]
    gaps = np.abs(np.diff(np.concatenate([curve, curve[:1]])))
    diameter = np.max(np.abs(curve[:, None] - curve[None, ::7]))
    if np.max(gaps) > 0.25 * diameter:
        raise ValueError("curve does not look closed (a gap is comparable to its diameter)")
    dw = (np.roll(curve, -1) - np.roll(curve, 1)) / 2.0
    return complex(np.sum(ibeta * dw / (w - curve)) / (2j * np.pi))
