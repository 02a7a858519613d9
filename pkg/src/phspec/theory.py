"""Closed-form large-N spectral predictions for the signature metric.

For B = diag(+1...+1, -1...-1) with a fraction ``lam`` of plus-ones the
large-N spectrum of phi = A*B consists of

* real eigenvalues with density ``rho_real`` on the band
  [-band_edge, band_edge], carrying total mass |1-2 lam|, and
* complex-conjugate pairs filling two mirror-image blobs with the
  uniform density m^2/pi; each blob is bounded by the two polar arcs
  ``boundary_radii`` and the blob fraction is nu = 1 - |1-2 lam|.

The averaged resolvent G(w) is algebraic: in the region free of
complex eigenvalues it is built from the root b(w) of the cubic

    m^2 b^3 + (1 - m^2 w^2) b + w (1 - 2 lam) = 0

selected by continuity with the large-|w| branch b ~ (1-2 lam)/(m^2 w),
and inside the blobs it takes the non-holomorphic value m^2 conj(w).

Root selection is done by numerical continuation along a path that
stays inside the holomorphic region.  A straight ray from infinity is
used whenever it avoids the blobs; for points lying between a blob and
the real axis the path first descends inside the eigenvalue-free cone
around the real axis and then swings along a circular arc at the
target radius.  (A straight ray through a blob can land on a wrong
sheet: the sewing corners of the blob boundary are branch points of
the cubic, and continuation around them is path dependent.  The
matching condition is continuity of b with i*beta on the blob
boundary, which the cone-and-arc path respects.)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _roots

DEFAULT_PATH_STEPS = 64
START_RADIUS_FACTOR = 100.0   # continuation starts at 100/m


def _check(lam: float, m: float):
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lam must be in [0, 1], got {lam}")
    if not m > 0:
        raise ValueError(f"m must be positive, got {m}")


def sin_theta0(lam: float) -> float:
    """Sine of the half-opening angle of the eigenvalue-free cone."""
    return abs(2.0 * lam - 1.0)


def band_edge(lam: float, m: float = 1.0) -> float:
    """Endpoint x0 > 0 of the real-eigenvalue band [-x0, x0].

    Reduces to the semicircle edge 2/m at lam = 0 or 1 and to 1/m at
    lam = 1/2; in between it is the point where the cubic discriminant
    changes sign on the real axis.
    """
    _check(lam, m)
    s = 2.0 * np.sqrt(lam * (1.0 - lam))
    inner = 3.0 * abs(1.0 - 2.0 * lam) ** (2.0 / 3.0) * (
        (1.0 - s) ** (1.0 / 3.0) + (1.0 + s) ** (1.0 / 3.0)
    ) + 2.0
    return float(np.sqrt(inner / (2.0 * m * m)))


@dataclass(frozen=True)
class SignatureTheory:
    """All closed-form spectral data of one signature metric in one place."""

    lam: float
    m: float
    sin_theta0: float
    theta0: float
    x0: float
    nu: float

    @classmethod
    def build(cls, lam: float, m: float = 1.0) -> "SignatureTheory":
        _check(lam, m)
        s0 = sin_theta0(lam)
        return cls(lam=lam, m=m, sin_theta0=s0, theta0=float(np.arcsin(s0)),
                   x0=band_edge(lam, m), nu=1.0 - abs(1.0 - 2.0 * lam))


@dataclass(frozen=True)
class CubicData:
    """Real-axis discriminant data of the branch cubic.

    ``delta`` is positive inside the band (one real root and a
    conjugate pair) and negative outside (three real roots); ``xi``
    is the odd-in-x auxiliary entering the real density formula.
    """

    xi: float
    delta: float


def cubic_data(x: float, lam: float, m: float = 1.0) -> CubicData:
    _check(lam, m)
    xi = -27.0 * m**4 * (1.0 - 2.0 * lam) * x
    delta = xi * xi + 108.0 * m**6 * (1.0 - m * m * x * x) ** 3
    return CubicData(xi=float(xi), delta=float(delta))


def rho_real(x, lam: float, m: float = 1.0):
    """Density of real eigenvalues on the band, 0 outside and at lam=1/2.

    The central value is m|1-2 lam|/pi; the closed form has a 0/0 at
    x = 0 which is replaced by its analytic limit for |m x| < 1e-7.
    Integrates to |1-2 lam| over the band.
    """
    _check(lam, m)
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.zeros_like(x)
    if lam != 0.5:
        x0 = band_edge(lam, m)
        inside = np.abs(x) < x0
        small = inside & (np.abs(m * x) < 1e-7)
        gen = inside & ~small
        if np.any(gen):
            xg = x[gen]
            xi = -27.0 * m**4 * (1.0 - 2.0 * lam) * xg
            delta = xi * xi + 108.0 * m**6 * (1.0 - m * m * xg * xg) ** 3
            root = np.sqrt(delta)   # delta > 0 inside the band
            num = np.abs(xi - root) ** (2.0 / 3.0) - np.abs(xi + root) ** (2.0 / 3.0)
            out[gen] = np.sign(1.0 - 2.0 * lam) * num / (
                np.sqrt(3.0) * 2.0 ** (2.0 / 3.0) * 6.0 * np.pi * m * m * xg
            )
        out[small] = m * abs(1.0 - 2.0 * lam) / np.pi
    return float(out[0]) if scalar else out


def boundary_radii(theta: float, lam: float, m: float = 1.0):
    """Inner and outer radius (r_minus, r_plus) of the blob boundary.

    Defined for directions with sin^2 theta >= sin^2 theta0; returns
    None elsewhere (the ray misses the blobs).  The two arcs join at
    equality, where both radii equal 1/(sqrt(2) m).
    """
    _check(lam, m)
    s0 = sin_theta0(lam)
    st2 = np.sin(theta) ** 2
    if st2 < s0 * s0 or st2 == 0.0:
        return None
    disc = np.sqrt(max(1.0 - (s0 * s0) / st2, 0.0))
    r_minus = np.sqrt((1.0 - disc) / 2.0) / m
    r_plus = np.sqrt((1.0 + disc) / 2.0) / m
    return float(r_minus), float(r_plus)


def alpha_sq(w: complex, lam: float, m: float = 1.0) -> tuple[float, float]:
    """Order parameter alpha^2 and the auxiliary beta at a point w.

    alpha^2 > 0 exactly when w lies inside a blob; beta is the
    imaginary part of b there.  Undefined on the real axis unless
    lam = 1/2 (beta has a simple pole in y).
    """
    _check(lam, m)
    x, y = float(np.real(w)), float(np.imag(w))
    if y == 0.0:
        if lam != 0.5:
            raise ValueError("alpha_sq is undefined at Im w = 0 for lam != 1/2")
        beta = 0.0
    else:
        beta = (2.0 * lam - 1.0) / (2.0 * m * m * y)
    a2 = 1.0 / (m * m) - (x * x + y * y + beta * beta)
    return a2, beta


def in_blobs(w, lam: float, m: float = 1.0):
    """Whether w lies strictly inside the complex-eigenvalue region."""
    w = np.asarray(w, dtype=complex)
    scalar = w.ndim == 0
    w = np.atleast_1d(w)
    x, y = w.real, w.imag
    with np.errstate(divide="ignore"):
        beta = np.where(y != 0.0, (2.0 * lam - 1.0) / (2.0 * m * m * np.where(y != 0, y, 1.0)), np.inf)
    if lam == 0.5:
        beta = np.zeros_like(x)
    a2 = 1.0 / (m * m) - (x * x + y * y + beta * beta)
    res = a2 > 0.0
    return bool(res[0]) if scalar else res


def blob_area_and_nu(lam: float, m: float = 1.0) -> tuple[float, float]:
    """Total blob area and the complex-eigenvalue fraction nu."""
    _check(lam, m)
    nu = 1.0 - abs(1.0 - 2.0 * lam)
    return nu * np.pi / (m * m), nu


def green_nonholomorphic(w, m: float = 1.0):
    """Resolvent inside the blobs: G = m^2 conj(w).

    Its conjugate-w derivative over pi is the uniform pair density
    m^2/pi.  Only meaningful for w inside the blobs; the caller is
    responsible for membership (see ``in_blobs``).
    """
    return m * m * np.conj(w)


def semicircle_density(x, m: float = 1.0):
    """Semicircle density (m^2/2 pi) sqrt(4/m^2 - x^2) on |x| <= 2/m."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    arg = 4.0 / (m * m) - x * x
    out = np.where(arg > 0, m * m / (2.0 * np.pi) * np.sqrt(np.maximum(arg, 0.0)), 0.0)
    return float(out[0]) if scalar else out


def semicircle_cdf(x, m: float = 1.0):
    """Closed-form CDF of the semicircle law."""
    x = np.clip(np.asarray(x, dtype=float), -2.0 / m, 2.0 / m)
    return 0.5 + m * m / (4.0 * np.pi) * x * np.sqrt(4.0 / (m * m) - x * x) \
        + np.arcsin(m * x / 2.0) / np.pi


def gue_green(w, m: float = 1.0):
    """Resolvent of the hermitian reference ensemble (lam in {0,1}).

    G(w) = (m^2/2)(w - sqrt(w^2 - 4/m^2)), branch fixed by G ~ 1/w at
    infinity; implemented as sqrt(w-2/m)*sqrt(w+2/m) with principal
    square roots so the only cut is the eigenvalue band itself.
    """
    w = np.asarray(w, dtype=complex)
    root = np.sqrt(w - 2.0 / m) * np.sqrt(w + 2.0 / m)
    return m * m / 2.0 * (w - root)


# ---------------------------------------------------------------------------
# branch-tracked cubic
# ---------------------------------------------------------------------------

def _cubic_coeff_fn(lam: float, m: float):
    """Coefficient builder for m^2 b^3 + (1 - m^2 w^2) b + w(1-2 lam) = 0."""

    def fn(w):
        w = np.asarray(w, dtype=complex)
        c = np.empty((len(w), 4), dtype=complex)
        c[:, 0] = m * m
        c[:, 1] = 0.0
        c[:, 2] = 1.0 - m * m * w * w
        c[:, 3] = w * (1.0 - 2.0 * lam)
        return c

    return fn


def continuation_paths(w: np.ndarray, lam: float, m: float,
                       steps: int = DEFAULT_PATH_STEPS) -> np.ndarray:
    """Per-point blob-avoiding paths from the start radius, shape (L, n).

    Ray-only where the straight ray stays clear of the blobs; cone ray
    plus circular arc for targets below a blob.  Also usable as the
    explicit-waypoint input of the generic gap solver when it runs on
    a signature metric.
    """
    theta = np.angle(w)
    s0 = sin_theta0(lam)
    start_r = START_RADIUS_FACTOR / m
    r = np.maximum(np.abs(w), 1e-12 * start_r)   # keep w = 0 off the division

    needs_arc = np.zeros(w.shape, dtype=bool)
    if s0 < 1.0:
        st2 = np.sin(theta) ** 2
        covered = st2 > s0 * s0          # ray direction crosses the blob sector
        with np.errstate(invalid="ignore", divide="ignore"):
            disc = np.sqrt(np.maximum(1.0 - (s0 * s0) / np.where(covered, st2, 1.0), 0.0))
        r_minus = np.sqrt((1.0 - disc) / 2.0) / m
        needs_arc = covered & (r < r_minus)

    # launch angle inside the cone, on the same side and half as the target
    theta_c = np.where(
        np.abs(theta) <= np.pi / 2.0,
        np.sign(theta) * s0_half_angle(lam),
        np.sign(theta) * (np.pi - s0_half_angle(lam)),
    )
    theta_start = np.where(needs_arc, theta_c, theta)

    t = np.linspace(0.0, 1.0, steps + 1)[:, None]
    radii = r[None, :] * (start_r / r)[None, :] ** (1.0 - t)       # geometric descent
    ray = radii * np.exp(1j * theta_start)[None, :]
    angles = theta_start[None, :] + t * (theta - theta_start)[None, :]
    arc = r[None, :] * np.exp(1j * angles)
    return np.concatenate([ray, arc], axis=0)


def s0_half_angle(lam: float) -> float:
    """Half the cone opening angle (angle of the mid-cone launch ray)."""
    return 0.5 * np.arcsin(sin_theta0(lam)) if sin_theta0(lam) < 1.0 else 0.25 * np.pi


def holomorphic_b(w, lam: float, m: float = 1.0, steps: int = DEFAULT_PATH_STEPS):
    """Branch b(w) of the cubic continued from the large-|w| asymptote.

    Valid for w outside the blobs and off the real band (use explicit
    +-i eps offsets for band side limits).  For lam = 1/2 the traceless
    metric forces b = 0 identically outside the disk.
    """
    _check(lam, m)
    w = np.asarray(w, dtype=complex)
    scalar = w.ndim == 0
    w = np.atleast_1d(w).ravel()
    if lam == 0.5:
        out = np.zeros_like(w)
        return complex(out[0]) if scalar else out
    if np.any(in_blobs(w, lam, m)):
        raise ValueError("holomorphic branch requested inside the blobs")
    fn = _cubic_coeff_fn(lam, m)
    path = continuation_paths(w, lam, m, steps)
    roots0 = _roots.roots_batch(fn(path[0]))
    asym = (1.0 - 2.0 * lam) / (m * m * path[0])
    b0 = np.take_along_axis(
        roots0, np.argmin(np.abs(roots0 - asym[:, None]), axis=-1)[:, None], axis=-1
    )[:, 0]
    b, failed = _roots.track(fn, path, b0)
    if np.any(failed):
        raise _roots.BranchPointProximity(
            f"branch tracking failed at {w[failed][:3]} (first few shown)"
        )
    return complex(b[0]) if scalar else b


def green_holomorphic(w, lam: float, m: float = 1.0, steps: int = DEFAULT_PATH_STEPS):
    """Resolvent G(w) outside the blobs, G = lam/(b+w) - (1-lam)/(b-w).

    Satisfies w G = 1 + m^2 b^2 and G ~ 1/w at infinity; for lam = 1/2
    it is exactly 1/w outside the disk.
    """
    w = np.asarray(w, dtype=complex)
    scalar = w.ndim == 0
    wv = np.atleast_1d(w).ravel()
    b = np.atleast_1d(holomorphic_b(wv, lam, m, steps))
    g = lam / (b + wv) - (1.0 - lam) / (b - wv)
    return complex(g[0]) if scalar else g.reshape(w.shape)


def rho_real_via_discontinuity(x, lam: float, m: float = 1.0, epsilon: float | None = None):
    """Real-axis density from the resolvent jump across the band.

    Evaluates (1/2 pi) Im[G(x - i eps) - G(x + i eps)] and applies one
    Richardson step in eps to remove the leading linear error.  This is
    a cross-check of ``rho_real``, not the primary path.
    """
    _check(lam, m)
    if epsilon is None:
        epsilon = 1e-6 / m
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    xv = np.atleast_1d(x).ravel()

    def jump(eps):
        gm = np.atleast_1d(green_holomorphic(xv - 1j * eps, lam, m))
        gp = np.atleast_1d(green_holomorphic(xv + 1j * eps, lam, m))
        return (gm - gp).imag / (2.0 * np.pi)

    v1 = jump(epsilon)
    v2 = jump(epsilon / 2.0)
    out = 2.0 * v2 - v1
    return float(out[0]) if scalar else out.reshape(x.shape)


def real_band_cdf(lam: float, m: float = 1.0, grid: int = 20001):
    """CDF of the real-eigenvalue density conditioned on being real.

    Returns a callable F with F(-x0) = 0 and F(x0) = 1, built by
    trapezoidal accumulation of ``rho_real`` on a fine grid.  Undefined
    at lam = 1/2 where the density vanishes identically.
    """
    _check(lam, m)
    if lam == 0.5:
        raise ValueError("real density is identically zero at lam = 1/2")
    x0 = band_edge(lam, m)
    xs = np.linspace(-x0, x0, grid)
    rho = rho_real(xs, lam, m)
    cum = np.concatenate([[0.0], np.cumsum((rho[1:] + rho[:-1]) / 2.0 * np.diff(xs))])
    cum /= cum[-1]

    def cdf(x):
        return np.interp(np.asarray(x, dtype=float), xs, cum, left=0.0, right=1.0)

    return cdf


def boundary_curve(lam: float, m: float = 1.0, num: int = 721) -> np.ndarray:
    """Closed polyline tracing the upper blob boundary, as complex points.

    Runs along the outer arc from the low-angle sewing corner to the
    high-angle one and back along the inner arc.  Empty for lam in
    {0, 1} (no blobs).
    """
    _check(lam, m)
    if lam in (0.0, 1.0):
        return np.empty(0, dtype=complex)
    s0 = sin_theta0(lam)
    th0 = np.arcsin(s0)
    thetas = np.linspace(th0, np.pi - th0, num)
    if s0 == 0.0:
        return (np.exp(1j * thetas) / m).astype(complex)
    with np.errstate(invalid="ignore"):
        disc = np.sqrt(np.maximum(1.0 - (s0 / np.sin(thetas)) ** 2, 0.0))
    r_plus = np.sqrt((1.0 + disc) / 2.0) / m
    r_minus = np.sqrt((1.0 - disc) / 2.0) / m
    outer = r_plus * np.exp(1j * thetas)
    inner = (r_minus * np.exp(1j * thetas))[::-1]
    return np.concatenate([outer, inner])
