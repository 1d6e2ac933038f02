"""Finite Blaschke products and the zero-to-critical-point correspondence.

A fixed-point-centered product of degree ``e + 1`` is determined by its free
zero divisor ``D`` (the zeros other than the fixed zero at the origin)::

    beta(z) = z * prod_q [ (1 - conj q) / (1 - q) * (z - q) / (1 - conj q z) ] ** nu(q)

so that ``beta(0) = 0`` and ``beta(1) = 1``.  The map ``D -> crit(beta(D))``
is a homeomorphism of ``Div_e`` of the open disk; :func:`psi_forward` and
:func:`psi_inverse` compute it in both directions and :func:`psi_bar` extends
it to divisors touching the unit circle.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment, root

from .divisor import BOUNDARY_TOL, Divisor, matching_distance, split_disk
from .errors import (
    BoundaryZero,
    CompactSetHitsEscapedSupport,
    ContinuationStalled,
    OneInEscapedSupport,
    PoleHit,
    ResidualTooLarge,
    RootFindingFailed,
    ValidationError,
)

FIXED_POINT_CENTERED = "fixed-point-centered"
ZEROS_CENTERED = "zeros-centered"
POLE_TOL = 1e-14
CLUSTER_TOL = 1e-7


class BlaschkeProduct:
    """``rotation * prod_k (z - a_k) / (1 - conj(a_k) z)`` over all zeros ``a_k``.

    ``zeros`` lists every zero with multiplicity, including the fixed zero at
    the origin of a fixed-point-centered product.  When ``rotation`` is
    omitted it is chosen so that the product sends 1 to 1.
    """

    def __init__(self, zeros: Iterable[complex], centering: str = FIXED_POINT_CENTERED, rotation: complex | None = None):
        zeros = np.asarray(list(zeros) if not isinstance(zeros, np.ndarray) else zeros, dtype=complex).ravel()
        if zeros.size == 0:
            raise ValidationError("a Blaschke product needs at least one zero")
        if np.any(np.abs(zeros) >= 1.0):
            raise BoundaryZero("all zeros must lie in the open unit disk")
        if centering not in (FIXED_POINT_CENTERED, ZEROS_CENTERED):
            raise ValidationError(f"unknown centering {centering!r}")
        self.zeros = zeros
        self.centering = centering
        if rotation is None:
            rotation = np.prod((1 - np.conj(zeros)) / (1 - zeros))
        self.rotation = complex(rotation)

    @property
    def degree(self) -> int:
        return int(self.zeros.size)

    @property
    def free_zeros(self) -> Divisor:
        """Zeros other than the fixed one at the origin (fixed-point-centered),
        or all zeros (zeros-centered)."""
        pts = list(self.zeros)
        if self.centering == FIXED_POINT_CENTERED:
            k = int(np.argmin(np.abs(self.zeros)))
            pts.pop(k)
        return Divisor.from_points(pts)

    def _factors(self, z: np.ndarray):
        a = self.zeros.reshape((-1,) + (1,) * z.ndim)
        den = 1 - np.conj(a) * z
        if np.any(np.abs(den) < POLE_TOL):
            raise PoleHit("evaluation point is a pole of the product")
        return (z - a) / den, den

    def eval(self, z):
        z_arr = np.asarray(z, dtype=complex)
        factors, _ = self._factors(z_arr)
        out = self.rotation * np.prod(factors, axis=0)
        return out if z_arr.ndim else complex(out)

    __call__ = eval

    def deriv(self, z):
        """Derivative via the product rule; exact at zeros as well."""
        z_arr = np.asarray(z, dtype=complex)
        factors, den = self._factors(z_arr)
        a = self.zeros.reshape((-1,) + (1,) * z_arr.ndim)
        dfac = (1 - np.abs(a) ** 2) / den**2
        n = factors.shape[0]
        ones = np.ones((1,) + factors.shape[1:], dtype=complex)
        prefix = np.cumprod(np.concatenate([ones, factors[:-1]]), axis=0)
        suffix = np.cumprod(np.concatenate([ones, factors[::-1][:-1]]), axis=0)[::-1]
        out = self.rotation * np.sum(dfac * prefix[:n] * suffix[:n], axis=0)
        return out if z_arr.ndim else complex(out)

    def numerator_denominator(self):
        """Descending coefficient arrays (P, Q) with beta = rotation * P / Q."""
        P = np.poly(self.zeros).astype(complex)
        return P, np.conj(P)[::-1]

    def __repr__(self) -> str:
        return f"BlaschkeProduct(degree={self.degree}, centering={self.centering!r}, zeros={np.round(self.zeros, 6).tolist()})"


def _automorphism_fixing_one(a: complex) -> Callable:
    unit = (1 - np.conj(a)) / (1 - a)
    return lambda z: unit * (z - a) / (1 - np.conj(a) * z)


def from_divisor(D: Divisor, centering: str = FIXED_POINT_CENTERED, tol: float = BOUNDARY_TOL) -> BlaschkeProduct:
    """Blaschke product with free zero divisor ``D``.

    The zeros-centered variant precomposes the fixed-point-centered product
    with the disk automorphism fixing 1 that moves the barycenter of the
    zeros to the origin.
    """
    pts = D.expanded()
    if pts.size and np.max(np.abs(pts)) >= 1 - tol:
        raise BoundaryZero(f"free zero on or outside the unit circle: {pts[np.argmax(np.abs(pts))]}")
    zeros = np.concatenate([[0j], pts])
    if centering == FIXED_POINT_CENTERED:
        return BlaschkeProduct(zeros, FIXED_POINT_CENTERED)
    if centering != ZEROS_CENTERED:
        raise ValidationError(f"unknown centering {centering!r}")

    def barycenter(x):
        h = _automorphism_fixing_one(complex(x[0], x[1]))
        s = np.sum(h(zeros))
        return [s.real, s.imag]

    start = np.mean(zeros)
    sol = root(barycenter, [start.real, start.imag], method="hybr", options={"xtol": 1e-15})
    a = complex(sol.x[0], sol.x[1])
    if abs(a) >= 1 or np.hypot(*barycenter(sol.x)) > 1e-12:
        raise RootFindingFailed("could not recenter the zeros")
    moved = _automorphism_fixing_one(a)(zeros)
    return BlaschkeProduct(moved, ZEROS_CENTERED)


def blaschke_eval(beta: BlaschkeProduct, z):
    return beta.eval(z)


def blaschke_deriv(beta: BlaschkeProduct, z):
    return beta.deriv(z)


def compose(outer: BlaschkeProduct, inner: BlaschkeProduct) -> BlaschkeProduct:
    """The Blaschke product ``outer o inner``, with its zeros solved explicitly."""
    P, Q = inner.numerator_denominator()
    zeros = []
    for a in outer.zeros:
        r = np.roots(inner.rotation * P - a * Q)
        if r.size != inner.degree:
            raise RootFindingFailed("lost roots while composing")
        zeros.extend(r)
    zeros = np.asarray(zeros)
    value_at_one = outer.eval(inner.eval(1.0 + 0j))
    rotation = value_at_one / np.prod((1 - zeros) / (1 - np.conj(zeros)))
    centering = FIXED_POINT_CENTERED if abs(outer.eval(inner.eval(0j))) < 1e-12 else ZEROS_CENTERED
    return BlaschkeProduct(zeros, centering, rotation)


def _critical_numerator_from_zeros(zeros: np.ndarray) -> np.ndarray:
    """Descending coefficients of P'Q - PQ' for beta = P/Q (up to rotation)."""
    P = np.poly(zeros).astype(complex)
    # ascending coefficients of prod(1 - conj(a) z) are the conjugated
    # descending coefficients of P
    Q = np.conj(P)[::-1]
    N = np.polysub(np.polymul(np.polyder(P), Q), np.polymul(P, np.polyder(Q)))
    N = np.atleast_1d(N)
    scale = np.max(np.abs(N))
    if scale == 0:
        raise RootFindingFailed("derivative numerator vanishes identically")
    # drop leading coefficients that are exactly cancelled
    k = 0
    while k < N.size - 1 and abs(N[k]) <= 1e-15 * scale:
        k += 1
    return N[k:]


def _interior_critical_points(zeros: np.ndarray) -> np.ndarray:
    n = zeros.size
    if n == 1:
        return np.zeros(0, complex)
    N = _critical_numerator_from_zeros(zeros)
    try:
        r = np.roots(N)
    except np.linalg.LinAlgError as exc:
        raise RootFindingFailed(str(exc)) from exc
    if not np.all(np.isfinite(r)):
        raise RootFindingFailed("non-finite critical point")
    r = r[np.argsort(np.abs(r))][: n - 1]
    if r.size != n - 1 or np.any(np.abs(r) >= 1 + 1e-9):
        raise RootFindingFailed("could not isolate the interior critical points")
    dN = np.polyder(N)
    scale = np.max(np.abs(N))
    for _ in range(2):
        val, der = np.polyval(N, r), np.polyval(dN, r)
        ok = np.abs(der) > 1e-8 * scale
        step = np.where(ok, val / np.where(ok, der, 1), 0)
        trial = r - step
        better = ok & (np.abs(step) < 1e-3) & (np.abs(np.polyval(N, trial)) <= np.abs(val))
        r = np.where(better, trial, r)
    return r


def critical_points(beta: BlaschkeProduct) -> np.ndarray:
    """Critical points inside the disk, repeated by multiplicity.

    Companion-matrix roots of the numerator of the derivative, followed by
    two guarded Newton steps.
    """
    return _interior_critical_points(beta.zeros)


def _merge_clusters(points: np.ndarray, tol: float = CLUSTER_TOL) -> Divisor:
    remaining = list(points)
    entries = []
    while remaining:
        p = remaining.pop(0)
        group = [p] + [q for q in remaining if abs(q - p) <= tol]
        remaining = [q for q in remaining if abs(q - p) > tol]
        entries.append((np.mean(group), len(group)))
    return Divisor.from_entries(entries)


def ramification_divisor(beta: BlaschkeProduct) -> Divisor:
    """Critical points in the disk counted with multiplicity ``deg - 1``."""
    return _merge_clusters(critical_points(beta))


def psi_forward(D: Divisor) -> Divisor:
    if D.degree == 0:
        return Divisor.empty()
    return ramification_divisor(from_divisor(D))


# ---- inverse by homotopy in symmetric-function coordinates -----------------

def _zeros_from_coeffs(s: np.ndarray) -> np.ndarray:
    # s holds s_1..s_e of the monic polynomial z^e + s_1 z^{e-1} + ... + s_e
    return np.roots(np.concatenate([[1.0], s]))


def _coeffs_from_points(pts: np.ndarray) -> np.ndarray:
    return np.poly(pts)[1:].astype(complex) if len(pts) else np.zeros(0, complex)


def _psi_coeffs(s: np.ndarray) -> np.ndarray | None:
    zeros = _zeros_from_coeffs(s)
    if np.any(np.abs(zeros) >= 1 - 1e-12):
        return None
    try:
        crit = _interior_critical_points(np.concatenate([[0j], zeros]))
    except RootFindingFailed:
        return None
    return _coeffs_from_points(crit)


def _to_real(c: np.ndarray) -> np.ndarray:
    return np.concatenate([c.real, c.imag])


def _to_complex(x: np.ndarray) -> np.ndarray:
    e = x.size // 2
    return x[:e] + 1j * x[e:]


def _fd_jacobian(x: np.ndarray, r: np.ndarray, target: np.ndarray):
    m = x.size
    J = np.empty((m, m))
    for k in range(m):
        h = 1e-7 * max(1.0, abs(x[k]))
        xp = x.copy()
        xp[k] += h
        Fp = _psi_coeffs(_to_complex(xp))
        if Fp is None:
            xp[k] -= 2 * h
            Fp = _psi_coeffs(_to_complex(xp))
            if Fp is None:
                return None
            h = -h
        J[:, k] = (_to_real(Fp - target) - r) / h
    return J


def _newton(s0: np.ndarray, target: np.ndarray, tol: float, max_iter: int = 15):
    """Quasi-Newton corrector in real coordinates.

    A forward-difference Jacobian at the start, Broyden rank-one updates
    afterwards.  Returns the converged coefficients or None.
    """
    x = _to_real(s0)
    F = _psi_coeffs(s0)
    if F is None:
        return None
    r = _to_real(F - target)
    scale = max(1.0, np.max(np.abs(target)))
    J = None
    for it in range(max_iter):
        if np.max(np.abs(r)) <= tol * scale:
            return _to_complex(x)
        if J is None:
            J = _fd_jacobian(x, r, target)
            if J is None:
                return None
        try:
            dx = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            return None
        lam = 1.0
        while lam > 1e-3:
            xn = x + lam * dx
            Fn = _psi_coeffs(_to_complex(xn))
            if Fn is not None:
                rn = _to_real(Fn - target)
                if np.max(np.abs(rn)) < np.max(np.abs(r)):
                    break
            lam /= 2
        else:
            if it and J is not None:
                J = None  # stale secant model, rebuild once
                continue
            return None
        step = xn - x
        J = J + np.outer(rn - r - J @ step, step) / (step @ step)
        x, r = xn, rn
    return _to_complex(x) if np.max(np.abs(r)) <= tol * scale else None


@dataclass
class ContinuationLog:
    steps: int = 0
    rejections: int = 0
    min_step: float = 1.0


def _snap_multiple_zeros(zeros: np.ndarray, target: np.ndarray, radius: float = 1e-4) -> Divisor:
    """Merge near-coincident zeros when that fits the critical coefficients no worse.

    A multiple zero is only recovered to about the square root of the
    coefficient accuracy, so clusters within ``radius`` are candidates.
    """
    raw = Divisor.from_points(zeros)
    merged = _merge_clusters(zeros, radius)
    if merged.degree != raw.degree or len(merged.points) == len(raw.points):
        return raw
    fit_raw = _psi_coeffs(_coeffs_from_points(raw.expanded()))
    fit_merged = _psi_coeffs(_coeffs_from_points(merged.expanded()))
    if fit_merged is None or fit_raw is None:
        return raw
    floor = 1e-13 * max(1.0, np.max(np.abs(target)))
    if np.max(np.abs(fit_merged - target)) <= max(np.max(np.abs(fit_raw - target)), floor):
        return merged
    return raw


def psi_inverse(R: Divisor, tol: float = 1e-8, log: ContinuationLog | None = None) -> Divisor:
    """The unique divisor ``D`` in the disk with ``psi_forward(D) == R``.

    Tracks the straight path ``t * R`` from ``t = 0`` (where the preimage is
    ``e * 0``) to ``t = 1``, with a secant predictor and a Newton corrector
    acting on the elementary symmetric functions of the zero set.
    """
    e = R.degree
    if e == 0:
        return Divisor.empty()
    crit_target = R.expanded()
    if np.any(np.abs(crit_target) >= 1):
        raise ValidationError("critical divisor must lie in the open unit disk")
    log = log if log is not None else ContinuationLog()
    # near e*0 the map is asymptotically linear: coefficient j (ascending) of the
    # critical polynomial equals (j + 1) / (e + 1) times that of the zero polynomial
    j = np.arange(e - 1, -1, -1)
    linear_gain = (j + 1) / (e + 1)

    t, s = 0.0, np.zeros(e, complex)
    prev: tuple[float, np.ndarray] | None = None
    h = 0.25
    while t < 1.0:
        h = min(h, 1.0 - t)
        t_new = t + h
        target = _coeffs_from_points(t_new * crit_target)
        if prev is None:
            guess = target / linear_gain
        else:
            t_prev, s_prev = prev
            guess = s + (s - s_prev) * (h / (t - t_prev))
        corrected = _newton(guess, target, tol=1e-13)
        if corrected is None:
            log.rejections += 1
            h /= 2
            log.min_step = min(log.min_step, h)
            if h < 1e-10:
                raise ContinuationStalled(f"step size underflow at t = {t:.6g}")
            continue
        prev = (t, s)
        t, s = t_new, corrected
        log.steps += 1
        h = min(2 * h, 0.5)
    D = _snap_multiple_zeros(_zeros_from_coeffs(s), _coeffs_from_points(crit_target))
    residual = matching_distance(psi_forward(D), R)
    if residual >= tol:
        raise ResidualTooLarge(f"critical divisor residual {residual:.3e}")
    return D


def psi_bar(D: Divisor, tol: float = BOUNDARY_TOL) -> Divisor:
    """Extension to the closed disk: interior part through ``psi_forward``,
    boundary part unchanged."""
    parts = split_disk(D, tol)
    return psi_forward(parts.interior) + parts.boundary


# ---- degeneration ---------------------------------------------------------

def escape_factor(b: complex, z):
    """Moebius factor ``(|b| / b) (b - z) / (1 - conj(b) z)`` with value ``|b|`` at 0."""
    z = np.asarray(z, dtype=complex)
    den = 1 - np.conj(b) * z
    if np.any(np.abs(den) < POLE_TOL):
        raise PoleHit("evaluation point is the pole of the factor")
    return abs(b) / b * (b - z) / den


def escape_identity(b: complex, z):
    """Closed form of ``escape_factor(b, z) - 1``."""
    z = np.asarray(z, dtype=complex)
    return (abs(b) - 1) * (b + z * abs(b)) / (b * (1 - np.conj(b) * z))


def moebius_escape_deviation(b: complex, z: complex) -> complex:
    """``escape_factor(b, z) - 1``, checked against its closed form."""
    if b == 0:
        raise ValidationError("b must be nonzero")
    direct = complex(escape_factor(b, z) - 1)
    closed = complex(escape_identity(b, z))
    if abs(direct - closed) > 1e-12 * max(1.0, abs(closed)):
        raise ResidualTooLarge(f"identity mismatch {abs(direct - closed):.3e}")
    return direct


@dataclass
class DegenerateLimit:
    surviving: BlaschkeProduct
    escaped: Divisor


@dataclass
class DegenerationReport:
    limit: DegenerateLimit
    ns: list[int]
    sup_deviation: list[float] = field(default_factory=list)
    identity_bound: list[float] = field(default_factory=list)
    sup_map_deviation: list[float] = field(default_factory=list)

    def rows(self):
        return list(zip(self.ns, self.sup_deviation))


def pullback_sequence(target: Divisor, n: int, tol: float = BOUNDARY_TOL) -> Divisor:
    """Interior part of ``target`` plus its boundary points scaled by ``1 - 1/n``."""
    parts = split_disk(target, tol)
    pulled = Divisor.from_entries((q * (1 - 1 / n), m) for q, m in parts.boundary.entries)
    return parts.interior + pulled


def degenerate_limit(
    target: Divisor,
    ns: Sequence[int],
    K: np.ndarray,
    sequence: Callable[[int], Divisor] | None = None,
    angular_tol: float = 1e-8,
    tol: float = BOUNDARY_TOL,
) -> DegenerationReport:
    """Convergence of ``beta(D_n)`` when boundary-bound zeros escape.

    For each ``n`` the zeros of ``D_n`` matched to boundary points of
    ``target`` contribute a factor ``prod escape_factor(b, z)``; the report
    records its sup-distance from 1 over the sample set ``K``, the bound
    obtained from the closed form of each factor, and the sup-distance
    between ``beta(D_n)`` and the limit product.
    """
    parts = split_disk(target, tol)
    escaped = parts.boundary
    for q in escaped.points:
        if abs(np.angle(q)) <= angular_tol:
            raise OneInEscapedSupport("1 lies in the support of the escaping divisor")
    K = np.asarray(K, dtype=complex).ravel()
    if escaped.degree and K.size:
        gap = np.min(np.abs(K[:, None] - np.asarray(escaped.points)[None, :]))
        if gap <= 1e-12:
            raise CompactSetHitsEscapedSupport("sample set meets the escaping support")
    limit_map = from_divisor(parts.interior)
    limit = DegenerateLimit(limit_map, escaped)
    seq = sequence or (lambda n: pullback_sequence(target, n, tol))
    report = DegenerationReport(limit, [int(n) for n in ns])
    tgt = target.expanded()
    on_circle = np.abs(np.abs(tgt) - 1) <= tol
    limit_vals = limit_map.eval(K)
    for n in report.ns:
        Dn = seq(n)
        if Dn.degree != target.degree:
            raise ValidationError("sequence degree differs from the target degree")
        pts = Dn.expanded()
        rows, cols = linear_sum_assignment(np.abs(pts[:, None] - tgt[None, :]))
        escaping = pts[rows[on_circle[cols]]]
        factor = np.ones_like(K)
        bound = np.ones(K.shape)
        for b in escaping:
            factor = factor * escape_factor(b, K)
            bound = bound * (1 + np.abs(escape_identity(b, K)))
        report.sup_deviation.append(float(np.max(np.abs(factor - 1))) if K.size else 0.0)
        report.identity_bound.append(float(np.max(bound - 1)) if K.size else 0.0)
        Bn = from_divisor(Dn).eval(K)
        report.sup_map_deviation.append(float(np.max(np.abs(Bn - limit_vals))) if K.size else 0.0)
    return report
