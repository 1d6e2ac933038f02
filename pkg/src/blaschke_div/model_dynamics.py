"""Linearization, rays and continuation over a scheme divisor.

Koenigs maps are evaluated as ``lim F^n(z) / F'(0)^n`` on each cycle and
pulled back along the scheme to aperiodic vertices.  Internal rays landing
at periodic boundary points are images of a straight half-line in the
linearizing coordinate of the landing point; preperiodic rays are pulled
back along the scheme.  Boundary points satisfying an iterate relation are
continued to nearby divisors by Newton's method behind a winding-number
certificate, and the stretching construction moves escaped zeros back
inside the disk so that the corresponding critical values sit on rays.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .blaschke import BlaschkeProduct, critical_points
from .divisor import Divisor
from .errors import (
    ArcPlacementError,
    FundamentalArcHitsCriticalOrbit,
    NewtonDiverged,
    NotPreperiodic,
    OutsideLinearizationReach,
    RayTrackingFailed,
    RootCountNotOne,
    SignConditionViolated,
    SubdivisionBudgetExceeded,
    ValidationError,
    ZeroMultiplier,
)
from .scheme import ComposedMap, SchemeDivisor, classify_preperiodic

KOENIGS_TOL = 1e-13
MAX_KOENIGS_ITER = 20000


# ---- Koenigs maps ---------------------------------------------------------

def koenigs_limit(F, multiplier: complex, z, tol: float = KOENIGS_TOL, max_iter: int = MAX_KOENIGS_ITER):
    """``lim F^n(z) / multiplier^n`` for a self-map of the disk attracted to 0.

    Iteration stops once successive quotients agree to ``tol`` (relative);
    the geometric tail is then removed by one Richardson step.
    """
    lam = complex(multiplier)
    if lam == 0:
        raise ZeroMultiplier("the fixed point at 0 is superattracting")
    if abs(lam) >= 1:
        raise ValidationError("the fixed point at 0 must be attracting")
    z0 = np.asarray(z, dtype=complex)
    if np.any(np.abs(z0) >= 1):
        raise OutsideLinearizationReach("Koenigs maps are evaluated inside the unit disk")
    w = z0.copy()
    scale = np.ones(z0.shape, dtype=complex)
    prev = w.copy()
    out = np.empty_like(w)
    live = np.ones(z0.shape, dtype=bool)
    for _ in range(max_iter):
        w[live] = F(w[live])
        scale[live] = scale[live] * lam
        cur = w / scale
        diff = np.abs(cur - prev)
        done = live & (diff <= tol * np.maximum(1.0, np.abs(cur)))
        # one Richardson step: the increments shrink by the multiplier
        out[done] = cur[done] + (cur[done] - prev[done]) * lam / (1 - lam)
        live &= ~done
        prev = cur
        if not live.any():
            break
    else:
        raise OutsideLinearizationReach("Koenigs iteration did not settle within the budget")
    return out if z0.ndim else complex(out)


def _is_monomial(maps: Sequence[BlaschkeProduct]) -> bool:
    return all(np.all(np.abs(m.zeros) < 1e-15) for m in maps)


class KoenigsFamily:
    """Koenigs maps ``kappa_v`` for every vertex, normalized by ``kappa_v'(0) = 1``.

    Each cycle uses its smallest vertex id as representative; every other
    vertex is routed to it and the representative's map is pulled back.
    """

    def __init__(self, D: SchemeDivisor):
        self.D = D
        self._rep = {}
        for cycle in D.report.cycles:
            for w in cycle:
                self._rep[w] = cycle[0]

    def anchor(self, v: str) -> tuple[str, ComposedMap]:
        """Representative of the cycle ``v`` falls into and the route there."""
        w, steps = v, 0
        while w not in self._rep or (self._rep[w] != w):
            w = self.D.scheme.sigma[w]
            steps += 1
        return w, self.D.route(v, steps)

    def multiplier(self, v: str) -> complex:
        rep, _ = self.anchor(v)
        return complex(self.D.return_map(rep).deriv(0j))

    def __call__(self, v: str, z):
        rep, route = self.anchor(v)
        lam = self.multiplier(rep)
        if lam == 0:
            raise ZeroMultiplier(f"return map at {rep} is superattracting")
        gain = complex(route.deriv(0j)) if route.maps else 1.0 + 0j
        if gain == 0:
            raise ZeroMultiplier(f"route from {v} to {rep} is critical at 0")
        inner = route.eval(np.asarray(z, dtype=complex)) if route.maps else np.asarray(z, dtype=complex)
        val = koenigs_limit(self.D.return_map(rep), lam, inner) / gain
        return val if np.ndim(val) else complex(val)

    def potential(self, v: str, z):
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self(v, z)))


def koenigs(D: SchemeDivisor, v: str, z):
    return KoenigsFamily(D)(v, z)


def potential(D: SchemeDivisor, v: str, z):
    return KoenigsFamily(D).potential(v, z)


# ---- internal rays --------------------------------------------------------

@dataclass
class InternalRay:
    vertex: str
    landing: complex
    t: np.ndarray
    points: np.ndarray
    inner_endpoint: complex
    tag: tuple[int, int]
    potential_fn: Callable = field(repr=False, default=None)
    locate: Callable = field(repr=False, default=None)

    def potential_residual(self) -> float:
        return float(np.max(np.abs(self.potential_fn(self.points) - self.t)))

    def landing_error(self) -> float:
        return float(abs(self.points[-1] - self.landing))

    def polyline(self) -> np.ndarray:
        """Samples ordered from the inner end to the landing point."""
        return np.concatenate([self.points, [self.landing]])

    def to_rows(self):
        return [(float(t), float(p.real), float(p.imag)) for t, p in zip(self.t, self.points)]


class _LinearizedRay:
    """Half-line ``s -> L^{-1}(direction * s)`` in the linearizing coordinate of
    a repelling fixed point ``q`` of ``F`` on the unit circle."""

    def __init__(self, F: ComposedMap, q: complex, direction: complex, omega0: float = 1e-6):
        self.F, self.q, self.direction, self.omega0 = F, q, direction, omega0
        self.mu = complex(F.deriv(q))
        if abs(self.mu) <= 1 + 1e-9:
            raise NotPreperiodic("landing point is not repelling for the return map")
        h = 1e-5
        second = (F.deriv(q + h) - F.deriv(q - h)) / (2 * h)
        self.c2 = second / (2 * (self.mu**2 - self.mu))
        self.log_mu = np.log(abs(self.mu))

    def point(self, s):
        s = np.asarray(s, dtype=float)
        n = np.maximum(0, np.ceil(np.log(s / self.omega0) / self.log_mu)).astype(int)
        w = self.direction * s / self.mu**n
        z = self.q + w + self.c2 * w * w
        for k in range(int(n.max()) if n.size else 0):
            live = k < n
            z = np.where(live, self.F.eval(z), z)
        return z if z.ndim else complex(z)


def _pushed_point(D: SchemeDivisor, u: str, q: complex, steps: int) -> list[complex]:
    pts, w, z = [complex(q)], u, complex(q)
    for _ in range(steps):
        z = D.maps[w].eval(z)
        z /= abs(z)
        pts.append(z)
        w = D.scheme.sigma[w]
    return pts


def internal_ray(
    D: SchemeDivisor,
    u: str,
    q: complex,
    t_range: tuple[float, float],
    n_samples: int = 200,
    horizon: int = 50,
    tilt: float = 0.0,
) -> InternalRay:
    """Sampled internal ray at vertex ``u`` landing at the boundary point ``q``.

    ``t`` runs over ``n_samples`` equally spaced potentials in ``t_range``;
    larger ``t`` is closer to the landing point.  ``tilt`` rotates the
    half-line in the linearizing coordinate (any angle in ``(-pi/2, pi/2)``
    gives an invariant ray).
    """
    tag = classify_preperiodic(D, u, q, horizon)
    if tag is None:
        raise NotPreperiodic(f"{q} is not preperiodic within horizon {horizon}")
    m, l = tag.m, tag.l
    orbit = D.scheme.orbit(u, m)
    v = orbit[-1]
    pushed = _pushed_point(D, u, q, m)
    t = np.linspace(t_range[0], t_range[1], n_samples)

    cycle_maps = D.return_map(v).maps
    if _is_monomial(cycle_maps):
        return _monomial_ray(D, u, q, t, tag, orbit, pushed)

    fam = KoenigsFamily(D)
    lam = fam.multiplier(v)
    if lam == 0:
        raise ZeroMultiplier("return map is superattracting")
    # potential offsets along the route from u to v
    offsets = [0.0]
    for w in orbit[:-1]:
        d = abs(D.maps[w].deriv(0j))
        if d == 0:
            raise ZeroMultiplier(f"B_{w} is critical at 0")
        offsets.append(offsets[-1] + np.log(d))
    F = D.return_map(v).iterate(l)
    G_v = lambda z: fam.potential(v, z)
    top = pushed[-1]
    periodic = _periodic_ray_sampler(F, top, G_v, -l * np.log(abs(lam)), tilt)
    t_top = t + offsets[-1]
    pts_top = np.asarray(periodic(t_top))
    crit = critical_points_of(cycle_maps)
    if crit.size and np.min(np.abs(pts_top[:, None] - crit[None, :])) < 1e-8:
        raise FundamentalArcHitsCriticalOrbit("ray samples pass through a critical point")
    level_pts, level_locate = pts_top, periodic
    for k in range(m - 1, -1, -1):
        w = orbit[k]
        B = D.maps[w]
        level_pts, level_locate = _pull_back_level(B, pushed[k], t + offsets[k + 1], level_pts, level_locate, offsets[k + 1] - offsets[k])
    inner = 0j
    if m:
        route = D.route(u, m)
        inner = _newton_zero(route, level_pts[0])
    return InternalRay(u, complex(q), t, level_pts, inner, (m, l), lambda z: fam.potential(u, z), level_locate)


def critical_points_of(maps: Sequence[BlaschkeProduct]) -> np.ndarray:
    pts = [critical_points(m) for m in maps if m.degree > 1]
    return np.concatenate(pts) if pts else np.zeros(0, complex)


def _periodic_ray_sampler(F: ComposedMap, q: complex, G: Callable, drop: float, tilt: float):
    """Vectorized ``t -> R(t)`` on the invariant ray with ``G(R(t)) = t``.

    ``drop`` is the potential decrease under one application of ``F``.  The
    potential is monotone in the log of the linearizing parameter, so all
    samples are located by one simultaneous bisection.
    """
    line = _LinearizedRay(F, q, -q * np.exp(1j * tilt))
    per_unit_log_s = drop / line.log_mu
    s_ref = 1e-3
    g_ref = float(G(line.point(s_ref)))
    g = lambda u: G(line.point(np.exp(u)))

    def locate(t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        guess = np.log(s_ref) + (g_ref - t_arr) / per_unit_log_s
        lo, hi = guess - line.log_mu, guess + line.log_mu
        for _ in range(60):
            bad_lo = g(lo) <= t_arr
            bad_hi = g(hi) >= t_arr
            if not (bad_lo.any() or bad_hi.any()):
                break
            lo = np.where(bad_lo, lo - line.log_mu, lo)
            hi = np.where(bad_hi, hi + line.log_mu, hi)
        else:
            raise RayTrackingFailed("could not bracket the requested potentials")
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            above = g(mid) > t_arr
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
            if np.all(hi - lo <= 1e-15 * np.maximum(1.0, np.abs(mid))):
                break
        pts = line.point(np.exp(0.5 * (lo + hi)))
        return pts if np.ndim(t) else complex(np.ravel(pts)[0])

    return locate


def _pull_back_level(B: BlaschkeProduct, anchor: complex, t_upper: np.ndarray, upper_pts: np.ndarray, upper_locate, offset: float):
    """Continue preimages under ``B`` of an upper-level ray from its landing end.

    Returns lower-level samples (ascending ``t`` order) and a locate callable.
    """
    n = len(t_upper)
    out = np.empty(n, dtype=complex)
    z = complex(anchor)
    prev_t = None
    for idx in range(n - 1, -1, -1):
        target_t = t_upper[idx]
        if prev_t is None:
            z = _newton_solve(B, upper_pts[idx], z)
        else:
            try:
                z = _newton_solve(B, upper_pts[idx], z, max_step=0.05)
            except NewtonDiverged:
                z = _continue_preimage(B, upper_locate, prev_t, target_t, z)
        out[idx] = z
        prev_t = target_t

    def locate(t_lower: float) -> complex:
        t_up = t_lower + offset
        j = int(np.argmin(np.abs(t_upper - t_up)))
        return _continue_preimage(B, upper_locate, t_upper[j], t_up, out[j])

    return out, locate


def _continue_preimage(B, upper_locate, t_from: float, t_to: float, z: complex, depth: int = 0) -> complex:
    if t_from == t_to:
        return z
    try:
        return _newton_solve(B, upper_locate(t_to), z, max_step=0.05)
    except NewtonDiverged:
        if depth > 30:
            raise RayTrackingFailed("preimage continuation stalled")
        mid = 0.5 * (t_from + t_to)
        z_mid = _continue_preimage(B, upper_locate, t_from, mid, z, depth + 1)
        return _continue_preimage(B, upper_locate, mid, t_to, z_mid, depth + 1)


def _newton_solve(B, target: complex, z: complex, max_step: float = np.inf, iters: int = 60) -> complex:
    z0 = z
    for _ in range(iters):
        val = B.eval(z) - target
        der = B.deriv(z)
        if der == 0:
            raise NewtonDiverged("vanishing derivative")
        step = val / der
        z = z - step
        if abs(z - z0) > max_step:
            raise NewtonDiverged("Newton left the trust region")
        if abs(step) <= 1e-15 * max(1.0, abs(z)):
            return complex(z)
    if abs(B.eval(z) - target) < 1e-12:
        return complex(z)
    raise NewtonDiverged("Newton did not converge")


def _newton_zero(F: ComposedMap, z: complex) -> complex:
    for _ in range(200):
        val, der = F.eval_with_deriv(np.asarray(z))
        if der == 0:
            raise NewtonDiverged("vanishing derivative at the inner end")
        step = complex(val / der)
        z = z - step
        if abs(step) < 1e-15:
            break
    return complex(z)


def _monomial_ray(D, u, q, t, tag, orbit, pushed) -> InternalRay:
    """Rays for routes and cycles of pure powers ``z^k``: radial segments.

    The Boettcher potential ``log|z|`` replaces the Koenigs potential, which
    does not exist at a superattracting point; it is invariant under every
    power map up to the degree factor, so the ray at ``u`` is radial too.
    """
    if not _is_monomial([D.maps[w] for w in orbit[:-1]]):
        raise ZeroMultiplier("superattracting cycles are supported only for pure powers")
    q = complex(q)
    pts = q * np.exp(t)
    pot = lambda z: np.log(np.abs(z))
    return InternalRay(u, q, t, np.asarray(pts, dtype=complex), 0j, (tag.m, tag.l), pot, lambda tt: complex(q * np.exp(tt)))


# ---- continuation of pre-repelling points ----------------------------------

def winding_number(F: Callable, center: complex, radius: float, max_points: int = 1 << 16) -> int:
    """Zeros minus poles of ``F`` inside ``|z - center| = radius``.

    The argument increment is summed on a circle sampled finely enough that
    consecutive phase steps stay below ``pi / 4``.
    """
    n = 256
    while n <= max_points:
        theta = np.linspace(0, 2 * np.pi, n + 1)
        vals = F(center + radius * np.exp(1j * theta))
        if np.any(vals == 0) or not np.all(np.isfinite(vals)):
            raise RootCountNotOne("the contour passes through a zero or pole")
        steps = np.angle(vals[1:] / vals[:-1])
        if np.max(np.abs(steps)) < np.pi / 4:
            total = np.sum(steps) / (2 * np.pi)
            return int(np.rint(total))
        n *= 2
    raise RootCountNotOne("contour sampling budget exhausted")


@dataclass
class TrackResult:
    point: complex
    winding: int
    radius: float
    residual: float
    newton_steps: int

    def audit(self) -> dict:
        return {
            "point": [self.point.real, self.point.imag],
            "winding": self.winding,
            "radius": self.radius,
            "residual": self.residual,
            "newton_steps": self.newton_steps,
        }


def _iterate_relation(D: SchemeDivisor, u: str, l: int, n: int):
    m = D.depth(u)
    v = D.scheme.orbit(u, m)[-1]
    prefix = D.route(u, m)
    R = D.return_map(v)
    low = prefix.then(R.iterate(l))
    high = low.then(R.iterate(n))

    def F(z):
        return high.eval(z) - low.eval(z)

    def dF(z):
        return high.deriv(z) - low.deriv(z)

    return F, dF


def rouche_radius(D: SchemeDivisor, u: str, b: complex, l: int, n: int, radii=None) -> float:
    F, _ = _iterate_relation(D, u, l, n)
    radii = radii or [0.2 * 0.5**k for k in range(14)]
    for r in radii:
        try:
            if winding_number(F, b, r) == 1:
                return r
        except RootCountNotOne:
            continue
    raise RootCountNotOne("no trial radius isolates a single root for the base divisor")


def track_prerepelling(D: SchemeDivisor, u: str, b: complex, l: int, n: int, E: SchemeDivisor, radius: float | None = None) -> TrackResult:
    """Continue the boundary solution ``b`` of ``B^{l+n}(z) = B^l(z)`` from
    ``D`` to the nearby divisor ``E``."""
    if n < 1 or l < 0:
        raise ValidationError("need l >= 0 and n >= 1")
    F_D, _ = _iterate_relation(D, u, l, n)
    if abs(F_D(np.asarray([b]))[0]) > 1e-8:
        raise ValidationError("b does not satisfy the iterate relation for the base divisor")
    r = radius if radius is not None else rouche_radius(D, u, b, l, n)
    F, dF = _iterate_relation(E, u, l, n)
    w = winding_number(F, b, r)
    if w != 1:
        raise RootCountNotOne(f"winding number {w} on |z - b| = {r}")
    z = complex(b)
    for k in range(100):
        val = F(np.asarray([z]))[0]
        der = dF(np.asarray([z]))[0]
        if der == 0:
            raise NewtonDiverged("vanishing derivative")
        step = val / der
        z -= step
        if abs(z - b) >= r:
            raise NewtonDiverged("Newton left the certified disk")
        if abs(step) < 1e-15:
            break
    else:
        raise NewtonDiverged("Newton did not converge")
    residual = float(abs(F(np.asarray([z]))[0]))
    return TrackResult(complex(z), w, r, residual, k + 1)


# ---- Miranda bisection ----------------------------------------------------

def _face_samples(lo, hi, k, value, per_axis):
    axes = []
    for j in range(len(lo)):
        if j == k:
            axes.append(np.array([value]))
        else:
            axes.append(np.linspace(lo[j], hi[j], per_axis))
    return np.array(list(itertools.product(*axes)))


def miranda_zero(F: Callable, n: int, tol: float = 1e-9, budget: int | None = None, per_axis: int = 5):
    """Zero of ``F: [0,1]^n -> R^n`` under the face-sign conditions.

    Each component must have one sign on ``x_k = 0`` and the opposite sign on
    ``x_k = 1``; either orientation is accepted and normalized internally.
    The cube is bisected along a coordinate whose midpoint face keeps the
    conditions for one half.
    """
    budget = budget if budget is not None else 60 * n
    lo0, hi0 = np.zeros(n), np.ones(n)
    orient = np.ones(n)
    for k in range(n):
        low = np.array([F(x)[k] for x in _face_samples(lo0, hi0, k, 0.0, per_axis)])
        high = np.array([F(x)[k] for x in _face_samples(lo0, hi0, k, 1.0, per_axis)])
        if np.all(low >= 0) and np.all(high <= 0):
            orient[k] = 1.0
        elif np.all(low <= 0) and np.all(high >= 0):
            orient[k] = -1.0
        else:
            raise SignConditionViolated(f"component {k} has no consistent sign on the faces x_{k} = 0, 1")
    G = lambda x: orient * np.asarray(F(x), dtype=float)

    def search(lo, hi, depth):
        center = 0.5 * (lo + hi)
        gc = G(center)
        if np.max(np.abs(gc)) < tol:
            return center
        if depth >= budget or np.max(hi - lo) < 1e-16:
            return None
        for k in np.argsort(-(hi - lo), kind="stable"):
            mid = center[k]
            vals = np.array([G(x)[k] for x in _face_samples(lo, hi, k, mid, per_axis)])
            options = []
            if np.all(vals >= 0):
                options.append("upper")
            if np.all(vals <= 0):
                options.append("lower")
            for side in options:
                nlo, nhi = lo.copy(), hi.copy()
                if side == "upper":
                    nlo[k] = mid
                else:
                    nhi[k] = mid
                found = search(nlo, nhi, depth + 1)
                if found is not None:
                    return found
        return None

    x = search(lo0, hi0, 0)
    if x is None:
        raise SubdivisionBudgetExceeded(f"no certified sub-box after {budget} levels")
    return x


# ---- stretching -----------------------------------------------------------

def signed_distance(point: complex, polyline: np.ndarray) -> float:
    """Distance to a polyline, signed by the side relative to its direction."""
    a, b = polyline[:-1], polyline[1:]
    seg = b - a
    denom = np.where(np.abs(seg) > 0, np.abs(seg) ** 2, 1.0)
    s = np.clip(((point - a) * np.conj(seg)).real / denom, 0.0, 1.0)
    foot = a + s * seg
    d = np.abs(point - foot)
    j = int(np.argmin(d))
    side = np.sign(np.imag(np.conj(seg[j]) * (point - a[j])))
    return float(side * d[j]) if side != 0 else 0.0


def ray_signed_distance(point: complex, ray: InternalRay, refine: int = 64) -> float:
    """Signed distance to the ray.

    The polyline through the stored samples is replaced, around its nearest
    segment, by ``refine`` exact ray points, which shrinks the chord error by
    roughly ``refine**2``.
    """
    coarse = signed_distance(point, ray.polyline())
    if ray.locate is None:
        return coarse
    j = int(np.argmin(np.abs(ray.points - point)))
    if j == len(ray.t) - 1 and abs(ray.landing - point) < abs(ray.points[j] - point):
        return coarse
    lo = ray.t[max(j - 1, 0)]
    hi = ray.t[min(j + 1, len(ray.t) - 1)]
    fine = np.asarray(ray.locate(np.linspace(lo, hi, refine)))
    return signed_distance(point, fine)


@dataclass
class StretchConstraint:
    vertex: str
    q: complex
    ray: InternalRay
    arc_half_angle: float
    depth: float

    def arc(self, x: float) -> complex:
        radius = 1 - self.depth * np.sin(np.pi * x)
        return complex(radius * self.q * np.exp(1j * self.arc_half_angle * (2 * x - 1)))


@dataclass
class StretchResult:
    divisor: SchemeDivisor
    constraints: list[StretchConstraint]
    parameters: np.ndarray
    critical_values: list[complex]
    ray_distances: list[float]

    def audit(self) -> dict:
        return {
            "parameters": self.parameters.tolist(),
            "constraints": [
                {"vertex": c.vertex, "q": [c.q.real, c.q.imag], "critical_value": [cv.real, cv.imag], "ray_distance": d}
                for c, cv, d in zip(self.constraints, self.critical_values, self.ray_distances)
            ],
        }


def arc_placement_bound(D: SchemeDivisor, v: str, q: complex) -> dict[str, float]:
    """Upper bounds on the arc radius ``delta`` around the escaped zero ``q``."""
    others = [p for p in D.boundary(v).points if abs(p - q) > 1e-12]
    bounds = {"distance to 1": abs(q - 1)}
    if others:
        bounds["half distance to other escaped zeros"] = 0.5 * min(abs(p - q) for p in others)
    B = D.maps[v]
    theta = np.linspace(-0.5, 0.5, 64)
    speed = np.max(np.abs(B.deriv(q * np.exp(1j * theta))))
    # the arc image must not wrap around the circle
    bounds["injectivity of the boundary image"] = 2 * np.sin(np.pi / (4 * speed))
    return bounds


def stretch_divisor(
    D: SchemeDivisor,
    delta: float,
    horizon: int = 50,
    ray_samples: int = 400,
    tol: float = 1e-7,
) -> StretchResult:
    """Move every escaped zero onto an arc near its boundary point so that the
    nearby critical value lies on the internal ray landing at its image.

    Only constraints whose target vertex has an unperturbed forward orbit are
    handled (the rays are then independent of the perturbation).
    """
    constraints: list[StretchConstraint] = []
    for v in D.scheme.vertices:
        for q in D.boundary(v).points:
            bounds = arc_placement_bound(D, v, q)
            worst = min(bounds, key=bounds.get)
            if delta >= bounds[worst]:
                raise ArcPlacementError(f"delta = {delta} violates '{worst}' (bound {bounds[worst]:.6g})")
            target = D.scheme.sigma[v]
            for w in D.scheme.orbit(target, len(D.scheme.vertices) + 1):
                if D.boundary(w).degree:
                    raise ValidationError("coupled constraints (escaped zeros downstream of another) are out of scope")
            tag = classify_preperiodic(D, v, q, horizon)
            if tag is None or tag.m == 0:
                raise NotPreperiodic(f"escaped zero {q} at {v} is not strictly preperiodic")
            q1 = D.maps[v].eval(q)
            q1 /= abs(q1)
            ray = internal_ray(D, target, q1, _ray_window(D, target, q1, horizon), n_samples=ray_samples, horizon=horizon)
            half = 2 * np.arcsin(delta / 2)
            constraints.append(StretchConstraint(v, complex(q), ray, half, 0.5 * delta))
    if not constraints:
        return StretchResult(D, [], np.zeros(0), [], [])

    def build(x) -> SchemeDivisor:
        updates: dict[str, list] = {}
        for c, xc in zip(constraints, x):
            updates.setdefault(c.vertex, []).append(c.arc(xc))
        divs = {v: D.interior(v) + Divisor.from_points(pts) for v, pts in updates.items()}
        return D.with_divisors(divs)

    def critical_value(c: StretchConstraint, E: SchemeDivisor, zeta: complex) -> complex:
        B = E.maps[c.vertex]
        crit = critical_points(B)
        cp = crit[np.argmin(np.abs(crit - zeta))]
        return complex(B.eval(cp))

    polylines = [c.ray.polyline() for c in constraints]

    def system(x):
        x = np.asarray(x, dtype=float)
        out = np.empty(len(constraints))
        interior = (x > 0) & (x < 1)
        E = build(np.clip(x, 1e-300, 1 - 1e-16)) if interior.all() else None
        for k, c in enumerate(constraints):
            if not interior[k]:
                # limit of the critical value at an arc endpoint
                end = c.q * np.exp(1j * c.arc_half_angle * (2 * x[k] - 1))
                cv = complex(D.maps[c.vertex].eval(end))
            else:
                cv = critical_value(c, E, c.arc(x[k]))
            out[k] = ray_signed_distance(cv, c.ray) if interior[k] else signed_distance(cv, polylines[k])
        return out

    try:
        x = miranda_zero(system, len(constraints), tol=tol)
    except SignConditionViolated as exc:
        raise SignConditionViolated(f"arc endpoints do not straddle the ray: {exc}") from exc
    E = build(x)
    cvs, dists = [], []
    for c, xc in zip(constraints, x):
        zeta = c.arc(xc)
        cv = critical_value(c, E, zeta)
        cvs.append(cv)
        dists.append(abs(ray_signed_distance(cv, c.ray)))
    return StretchResult(E, constraints, np.asarray(x), cvs, dists)


def _ray_window(D: SchemeDivisor, v: str, q: complex, horizon: int) -> tuple[float, float]:
    """Potential range from well inside the disk to within ~1e-7 of the landing point."""
    fam = KoenigsFamily(D)
    inner = float(fam.potential(v, 0.5 * q))
    near = float(fam.potential(v, q * (1 - 1e-7)))
    return inner, near
