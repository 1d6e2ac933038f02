"""Dynamics of monic centered polynomials.

Green function and Böttcher coordinate near infinity, external rays traced
by Newton continuation in the potential, motion of a finite expanding set by
inverse branches, escape-time rasters and box-counting dimension.
"""
from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import spatial, stats

from .errors import (
    BranchEscape,
    DegenerateFit,
    InsidePullbackRegion,
    NoLandingAtBudget,
    RayBifurcation,
    ValidationError,
)

# orbits are followed until |z| exceeds this; log|f(z)| then equals d log|z| to ~1e-50
BAILOUT = 1e30
GREEN_MAX_ITER = 2000
RAY_DECAY = 0.85
LANDING_RADIUS = 1e-8
LANDING_RUN = 20


def thread_count() -> int:
    """Worker cap from ``BLASCHKE_DIV_THREADS`` (default: CPU count)."""
    raw = os.environ.get("BLASCHKE_DIV_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValidationError(f"BLASCHKE_DIV_THREADS={raw!r} is not an integer")
    return os.cpu_count() or 1


@dataclass(frozen=True)
class Polynomial:
    """Monic centered polynomial, coefficients in descending order.

    ``coefficients[0] == 1`` and ``coefficients[1] == 0``.
    """

    coefficients: tuple[complex, ...]

    def __post_init__(self):
        c = tuple(complex(x) for x in self.coefficients)
        object.__setattr__(self, "coefficients", c)
        if len(c) < 3:
            raise ValidationError("degree must be at least 2")
        if abs(c[0] - 1) > 1e-12:
            raise ValidationError("polynomial must be monic")
        if abs(c[1]) > 1e-12:
            raise ValidationError("polynomial must be centered (no z^(d-1) term)")
        if not all(np.isfinite(x.real) and np.isfinite(x.imag) for x in c):
            raise ValidationError("non-finite coefficient")

    @classmethod
    def quadratic(cls, c: complex) -> "Polynomial":
        return cls((1, 0, c))

    @classmethod
    def monomial(cls, degree: int) -> "Polynomial":
        return cls((1,) + (0,) * degree)

    @classmethod
    def parse(cls, text: str) -> "Polynomial":
        """Parse an expression in ``z`` such as ``"z^2 - 0.1 + 0.2i"``."""
        import sympy
        from sympy.parsing.sympy_parser import (
            convert_xor,
            implicit_multiplication_application,
            parse_expr,
            standard_transformations,
        )

        z = sympy.Symbol("z")
        cleaned = text.replace("i", "*I").replace("j", "*I").replace("(*I", "(I")
        cleaned = cleaned.lstrip("*").replace("+*I", "+I").replace("-*I", "-I")
        try:
            expr = parse_expr(
                cleaned,
                local_dict={"z": z, "I": sympy.I},
                transformations=standard_transformations + (convert_xor, implicit_multiplication_application),
            )
            poly = sympy.Poly(sympy.expand(expr), z)
        except Exception as exc:  # sympy raises a zoo of types
            raise ValidationError(f"cannot parse polynomial {text!r}: {exc}") from exc
        return cls(tuple(complex(sympy.N(a)) for a in poly.all_coeffs()))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def coeffs(self) -> np.ndarray:
        return np.asarray(self.coefficients, dtype=complex)

    def __call__(self, z):
        return np.polyval(self.coeffs, z)

    def deriv(self, z):
        return np.polyval(np.polyder(self.coeffs), z)

    def eval_with_deriv(self, z):
        z = np.asarray(z, dtype=complex)
        value = np.zeros_like(z)
        slope = np.zeros_like(z)
        for a in self.coefficients:
            slope = slope * z + value
            value = value * z + a
        return value, slope

    def iterate(self, z, n: int):
        for _ in range(n):
            z = self(z)
        return z

    def critical_points(self) -> np.ndarray:
        return np.roots(np.polyder(self.coeffs))

    def preimages(self, w: complex) -> np.ndarray:
        c = self.coeffs.copy()
        c[-1] -= w
        return np.roots(c)

    @property
    def escape_radius(self) -> float:
        """Radius beyond which |f(z)| >= 2|z|."""
        return 2.0 + float(np.sum(np.abs(self.coefficients[1:])))

    def __str__(self) -> str:
        d = self.degree
        terms = []
        for k, a in enumerate(self.coefficients):
            if a == 0:
                continue
            power = d - k
            mono = "" if power == 0 else ("z" if power == 1 else f"z^{power}")
            if a == 1 and power:
                terms.append(mono)
            else:
                coef = f"{a.real:g}" if a.imag == 0 else f"({a.real:g}{a.imag:+g}i)"
                terms.append(coef + (("*" + mono) if mono else ""))
        return " + ".join(terms)


# ---- Green function and Böttcher coordinate -------------------------------

def green(f: Polynomial, z, max_iter: int = GREEN_MAX_ITER):
    """Green function ``lim log+|f^n(z)| / d^n``; vectorized over ``z``.

    Points that do not pass the bailout within ``max_iter`` steps get 0.
    """
    z = np.array(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.zeros(z.shape)
    active = np.abs(z) <= BAILOUT
    out[~active] = np.log(np.abs(z[~active]))
    w = z[active]
    idx = np.flatnonzero(active)
    scale = 1.0
    d = f.degree
    for _ in range(max_iter):
        if w.size == 0:
            break
        w = f(w)
        scale /= d
        big = np.abs(w) > BAILOUT
        if np.any(big):
            out.flat[idx[big]] = np.log(np.abs(w[big])) * scale
            w, idx = w[~big], idx[~big]
    return float(out[0]) if scalar else out


def bottcher_threshold(f: Polynomial) -> float:
    """Default safe potential: ``log 4 / d``, raised to the critical potential."""
    crit = f.critical_points()
    crit_level = float(np.max(green(f, crit))) if crit.size else 0.0
    return max(np.log(4.0) / f.degree, crit_level)


def bottcher(f: Polynomial, z: complex, threshold: float | None = None) -> complex:
    """Böttcher coordinate ``phi`` with ``phi(f(z)) = phi(z)^d`` and ``phi(z)/z -> 1``.

    Computed as ``z * prod_n (f^{n+1}(z) / f^n(z)^d)^(1/d^{n+1})``; every
    ratio must stay within distance 1/2 of 1 so that the principal root is the
    branch continued from infinity.

    Raises
    ------
    InsidePullbackRegion
        If ``G_f(z)`` is below the threshold or a ratio leaves the safe disk.
    """
    z = complex(z)
    level = green(f, z)
    limit = bottcher_threshold(f) if threshold is None else threshold
    if level <= limit:
        raise InsidePullbackRegion(f"G(z) = {level:.6g} is not above the threshold {limit:.6g}")
    d = f.degree
    log_phi = np.log(z)
    w = z
    scale = 1.0
    for _ in range(GREEN_MAX_ITER):
        image = complex(f(w))
        ratio = image / w**d
        if abs(ratio - 1) >= 0.5:
            raise InsidePullbackRegion(f"ratio {ratio:.3g} leaves the principal-branch disk")
        scale /= d
        term = np.log(ratio) * scale
        log_phi += term
        w = image
        if abs(term) < 1e-18 * max(1.0, abs(log_phi)) or abs(w) > BAILOUT:
            break
    return complex(np.exp(log_phi))


# ---- external rays --------------------------------------------------------

@dataclass
class ExternalRay:
    angle: float
    potentials: np.ndarray
    points: np.ndarray
    landing: complex | None

    @property
    def landed(self) -> bool:
        return self.landing is not None

    def to_csv(self) -> str:
        lines = ["G,re,im"]
        lines += [f"{g:.17g},{p.real:.17g},{p.imag:.17g}" for g, p in zip(self.potentials, self.points)]
        return "\n".join(lines) + "\n"


def _iterate_count(d: int, level: float, target: float = 30.0) -> int:
    return max(0, int(np.ceil(np.log(target / level) / np.log(d))))


def as_angle(angle) -> Fraction:
    """Exact angle in [0, 1); floats are read as the nearest small fraction."""
    if isinstance(angle, str):
        frac = Fraction(angle)
    elif isinstance(angle, Fraction):
        frac = angle
    else:
        frac = Fraction(float(angle)).limit_denominator(10**12)
    return frac % 1


def ray_point(f: Polynomial, angle, level: float, guess: complex, max_iter: int = 40) -> complex:
    """Point of potential ``level`` on the ray of the given angle, near ``guess``.

    Newton on ``log f^n(z) = d^n (level + 2 pi i angle)``, with ``n`` chosen
    so that ``f^n(z)`` is far enough out for ``phi(w) ~ w`` to hold exactly.
    Rounding in ``f^n`` grows like ``d^n``, so convergence is judged on the
    Newton step, which stays at the size of the true position error.
    """
    d = f.degree
    n = _iterate_count(d, level)
    phase = float((as_angle(angle) * d**n) % 1)
    log_target = level * d**n + 2j * np.pi * phase
    z = complex(guess)
    for _ in range(max_iter):
        w, dw = complex(z), 1.0 + 0j
        for _ in range(n):
            value, slope = f.eval_with_deriv(w)
            w, dw = complex(value), dw * complex(slope)
        if w == 0 or dw == 0 or not np.isfinite(abs(dw)):
            raise RayBifurcation(f"derivative collapse at {z}")
        residual = np.log(w) - log_target
        residual -= 2j * np.pi * np.round(residual.imag / (2 * np.pi))
        step = residual * w / dw
        z -= step
        if abs(residual) < 1e-13 or abs(step) <= 1e-15 * max(1.0, abs(z)):
            return z
    raise RayBifurcation(f"Newton failed to converge at potential {level:.3g}")


def external_ray(
    f: Polynomial,
    angle,
    g_min: float = 1e-8,
    max_steps: int = 4000,
    start_level: float | None = None,
    decay: float = RAY_DECAY,
) -> ExternalRay:
    """Trace ``R_f(angle)`` inward from high potential.

    The potential shrinks geometrically by ``decay`` per accepted sample, with
    step halving when Newton drifts.  Below ``g_min`` tracing continues until
    20 consecutive samples lie in a ball of radius 1e-8; that sample is the
    landing estimate.  ``angle`` may be a float, a ``Fraction`` or a string
    such as ``"1/3"``.

    Raises
    ------
    RayBifurcation
        If the step length collapses (a precritical point blocks the ray).
    NoLandingAtBudget
        If no landing is certified within ``max_steps`` samples or before the
        potential reaches the double-precision floor.
    """
    theta = as_angle(angle)
    level = start_level if start_level is not None else max(4.0, 2 * np.log(f.escape_radius))
    floor = 30.0 / 1e15
    z = ray_point(f, theta, level, complex(np.exp(level + 2j * np.pi * float(theta))))
    levels, points = [level], [z]
    factor = decay
    while len(points) < max_steps:
        nxt = level * factor
        if nxt < floor:
            break
        try:
            cand = ray_point(f, theta, nxt, z)
            # hopping to a neighbouring ray keeps the potential but jumps in position
            tiny_move = abs(cand - z) <= 1e-12 * max(1.0, abs(z))
            ok = tiny_move or abs(green(f, cand) - nxt) <= 1e-3 * nxt + 1e-15
            if ok and len(points) > 1:
                ok = abs(cand - z) <= 4 * abs(z - points[-2]) + 1e-12
        except RayBifurcation:
            ok = False
        if not ok:
            factor = np.sqrt(factor)
            if 1 - factor < 1e-6:
                raise RayBifurcation(f"step collapse near {z} at potential {level:.3g}")
            continue
        level, z = nxt, cand
        levels.append(level)
        points.append(z)
        factor = decay if factor**2 <= decay else factor**2
        if level <= g_min and len(points) >= LANDING_RUN:
            tail = np.asarray(points[-LANDING_RUN:])
            if np.max(np.abs(tail - tail[-1])) <= LANDING_RADIUS:
                return ExternalRay(float(theta), np.asarray(levels), np.asarray(points), z)
    raise NoLandingAtBudget(f"no landing certified for angle {theta} (last potential {level:.3g})")


def ray_points_at(f: Polynomial, angle: float, levels: Sequence[float]) -> np.ndarray:
    """Ray points at prescribed decreasing potentials, by continuation from above."""
    levels = np.asarray(levels, dtype=float)
    if np.any(np.diff(levels) > 0):
        raise ValidationError("potentials must be decreasing")
    top = max(4.0, 2 * np.log(f.escape_radius), float(levels[0]))
    z = ray_point(f, angle, top, np.exp(top + 2j * np.pi * float(as_angle(angle))))
    level = top
    out = []
    for target in levels:
        while level > target:
            nxt = max(target, level * RAY_DECAY)
            z = ray_point(f, angle, nxt, z)
            level = nxt
        out.append(z)
    return np.asarray(out)


# ---- motion of a hyperbolic set -------------------------------------------

@dataclass
class HyperbolicSetMotion:
    """Finite forward-invariant expanding set of a base polynomial.

    ``m`` is the least iterate expanding at every point of ``X`` and ``rho``
    the adapted metric density ``sum_{k<m} |(f0^k)'|`` at those points.
    ``radius`` is the metric radius of the disks the inverse branches must
    stay in.
    """

    base: Polynomial
    points: np.ndarray
    image_index: np.ndarray
    m: int
    rho: np.ndarray
    radius: float

    @classmethod
    def build(cls, base: Polynomial, points, match_tol: float = 1e-9, max_m: int = 64) -> "HyperbolicSetMotion":
        X = np.atleast_1d(np.asarray(points, dtype=complex))
        if X.size == 0:
            raise ValidationError("empty point set")
        gaps = np.abs(X[:, None] - X[None, :]) + np.eye(X.size)
        if np.any(gaps < match_tol):
            raise ValidationError("points of X must be distinct")
        images = base(X)
        dist = np.abs(images[:, None] - X[None, :])
        image_index = np.argmin(dist, axis=1)
        if np.any(dist[np.arange(X.size), image_index] > match_tol):
            raise ValidationError("X is not forward invariant under the base map")
        # least m with |(f0^m)'| > 1 on X
        w, dw = X.copy(), np.ones_like(X)
        rho = np.zeros(X.size)
        for m in range(1, max_m + 1):
            rho += np.abs(dw)
            value, slope = base.eval_with_deriv(w)
            w, dw = value, dw * slope
            if np.all(np.abs(dw) > 1):
                break
        else:
            raise ValidationError(f"no iterate up to {max_m} expands on X")
        crit = base.critical_points()
        crit_gap = np.min(np.abs(X[:, None] - crit[None, :])) if crit.size else 1.0
        radius = 0.49 * float(np.min(rho)) * float(crit_gap)
        return cls(base, X, image_index, m, rho, radius)

    def orbit_indices(self, start: int, length: int) -> list[int]:
        seq = [start]
        for _ in range(length):
            seq.append(int(self.image_index[seq[-1]]))
        return seq

    def euclidean_radius(self, index: int) -> float:
        return self.radius / self.rho[index]


@dataclass
class MotionResult:
    points: np.ndarray
    iterations: np.ndarray
    conjugacy_residual: float
    min_separation: float

    @property
    def injective(self) -> bool:
        return self.min_separation > 1e-9


def _branch(f: Polynomial, targets: np.ndarray, start: np.ndarray, anchors: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """Preimages of ``targets`` inside the disks around ``anchors``, by Newton from ``start``."""
    z = start.copy()
    for _ in range(60):
        value, slope = f.eval_with_deriv(z)
        step = (value - targets) / slope
        z = z - step
        if np.all(np.abs(step) <= 1e-15 * np.maximum(1.0, np.abs(z))):
            break
    outside = ~(np.abs(z - anchors) <= radii)
    if np.any(outside):
        k = int(np.flatnonzero(outside)[0])
        raise BranchEscape(f"inverse branch left the disk around {anchors[k]:.6g}")
    return z


def motion_hyperbolic_set(
    M: HyperbolicSetMotion,
    f: Polynomial,
    tol: float = 1e-10,
    max_depth: int = 400,
) -> MotionResult:
    """Move ``X`` to ``f`` by the inverse-limit of pulled-back base orbits.

    ``H_n(x)`` is the branch at ``x`` applied to ``H_{n-1}(f0(x))``, so all
    points advance one depth per sweep; sweeps stop once successive values
    differ by less than ``tol``.

    Raises
    ------
    BranchEscape
        If some inverse image leaves its disk, so ``f`` is outside the region
        where the motion is certified.
    """
    if f.degree != M.base.degree:
        raise ValidationError("degree differs from the base map")
    radii = M.radius / M.rho
    current = M.points.copy()
    for depth in range(1, max_depth + 1):
        moved = _branch(f, current[M.image_index], current, M.points, radii)
        change = float(np.max(np.abs(moved - current)))
        current = moved
        if change < tol:
            break
    else:
        raise BranchEscape(f"no convergence within depth {max_depth}")
    residual = float(np.max(np.abs(f(current) - current[M.image_index])))
    if current.size > 1:
        gaps = np.abs(current[:, None] - current[None, :])
        np.fill_diagonal(gaps, np.inf)
        sep = float(np.min(gaps))
    else:
        sep = np.inf
    return MotionResult(current, np.full(current.size, depth), residual, sep)


# ---- rasters --------------------------------------------------------------

@dataclass
class JuliaRaster:
    """Escape-time counts; ``budget`` marks pixels that never escaped."""

    counts: np.ndarray
    window: tuple[float, float, float, float]
    budget: int

    @property
    def resolution(self) -> tuple[int, int]:
        ny, nx = self.counts.shape
        return nx, ny

    @property
    def pixel_size(self) -> float:
        x0, x1, y0, y1 = self.window
        nx, ny = self.resolution
        return max((x1 - x0) / nx, (y1 - y0) / ny)

    def pixel_centers(self) -> tuple[np.ndarray, np.ndarray]:
        x0, x1, y0, y1 = self.window
        nx, ny = self.resolution
        xs = x0 + (np.arange(nx) + 0.5) * (x1 - x0) / nx
        ys = y1 - (np.arange(ny) + 0.5) * (y1 - y0) / ny
        return xs, ys

    def interior(self) -> np.ndarray:
        return self.counts >= self.budget

    def boundary(self) -> np.ndarray:
        """Non-escaping pixels with an escaping 4-neighbour."""
        inside = self.interior()
        padded = np.pad(inside, 1, mode="edge")
        near_out = (
            ~padded[:-2, 1:-1] | ~padded[2:, 1:-1] | ~padded[1:-1, :-2] | ~padded[1:-1, 2:]
        )
        return inside & near_out

    def boundary_points(self) -> np.ndarray:
        xs, ys = self.pixel_centers()
        rows, cols = np.nonzero(self.boundary())
        return xs[cols] + 1j * ys[rows]

    def to_pgm_bytes(self) -> bytes:
        """Binary P5; escape counts scaled to 0..254, non-escaping pixels 255."""
        nx, ny = self.resolution
        scaled = np.minimum(self.counts, self.budget).astype(np.int64) * 254 // max(self.budget, 1)
        scaled[self.interior()] = 255
        header = f"P5\n{nx} {ny}\n255\n".encode("ascii")
        return header + scaled.astype(np.uint8).tobytes()

    def sidecar(self) -> dict:
        nx, ny = self.resolution
        return {"window": list(self.window), "resolution": [nx, ny], "budget": self.budget}

    def write(self, path) -> None:
        path = str(path)
        with open(path, "wb") as fh:
            fh.write(self.to_pgm_bytes())
        with open(path + ".json", "w") as fh:
            json.dump(self.sidecar(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _escape_rows(f: Polynomial, c_rows: np.ndarray, radius: float, budget: int) -> np.ndarray:
    z = c_rows.copy()
    counts = np.full(z.shape, budget, dtype=np.int64)
    alive = np.ones(z.shape, dtype=bool)
    for k in range(budget):
        z[alive] = f(z[alive])
        out = alive & (np.abs(z) > radius)
        counts[out] = k
        alive &= ~out
        if not alive.any():
            break
    return counts


def julia_raster(
    f: Polynomial,
    window: Sequence[float] = (-2.0, 2.0, -2.0, 2.0),
    resolution: int | Sequence[int] = 512,
    iter_budget: int = 256,
    threads: int | None = None,
) -> JuliaRaster:
    """Escape-time raster over ``window = (xmin, xmax, ymin, ymax)``.

    Row blocks are computed independently, so the result does not depend on
    the thread count.
    """
    if np.ndim(resolution) == 0:
        nx = ny = int(resolution)
    else:
        nx, ny = (int(r) for r in resolution)
    if nx <= 0 or ny <= 0:
        raise ValidationError("resolution must be positive")
    if iter_budget <= 0:
        raise ValidationError("iteration budget must be positive")
    x0, x1, y0, y1 = (float(v) for v in window)
    if not (x1 > x0 and y1 > y0):
        raise ValidationError("window must have positive extent")
    xs = x0 + (np.arange(nx) + 0.5) * (x1 - x0) / nx
    ys = y1 - (np.arange(ny) + 0.5) * (y1 - y0) / ny
    grid = xs[None, :] + 1j * ys[:, None]
    radius = f.escape_radius
    workers = min(threads or thread_count(), ny)
    blocks = np.array_split(np.arange(ny), max(1, workers * 4))
    blocks = [b for b in blocks if b.size]
    if workers <= 1:
        parts = [_escape_rows(f, grid[b], radius, iter_budget) for b in blocks]
    else:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda b: _escape_rows(f, grid[b], radius, iter_budget), blocks))
    return JuliaRaster(np.vstack(parts), (x0, x1, y0, y1), int(iter_budget))


# ---- box counting ---------------------------------------------------------

@dataclass
class BoxDimension:
    dimension: float
    stderr: float
    scales: np.ndarray
    counts: np.ndarray
    residuals: np.ndarray

    @property
    def band(self) -> tuple[float, float]:
        return self.dimension - 2 * self.stderr, self.dimension + 2 * self.stderr

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "stderr": self.stderr,
            "band": list(self.band),
            "scales": self.scales.tolist(),
            "counts": self.counts.tolist(),
            "residuals": self.residuals.tolist(),
        }


def _as_xy(points) -> np.ndarray:
    if isinstance(points, JuliaRaster):
        points = points.boundary_points()
    arr = np.asarray(points)
    if np.iscomplexobj(arr) or arr.ndim == 1:
        arr = np.ravel(arr).astype(complex)
        return np.column_stack([arr.real, arr.imag])
    if arr.ndim != 2:
        raise ValidationError("points must be complex or an (n, dim) array")
    return arr.astype(float)


def default_scales(points, coarse_ratio: float = 8.0, fine_factor: float = 4.0, min_levels: int = 4) -> np.ndarray:
    """Dyadic scales from about ``extent / coarse_ratio`` down to ``fine_factor``
    times the median nearest-neighbour spacing, where the sample stops
    resolving the set.
    """
    xy = _as_xy(points)
    extent = float(np.max(np.ptp(xy, axis=0))) if len(xy) else 0.0
    if extent == 0:
        raise DegenerateFit("point set has no extent")
    top = 2.0 ** np.floor(np.log2(extent / coarse_ratio))
    spacing = float(np.median(spatial.cKDTree(xy).query(xy, k=2)[0][:, 1]))
    finest = max(fine_factor * spacing, 1e-12 * extent)
    levels = max(min_levels, int(np.floor(np.log2(top / finest))) + 1)
    return top / 2.0 ** np.arange(levels)


def box_dimension(points, scales: Sequence[float] | None = None) -> BoxDimension:
    """Slope of ``log N(eps)`` against ``log(1/eps)``.

    ``points`` may be complex samples, an ``(n, dim)`` array or a
    :class:`JuliaRaster` (its boundary pixels are used).

    Raises
    ------
    DegenerateFit
        With fewer than four scales, or when the counts do not vary.
    """
    xy = _as_xy(points)
    if len(xy) == 0:
        raise DegenerateFit("empty point set")
    eps = np.asarray(default_scales(xy) if scales is None else scales, dtype=float)
    if eps.size < 4:
        raise DegenerateFit("at least four scales are required")
    if np.any(eps <= 0):
        raise ValidationError("scales must be positive")
    origin = xy.min(axis=0)
    counts = np.array([len(np.unique(np.floor((xy - origin) / e).astype(np.int64), axis=0)) for e in eps])
    x, y = np.log(1 / eps), np.log(counts)
    if np.ptp(y) == 0 or np.ptp(x) == 0:
        raise DegenerateFit("box counts do not vary over the scales")
    fit = stats.linregress(x, y)
    residuals = y - (fit.intercept + fit.slope * x)
    return BoxDimension(float(fit.slope), float(fit.stderr), eps, counts, residuals)
