"""Dimension of conformal repelling sets.

Repelling systems are given by their inverse branches on a target disk.  The
Bowen dimension is the zero of the pressure, computed from the leading
eigenvalue of a transfer matrix on symbolic cylinders; self-similar systems
have the Moran equation as an independent check.  Also here: a lower-bound
quotient for the dimension of hyperbolic sets near parabolic maps, and the
angular width of images of disks under univalent maps.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import optimize, sparse

from .errors import (
    BracketDoesNotStraddle,
    DepthBudgetExceeded,
    EigenvalueNotConverged,
    OriginInDomain,
    ValidationError,
)
from .polydyn import HyperbolicSetMotion, Polynomial, motion_hyperbolic_set

MAX_CYLINDERS = 1 << 20


# ---- repelling systems ----------------------------------------------------

@dataclass(frozen=True)
class Branch:
    """Inverse branch ``g = (f^l)^-1`` from the target disk onto ``U_k``.

    ``forward`` is ``f^l`` restricted to ``U_k``; it is optional and only used
    for invariance residuals.
    """

    inverse: Callable
    inverse_deriv: Callable
    power: int = 1
    forward: Callable | None = None


def linear_branch(ratio: complex, offset: complex) -> Branch:
    """Similarity ``z -> offset + ratio * z``."""
    ratio, offset = complex(ratio), complex(offset)
    return Branch(
        inverse=lambda z: offset + ratio * np.asarray(z),
        inverse_deriv=lambda z: np.full(np.shape(z), ratio),
        forward=lambda z: (np.asarray(z) - offset) / ratio,
    )


def _winding(curve: np.ndarray, point: complex) -> int:
    steps = np.angle(np.roll(curve - point, -1) / (curve - point))
    return int(np.rint(steps.sum() / (2 * np.pi)))


@dataclass
class Certificate:
    margin: float
    min_gap: float
    degrees: list[int]

    @property
    def ok(self) -> bool:
        return self.margin > 0 and self.min_gap > 0 and all(d == 1 for d in self.degrees)


class SymbolicSystem:
    """Interface for transfer-matrix pressure: cylinders and branch weights."""

    branch_count: int

    def cylinder_points(self, depth: int) -> np.ndarray:  # pragma: no cover - interface
        raise NotImplementedError

    def log_branch_derivatives(self, depth: int) -> np.ndarray:  # pragma: no cover - interface
        """``log|g_k'|`` at each depth-``depth`` cylinder point, shape (m, m**depth)."""
        raise NotImplementedError


@dataclass
class RepellingSystem(SymbolicSystem):
    """Inverse branches of a repelling system on the disk ``D(center, radius)``.

    Cylinder ``w = (w1, ..., wn)`` has representative
    ``g_{w1} o ... o g_{wn}(center)``; words are indexed in base ``m`` with
    ``w1`` most significant.
    """

    center: complex
    radius: float
    branches: list[Branch]
    boundary_samples: int = 512
    certificate: Certificate | None = field(default=None, init=False)

    def __post_init__(self):
        if not self.branches:
            raise ValidationError("a repelling system needs at least one branch")
        if self.radius <= 0:
            raise ValidationError("target radius must be positive")
        self.center = complex(self.center)
        self.certificate = self.certify()

    @property
    def branch_count(self) -> int:
        return len(self.branches)

    def boundary(self) -> np.ndarray:
        t = 2 * np.pi * np.arange(self.boundary_samples) / self.boundary_samples
        return self.center + self.radius * np.exp(1j * t)

    def certify(self) -> Certificate:
        """Margins of ``U_k`` in ``U``, pairwise gaps and boundary degrees.

        Images of the sampled boundary circle stand in for ``U_k``; the
        degree is the winding of ``g_k(dU)`` around ``g_k(center)``.
        """
        circle = self.boundary()
        images = [np.asarray(b.inverse(circle), dtype=complex) for b in self.branches]
        margin = min(self.radius - float(np.max(np.abs(img - self.center))) for img in images)
        degrees = [_winding(img, complex(b.inverse(self.center))) for img, b in zip(images, self.branches)]
        gap = np.inf
        for (i, a), (j, b) in itertools.combinations(enumerate(images), 2):
            inside = _winding(a, b[0]) != 0 or _winding(b, a[0]) != 0
            dist = float(np.min(np.abs(a[:, None] - b[None, :])))
            gap = min(gap, -dist if inside else dist)
        return Certificate(margin, gap, degrees)

    def require_certified(self) -> None:
        cert = self.certificate
        if not cert.ok:
            raise ValidationError(
                f"branches not certified: margin {cert.margin:.3g}, gap {cert.min_gap:.3g}, degrees {cert.degrees}"
            )

    def cylinder_points(self, depth: int) -> np.ndarray:
        m = self.branch_count
        if m**depth > MAX_CYLINDERS:
            raise DepthBudgetExceeded(f"{m}^{depth} cylinders exceed the budget {MAX_CYLINDERS}")
        pts = np.array([self.center])
        for _ in range(depth):
            pts = np.concatenate([np.asarray(b.inverse(pts), dtype=complex) for b in self.branches])
        return pts

    def log_branch_derivatives(self, depth: int) -> np.ndarray:
        pts = self.cylinder_points(depth)
        return np.array([np.log(np.abs(b.inverse_deriv(pts))) for b in self.branches])


def linear_system(ratios: Sequence[float], radius: float = 1.0) -> RepellingSystem:
    """Similarities with the given ratios, images laid out on a diameter of ``D(0, radius)``."""
    ratios = [float(r) for r in ratios]
    if not ratios or any(not 0 < r < 1 for r in ratios):
        raise ValidationError("ratios must lie in (0, 1)")
    total = sum(ratios)
    if total >= 1:
        raise ValidationError("ratios must sum to less than 1 for disjoint images")
    # image k is D(offset_k, r_k * radius); lay them along [-radius, radius]
    gap = 2 * (1 - total) / (len(ratios) + 1)
    left = -1 + gap
    branches = []
    for r in ratios:
        branches.append(linear_branch(r, radius * (left + r)))
        left += 2 * r + gap
    return RepellingSystem(0j, radius, branches)


def cantor_system() -> RepellingSystem:
    """Middle-thirds Cantor set: ``z/3`` and ``z/3 + 2/3`` on ``D(1/2, 0.6)``."""
    return RepellingSystem(0.5, 0.6, [linear_branch(1 / 3, 0), linear_branch(1 / 3, 2 / 3)])


def circle_system() -> RepellingSystem:
    """Two inverse branches of ``z^2`` near 1 whose non-escaping set lies on ``|z| = 1``.

    ``sqrt(z)`` (one step) and ``exp(i pi / 8) z^(1/16)`` (four steps) on ``D(1, 0.6)``.
    """
    turn = np.exp(1j * np.pi / 8)
    return RepellingSystem(
        1.0,
        0.6,
        [
            Branch(np.sqrt, lambda z: 0.5 / np.sqrt(z), 1, lambda z: np.asarray(z) ** 2),
            Branch(lambda z: turn * np.asarray(z) ** (1 / 16), lambda z: turn / 16 * np.asarray(z) ** (-15 / 16), 4,
                   lambda z: np.asarray(z) ** 16),
        ],
    )


@dataclass
class NonEscapingSample:
    points: np.ndarray
    depth: int
    invariance_residual: float


def nonescaping_set(R: RepellingSystem, depth: int, budget: int = MAX_CYLINDERS) -> NonEscapingSample:
    """Representatives of all depth-``depth`` cylinders of the non-escaping set.

    The invariance residual measures how far ``g`` maps interior cylinders
    outside ``U_{w2}`` (0 when every image lands inside); it needs forward
    maps on all branches and is ``nan`` otherwise.

    Raises
    ------
    DepthBudgetExceeded
        If the number of cylinders exceeds ``budget``.
    """
    if depth < 0:
        raise ValidationError("depth must be nonnegative")
    m = R.branch_count
    if m**depth > budget:
        raise DepthBudgetExceeded(f"{m}^{depth} cylinders exceed the budget {budget}")
    R.require_certified()
    pts = R.cylinder_points(depth)
    residual = float("nan")
    if depth >= 2 and all(b.forward is not None for b in R.branches):
        size = m ** (depth - 1)
        worst = 0.0
        for k, bk in enumerate(R.branches):
            image = np.asarray(bk.forward(pts[k * size : (k + 1) * size]))
            for j, bj in enumerate(R.branches):
                chunk = image[j * size // m : (j + 1) * size // m]
                back = np.asarray(bj.forward(chunk))
                worst = max(worst, float(np.max(np.abs(back - R.center))) - R.radius)
        residual = max(worst, 0.0)
    return NonEscapingSample(pts, depth, residual)


# ---- quadratic Julia sets -------------------------------------------------

@dataclass
class QuadraticJuliaSystem(SymbolicSystem):
    """Two-branch coding of the Julia set of ``z^2 + c`` for small ``|c|``.

    Cylinder ``w`` of depth ``n`` is represented by the motion of the
    ``z^2`` periodic point at angle ``w / (2^n - 1)`` (a Markov pair of arcs
    at depth 1).  Branch ``k`` maps cylinder ``w`` into the cylinder with
    ``k`` prepended.
    """

    c: complex
    branch_count: int = 2
    _cache: dict = field(default_factory=dict, repr=False)

    def cylinder_points(self, depth: int) -> np.ndarray:
        if depth in self._cache:
            return self._cache[depth]
        if 2**depth > MAX_CYLINDERS:
            raise DepthBudgetExceeded(f"2^{depth} cylinders exceed the budget {MAX_CYLINDERS}")
        period = 2**depth - 1
        base = np.exp(2j * np.pi * np.arange(period) / period)
        motion = motion_hyperbolic_set(HyperbolicSetMotion.build(Polynomial.monomial(2), base), Polynomial.quadratic(self.c))
        pts = np.append(motion.points, motion.points[0])  # word 1...1 has angle 1 == 0
        self._cache[depth] = pts
        return pts

    def log_branch_derivatives(self, depth: int) -> np.ndarray:
        pts = self.cylinder_points(depth)
        n_words = 2**depth
        out = np.empty((2, n_words))
        words = np.arange(n_words)
        for k in range(2):
            target = k * (n_words // 2) + words // 2
            # preimage of the source point lying in the target cylinder
            root = np.sqrt(pts - self.c)
            pre = np.where(np.abs(root - pts[target]) <= np.abs(-root - pts[target]), root, -root)
            out[k] = -np.log(np.abs(2 * pre))
        return out


# ---- pressure and dimension -----------------------------------------------

def transfer_matrix(system: SymbolicSystem, depth: int, s: float, log_derivs: np.ndarray | None = None) -> sparse.csr_matrix:
    """``L_s[v, w] = |g_k'(x_w)|^s`` where ``v`` is ``k`` prepended to ``w`` (truncated)."""
    m = system.branch_count
    n_words = m**depth
    logs = system.log_branch_derivatives(depth) if log_derivs is None else log_derivs
    words = np.arange(n_words)
    rows = np.concatenate([k * (n_words // m) + words // m for k in range(m)]) if depth else np.zeros(m, dtype=int)
    cols = np.tile(words, m)
    vals = np.exp(s * logs.ravel())
    return sparse.csr_matrix((vals, (rows, cols)), shape=(n_words, n_words))


def leading_eigenvalue(matrix, rtol: float = 1e-12, max_iter: int = 100000) -> float:
    """Perron eigenvalue by power iteration on a nonnegative matrix.

    Raises
    ------
    EigenvalueNotConverged
        If successive estimates do not agree to ``rtol`` within ``max_iter`` steps.
    """
    n = matrix.shape[0]
    vec = np.full(n, 1.0 / n)
    prev = None
    for _ in range(max_iter):
        nxt = matrix @ vec
        norm = float(nxt.sum())
        if norm == 0 or not np.isfinite(norm):
            raise EigenvalueNotConverged("iteration collapsed")
        vec = nxt / norm
        if prev is not None and abs(norm - prev) <= rtol * abs(norm):
            return norm
        prev = norm
    raise EigenvalueNotConverged(f"no convergence in {max_iter} iterations")


@dataclass
class DimensionReport:
    estimate: float
    bracket: tuple[float, float]
    depth: int
    refinement_gap: float
    eigenvalue_residual: float
    history: list[tuple[int, float]]

    def to_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "bracket": list(self.bracket),
            "depth": self.depth,
            "refinement_gap": self.refinement_gap,
            "eigenvalue_residual": self.eigenvalue_residual,
            "grid": [{"depth": d, "estimate": e} for d, e in self.history],
        }


def _zero_of_pressure(system: SymbolicSystem, depth: int, bracket: tuple[float, float], tol: float) -> tuple[float, float]:
    logs = system.log_branch_derivatives(depth)

    def excess(s: float) -> float:
        return leading_eigenvalue(transfer_matrix(system, depth, s, logs)) - 1.0

    lo, hi = bracket
    f_lo, f_hi = excess(lo), excess(hi)
    if f_lo == 0:
        return lo, 0.0
    if f_hi == 0:
        return hi, 0.0
    if f_lo * f_hi > 0:
        raise BracketDoesNotStraddle(f"pressure has the same sign at s = {lo} and s = {hi}")
    probe = [excess(s) for s in np.linspace(lo, hi, 5)]
    if np.any(np.diff(probe) > 1e-12):
        raise ValidationError("leading eigenvalue is not decreasing in s")
    root = optimize.bisect(excess, lo, hi, xtol=tol)
    return float(root), abs(excess(root))


def pressure_dimension(
    system: SymbolicSystem,
    depth: int | None = None,
    bracket: tuple[float, float] = (0.0, 2.0),
    refine_tol: float = 1e-3,
    max_depth: int = 14,
    tol: float = 1e-10,
) -> DimensionReport:
    """Zero of the pressure ``s -> log lambda(L_s)``.

    With ``depth`` given, one transfer matrix is used.  Otherwise the depth
    grows from 2 until two successive estimates agree to ``refine_tol``.

    Raises
    ------
    BracketDoesNotStraddle
        If the eigenvalue minus one does not change sign on ``bracket``.
    EigenvalueNotConverged
        If power iteration stalls, or the refinement never settles.
    """
    if isinstance(system, RepellingSystem):
        system.require_certified()
    if depth is not None:
        est, res = _zero_of_pressure(system, depth, bracket, tol)
        return DimensionReport(est, bracket, depth, float("nan"), res, [(depth, est)])
    history = []
    start = 2
    for d in range(start, max_depth + 1):
        if system.branch_count**d > MAX_CYLINDERS:
            break
        est, res = _zero_of_pressure(system, d, bracket, tol)
        history.append((d, est))
        if len(history) >= 2 and abs(history[-1][1] - history[-2][1]) < refine_tol:
            return DimensionReport(est, bracket, d, abs(history[-1][1] - history[-2][1]), res, history)
    raise EigenvalueNotConverged(f"refinement did not settle: {history}")


def moran_dimension(ratios: Sequence[float], tol: float = 1e-12) -> float:
    """Root of ``sum r_k^s = 1`` by bisection."""
    r = np.asarray(list(ratios), dtype=float)
    if r.size == 0:
        raise ValidationError("ratio list is empty")
    if np.any((r <= 0) | (r >= 1)):
        raise ValidationError("ratios must lie in (0, 1)")
    if r.size == 1:
        return 0.0

    def excess(s):
        return float(np.sum(r**s)) - 1.0

    hi = 1.0
    while excess(hi) > 0:
        hi *= 2
    return float(optimize.bisect(excess, 0.0, hi, xtol=tol))


def shishikura_bound(eta: float, c1: float = 0.0, c2: float = 1.0, q: int = 1) -> float:
    """``(C1 + log eta + 4 pi eta) / (log C2 + (q+1) log eta + 2 pi eta)``."""
    if not eta > 1:
        raise ValidationError("eta must exceed 1")
    if not c2 > 0:
        raise ValidationError("C2 must be positive")
    if q < 1 or int(q) != q:
        raise ValidationError("q must be a positive integer")
    log_eta = np.log(eta)
    return float((c1 + log_eta + 4 * np.pi * eta) / (np.log(c2) + (q + 1) * log_eta + 2 * np.pi * eta))


# ---- angular width --------------------------------------------------------

def bound_c(r: float) -> float:
    """``4 log((1 + r) / (1 - r))``."""
    if not 0 <= r < 1:
        raise ValidationError("r must lie in [0, 1)")
    return float(4 * np.log((1 + r) / (1 - r)))


def angular_width(samples) -> float:
    """Oscillation of a continuous argument along an ordered connected sample path.

    Raises
    ------
    OriginInDomain
        If a sample is 0.
    """
    z = np.ravel(np.asarray(samples, dtype=complex))
    if z.size == 0:
        raise ValidationError("no samples")
    if np.any(z == 0):
        raise OriginInDomain("sample set contains 0")
    arg = np.unwrap(np.angle(z))
    return float(arg.max() - arg.min())


def omits_origin(f: Callable, radius: float = 0.999, samples: int = 8192) -> bool:
    """Whether ``f`` has no zero in ``|z| <= radius`` (winding of the boundary image)."""
    edge = np.asarray(f(radius * np.exp(2j * np.pi * np.arange(samples) / samples)), dtype=complex)
    return bool(np.all(edge != 0) and _winding(edge, 0) == 0)


def angular_width_image(f: Callable, r: float, n_angles: int = 4096, n_radii: int = 64, refine: bool = True) -> float:
    """Angular width of ``f(closed disk of radius r)`` for univalent ``f`` omitting 0.

    A continuous argument is built on a polar grid (unwrapped along the
    radius at angle 0, then around each circle).  The argument is harmonic,
    so its extremes sit on the outer circle, where they are polished with a
    bounded scalar search.

    Raises
    ------
    OriginInDomain
        If ``f`` vanishes in the unit disk (winding of ``f`` on ``|z| = 0.999``).
    """
    if not 0 <= r < 1:
        raise ValidationError("r must lie in [0, 1)")
    if not omits_origin(f):
        raise OriginInDomain("0 lies in the image of the unit disk")
    if r == 0:
        return 0.0
    theta = 2 * np.pi * np.arange(n_angles) / n_angles
    radii = np.linspace(0, r, n_radii)
    grid = np.asarray(f(radii[:, None] * np.exp(1j * theta[None, :])), dtype=complex)
    spoke = np.unwrap(np.angle(grid[:, 0]))
    rings = np.unwrap(np.angle(grid), axis=1)
    rings += (spoke - rings[:, 0])[:, None]
    closure = np.abs(np.unwrap(np.angle(np.append(grid[-1], grid[-1, 0])))[-1] - np.unwrap(np.angle(grid[-1]))[0])
    if closure > 1e-6:
        raise OriginInDomain("argument does not close up around the image")
    width = float(rings.max() - rings.min())
    if not refine:
        return width
    outer = rings[-1]
    i_max, i_min = int(np.argmax(outer)), int(np.argmin(outer))
    step = 2 * np.pi / n_angles

    def arg_at(t, near):
        value = np.angle(f(r * np.exp(1j * t)))
        return value + 2 * np.pi * np.round((near - value) / (2 * np.pi))

    hi = optimize.minimize_scalar(lambda t: -arg_at(t, outer[i_max]), bounds=(theta[i_max] - step, theta[i_max] + step),
                                  method="bounded", options={"xatol": 1e-13})
    lo = optimize.minimize_scalar(lambda t: arg_at(t, outer[i_min]), bounds=(theta[i_min] - step, theta[i_min] + step),
                                  method="bounded", options={"xatol": 1e-13})
    return float(max(-hi.fun, outer.max()) - min(lo.fun, outer.min()))


def random_univalent_map(rng: np.random.Generator) -> Callable:
    """Random Möbius or rotated, rescaled, translated Koebe map omitting 0 on the disk.

    The translation is drawn until 0 falls outside the image of the disk.
    """
    while True:
        if rng.random() < 0.5:
            pole = (1.05 + 3 * rng.random()) * np.exp(2j * np.pi * rng.random())
            scale = np.exp(rng.normal()) * np.exp(2j * np.pi * rng.random())
            shift = complex(rng.normal(scale=3), rng.normal(scale=3))
            f = lambda z, p=pole, a=scale, b=shift: a * z / (1 - z / p) + b  # noqa: E731
        else:
            rot = np.exp(2j * np.pi * rng.random())
            squeeze = 0.5 + 0.5 * rng.random()
            scale = np.exp(rng.normal()) * np.exp(2j * np.pi * rng.random())
            shift = complex(rng.normal(scale=3), rng.normal(scale=3))
            f = lambda z, u=rot, s=squeeze, a=scale, b=shift: a * (s * z) / (1 - u * s * z) ** 2 + b  # noqa: E731
        if omits_origin(f):
            return f


# ---- near-parabolic basin boundaries ---------------------------------------

def quadratic_from_multiplier(multiplier: complex) -> Polynomial:
    """Monic centered form ``z^2 + c`` of ``lambda z + z^2``."""
    lam = complex(multiplier)
    return Polynomial.quadratic(lam / 2 - lam * lam / 4)


@dataclass
class TrendPoint:
    a1: int
    alpha: complex
    c: complex
    dimension: float
    stderr: float

    def to_dict(self) -> dict:
        return {
            "a1": self.a1,
            "alpha": [self.alpha.real, self.alpha.imag],
            "c": [self.c.real, self.c.imag],
            "dimension": self.dimension,
            "stderr": self.stderr,
        }


def basin_boundary_trend(
    a1_values: Sequence[int] = (2, 3, 5, 10),
    nu: complex = -1j,
    resolution: int = 1024,
    iter_budget: int = 1000,
    window: tuple[float, float, float, float] = (-2.0, 2.0, -2.0, 2.0),
    threads: int | None = None,
) -> list[TrendPoint]:
    """Box-count dimension of the basin boundary of ``lambda z + z^2`` along ``a1 = a2``.

    ``lambda = exp(2 pi i alpha)`` with ``alpha = 1 / (a1 - 1 / (a1 + nu))``;
    ``Im nu < 0`` keeps the fixed point attracting, so the basin boundary is
    the Julia set of the conjugate ``z^2 + c``.
    """
    from .parabolic import alpha_chain
    from .polydyn import box_dimension, julia_raster

    if complex(nu).imag >= 0:
        raise ValidationError("Im nu must be negative for an attracting fixed point")
    out = []
    for a1 in a1_values:
        alpha = alpha_chain(a1, a1, nu).alpha
        f = quadratic_from_multiplier(np.exp(2j * np.pi * alpha))
        raster = julia_raster(f, window=window, resolution=resolution, iter_budget=iter_budget, threads=threads)
        fit = box_dimension(raster.boundary_points())
        out.append(TrendPoint(int(a1), complex(alpha), complex(f.coeffs[-1]), fit.dimension, fit.stderr))
    return out


def is_nondecreasing(values: Sequence[float], noise: float = 0.03) -> bool:
    """Every later value is at least every earlier one minus ``noise``."""
    return all(later >= earlier - noise for i, earlier in enumerate(values) for later in values[i + 1 :])
