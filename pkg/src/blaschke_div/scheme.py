"""Mapping schemes and divisor tuples over them.

A mapping scheme ``(V, sigma, delta)`` is a finite self-map of vertices with
a degree attached to each vertex.  A scheme divisor assigns to every vertex
``v`` a divisor of degree ``delta(v) - 1`` in the closed disk; its interior
part defines a fixed-point-centered Blaschke product ``B_v`` and the
boundary part records zeros that escaped to the unit circle.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from math import prod
from typing import Mapping, Sequence

import numpy as np

from .blaschke import BlaschkeProduct, compose, from_divisor
from .divisor import BOUNDARY_TOL, Divisor, DiskSplit, split_disk
from .errors import DegenerateCycle, ValidationError

ANGULAR_TOL = 1e-8


@dataclass(frozen=True)
class MappingScheme:
    vertices: tuple[str, ...]
    sigma: Mapping[str, str]
    delta: Mapping[str, int]

    @classmethod
    def build(cls, sigma: Mapping[str, str], delta: Mapping[str, int]) -> "MappingScheme":
        verts = tuple(sorted(sigma, key=str))
        if set(delta) != set(verts):
            raise ValidationError("sigma and delta must share the vertex set")
        for v in verts:
            if sigma[v] not in sigma:
                raise ValidationError(f"sigma({v}) = {sigma[v]} is not a vertex")
            if int(delta[v]) < 1:
                raise ValidationError(f"delta({v}) must be a positive integer")
        return cls(verts, dict(sigma), {v: int(delta[v]) for v in verts})

    def orbit(self, v: str, steps: int) -> list[str]:
        out = [v]
        for _ in range(steps):
            out.append(self.sigma[out[-1]])
        return out

    def to_dict(self) -> dict:
        return {"vertices": [{"id": v, "sigma": self.sigma[v], "delta": self.delta[v]} for v in self.vertices]}

    @classmethod
    def from_dict(cls, data: dict) -> "MappingScheme":
        try:
            rows = data["vertices"]
            return cls.build({str(r["id"]): str(r["sigma"]) for r in rows}, {str(r["id"]): int(r["delta"]) for r in rows})
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed scheme JSON: {exc}") from exc


@dataclass(frozen=True)
class SchemeReport:
    periodic: tuple[str, ...]
    nonperiodic: tuple[str, ...]
    cycles: tuple[tuple[str, ...], ...]
    period: Mapping[str, int]


def validate(S: MappingScheme) -> SchemeReport:
    """Periodic/aperiodic split and cycle decomposition.

    Raises :class:`DegenerateCycle` when the degrees around some cycle
    multiply to 1.
    """
    periodic = set()
    cycles = []
    for v in S.vertices:
        if v in periodic:
            continue
        # v is periodic iff it recurs within |V| steps
        orbit = S.orbit(v, len(S.vertices))
        if v in orbit[1:]:
            ell = orbit[1:].index(v) + 1
            cycle = tuple(orbit[:ell])
            periodic.update(cycle)
            start = min(range(ell), key=lambda k: cycle[k])
            cycles.append(cycle[start:] + cycle[:start])
    for cycle in cycles:
        if prod(S.delta[w] for w in cycle) < 2:
            raise DegenerateCycle(f"degree product on cycle {cycle} equals 1")
    period = {w: len(c) for c in cycles for w in c}
    return SchemeReport(
        tuple(v for v in S.vertices if v in periodic),
        tuple(v for v in S.vertices if v not in periodic),
        tuple(sorted(cycles)),
        period,
    )


def count_markings(S: MappingScheme) -> int:
    """Product of ``delta`` over aperiodic vertices times ``Delta(O) - 1`` over cycles."""
    rep = validate(S)
    n = prod(S.delta[v] for v in rep.nonperiodic)
    for cycle in rep.cycles:
        n *= prod(S.delta[w] for w in cycle) - 1
    return n


class ComposedMap:
    """Composition ``maps[-1] o ... o maps[0]`` with chain-rule derivative."""

    def __init__(self, maps: Sequence[BlaschkeProduct]):
        self.maps = list(maps)

    @property
    def degree(self) -> int:
        return prod(m.degree for m in self.maps)

    def eval(self, z):
        for m in self.maps:
            z = m.eval(z)
        return z

    __call__ = eval

    def deriv(self, z):
        d = np.ones_like(np.asarray(z, dtype=complex))
        for m in self.maps:
            d = d * m.deriv(z)
            z = m.eval(z)
        return d if np.ndim(d) else complex(d)

    def eval_with_deriv(self, z):
        z = np.asarray(z, dtype=complex)
        d = np.ones_like(z)
        for m in self.maps:
            d = d * m.deriv(z)
            z = m.eval(z)
        return z, d

    def iterate(self, k: int) -> "ComposedMap":
        return ComposedMap(self.maps * k)

    def then(self, other: "ComposedMap") -> "ComposedMap":
        return ComposedMap(self.maps + other.maps)


class Stratum(str, enum.Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    PARTIAL0 = "partial0"
    PARTIAL0_STAR = "partial0*"


class SchemeDivisor:
    """Divisor tuple ``(D_v)`` over a validated scheme."""

    def __init__(self, scheme: MappingScheme, divisors: Mapping[str, Divisor], tol: float = BOUNDARY_TOL):
        self.scheme = scheme
        self.report = validate(scheme)
        if set(divisors) != set(scheme.vertices):
            raise ValidationError("one divisor per vertex is required")
        self.factors: dict[str, DiskSplit] = {}
        for v in scheme.vertices:
            split = split_disk(divisors[v], tol)
            if split.degree != scheme.delta[v] - 1:
                raise ValidationError(f"vertex {v}: degree {split.degree} != delta - 1 = {scheme.delta[v] - 1}")
            self.factors[v] = split
        self.maps: dict[str, BlaschkeProduct] = {v: from_divisor(self.factors[v].interior) for v in scheme.vertices}

    def divisor(self, v: str) -> Divisor:
        return self.factors[v].recombined()

    def interior(self, v: str) -> Divisor:
        return self.factors[v].interior

    def boundary(self, v: str) -> Divisor:
        return self.factors[v].boundary

    def route(self, u: str, steps: int) -> ComposedMap:
        """``B_{sigma^{steps-1} u} o ... o B_u``."""
        verts = self.scheme.orbit(u, steps)[:-1] if steps else []
        return ComposedMap([self.maps[w] for w in verts])

    def return_map(self, v: str) -> ComposedMap:
        if v not in self.report.period:
            raise ValidationError(f"vertex {v} is not periodic")
        return self.route(v, self.report.period[v])

    def depth(self, u: str) -> int:
        """Number of sigma-steps from ``u`` into the periodic part."""
        k, w = 0, u
        while w not in self.report.period:
            w = self.scheme.sigma[w]
            k += 1
        return k

    def with_divisors(self, updates: Mapping[str, Divisor]) -> "SchemeDivisor":
        new = {v: self.divisor(v) for v in self.scheme.vertices}
        new.update(updates)
        return SchemeDivisor(self.scheme, new)

    def to_dict(self) -> dict:
        return {"scheme": self.scheme.to_dict(), "divisors": {v: self.divisor(v).to_dict() for v in self.scheme.vertices}}

    @classmethod
    def from_dict(cls, data: dict) -> "SchemeDivisor":
        try:
            S = MappingScheme.from_dict(data["scheme"])
            divs = {str(k): Divisor.from_dict(d) for k, d in data["divisors"].items()}
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed scheme divisor JSON: {exc}") from exc
        return cls(S, divs)


def boundary_stratum(D: SchemeDivisor, angular_tol: float = ANGULAR_TOL) -> Stratum:
    verts = D.scheme.vertices
    if all(D.boundary(v).degree == 0 for v in verts):
        return Stratum.INTERIOR
    for cycle in D.report.cycles:
        if sum(D.interior(w).degree for w in cycle) < 1:
            return Stratum.BOUNDARY
    for v in verts:
        if any(abs(np.angle(q)) <= angular_tol for q in D.boundary(v).points):
            return Stratum.PARTIAL0
    return Stratum.PARTIAL0_STAR


def hat_composition(D: SchemeDivisor, v: str) -> BlaschkeProduct:
    """Return map around the cycle of ``v`` as a single Blaschke product."""
    maps = D.return_map(v).maps
    out = maps[0]
    for m in maps[1:]:
        out = compose(m, out)
    return out


def _angle_gap(a, b) -> np.ndarray:
    return np.abs(np.angle(np.asarray(a) / np.asarray(b)))


@dataclass(frozen=True)
class PreperiodicityTag:
    m: int
    l: int


def _period_on_circle(F: ComposedMap, q: complex, horizon: int, tol: float) -> int | None:
    z, d = complex(q), 1.0 + 0j
    for l in range(1, horizon + 1):
        dz = F.deriv(z)
        z = F.eval(z)
        d *= dz
        z /= abs(z)
        # rounding in an expanding circle map grows with the derivative
        if _angle_gap(z, q) <= tol + 4e-16 * abs(d):
            return l
    return None


def classify_preperiodic(D: SchemeDivisor, u: str, q: complex, horizon: int = 50, tol: float = 1e-9) -> PreperiodicityTag | None:
    """Smallest ``m`` and then ``l`` with ``sigma^m(u)`` periodic and the pushed
    point of period ``l`` under the return map; ``None`` when nothing is found
    within the horizon."""
    if abs(abs(q) - 1) > 1e-9:
        raise ValidationError("q must lie on the unit circle")
    z, w = complex(q) / abs(q), u
    for m in range(horizon + 1):
        if w in D.report.period:
            l = _period_on_circle(D.return_map(w), z, horizon, tol)
            if l is not None:
                return PreperiodicityTag(m, l)
        z = D.maps[w].eval(z)
        z /= abs(z)
        w = D.scheme.sigma[w]
    return None


class Verdict(str, enum.Enum):
    TRUE = "true"
    FALSE = "false"
    UNDECIDED = "undecided-at-horizon"


@dataclass(frozen=True)
class MisiurewiczReport:
    verdict: Verdict
    generic: bool
    min_separation: float


def _feeders(D: SchemeDivisor, v: str) -> list[tuple[str, int]]:
    """Vertices ``u != v`` reaching ``v``, with the first hitting time."""
    out = []
    n = len(D.scheme.vertices)
    for u in D.scheme.vertices:
        if u == v:
            continue
        orbit = D.scheme.orbit(u, n)
        if v in orbit[1:]:
            out.append((u, orbit[1:].index(v) + 1))
    return out


def landing_sets(D: SchemeDivisor, v: str) -> np.ndarray:
    """Images at ``v`` of boundary supports of the vertices feeding into ``v``."""
    pts = []
    for u, r in _feeders(D, v):
        supp = np.asarray(D.boundary(u).points, dtype=complex)
        if supp.size:
            img = D.route(u, r).eval(supp)
            pts.extend(img / np.abs(img))
    return np.asarray(pts, dtype=complex)


def is_misiurewicz(D: SchemeDivisor, horizon: int = 50, tol: float = ANGULAR_TOL) -> MisiurewiczReport:
    """Finite-horizon test that escaped zeros never meet forward orbits.

    ``FALSE`` if some boundary support point comes within ``tol`` of the
    relevant orbit set, ``TRUE`` if every gap exceeds ``10 * tol``, and
    ``UNDECIDED`` otherwise.
    """
    if boundary_stratum(D) not in (Stratum.PARTIAL0_STAR, Stratum.INTERIOR):
        raise ValidationError("the Misiurewicz test needs a divisor in the partial0* stratum")
    generic = all(m == 1 for v in D.scheme.vertices for m in D.boundary(v).mults)
    gap = np.inf
    for v in D.scheme.vertices:
        supp = np.asarray(D.boundary(v).points, dtype=complex)
        feeds = landing_sets(D, v)
        orbit_pts = []
        if v in D.report.period:
            F = D.return_map(v)
            z = np.concatenate([feeds, supp])
            for _ in range(horizon):
                if z.size == 0:
                    break
                z = F.eval(z)
                z = z / np.abs(z)
                orbit_pts.append(z)
        if supp.size == 0:
            continue
        others = np.concatenate([feeds] + orbit_pts) if (feeds.size or orbit_pts) else np.zeros(0, complex)
        if others.size:
            gap = min(gap, float(np.min(_angle_gap(supp[:, None], others[None, :]))))
    if gap <= tol:
        verdict = Verdict.FALSE
    elif gap >= 10 * tol:
        verdict = Verdict.TRUE
    else:
        verdict = Verdict.UNDECIDED
    return MisiurewiczReport(verdict, generic, gap)


def periodic_boundary_points(F: ComposedMap | BlaschkeProduct, period: int, samples: int = 4096) -> np.ndarray:
    """Points of exact period ``period`` of a circle-preserving map on the unit circle.

    Sign changes of the angular displacement of ``F^period`` on a fine grid
    are refined by bisection.
    """
    G = ComposedMap([F] * period) if isinstance(F, BlaschkeProduct) else F.iterate(period)
    theta = np.linspace(0, 2 * np.pi, samples, endpoint=False)

    def disp(t):
        z = np.exp(1j * np.asarray(t))
        return np.angle(G.eval(z) / z)

    vals = disp(theta)
    found = []
    for k in range(samples):
        a, b = theta[k], theta[k] + 2 * np.pi / samples
        fa, fb = vals[k], vals[(k + 1) % samples]
        # a genuine crossing has small displacement on both sides
        if fa == 0:
            found.append(a)
            continue
        if fa * fb < 0 and abs(fa - fb) < np.pi:
            for _ in range(60):
                c = 0.5 * (a + b)
                fc = disp(c)
                if fa * fc <= 0:
                    b = c
                else:
                    a, fa = c, fc
            found.append(0.5 * (a + b))
    pts = np.exp(1j * np.asarray(found))
    exact = []
    for p in pts:
        smaller = [d for d in range(1, period) if period % d == 0]
        H = F if isinstance(F, ComposedMap) else ComposedMap([F])
        if not any(_angle_gap(H.iterate(d).eval(p), p) < 1e-7 for d in smaller):
            exact.append(p)
    return np.asarray(exact)


def load_scheme(path) -> MappingScheme:
    with open(path) as fh:
        return MappingScheme.from_dict(json.load(fh))


def load_scheme_divisor(path) -> SchemeDivisor:
    with open(path) as fh:
        return SchemeDivisor.from_dict(json.load(fh))
