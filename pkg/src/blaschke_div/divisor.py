"""Finite integral divisors in the plane.

A divisor is a finite formal sum ``sum nu(q) * q`` of points with positive
integer multiplicities.  Instances are immutable and canonical: entries are
sorted by ``(re, im)`` and points closer than the merge tolerance are fused,
so ``==`` compares divisors as mathematical objects.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .errors import DegreeMismatch, PointOutsideClosedDisk

MERGE_RTOL = 1e-12
BOUNDARY_TOL = 1e-9


def _close(a: complex, b: complex) -> bool:
    return abs(a - b) <= MERGE_RTOL * max(1.0, abs(a), abs(b))


@dataclass(frozen=True)
class Divisor:
    """Immutable divisor with canonical entry order.

    Build instances with :meth:`from_points` or :meth:`from_entries`; the raw
    constructor expects already canonical data.
    """

    points: tuple[complex, ...] = ()
    mults: tuple[int, ...] = ()

    def __post_init__(self):
        if len(self.points) != len(self.mults):
            raise ValueError("points and multiplicities differ in length")
        if any(int(m) != m or m < 1 for m in self.mults):
            raise ValueError("multiplicities must be positive integers")

    @classmethod
    def from_entries(cls, entries: Iterable[tuple[complex, int]]) -> "Divisor":
        merged: list[list] = []
        for point, mult in entries:
            point = complex(point)
            if not (np.isfinite(point.real) and np.isfinite(point.imag)):
                raise ValueError(f"non-finite point {point!r}")
            mult = int(mult)
            if mult < 1:
                raise ValueError("multiplicities must be positive integers")
            for slot in merged:
                if _close(slot[0], point):
                    slot[1] += mult
                    break
            else:
                merged.append([point, mult])
        merged.sort(key=lambda s: (s[0].real, s[0].imag))
        return cls(tuple(s[0] for s in merged), tuple(s[1] for s in merged))

    @classmethod
    def from_points(cls, points: Iterable[complex]) -> "Divisor":
        """Divisor with one unit of multiplicity per listed point."""
        return cls.from_entries((p, 1) for p in np.ravel(np.asarray(list(points), dtype=complex)))

    @classmethod
    def empty(cls) -> "Divisor":
        return cls()

    @property
    def degree(self) -> int:
        return int(sum(self.mults))

    @property
    def support(self) -> tuple[complex, ...]:
        return self.points

    @property
    def entries(self) -> list[tuple[complex, int]]:
        return list(zip(self.points, self.mults))

    def expanded(self) -> np.ndarray:
        """Points repeated according to multiplicity."""
        return np.repeat(np.asarray(self.points, dtype=complex), self.mults) if self.points else np.zeros(0, complex)

    def multiplicity(self, point: complex) -> int:
        for q, m in self.entries:
            if _close(q, point):
                return m
        return 0

    def __add__(self, other: "Divisor") -> "Divisor":
        return add(self, other)

    def __len__(self) -> int:
        return len(self.points)

    def __repr__(self) -> str:
        body = " + ".join(f"{m}·({q.real:.6g}{q.imag:+.6g}j)" for q, m in self.entries)
        return f"Divisor({body or '0'})"

    def to_dict(self) -> dict:
        return {"entries": [{"re": q.real, "im": q.imag, "mult": m} for q, m in self.entries]}

    @classmethod
    def from_dict(cls, data: dict) -> "Divisor":
        try:
            raw = data["entries"]
            return cls.from_entries((complex(float(e["re"]), float(e["im"])), int(e["mult"])) for e in raw)
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed divisor JSON: {exc}") from exc


@dataclass(frozen=True)
class DiskSplit:
    interior: Divisor
    boundary: Divisor

    @property
    def degree(self) -> int:
        return self.interior.degree + self.boundary.degree

    def recombined(self) -> Divisor:
        return self.interior + self.boundary


def degree(D: Divisor) -> int:
    return D.degree


def add(D1: Divisor, D2: Divisor) -> Divisor:
    return Divisor.from_entries(D1.entries + D2.entries)


def split_disk(D: Divisor, tol: float = BOUNDARY_TOL) -> DiskSplit:
    """Separate interior points from boundary points.

    Boundary points are projected radially onto the unit circle so that
    ``|q| == 1`` holds to rounding in later formulas.
    """
    inner, outer = [], []
    for q, m in D.entries:
        r = abs(q)
        if r > 1 + tol:
            raise PointOutsideClosedDisk(f"point {q} has modulus {r} > 1 + {tol}")
        if r < 1 - tol:
            inner.append((q, m))
        else:
            outer.append((q / r, m))
    return DiskSplit(Divisor.from_entries(inner), Divisor.from_entries(outer))


def _check_degrees(D1: Divisor, D2: Divisor) -> None:
    if D1.degree != D2.degree:
        raise DegreeMismatch(f"degrees {D1.degree} and {D2.degree} differ")


def _perfect_matching_exists(allowed: np.ndarray) -> bool:
    if allowed.size == 0:
        return True
    match = maximum_bipartite_matching(csr_matrix(allowed.astype(np.int8)), perm_type="column")
    return bool(np.all(match >= 0))


def matching_distance(D1: Divisor, D2: Divisor) -> float:
    """Bottleneck distance between multiplicity-expanded point lists.

    The optimum is one of the pairwise distances, so a binary search over
    the sorted distances with a perfect-matching test finds it exactly.
    """
    _check_degrees(D1, D2)
    a, b = D1.expanded(), D2.expanded()
    if a.size == 0:
        return 0.0
    dist = np.abs(a[:, None] - b[None, :])
    # the assignment optimum bounds the bottleneck from above; it is a cheap start
    rows, cols = linear_sum_assignment(dist)
    upper = dist[rows, cols].max()
    candidates = np.unique(dist[dist <= upper])
    lo, hi = 0, len(candidates) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _perfect_matching_exists(dist <= candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(candidates[lo])


def in_neighborhood(E: Divisor, D: Divisor, eps: float, closed: bool = False) -> bool:
    """Whether E lies in the eps-neighborhood of D.

    Open variant: every point of E must lie in the open unit disk.  Closed
    variant: points of E may lie on the unit circle.
    """
    _check_degrees(E, D)
    a, b = E.expanded(), D.expanded()
    if a.size == 0:
        return True
    mod = np.abs(a)
    if closed:
        if np.any(mod > 1.0):
            return False
    elif np.any(mod >= 1.0):
        return False
    return _perfect_matching_exists(np.abs(a[:, None] - b[None, :]) < eps)


def dumps(D: Divisor) -> str:
    return json.dumps(D.to_dict(), sort_keys=True)


def loads(text: str) -> Divisor:
    return Divisor.from_dict(json.loads(text))


def read_json(path) -> Divisor:
    with open(path) as fh:
        return Divisor.from_dict(json.load(fh))


def write_json(D: Divisor, path) -> None:
    with open(path, "w") as fh:
        json.dump(D.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
