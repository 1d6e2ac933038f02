"""Parabolic and near-parabolic fixed points at the origin.

Rotation numbers ``alpha`` from continued-fraction tails, Fatou coordinates
for ``f^q(z) = z + c z^(q+1) + ...`` by orbit averaging in the coordinate
``u = -1/(q c z^q)``, horn maps between repelling and attracting charts, and
a transport check of the return-map multiplier ``exp(-2 pi i / alpha)`` for
the quadratic family ``e^(2 pi i alpha) z + z^2``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    ChartOverlapEmpty,
    DegenerateChain,
    DegenerateJet,
    GateNotCrossed,
    NotInPetal,
    SectorViolated,
    ValidationError,
)

ATTRACTING = "attracting"
REPELLING = "repelling"
NEUTRAL = "neutral"


# ---- alpha arithmetic -----------------------------------------------------

@dataclass(frozen=True)
class AlphaChain:
    a1: int
    a2: int
    nu: complex
    alpha: complex

    @property
    def classification(self) -> str:
        """``attracting`` iff Im alpha > 0, ``repelling`` iff Im alpha < 0."""
        if self.alpha.imag > 0:
            return ATTRACTING
        if self.alpha.imag < 0:
            return REPELLING
        return NEUTRAL

    @property
    def in_sector(self) -> bool:
        return in_sector(self.alpha)


def alpha_chain(a1: int, a2: int, nu: complex) -> AlphaChain:
    """``alpha = 1 / (a1 - 1 / (a2 + nu))``.

    Raises
    ------
    DegenerateChain
        When either denominator vanishes.
    """
    for name, value in (("a1", a1), ("a2", a2)):
        if int(value) != value or value < 1:
            raise ValidationError(f"{name} must be a positive integer, got {value!r}")
    a1, a2, nu = int(a1), int(a2), complex(nu)
    inner = a2 + nu
    if inner == 0:
        raise DegenerateChain("a2 + nu vanishes")
    outer = a1 - 1 / inner
    if outer == 0:
        raise DegenerateChain("a1 - 1/(a2 + nu) vanishes")
    return AlphaChain(a1, a2, nu, 1 / outer)


def in_sector(alpha: complex) -> bool:
    """``|arg alpha| < pi/4`` (and alpha nonzero)."""
    alpha = complex(alpha)
    return alpha != 0 and abs(cmath.phase(alpha)) < math.pi / 4


# ---- local maps -----------------------------------------------------------

@dataclass(frozen=True)
class LocalMap:
    """Holomorphic germ fixing 0, vectorized, with derivative.

    ``inverse(w, hint)`` returns the preimage of ``w`` nearest ``hint``; when
    absent, Newton's method from ``hint`` is used.
    """

    f: Callable
    deriv: Callable
    name: str = "map"
    inverse: Callable | None = None
    family_alpha: complex | None = None  # set for the quadratic family only

    def __call__(self, z):
        return self.f(z)

    def preimage(self, w, hint):
        if self.inverse is not None:
            return self.inverse(w, hint)
        z = np.array(hint, dtype=complex)
        for _ in range(50):
            step = (self.f(z) - w) / self.deriv(z)
            z = z - step
            if np.all(np.abs(step) <= 1e-15 * np.maximum(1.0, np.abs(z))):
                break
        return z


def mobius_parabolic() -> LocalMap:
    """``z / (1 - z)``, conjugate to translation by ``-1/z``."""
    return LocalMap(
        f=lambda z: z / (1 - z),
        deriv=lambda z: 1 / (1 - z) ** 2,
        name="z/(1-z)",
        inverse=lambda w, hint: w / (1 + w),
    )


def _quadratic_inverse(lam: complex):
    def inverse(w, hint):
        # both roots of z^2 + lam z - w without cancellation: big * small = -w
        w = np.asarray(w, dtype=complex)
        root = np.sqrt(lam * lam + 4 * w)
        root = np.where((np.conj(lam) * root).real >= 0, root, -root)
        big = (-lam - root) / 2
        small = np.where(big != 0, -w / np.where(big != 0, big, 1), 0)
        return np.where(np.abs(small - hint) <= np.abs(big - hint), small, big)

    return inverse


def quadratic_family(alpha: complex = 0.0, p: int = 0, q: int = 1) -> LocalMap:
    """``lambda z + z^2`` with ``lambda = exp(2 pi i (p + alpha) / q)``."""
    lam = cmath.exp(2j * cmath.pi * (p + complex(alpha)) / q)
    return LocalMap(
        f=lambda z: lam * z + z * z,
        deriv=lambda z: lam + 2 * z,
        name=f"lambda z + z^2 (alpha={complex(alpha)})",
        inverse=_quadratic_inverse(lam),
        family_alpha=complex(alpha) if (p, q) == (0, 1) else None,
    )


def odd_cubic_model() -> LocalMap:
    """``-z - z^3``; its second iterate is ``z + 2 z^3 + O(z^5)``."""
    return LocalMap(f=lambda z: -z - z**3, deriv=lambda z: -1 - 3 * z**2, name="-z-z^3")


@dataclass
class PerturbedParabolic:
    """A germ with ``f'(0) = exp(2 pi i (p + alpha) / q)``."""

    map: LocalMap
    p: int = 0
    q: int = 1
    alpha: complex = 0.0
    chain: AlphaChain | None = None

    def __post_init__(self):
        if self.q < 1 or math.gcd(self.p, self.q) != 1:
            raise ValidationError("p/q must be a reduced fraction with q >= 1")
        self.alpha = complex(self.alpha)
        if self.chain is not None and self.chain.alpha != self.alpha:
            raise ValidationError("alpha disagrees with the continued-fraction data")
        expected = cmath.exp(2j * cmath.pi * (self.p + self.alpha) / self.q)
        got = complex(self.map.deriv(0j))
        if abs(got - expected) > 1e-12:
            raise ValidationError(f"f'(0) = {got} but exp(2 pi i (p+alpha)/q) = {expected}")

    @classmethod
    def from_chain(cls, a1: int, a2: int, nu: complex) -> "PerturbedParabolic":
        chain = alpha_chain(a1, a2, nu)
        return cls(quadratic_family(chain.alpha), 0, 1, chain.alpha, chain)

    @property
    def in_sector(self) -> bool:
        return in_sector(self.alpha)

    def iterate_q(self, z):
        for _ in range(self.q):
            z = self.map(z)
        return z

    def iterate_q_deriv(self, z):
        """``(f^q)'(z)``."""
        slope = np.ones_like(np.asarray(z, dtype=complex))
        for _ in range(self.q):
            slope = slope * self.map.deriv(z)
            z = self.map(z)
        return slope

    def iterate_q_inverse(self, z):
        """Local inverse of ``f^q`` fixing 0, branch continued from the identity."""
        for _ in range(self.q):
            z = self.map.preimage(z, z / complex(self.map.deriv(0j)))
        return z


# ---- jets and Fatou charts ------------------------------------------------

def cauchy_coefficients(g: Callable, radius: float = 0.05, n_points: int = 128) -> np.ndarray:
    """Taylor coefficients of ``g`` at 0 by FFT of samples on a circle."""
    theta = 2 * np.pi * np.arange(n_points) / n_points
    samples = g(radius * np.exp(1j * theta))
    return np.fft.fft(samples) / n_points / radius ** np.arange(n_points)


@dataclass(frozen=True)
class ParabolicJet:
    """``g(z) = z + c z^(q+1) + c2 z^(2q+1) + ...``."""

    q: int
    c: complex
    c2: complex

    @property
    def log_coefficient(self) -> complex:
        """``A`` in ``u -> u + 1 + A/u + ...`` for ``u = -1/(q c z^q)``.

        Values below the jet's own accuracy are snapped to 0.
        """
        q = self.q
        A = 1 - self.c2 / (q * self.c**2) - (q - 1) / (2 * q)
        return 0j if abs(A) < 1e-11 else A

    def u(self, z):
        return -1 / (self.q * self.c * np.asarray(z, dtype=complex) ** self.q)

    @property
    def petal_axis(self) -> float:
        """Argument of attracting direction 0, where ``c z^q`` is negative real."""
        arg_c = round(float(np.angle(self.c)), 12)
        if arg_c == round(-np.pi, 12):
            arg_c = np.pi
        return (np.pi - arg_c) / self.q


def parabolic_jet(g: Callable, q: int, radius: float = 0.05, tol: float = 1e-10) -> ParabolicJet:
    """Read ``c`` and the next coefficient of ``g`` from its Taylor jet.

    Raises
    ------
    DegenerateJet
        If ``g`` is not tangent to the identity to order ``q`` or ``c == 0``.
    """
    coef = cauchy_coefficients(g, radius)
    if abs(coef[0]) > tol or abs(coef[1] - 1) > tol:
        raise DegenerateJet("map is not tangent to the identity at 0")
    if q > 1 and np.max(np.abs(coef[2 : q + 1])) > tol:
        raise DegenerateJet(f"map is not of the form z + O(z^{q + 1})")
    c = _clean(coef[q + 1])
    if abs(c) < tol:
        raise DegenerateJet("leading coefficient c vanishes")
    return ParabolicJet(q, c, _clean(coef[2 * q + 1]))


def _clean(value: complex, digits: int = 13) -> complex:
    """Drop quadrature noise: round each part to ``digits`` significant figures."""
    parts = []
    for x in (value.real, value.imag):
        x = float(f"{x:.{digits - 1}e}")
        parts.append(0.0 if abs(x) < 10.0 ** -digits * abs(value) else x)
    return complex(*parts)


@dataclass
class FatouChart:
    """Fatou coordinate on one petal, ``phi(f^q(z)) = phi(z) + 1``.

    Values are ``Phi0(u_N) - N`` plus an estimated tail, where ``u_N`` is the
    ``u``-coordinate after ``N`` steps and ``Phi0(u) = u - A log u``.  Two
    depths are combined by Richardson extrapolation.  The default
    normalization is asymptotic (no constant term); ``offset`` shifts it.

    For ``kind == "repelling"`` the chart is minus the attracting chart of the
    local inverse ``f^-q``.
    """

    kind: str
    petal: int
    jet: ParabolicJet
    step: Callable
    step_deriv: Callable
    depth: int = 4000
    offset: complex = 0.0
    tail_tol: float = 1e-15
    sign: float = 1.0
    last_error: np.ndarray | None = field(default=None, repr=False)

    @property
    def domain(self) -> str:
        power = "q" if self.kind == ATTRACTING else "-q"
        return (
            f"{self.kind} petal {self.petal}: points with |arg u| < 3pi/4 whose orbit "
            f"under f^{power} shrinks and ends in |arg u| < pi/4"
        )

    def petal_index(self, z) -> np.ndarray:
        """Index of the nearest attracting direction of ``z`` (for ``step``)."""
        q = self.jet.q
        ang = np.angle(np.asarray(z, dtype=complex)) - self.jet.petal_axis
        return np.mod(np.round(ang * q / (2 * np.pi)), q).astype(int)

    def _raw(self, z, depth: int):
        A = self.jet.log_coefficient
        w = np.array(z, dtype=complex).ravel()
        start = w.copy()
        dw = np.ones_like(w)
        u = self.jet.u(w)
        tail = np.zeros_like(w)
        steps = np.zeros(w.shape, dtype=int)
        live = np.arange(w.size)
        for n in range(1, depth + 1):
            if live.size == 0:
                break
            wl = w[live]
            u_prev = u[live]
            w_new = self.step(wl)
            dw[live] = dw[live] * self.step_deriv(wl, w_new)
            u_new = self.jet.u(w_new)
            r = (u_new - A * np.log(u_new)) - (u_prev - A * np.log(u_prev)) - 1
            w[live], u[live], steps[live] = w_new, u_new, n
            tail[live] = r * u_prev * u_new / (u_new - 0.5)
            # each point stops on its own; rounding makes the tail grow again later
            done = np.abs(tail[live]) <= self.tail_tol * np.maximum(1.0, np.abs(u_new))
            live = live[~done]
        phi = u - A * np.log(u) - steps + tail
        # d phi/dz from the leading part; the tail contributes O(1/u^2) relatively
        dphi = (1 - A / u) * (-self.jet.q * u / w) * dw
        shape = np.shape(z)
        return (phi.reshape(shape), u.reshape(shape), w.reshape(shape), start.reshape(shape),
                steps.reshape(shape), dphi.reshape(shape))

    def value_and_derivative(self, z, check: bool = True):
        """Chart values (Richardson-extrapolated where the orbit ran to full depth) and derivatives."""
        z = np.asarray(z, dtype=complex)
        value, u_n, w_n, start, steps, dphi = self._raw(z, self.depth)
        deep = steps >= self.depth
        if check:
            self._check_petal(start, u_n, w_n, deep)
        self.last_error = np.zeros(z.shape)
        if np.any(deep):
            phi_n = value[deep]
            phi_2n = self._raw(z[deep], 2 * self.depth)[0]
            value = value.copy()
            value[deep] = (4 * phi_2n - phi_n) / 3
            self.last_error[deep] = np.abs(phi_2n - phi_n)
        return self.sign * value - self.offset, self.sign * dphi

    def __call__(self, z, check: bool = True):
        return self.value_and_derivative(z, check)[0]

    def _check_petal(self, start, u_n, w_n, deep) -> None:
        u0 = self.jet.u(start)
        # orbits stopped early by a vanishing tail need not have reached the axis yet
        bad = (np.abs(np.angle(u0)) >= 0.75 * np.pi) | (deep & (np.abs(np.angle(u_n)) >= np.pi / 4))
        bad |= ~(np.abs(w_n) < np.abs(start))
        if self.jet.q > 1:
            bad |= self.petal_index(start) != self.petal
        if np.any(bad):
            where = np.ravel(start)[np.ravel(bad)][0] if np.ndim(start) else complex(start)
            raise NotInPetal(f"{where} is not in {self.kind} petal {self.petal}")

    def residual(self, z, forward: Callable) -> np.ndarray:
        """``|phi(f^q(z)) - phi(z) - 1|``."""
        return np.abs(self(forward(z)) - self(z) - 1)

    def normalize_at(self, reference: complex) -> "FatouChart":
        """Shift so that ``phi(reference) == 0``."""
        self.offset = 0.0
        self.offset = complex(self(np.asarray([reference]))[0])
        return self


def fatou_attracting(P: PerturbedParabolic, petal: int = 0, reference: complex | None = None, depth: int = 4000) -> FatouChart:
    """Attracting Fatou chart of ``f^q`` on the given petal (``alpha`` must be 0)."""
    if P.alpha != 0:
        raise ValidationError("Fatou charts are built at the parabolic parameter alpha = 0")
    if not 0 <= petal < P.q:
        raise ValidationError(f"petal index must lie in 0..{P.q - 1}")
    jet = parabolic_jet(P.iterate_q, P.q)
    chart = FatouChart(ATTRACTING, petal, jet, P.iterate_q, lambda old, new: P.iterate_q_deriv(old), depth)
    if reference is not None:
        chart.normalize_at(reference)
    return chart


def fatou_repelling(P: PerturbedParabolic, petal: int = 0, reference: complex | None = None, depth: int = 4000) -> FatouChart:
    """Repelling chart: minus the attracting chart of the local inverse of ``f^q``."""
    if P.alpha != 0:
        raise ValidationError("Fatou charts are built at the parabolic parameter alpha = 0")
    if not 0 <= petal < P.q:
        raise ValidationError(f"petal index must lie in 0..{P.q - 1}")
    jet = parabolic_jet(P.iterate_q_inverse, P.q, radius=0.02)
    chart = FatouChart(REPELLING, petal, jet, P.iterate_q_inverse, lambda old, new: 1 / P.iterate_q_deriv(new), depth, sign=-1.0)
    if reference is not None:
        chart.normalize_at(reference)
    return chart


# ---- horn maps ------------------------------------------------------------

@dataclass
class HornSamples:
    """Horn-map samples ``E(w)``, normalized so that ``E(w) - w -> 0`` at the top."""

    w: np.ndarray
    values: np.ndarray
    constant: complex
    constant_spread: float
    periodicity_residual: float
    drift_by_height: list[tuple[float, float]]

    @property
    def drift(self) -> np.ndarray:
        return np.abs(self.values - self.w)

    def audit(self, tol: float = 1e-4) -> dict:
        return {
            "periodicity_residual": self.periodicity_residual,
            "periodicity_ok": self.periodicity_residual < tol,
            "normalization_constant": [self.constant.real, self.constant.imag],
            "constant_spread": self.constant_spread,
            "drift_by_height": self.drift_by_height,
        }

    def to_csv(self) -> str:
        rows = ["w_re,w_im,E_re,E_im"]
        rows += [f"{a.real:.17g},{a.imag:.17g},{b.real:.17g},{b.imag:.17g}" for a, b in zip(self.w, self.values)]
        return "\n".join(rows) + "\n"


def _invert_chart(chart: FatouChart, targets: np.ndarray, guess: np.ndarray, tol: float = 1e-7, iters: int = 20) -> np.ndarray:
    """Newton on the chart; accepted once the miss is within the chart's own noise."""
    z = guess.copy()
    for _ in range(iters):
        value, slope = chart.value_and_derivative(z, check=False)
        miss = value - targets
        if np.all(np.abs(miss) < tol + 4 * chart.last_error):
            return z
        z = z - miss / slope
    raise ChartOverlapEmpty("chart inversion did not converge in the repelling petal")


def horn_map_samples(
    P: PerturbedParabolic,
    band: tuple[float, float] = (8.0, 12.0),
    n_samples: int = 32,
    lead: int = 50,
    petal: int = 0,
    rows: int = 5,
    max_extra: int = 500,
) -> HornSamples:
    """Sample ``E = phi_att o phi_rep^-1`` on ``[0, 1] x band`` in the upper half-plane.

    Each ``w`` is pulled ``lead`` steps into the repelling petal, inverted
    there by Newton's method, pushed forward by ``f^q`` and read in the
    attracting chart.  The additive constant is fitted on the top row.

    Raises
    ------
    ChartOverlapEmpty
        If pushed points fail to enter the attracting petal.
    """
    lo, hi = (float(b) for b in band)
    if not hi > lo:
        raise ValidationError("band must be an increasing pair")
    att = fatou_attracting(P, petal)
    rep = fatou_repelling(P, petal)
    heights = np.linspace(lo, hi, rows)
    re = np.linspace(0.0, 1.0, n_samples, endpoint=False)
    w = (re[None, :] + 1j * heights[:, None]).ravel()
    w_all = np.concatenate([w, w + 1])
    targets = w_all - lead
    # Phi0 inverse of the repelling chart gives the Newton start in u, then z
    A = rep.jet.log_coefficient
    u = -targets.copy()
    for _ in range(30):
        u = u - (u + A * np.log(u) + targets) / (1 + A / u)
    guess = (-1 / (rep.jet.q * rep.jet.c * u)) ** (1 / rep.jet.q)
    z = _invert_chart(rep, targets, guess)
    for _ in range(lead):
        z = P.iterate_q(z)
    # extend the attracting chart by phi(z) = phi(f^q...(z)) - extra
    extra = np.zeros(z.shape, dtype=int)
    for _ in range(max_extra):
        outside = np.abs(np.angle(att.jet.u(z))) >= np.pi / 2
        if not outside.any():
            break
        z = np.where(outside, P.iterate_q(z), z)
        extra += outside
    try:
        values = att(z) - extra
    except NotInPetal as exc:
        raise ChartOverlapEmpty(f"pushed points miss the attracting petal: {exc}") from exc
    E, E_shift = values[: w.size], values[w.size :]
    periodicity = float(np.max(np.abs(E_shift - E - 1)))
    top = slice(w.size - n_samples, w.size)
    diffs = E[top] - w[top]
    constant = complex(np.mean(diffs))
    spread = float(np.var(diffs))
    E = E - constant
    drift = [(float(h), float(np.max(np.abs(E[k * n_samples : (k + 1) * n_samples] - w[k * n_samples : (k + 1) * n_samples]))))
             for k, h in enumerate(heights)]
    return HornSamples(w, E, constant, spread, periodicity, drift)


# ---- return multiplier ----------------------------------------------------

def _cut_log(z, direction: complex):
    """Branch of ``log z`` with its cut along the ray in ``direction``."""
    rot = -np.conj(direction)
    return np.log(rot * z) - np.log(rot)


@dataclass
class ReturnMultiplierReport:
    alpha: complex
    expected_log: complex
    measured_log: complex
    crossings: np.ndarray
    monodromy_residual: float
    backward_steps: int

    @property
    def modulus_ratio(self) -> float:
        return float(np.exp((self.measured_log - self.expected_log).real))

    @property
    def argument_error(self) -> float:
        """Distance of the argument difference, in turns, to the nearest integer."""
        turns = (self.measured_log - self.expected_log).imag / (2 * np.pi)
        return float(abs(turns - round(turns)))

    @property
    def passed(self) -> bool:
        return abs(self.modulus_ratio - 1) < 0.05 and self.argument_error < 0.05

    def to_dict(self) -> dict:
        return {
            "alpha": [self.alpha.real, self.alpha.imag],
            "expected_log_multiplier": [self.expected_log.real, self.expected_log.imag],
            "measured_log_multiplier": [self.measured_log.real, self.measured_log.imag],
            "modulus_ratio": self.modulus_ratio,
            "argument_error_turns": self.argument_error,
            "crossings": self.crossings.tolist(),
            "monodromy_residual": self.monodromy_residual,
            "backward_steps": self.backward_steps,
            "passed": self.passed,
        }


def _perturbed_coordinate(lam: complex, alpha: complex, budget: int, tol: float):
    """Fatou coordinate of ``lambda z + z^2`` on the gate region.

    ``W(z) = log z / (2 pi i alpha) + log(z - sigma) / log mu`` is summed
    along backward orbits, which makes the result exactly equivariant.
    """
    sigma = 1 - lam
    mu = 2 - lam
    log_lam = 2j * np.pi * alpha
    log_mu = np.log(mu)
    cut0 = -sigma / abs(sigma)
    cut1 = sigma / abs(sigma)
    inverse = _quadratic_inverse(lam)

    def W(z):
        return _cut_log(z, cut0) / log_lam + _cut_log(z - sigma, cut1) / log_mu

    def increment(prev, new):
        return np.log(prev / new) / log_lam + np.log((prev - sigma) / (new - sigma)) / log_mu - 1

    def phi(z, lead=None):
        """Backward sums; point ``i`` first takes ``lead[i]`` unconditional steps."""
        z = np.asarray(z, dtype=complex).copy()
        acc = W(z)
        if lead is not None:
            for j in range(int(np.max(lead))):
                active = lead > j
                new = np.where(active, inverse(z, z), z)
                acc = acc - np.where(active, increment(z, new), 0)
                z = new
        landed = z.copy()
        steps = 0
        for steps in range(1, budget + 1):
            prev = z
            z = inverse(z, z)
            inc = increment(prev, z)
            acc = acc - inc
            # at a fixed point the log ratios degrade to rounding noise
            near_fixed = np.minimum(np.abs(z), np.abs(z - sigma)) < 1e-6 * abs(sigma)
            if np.all((np.abs(inc) < tol) | near_fixed):
                break
        return acc, steps, landed

    return phi, sigma


def return_multiplier_check(
    P: PerturbedParabolic,
    gate: float = 0.5,
    circle_points: int = 16,
    circle_radius: float = 1e-3,
    orbit_budget: int = 10**6,
    backward_budget: int = 20000,
    tol: float = 1e-14,
) -> ReturnMultiplierReport:
    """Transport a small circle through the gate and compare multipliers.

    The gate point is ``sigma * gate / (1 + gate)`` on the segment from 0 to
    the second fixed point ``sigma``.  Each orbit is followed until it has
    wound once around 0; the shift of the Fatou coordinate gives the
    return-map multiplier in the exponential coordinate ``exp(2 pi i phi)``.

    Raises
    ------
    SectorViolated
        If ``|arg alpha| >= pi/4``.
    GateNotCrossed
        If some orbit fails to wind once within ``orbit_budget`` steps.
    """
    alpha = complex(P.alpha)
    if not in_sector(alpha):
        raise SectorViolated(f"|arg alpha| = {abs(cmath.phase(alpha)) if alpha else 0:.4g} is not below pi/4")
    if P.map.family_alpha is None or P.q != 1:
        raise ValidationError("the return check is implemented for the quadratic family with q = 1")
    lam = cmath.exp(2j * cmath.pi * alpha)
    phi, sigma = _perturbed_coordinate(lam, alpha, backward_budget, tol)
    centre = sigma * gate / (1 + gate)
    ring = centre + circle_radius * abs(centre) * np.exp(2j * np.pi * np.arange(circle_points) / circle_points)
    z = ring.copy()
    winding = np.zeros(ring.size)
    crossings = np.zeros(ring.size, dtype=int)
    done = np.zeros(ring.size, dtype=bool)
    for k in range(1, orbit_budget + 1):
        nxt = P.map(z)
        winding = np.where(done, winding, winding + np.angle(nxt / z))
        z = np.where(done, z, nxt)
        hit = ~done & (np.abs(winding) >= 2 * np.pi)
        crossings[hit] = k
        done |= hit
        if done.all():
            break
    else:
        raise GateNotCrossed(f"{int((~done).sum())} orbits did not wind once in {orbit_budget} steps")
    phi_in, steps_in, _ = phi(ring)
    # pull the returned points back along their own orbits first, so that the
    # shared tail of both backward sums cancels term by term
    phi_out, steps_out, landed = phi(z, lead=crossings)
    retrace = float(np.max(np.abs(landed - ring)))
    if retrace > 1e-8 * abs(centre):
        raise GateNotCrossed(f"backward orbits do not retrace the transport (error {retrace:.3g})")
    shift = phi_out - crossings - phi_in
    # shifts agree up to integers; align them before averaging
    shift = shift - np.round((shift - shift[0]).real)
    mean_shift = complex(np.mean(shift))
    residual = float(np.max(np.abs(shift + 1 / alpha - np.round((shift + 1 / alpha).real))))
    return ReturnMultiplierReport(
        alpha=alpha,
        expected_log=-2j * np.pi / alpha,
        measured_log=2j * np.pi * mean_shift,
        crossings=crossings,
        monodromy_residual=residual,
        backward_steps=max(steps_in, steps_out),
    )
