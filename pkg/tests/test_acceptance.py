"""Acceptance suite: one test and one PASS/FAIL line per criterion."""
import itertools
import time
from math import gcd

import numpy as np
import pytest

from blaschke_div.blaschke import (
    degenerate_limit,
    psi_bar,
    psi_forward,
    psi_inverse,
    ramification_divisor,
)
from blaschke_div.dimension import (
    QuadraticJuliaSystem,
    angular_width_image,
    basin_boundary_trend,
    bound_c,
    cantor_system,
    is_nondecreasing,
    linear_system,
    moran_dimension,
    pressure_dimension,
    random_univalent_map,
    shishikura_bound,
)
from blaschke_div.divisor import Divisor, add, in_neighborhood, matching_distance
from blaschke_div.errors import DegenerateCycle
from blaschke_div.model_dynamics import (
    KoenigsFamily,
    internal_ray,
    potential,
    ray_signed_distance,
    stretch_divisor,
    track_prerepelling,
)
from blaschke_div.parabolic import (
    PerturbedParabolic,
    fatou_attracting,
    horn_map_samples,
    mobius_parabolic,
    odd_cubic_model,
    quadratic_family,
    return_multiplier_check,
)
from blaschke_div.polydyn import (
    HyperbolicSetMotion,
    Polynomial,
    box_dimension,
    julia_raster,
    motion_hyperbolic_set,
)
from blaschke_div.scheme import MappingScheme, SchemeDivisor, count_markings, periodic_boundary_points, validate


def random_disk_points(rng, n, rmax=0.9):
    return rmax * np.sqrt(rng.random(n)) * np.exp(2j * np.pi * rng.random(n))


def desk_scheme_divisor():
    """u -> v -> v, both of degree 2, D_v = 1*0.3 and an escaped zero at u on a period-2 point."""
    S = MappingScheme.build({"u": "v", "v": "v"}, {"u": 2, "v": 2})
    q = np.exp(2j * np.pi / 3)
    D = SchemeDivisor(S, {"u": Divisor.from_points([q]), "v": Divisor.from_points([0.3])})
    p = periodic_boundary_points(D.return_map("v"), 2)[0]
    return D.with_divisors({"u": Divisor.from_points([p])}), complex(p)


def test_c01_psi_round_trip(criterion):
    start = time.perf_counter()
    rng = np.random.default_rng(1)
    worst = 0.0
    for e in range(1, 6):
        for _ in range(200):
            D = Divisor.from_points(random_disk_points(rng, e))
            worst = max(worst, matching_distance(psi_inverse(psi_forward(D)), D))
    closed = abs(psi_forward(Divisor.from_points([0.5])).points[0] - (2 - np.sqrt(3)))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-8 and closed < 1e-12 and elapsed < 60
    criterion(1, "psi round trip", ok, f"worst {worst:.2e} (<1e-8), closed form {closed:.1e} (<1e-12), {elapsed:.1f}s (<60s)")
    assert ok


def test_c02_boundary_extension(criterion):
    start = time.perf_counter()
    rng = np.random.default_rng(2)
    radii = [1 - 10.0**-k for k in range(1, 5)]
    finals, monotone = [], True
    for _ in range(20):
        d1 = int(rng.integers(0, 4))
        d2 = int(rng.integers(1, 5 - d1))
        interior = Divisor.from_points(random_disk_points(rng, d1)) if d1 else Divisor.empty()
        angles = rng.uniform(0.05, 2 * np.pi - 0.05, d2)
        boundary = Divisor.from_points(np.exp(1j * angles))
        limit = psi_bar(add(interior, boundary))
        errors = [matching_distance(psi_forward(add(interior, Divisor.from_points(r * np.exp(1j * angles)))), limit) for r in radii]
        finals.append(errors[-1])
        monotone &= all(b <= a for a, b in zip(errors, errors[1:]))
    elapsed = time.perf_counter() - start
    worst = max(finals)
    ok = worst < 1e-3 and monotone and elapsed < 120
    criterion(2, "boundary extension", ok,
              f"worst distance at r=1-1e-4 {worst:.2e} (<1e-3), decay monotone {monotone}, {elapsed:.1f}s (<120s)")
    assert ok


def test_c03_degeneration_law(criterion):
    start = time.perf_counter()
    target = Divisor.from_points([1j])
    x, y = np.meshgrid(np.linspace(-2, 2, 61), np.linspace(-2, 2, 61))
    K = (x + 1j * y).ravel()
    K = K[(np.abs(K) <= 2) & (np.abs(K - 1j) >= 0.5)]
    ns = [10, 30, 100, 300, 1000, 3000, 10000]
    report = degenerate_limit(target, ns, K)
    dev, bound = np.array(report.sup_deviation), np.array(report.identity_bound)
    bounded = bool(np.all(dev <= bound * (1 + 1e-12)))
    decreasing = bool(np.all(np.diff(dev) < 0))
    elapsed = time.perf_counter() - start
    ok = dev[-1] < 1e-3 and bounded and decreasing and elapsed < 30
    criterion(3, "degeneration law", ok,
              f"sup deviation at n=1e4 {dev[-1]:.2e} (<1e-3), within identity bound {bounded}, decreasing {decreasing}, {elapsed:.1f}s")
    assert ok


def test_c04_continuation_certificate(criterion):
    rng = np.random.default_rng(4)
    worst, windings = 0.0, set()
    for trial in range(100):
        if trial % 2:
            S = MappingScheme.build({"v": "v"}, {"v": int(rng.integers(2, 4))})
            u = "v"
        else:
            S = MappingScheme.build({"u": "v", "v": "v"}, {"u": 2, "v": int(rng.integers(2, 4))})
            u = "u"
        base = {w: Divisor.from_points(random_disk_points(rng, S.delta[w] - 1, 0.7)) for w in S.vertices}
        D = SchemeDivisor(S, base)
        E = SchemeDivisor(S, {w: Divisor.from_points(base[w].expanded() + 0.02 * random_disk_points(rng, S.delta[w] - 1, 1.0))
                              for w in S.vertices})
        res = track_prerepelling(D, u, 1.0, 0, 1, E)
        windings.add(res.winding)
        worst = max(worst, abs(res.point - 1))
    ok = windings == {1} and worst < 1e-10
    criterion(4, "continuation certificate", ok, f"winding counts {sorted(windings)} (all 1), max |r_u1 - 1| {worst:.1e} (<1e-10)")
    assert ok


def _random_scheme_divisor(rng):
    while True:
        n = int(rng.integers(1, 4))
        names = ["a", "b", "c"][:n]
        sigma = {v: names[int(rng.integers(0, n))] for v in names}
        delta = {v: int(rng.integers(2, 4)) for v in names}
        try:
            S = MappingScheme.build(sigma, delta)
            D = SchemeDivisor(S, {v: Divisor.from_points(random_disk_points(rng, delta[v] - 1, 0.95)) for v in names})
        except DegenerateCycle:
            continue
        fam = KoenigsFamily(D)
        if all(0.1 <= abs(fam.multiplier(v)) <= 0.9 for v in names) and all(abs(D.maps[v].deriv(0j)) > 0 for v in names):
            return D, fam


def test_c05_koenigs_residuals(criterion):
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(100):
        D, fam = _random_scheme_divisor(rng)
        z = random_disk_points(rng, 32, 0.4)
        for v in D.scheme.vertices:
            B = D.maps[v]
            res = np.abs(fam(D.scheme.sigma[v], B.eval(z)) - B.deriv(0j) * fam(v, z))
            worst = max(worst, float(np.max(res)))
    ok = worst < 1e-9
    criterion(5, "Koenigs residuals", ok, f"max functional-equation residual on |z|<=0.4 {worst:.1e} (<1e-9)")
    assert ok


def test_c06_internal_rays(criterion):
    S = MappingScheme.build({"v": "v"}, {"v": 2})
    square = SchemeDivisor(S, {"v": Divisor.from_entries([(0, 1)])})
    q = np.exp(2j * np.pi / 3)
    radial = internal_ray(square, "v", q, (-3.0, -1e-7), n_samples=200)
    radial_dev = float(np.max(np.abs(np.angle(radial.points / q))))
    D, p = desk_scheme_divisor()
    window = (float(potential(D, "v", 0.5 * p)), float(potential(D, "v", p * (1 - 1e-7))))
    rays = [radial, internal_ray(D, "v", p, window, n_samples=200)]
    residual = max(r.potential_residual() for r in rays)
    landing = max(r.landing_error() for r in rays)
    ok = residual < 1e-8 and radial_dev < 1e-10 and landing < 1e-6
    criterion(6, "internal rays", ok,
              f"potential residual {residual:.1e} (<1e-8), z^2 angular deviation {radial_dev:.1e} (<1e-10), landing error {landing:.1e} (<1e-6)")
    assert ok


def test_c07_stretching_divisor(criterion):
    D, p = desk_scheme_divisor()
    lines, ok = [], True
    for delta in (0.05, 0.02, 0.01):
        start = time.perf_counter()
        res = stretch_divisor(D, delta)
        elapsed = time.perf_counter() - start
        E = res.divisor
        inside = all(in_neighborhood(E.divisor(v), D.divisor(v), 2 * delta) for v in D.scheme.vertices)
        zeta = E.divisor("u").points[0]
        crit = ramification_divisor(E.maps["u"]).points
        cp = crit[int(np.argmin(np.abs(np.asarray(crit) - zeta)))]
        cv = complex(E.maps["u"].eval(cp))
        dist = abs(ray_signed_distance(cv, res.constraints[0].ray))
        good = inside and dist < 1e-6 and elapsed < 60
        ok &= good
        lines.append(f"delta={delta}: in N_2delta {inside}, ray distance {dist:.1e}, {elapsed:.1f}s")
    criterion(7, "stretching divisor", ok, "; ".join(lines))
    assert ok


def test_c08_hyperbolic_motion(criterion):
    M = HyperbolicSetMotion.build(Polynomial.monomial(2), np.array([1.0 + 0j]))
    worst_value, worst_residual = 0.0, 0.0
    for t in np.linspace(-0.5, 0.2, 50):
        res = motion_hyperbolic_set(M, Polynomial.quadratic(t))
        worst_value = max(worst_value, abs(res.points[0] - (1 + np.sqrt(1 - 4 * t)) / 2))
        worst_residual = max(worst_residual, res.conjugacy_residual)
    ok = worst_value < 1e-9 and worst_residual < 1e-9
    criterion(8, "hyperbolic-set motion", ok, f"max |h - (1+sqrt(1-4t))/2| {worst_value:.1e} (<1e-9), conjugacy residual {worst_residual:.1e} (<1e-9)")
    assert ok


def test_c09_fatou_coordinates(criterion):
    mob = PerturbedParabolic(mobius_parabolic())
    chart = fatou_attracting(mob)
    z = np.linspace(-0.5, -0.05, 40) + 0j
    mobius_res = float(np.max(chart.residual(z, mob.iterate_q)))
    quad = PerturbedParabolic(quadratic_family())
    quad_res = float(np.max(fatou_attracting(quad).residual(z, quad.iterate_q)))
    cubic = PerturbedParabolic(odd_cubic_model(), p=1, q=2)
    cubic_res = 0.0
    for petal in range(2):
        ch = fatou_attracting(cubic, petal)
        zs = np.linspace(0.05, 0.3, 20) * np.exp(1j * (ch.jet.petal_axis + np.pi * petal))
        cubic_res = max(cubic_res, float(np.max(ch.residual(zs, cubic.iterate_q))))
    horn = horn_map_samples(quad, (8.0, 12.0))
    ok = mobius_res < 1e-13 and quad_res < 1e-6 and cubic_res < 1e-5 and horn.periodicity_residual < 1e-4
    criterion(9, "Fatou coordinates", ok,
              f"Mobius {mobius_res:.1e} (machine precision), z+z^2 {quad_res:.1e} (<1e-6), q=2 model {cubic_res:.1e} (<1e-5), "
              f"horn periodicity {horn.periodicity_residual:.1e} (<1e-4)")
    assert ok


def test_c10_return_multiplier(criterion):
    start = time.perf_counter()
    parts, ok = [], True
    for alpha in (1 / 50, 1 / 80 + 0.01j):
        report = return_multiplier_check(PerturbedParabolic(quadratic_family(alpha), alpha=alpha))
        ok &= report.passed
        parts.append(f"alpha={alpha:.4g}: modulus ratio {report.modulus_ratio:.6f}, arg error {report.argument_error:.1e} turns")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 120
    criterion(10, "return multiplier", ok, "; ".join(parts) + f"; {elapsed:.1f}s (<120s)")
    assert ok


def test_c11_dimension_oracles(criterion):
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(50):
        m = int(rng.integers(1, 6))
        ratios = rng.uniform(0.02, 0.95 / m, m)
        worst = max(worst, abs(pressure_dimension(linear_system(ratios)).estimate - moran_dimension(ratios)))
    cantor = abs(pressure_dimension(cantor_system()).estimate - np.log(2) / np.log(3))
    julia_gap = {}
    for c in (-0.1, 0.1j):
        estimate = pressure_dimension(QuadraticJuliaSystem(c)).estimate
        raster = julia_raster(Polynomial.quadratic(c), window=(-1.6, 1.6, -1.6, 1.6), resolution=1024, iter_budget=500)
        julia_gap[c] = abs(estimate - box_dimension(raster.boundary_points()).dimension)
    limit = abs(shishikura_bound(1e6) - 2)
    ok = worst < 1e-3 and cantor < 1e-3 and max(julia_gap.values()) < 0.05 and limit < 1e-4
    criterion(11, "dimension oracles", ok,
              f"pressure vs Moran {worst:.1e} (<1e-3), Cantor {cantor:.1e} (<1e-3), "
              f"Julia pressure vs box count {julia_gap[-0.1]:.3f}, {julia_gap[0.1j]:.3f} (<0.05), bound(1e6) gap {limit:.1e} (<1e-4)")
    assert ok


def test_c12_angular_width(criterion):
    rng = np.random.default_rng(12)
    radii = (0.3, 0.5, 0.7)
    violations, worst_ratio = 0, 0.0
    for _ in range(1000):
        f = random_univalent_map(rng)
        for r in radii:
            width = angular_width_image(f, r, n_angles=1024, n_radii=16)
            violations += width > bound_c(r)
            worst_ratio = max(worst_ratio, width / bound_c(r))
    explicit = max(abs(angular_width_image(lambda z: z + 2, r) - 2 * np.arcsin(r / 2)) for r in radii)
    ok = violations == 0 and explicit < 1e-9
    criterion(12, "angular width", ok, f"{violations} violations over 3000 cases (max width/c(r) {worst_ratio:.3f}), "
                                       f"translated disk error {explicit:.1e} (<1e-9)")
    assert ok


def brute_force_markings(S: MappingScheme) -> int:
    """Count circle points nu_v with nu_{sigma v} = nu_v^delta_v, searching roots of unity of a sufficient order."""
    rep = validate(S)
    order = 1
    for cycle in rep.cycles:
        big = int(np.prod([S.delta[w] for w in cycle])) - 1
        order = order * big // gcd(order, big)
    for v in rep.nonperiodic:
        order *= S.delta[v]
    grids = np.indices((order,) * len(S.vertices)).reshape(len(S.vertices), -1)
    idx = {v: i for i, v in enumerate(S.vertices)}
    ok = np.ones(grids.shape[1], dtype=bool)
    for v in S.vertices:
        ok &= (S.delta[v] * grids[idx[v]] - grids[idx[S.sigma[v]]]) % order == 0
    return int(ok.sum())


def test_c13_marking_counts(criterion):
    checked, mismatches = 0, []
    for n in (1, 2, 3):
        names = ["a", "b", "c"][:n]
        for targets in itertools.product(names, repeat=n):
            for degrees in itertools.product((1, 2, 3), repeat=n):
                S = MappingScheme.build(dict(zip(names, targets)), dict(zip(names, degrees)))
                try:
                    formula = count_markings(S)
                except DegenerateCycle:
                    continue
                checked += 1
                if formula != brute_force_markings(S):
                    mismatches.append(S)
    ok = not mismatches and checked > 0
    criterion(13, "marking counts", ok, f"{checked} schemes checked, {len(mismatches)} mismatches")
    assert ok


@pytest.mark.exploratory
def test_c14_dimension_trend(criterion):
    start = time.perf_counter()
    trend = basin_boundary_trend((2, 3, 5, 10))
    dims = [p.dimension for p in trend]
    elapsed = time.perf_counter() - start
    ok = is_nondecreasing(dims, 0.03) and elapsed < 600
    criterion(14, "exploratory dimension trend", ok,
              "a1=2,3,5,10 -> " + ", ".join(f"{d:.3f}" for d in dims) + f" (nondecreasing within 0.03), {elapsed:.0f}s (<600s)")
    assert ok
