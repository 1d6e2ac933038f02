"""Fatou coordinates, horn maps and the return multiplier of lambda z + z^2."""
import numpy as np

from blaschke_div.parabolic import (
    PerturbedParabolic,
    fatou_attracting,
    horn_map_samples,
    quadratic_family,
    return_multiplier_check,
)

P = PerturbedParabolic(quadratic_family())
chart = fatou_attracting(P)
z = np.linspace(-0.5, -0.05, 10) + 0j
print("chart residual |phi(f z) - phi(z) - 1|:", chart.residual(z, P.iterate_q).max())

horn = horn_map_samples(P, (8.0, 12.0))
print("horn map periodicity residual:", horn.periodicity_residual, "constant:", np.round(horn.constant, 9))

for alpha in (1 / 50, 1 / 80 + 0.01j):
    report = return_multiplier_check(PerturbedParabolic(quadratic_family(alpha), alpha=alpha))
    print(f"alpha={alpha}: modulus ratio {report.modulus_ratio:.6f}, argument error {report.argument_error:.1e} turns")
