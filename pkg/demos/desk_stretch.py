"""Two-vertex scheme u -> v -> v: rays, tracking and the stretching construction."""
import numpy as np

from blaschke_div.divisor import Divisor
from blaschke_div.model_dynamics import internal_ray, potential, stretch_divisor
from blaschke_div.scheme import MappingScheme, SchemeDivisor, boundary_stratum, is_misiurewicz, periodic_boundary_points

S = MappingScheme.build({"u": "v", "v": "v"}, {"u": 2, "v": 2})
base = SchemeDivisor(S, {"u": Divisor.from_points([np.exp(2j * np.pi / 3)]), "v": Divisor.from_points([0.3])})
p = periodic_boundary_points(base.return_map("v"), 2)[0]
D = base.with_divisors({"u": Divisor.from_points([p])})
print("escaped zero at u:", np.round(p, 6), "| stratum:", boundary_stratum(D).value,
      "| Misiurewicz:", is_misiurewicz(D).verdict.value)

window = (float(potential(D, "v", 0.5 * p)), float(potential(D, "v", p * (1 - 1e-7))))
ray = internal_ray(D, "v", p, window, n_samples=100)
print(f"ray at v landing at p: potential residual {ray.potential_residual():.1e}, landing error {ray.landing_error():.1e}")

for delta in (0.05, 0.02, 0.01):
    res = stretch_divisor(D, delta)
    zeta = res.divisor.divisor("u").points[0]
    print(f"delta={delta}: zero moved to {zeta:.6f}, critical value off the ray by {res.ray_distances[0]:.1e}")
