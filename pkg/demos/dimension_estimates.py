"""Pressure zeros against closed forms and against box counting of Julia sets."""
import numpy as np

from blaschke_div.dimension import (
    QuadraticJuliaSystem,
    angular_width_image,
    bound_c,
    cantor_system,
    linear_system,
    moran_dimension,
    pressure_dimension,
    shishikura_bound,
)
from blaschke_div.polydyn import Polynomial, box_dimension, julia_raster

print("Cantor set:", pressure_dimension(cantor_system()).estimate, "vs", np.log(2) / np.log(3))
ratios = [0.5, 0.25]
print("ratios 1/2, 1/4:", pressure_dimension(linear_system(ratios)).estimate, "vs", moran_dimension(ratios))

for c in (-0.1, 0.1j):
    pressure = pressure_dimension(QuadraticJuliaSystem(c)).estimate
    raster = julia_raster(Polynomial.quadratic(c), window=(-1.6, 1.6, -1.6, 1.6), resolution=1024, iter_budget=500)
    boxes = box_dimension(raster).dimension
    print(f"z^2 + {c}: pressure {pressure:.4f}, box count {boxes:.4f}")

for eta in (10, 1e3, 1e6):
    print(f"lower bound at eta={eta:g}: {shishikura_bound(eta):.7f}")

for r in (0.3, 0.5, 0.7):
    print(f"r={r}: width of translated disk {angular_width_image(lambda z: z + 2, r):.6f}, bound {bound_c(r):.3f}")
