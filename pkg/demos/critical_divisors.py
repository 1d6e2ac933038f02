"""Critical points of Blaschke products and recovering a product from them."""
import numpy as np

from blaschke_div.blaschke import from_divisor, psi_bar, psi_forward, psi_inverse
from blaschke_div.divisor import Divisor, matching_distance

rng = np.random.default_rng(3)

D = Divisor.from_points([0.5])
print("zero 0.5 -> critical point", psi_forward(D).points[0], "(closed form", 2 - np.sqrt(3), ")")

zeros = 0.85 * np.sqrt(rng.random(4)) * np.exp(2j * np.pi * rng.random(4))
D = Divisor.from_points(zeros)
R = psi_forward(D)
back = psi_inverse(R)
print("degree-4 free zeros:", np.round(D.expanded(), 4))
print("critical points:   ", np.round(R.expanded(), 4))
print("recovered zeros, distance", matching_distance(back, D))

# Boundary points pass through unchanged; interior zeros go to critical points.
mixed = Divisor.from_points([0.5, -1.0])
print("closed-disk extension of 1*0.5 + 1*(-1):", psi_bar(mixed))

beta = from_divisor(D)
theta = np.linspace(0, 2 * np.pi, 9)
print("|beta| on the circle:", np.round(np.abs(beta.eval(np.exp(1j * theta))), 15))
