"""A zero escaping to the circle at i: the product converges away from i."""
import numpy as np

from blaschke_div.blaschke import degenerate_limit
from blaschke_div.divisor import Divisor

x, y = np.meshgrid(np.linspace(-2, 2, 81), np.linspace(-2, 2, 81))
K = (x + 1j * y).ravel()
K = K[(np.abs(K) <= 2) & (np.abs(K - 1j) >= 0.5)]

report = degenerate_limit(Divisor.from_points([1j]), [10, 100, 1000, 10000], K)
print(f"{'n':>6} {'sup |factor - 1|':>18} {'closed-form bound':>18}")
for n, dev, bound in zip(report.ns, report.sup_deviation, report.identity_bound):
    print(f"{n:>6} {dev:>18.3e} {bound:>18.3e}")
