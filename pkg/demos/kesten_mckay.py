"""Smoothed spectrum of a random 3-regular graph against the Kesten-McKay law."""
import numpy as np

from qperc.experiments import smoothed_empirical
from qperc.graphs import random_regular
from qperc.spectral import eigenvalues, kesten_mckay_transform

n, eta = 2000, 0.05
G = random_regular(n, 3, rng=0)
lam = np.linspace(-3, 3, 13)
emp = smoothed_empirical(eigenvalues(G), lam, eta)
# the Cauchy-smoothed limit density is Im g(lam + i eta) / pi
km = kesten_mckay_transform(2, lam + 1j * eta).imag / np.pi

print(f"random_regular({n}, 3), eta = {eta}")
print(f"{'lambda':>8} {'graph':>8} {'limit':>8}")
for x, a, b in zip(lam, emp, km):
    print(f"{x:8.2f} {a:8.4f} {b:8.4f}")
print(f"L1 on the grid: {np.trapezoid(np.abs(emp - km), lam):.4f}")
