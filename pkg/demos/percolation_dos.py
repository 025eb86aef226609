"""Percolated random regular graph against the UGW population-dynamics density."""
import numpy as np

from qperc.distributions import OffspringDistribution
from qperc.experiments import smoothed_empirical
from qperc.graphs import percolate, random_regular
from qperc.rde import DosSpec, PoolParams, density_of_states
from qperc.spectral import eigenvalues

p, eta = 0.85, 0.1
lam = np.linspace(-3.5, 3.5, 15)

rng = np.random.default_rng(1)
H = percolate(random_regular(2000, 3, rng=rng), p, rng=rng)
emp = smoothed_empirical(eigenvalues(H), lam, eta)

# the local limit of perc(G, p) is UGW(Bin(3, p))
spec = DosSpec("ugw", OffspringDistribution.binomial(3, p))
dos, err = density_of_states(spec, lam, eta, PoolParams(pool_size=5000, sweeps=100), rng=2)

print(f"perc(random_regular(2000, 3), {p}) vs UGW(Bin(3, {p})), eta = {eta}")
print(f"{'lambda':>8} {'graph':>8} {'pool':>8} {'+-':>7}")
for x, a, b, e in zip(lam, emp, dos, err):
    print(f"{x:8.2f} {a:8.4f} {b:8.4f} {e:7.4f}")
