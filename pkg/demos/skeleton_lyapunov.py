"""Extinction, the skeleton decomposition and the Lyapunov exponent near a Dirac law."""
from qperc.distributions import OffspringDistribution, extinction_probability, skeleton_laws
from qperc.rde import PoolParams, lyapunov
from qperc.trees import extinction_frequency

P = OffspringDistribution.poisson(2.0)
pi = extinction_probability(P)
freq, se = extinction_frequency(P, 20_000, rng=0)
print(f"Poisson(2): extinction probability {pi:.5f}, simulated {freq:.4f} +- {se:.4f}")

L = skeleton_laws(P)
print(f"surviving children given survival: mean {L.mean_survivors():.3f}, "
      f"extinct children: mean {L.mean_extinct():.3f}")

# gamma vanishes for the Dirac law and grows with the defect mass
print(f"{'eps':>6} {'gamma':>9} {'+-':>8}")
for eps in (0.0, 0.05, 0.1, 0.2, 0.4):
    law = OffspringDistribution.explicit({2: 1 - eps, 3: eps}) if eps else \
        OffspringDistribution.dirac(2)
    r = lyapunov(skeleton_laws(law), (-1.5, 1.5), 1e-3, PoolParams(4000, 100), rng=1,
                 n_energies=32)
    print(f"{eps:6.2f} {r.gamma_value:9.4f} {r.mc_error:8.4f}")
