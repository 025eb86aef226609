"""Acceptance criteria 1-15, each at its stated tolerance and runtime.

Every criterion is a function returning an ``Outcome`` that carries a CSV of
the measured values; criterion 15 reruns all of them and compares bytes.
"""
import csv
import functools
import io
import math
import time
from dataclasses import dataclass, field

import numpy as np
import pytest

from oracles import discrepancy_lemma_violations, kappa_enumerate, oracle_count
from qperc.distributions import (OffspringDistribution, extinction_probability, size_bias_shift,
                                 skeleton_laws)
from qperc.experiments import load_config, median_fraction, run_experiment
from qperc.graphs import Graph, percolate, random_regular
from qperc.rde import (DosSpec, PoolParams, density_of_states, evolve_pool, evolve_pools,
                       evolve_skeleton_pool, extinct_root_resolvents, lyapunov,
                       tree_root_resolvent)
from qperc.spectral import (SpectralMeasure, coaire_check, eigendecompose, eigenvalues,
                            kesten_mckay_transform, psik_check, semicircle_transform, stieltjes,
                            vertex_spectral_measure, weakdeconv_check)
from qperc.experiments.runners import smoothed_empirical
from qperc.trees import enumerate_trees, extinction_frequency, sample_gw


@dataclass
class Outcome:
    ok: bool
    detail: str
    table: str = field(repr=False)
    seconds: float = 0.0
    limit: float = math.inf
    companion: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.ok and self.seconds <= self.limit


def table(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
    return buf.getvalue()


def timed(limit):
    def wrap(fn):
        @functools.wraps(fn)
        def run():
            t0 = time.perf_counter()
            out = fn()
            out.seconds = time.perf_counter() - t0
            out.limit = limit
            return out
        return run
    return wrap


def experiment(name, seed=0, **params):
    return run_experiment(load_config(name, seed=seed).with_params(params))


def l1(f, g, lam):
    return float(np.trapezoid(np.abs(f - g), lam))


# -- 1. closed-form fixed points -------------------------------------------------------

@timed(1.0)
def criterion_1():
    rng = np.random.default_rng(1)
    z = rng.uniform(-5, 5, 100) + 1j * np.exp(rng.uniform(np.log(1e-4), np.log(2), 100))
    rows, worst = [], 0.0
    for q in (1, 2, 3, 4):
        g = semicircle_transform(q, z)
        res = np.abs(g + 1.0 / (z + q * g))
        worst = max(worst, float(res.max()))
        rows += [(q, zz.real, zz.imag, r) for zz, r in zip(z, res)]
    arcsine = -1.0 / (np.sqrt(z - 2) * np.sqrt(z + 2))
    km_err = float(np.abs(kesten_mckay_transform(1, z) - arcsine).max())
    ok = worst < 1e-12 and km_err < 1e-10 and np.all(arcsine.imag > 0)
    return Outcome(ok, f"max residual {worst:.2e}, arcsine error {km_err:.2e}",
                   table(["q", "re_z", "im_z", "residual"], rows))


# -- 2. population-dynamics collapse ---------------------------------------------------

@timed(5.0)
def criterion_2():
    z = 0.4 + 0.2j
    ens = evolve_pool(OffspringDistribution.dirac(2), z, pool_size=10_000, sweeps=50, rng=2)
    err = float(np.abs(ens.samples - semicircle_transform(2, z)).max())
    return Outcome(err < 1e-10, f"max |sample - g| = {err:.2e}",
                   table(["re", "im"], [(s.real, s.imag) for s in ens.samples[:100]]))


# -- 3. density of states against truncated trees ----------------------------------------

def _tree_density(tree, lam, eta, chunk=16):
    out = np.empty(lam.size)
    for i in range(0, lam.size, chunk):
        out[i:i + chunk] = np.imag(tree_root_resolvent(tree, lam[i:i + chunk] + 1j * eta)) / math.pi
    return out


@timed(120.0)
def criterion_3():
    P = OffspringDistribution.binomial(3, 0.9)
    lam = np.linspace(-4, 4, 101)
    eta, depth = 0.1, 12
    pool, _ = density_of_states(DosSpec("gw", P), lam, eta, PoolParams(10_000, 200), rng=3)
    rng = np.random.default_rng(30)
    trees = np.mean([_tree_density(sample_gw(P, depth, rng=rng), lam, eta) for _ in range(50)],
                    axis=0)
    dist = l1(pool, trees, lam)
    # the exact law of the depth-12 truncation: leaves at -1/z, 12 sweeps
    z = lam + 1j * eta
    init = np.repeat((-1.0 / z)[:, None], 10_000, axis=1)
    cut = evolve_pools(P, z, PoolParams(10_000, depth), rng=31, init=init).samples
    cut_dist = l1(cut.imag.mean(axis=1) / math.pi, trees, lam)
    return Outcome(dist < 0.05,
                   f"L1 = {dist:.3f} (depth-{depth} truncated pool vs trees: {cut_dist:.3f})",
                   table(["lambda", "pool", "trees", "truncated_pool"],
                         zip(lam, pool, trees, cut.imag.mean(axis=1) / math.pi)),
                   companion={"truncated_l1": cut_dist})


# -- 4. UGW against percolated random regular graphs ---------------------------------------

@timed(180.0)
def criterion_4():
    P = OffspringDistribution.binomial(3, 0.85)
    lam = np.linspace(-4, 4, 201)
    eta = 0.1
    dos, _ = density_of_states(DosSpec("ugw", P), lam, eta, PoolParams(10_000, 200), rng=4)
    dists, rows = [], []
    for s in range(5):
        rng = np.random.default_rng([40, s])
        H = percolate(random_regular(2000, 3, rng=rng), 0.85, rng=rng)
        emp = smoothed_empirical(eigenvalues(H), lam, eta)
        dists.append(l1(dos, emp, lam))
        rows += [(s, x, a, b) for x, a, b in zip(lam, dos, emp)]
    med = float(np.median(dists))
    return Outcome(med < 0.07, f"median L1 = {med:.4f} over 5 seeds",
                   table(["seed", "lambda", "ugw", "empirical"], rows))


# -- 5. rate bound -----------------------------------------------------------------------

@timed(300.0)
def criterion_5():
    rep = experiment("rate", seed=5, graph="random_regular:2000:3", p=1.0, h=4, n_seeds=20)
    thr = 20 * 3 * math.log(8) / 4
    assert np.all(rep.column("im_z") >= thr - 1e-12)
    good = sum(bool(np.all(rep.column("deviation_km", seed=s) <= 0.25)) for s in range(20))
    worst = float(rep.column("deviation_km").max())
    return Outcome(good >= 19, f"{good}/20 seeds within 1/h; max deviation {worst:.2e}",
                   rep.csv_text())


# -- 6. extinction and skeleton ----------------------------------------------------------

@timed(120.0)
def criterion_6():
    P = OffspringDistribution.poisson(2.0)
    pi = extinction_probability(P)
    freq, se = extinction_frequency(P, 100_000, rng=6)
    L = skeleton_laws(P)
    z = 0.5 + 0.2j
    params = PoolParams(pool_size=20_000, sweeps=80)
    plain = evolve_pools(P, z, params, rng=61).samples[0]
    skel = evolve_skeleton_pool(L, z, 20_000, 80, rng=62).samples
    ext = extinct_root_resolvents(L, z, 20_000, rng=63)
    pe = L.pi_e
    mixed = (1 - pe) * skel.mean() + pe * ext.mean()
    mix_se = math.sqrt(plain.var() / plain.size + (1 - pe) ** 2 * skel.var() / skel.size
                       + pe**2 * ext.var() / ext.size)
    ok = (abs(pi - 0.20319) <= 1e-5 and abs(freq - pi) <= 3 * se
          and abs(mixed - plain.mean()) <= 3 * mix_se)
    return Outcome(ok, f"pi_e = {pi:.6f}, MC {freq:.5f} +- {se:.5f}, "
                       f"mixing gap {abs(mixed - plain.mean()):.2e} (3 se {3 * mix_se:.2e})",
                   table(["quantity", "value"],
                         [("pi_e", pi), ("mc_freq", freq), ("mc_se", se),
                          ("mixed_re", mixed.real), ("mixed_im", mixed.imag),
                          ("plain_re", plain.mean().real), ("plain_im", plain.mean().imag)]))


# -- 7. Lyapunov calibration ---------------------------------------------------------------

@timed(180.0)
def criterion_7():
    rows = []
    d = lyapunov(skeleton_laws(OffspringDistribution.dirac(2)), (-2, 2), 1e-4,
                 PoolParams(2000, 100), rng=7)
    ok = abs(d.gamma_value) <= max(3 * d.mc_error, 0.01)
    rows.append((0.0, d.gamma_value, d.mc_error))
    for i, eps in enumerate((0.05, 0.1, 0.2)):
        L = skeleton_laws(OffspringDistribution.explicit({2: 1 - eps, 3: eps}))
        r = lyapunov(L, (-2, 2), 1e-4, PoolParams(2000, 100), rng=70 + i)
        ok &= r.gamma_value >= -3 * r.mc_error
        rows.append((eps, r.gamma_value, r.mc_error))
    return Outcome(bool(ok), "gamma: " + ", ".join(f"eps={e}: {g:.4f}+-{s:.4f}" for e, g, s in rows),
                   table(["eps", "gamma", "stderr"], rows))


# -- 8. discrepancy by enumeration ----------------------------------------------------------

@timed(10.0)
def criterion_8():
    v = discrepancy_lemma_violations(n_laws=50, seed=8)
    k12 = kappa_enumerate([1.0, 2.0], [0.5, 0.5])
    stated = {k: v[k] for k in ("scale", "inverse", "subadditive", "product", "sum_stated")}
    ok = all(c == 0 for c in stated.values()) and k12 == 1 / 6
    return Outcome(ok, f"violations {stated}; kappa(U{{1,2}}) = {k12!r}",
                   table(["statement", "violations"], sorted(v.items())),
                   companion={"sum_corrected": v["sum_corrected"]})


# -- 9. regularity lemmas ------------------------------------------------------------------

def _random_measure(rng, k_max=8, spread=3.0):
    k = int(rng.integers(1, k_max + 1))
    return SpectralMeasure(rng.normal(0, spread, k), rng.dirichlet(np.ones(k)))


def _sup_im(m, lam, eta):
    ys = np.geomspace(eta, 1e7 * eta, 3000)
    return float(np.imag(stieltjes(m, lam + 1j * ys)).max())


def _erdos_renyi(n, p, rng):
    iu = np.triu_indices(n, 1)
    keep = rng.random(iu[0].size) < p
    return Graph(n, np.column_stack([iu[0][keep], iu[1][keep]]))


@timed(60.0)
def criterion_9():
    rng = np.random.default_rng(9)
    bad = {"weakdeconv": 0, "psik": 0, "coaire": 0}
    lower_checked = 0
    for _ in range(1000):
        m = _random_measure(rng, spread=float(rng.uniform(0.1, 5)))
        lam = float(rng.normal(0, 2))
        eta = float(np.exp(rng.uniform(np.log(1e-3), np.log(2))))
        a = stieltjes(m, lam + 1j * eta).imag
        b = _sup_im(m, lam, eta) * (1 + 1e-3)
        if rng.random() < 0.5:
            s = max(2 * eta, 8 * b / a * eta * float(rng.uniform(1, 3)))
        else:
            s = 2 * eta * float(np.exp(rng.uniform(0, 4)))
        r = weakdeconv_check(m, lam, eta, a, b, s)
        bad["weakdeconv"] += (not r.rhs_ok) or r.lhs_ok is False
        lower_checked += r.lhs_ok is not None
    for _ in range(1000):
        G = _erdos_renyi(int(rng.integers(5, 40)), 0.15, rng)
        E = eigendecompose(G)
        o = int(rng.integers(G.n))
        m = vertex_spectral_measure(E, o)
        lam = float(rng.uniform(-2, 2))
        eta = float(rng.uniform(0.05, 1.0))
        a = stieltjes(m, lam + 1j * eta).imag
        b = _sup_im(m, lam, eta) * (1 + 1e-3)
        s = max(2 * eta, 8 * b / a * eta * (1 + 1e-9))
        r = psik_check(E, o, lam, eta, a, b, s)
        bad["psik"] += not (r.rhs_ok and r.lhs_ok)
    for _ in range(1000):
        m = _random_measure(rng, k_max=10)
        t = float(np.exp(rng.uniform(-3, 1)))
        edges = np.sort(rng.normal(0, 3, 2 * int(rng.integers(1, 4))))
        U = [(a, b) for a, b in edges.reshape(-1, 2) if b > a]
        bad["coaire"] += not coaire_check(m, U, t).ok
    return Outcome(all(v == 0 for v in bad.values()),
                   f"violations {bad}; weakdeconv lower bound exercised {lower_checked} times",
                   table(["check", "violations"], sorted(bad.items())))


# -- 10. Jackson moment matching -----------------------------------------------------------

@timed(60.0)
def criterion_10():
    rep = experiment("moments", seed=10, n_pairs=20, h=3, b=4.0)
    above = rep.select(regime="above")
    ok = rep.summary["pairs_ok"] == 20 and all(r["ok"] for r in above)
    worst = max(r["difference"] / r["bound"] for r in above)
    return Outcome(ok, f"{rep.summary['pairs_ok']}/20 pairs; max difference/bound {worst:.3f}",
                   rep.csv_text())


# -- 11. tree catalog -----------------------------------------------------------------------

@timed(30.0)
def criterion_11():
    expect = (1, 1, 1, 2, 3, 6, 11, 23)
    counts, rows, sym = [], [], True
    for k in range(1, 9):
        cat = enumerate_trees(k)
        counts.append(len(cat.trees))
        sym &= bool(np.array_equal(cat.lambda_k, -cat.lambda_k[::-1]))
        rows += [(k, x) for x in cat.lambda_k]
    oracle = tuple(oracle_count(k) for k in range(1, 9))
    l3 = enumerate_trees(3).lambda_k
    l3_ok = l3.size == 3 and np.allclose(l3, [-math.sqrt(2), 0, math.sqrt(2)], rtol=0, atol=1e-8)
    ok = tuple(counts) == expect == oracle and sym and l3_ok
    return Outcome(bool(ok), f"counts {counts}, oracle {list(oracle)}, symmetric {sym}",
                   table(["k", "eigenvalue"], rows))


# -- 12. concentration ------------------------------------------------------------------------

@timed(180.0)
def criterion_12():
    rep = experiment("concentration", seed=12, graph="random_regular:1000:3",
                     test_function="halfline", n_seeds=200)
    rows = [r for r in rep.select(lemma="spectral") if r["t"] in (0.05, 0.1, 0.2)]
    ok = len(rows) == 3 and all(r["ok_wilson"] for r in rows)
    detail = "; ".join(f"t={r['t']}: {r['exceedances']}/200, Wilson {r['wilson_upper']:.4f} "
                       f"vs {r['bound']:.4f}" for r in rows)
    return Outcome(ok, detail, rep.csv_text(),
                   companion={"frequency_ok": all(r["ok_frequency"] for r in rows)})


# -- 13. delocalization contrast --------------------------------------------------------------

@timed(300.0)
def criterion_13():
    rep = experiment("deloc", seed=13, graph="random_regular:2000:3", h=4, n_seeds=5,
                     p_values=[0.3, 0.95], c1_values=[1.0], rho_values=[0.5])
    assert rep.rows[0]["eps"] == pytest.approx(math.sqrt(math.log(4) / 4))
    hi, lo = median_fraction(rep, 0.95, 1.0, 0.5), median_fraction(rep, 0.3, 1.0, 0.5)
    return Outcome(hi - lo >= 0.2, f"median fraction {hi:.3f} (p=0.95) vs {lo:.3f} (p=0.3)",
                   rep.csv_text())


# -- 14. ac-spectrum trend ----------------------------------------------------------------------

@timed(300.0)
def criterion_14():
    rep = experiment("gw-ac", seed=14)
    ok = all(rep.summary["trend_ok"].values())
    detail = "; ".join(f"{fam}: " + ", ".join(f"{r['ac_gap']:.3f}" for r in rep.select(family=fam))
                       for fam in ("gw", "ugw"))
    return Outcome(ok, detail, rep.csv_text())


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 15)}


@functools.lru_cache(maxsize=None)
def first_run(i):
    return CRITERIA[i]()


def _log(log, i, out):
    verdict = "PASS" if out.passed else "FAIL"
    log[i] = (f"criterion {i:2d}: {verdict}  [{out.seconds:.1f} s / {out.limit:g} s]  "
              f"{out.detail}")


@pytest.mark.slow
@pytest.mark.parametrize("i", sorted(CRITERIA))
def test_criterion(i, acceptance_log):
    out = first_run(i)
    _log(acceptance_log, i, out)
    assert out.ok, out.detail
    assert out.seconds <= out.limit, f"runtime {out.seconds:.1f} s over {out.limit} s"


@pytest.mark.slow
def test_criterion_15_determinism(acceptance_log):
    changed = [i for i in sorted(CRITERIA) if CRITERIA[i]().table != first_run(i).table]
    ok = not changed
    acceptance_log[15] = (f"criterion 15: {'PASS' if ok else 'FAIL'}  reruns of criteria 1-14 "
                          + ("byte-identical" if ok else f"differ for {changed}"))
    assert ok


# companions: the nearest statements that do hold, next to the literal ones

@pytest.mark.slow
def test_truncated_tree_law_matches_trees():
    assert first_run(3).companion["truncated_l1"] < 0.05


@pytest.mark.slow
def test_compound_bound_with_pair_probability():
    assert first_run(8).companion["sum_corrected"] == 0


@pytest.mark.slow
def test_concentration_raw_frequency():
    assert first_run(12).companion["frequency_ok"]
