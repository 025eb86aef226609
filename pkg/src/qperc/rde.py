"""Population dynamics for the resolvent recursion on Galton-Watson trees.

The root resolvent ``G_o(z)`` of a GW tree satisfies, in law,
``G_o = -(z + sum_{i <= N} G_i)^{-1}`` with i.i.d. copies ``G_i``.  A pool of
samples is iterated through that map; the plain, survival-skeleton and
unimodular-root variants share one vectorized engine in which each row of a
2-D pool is an independent population attached to its own ``z``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .distributions import (OffspringDistribution, SkeletonLaws, sample_conditioned_pair,
                            size_bias_shift, tv_distance)
from .errors import CapExceededError
from .spectral import eigendecompose, semicircle_transform, stieltjes, vertex_spectral_measure
from .trees import RootedTree, enumerate_trees, sample_extinct_tree

ETA_FLOOR = 1e-6
BOUND_SLACK = 1e-9


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def _check_z(z) -> np.ndarray:
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(z.imag <= 0):
        raise ValueError("population dynamics needs Im z > 0")
    return z


@dataclass(frozen=True)
class PoolParams:
    """Budget of a population-dynamics run."""

    pool_size: int = 10_000
    sweeps: int = 200
    replicas: int = 1
    window: int = 20
    extinct_cap: int = 10**6

    def __post_init__(self):
        if self.pool_size < 2 or self.sweeps < 0 or self.replicas < 1:
            raise ValueError("pool_size >= 2, sweeps >= 0 and replicas >= 1 required")

    def to_config(self) -> dict:
        return {"pool_size": self.pool_size, "sweeps": self.sweeps, "replicas": self.replicas,
                "window": self.window, "extinct_cap": self.extinct_cap}


@dataclass(frozen=True, eq=False)
class ResolventEnsemble:
    """Equilibrated pool for a single ``z``."""

    z: complex
    samples: np.ndarray
    generation: int
    seed: int | None = None
    stationary: bool | None = None

    def __post_init__(self):
        if self.z.imag <= 0:
            raise ValueError("Im z must be positive")

    def mean(self) -> complex:
        return complex(self.samples.mean())

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["re", "im"])
            for s in self.samples:
                w.writerow([repr(float(s.real)), repr(float(s.imag))])


@dataclass(frozen=True, eq=False)
class PoolBatch:
    """Independent pools, one row per ``z`` value (rows may repeat a ``z``)."""

    z: np.ndarray
    samples: np.ndarray
    generation: int
    drift: np.ndarray = field(repr=False)
    drift_sigma: np.ndarray = field(repr=False)

    @property
    def stationary(self) -> np.ndarray:
        """Pool-mean drift over the diagnostic window below 3 standard errors."""
        return self.drift <= 3.0 * self.drift_sigma + 1e-15

    def ensemble(self, i: int) -> ResolventEnsemble:
        return ResolventEnsemble(complex(self.z[i]), self.samples[i], self.generation,
                                 stationary=bool(self.stationary[i]))


def _check_pool(samples: np.ndarray, z: np.ndarray) -> None:
    # invariant region: closed upper half-plane, |G| <= 1 / Im z
    if np.any(samples.imag < 0):
        raise FloatingPointError("pool left the upper half-plane")
    lim = (1.0 / z.imag)[:, None] * (1.0 + BOUND_SLACK)
    if np.any(np.abs(samples) > lim):
        raise FloatingPointError("pool left the disk |G| <= 1/Im z")


def _gather_sums(pool: np.ndarray, counts: np.ndarray, rng) -> np.ndarray:
    """Row-wise sums of ``counts[r, j]`` uniformly chosen entries of ``pool[r]``."""
    rows, m = pool.shape
    flat = counts.ravel()
    total = int(flat.sum())
    dest = np.repeat(np.arange(flat.size), flat)
    picks = rng.integers(0, m, size=total) + (dest // counts.shape[1]) * m
    vals = pool.ravel()[picks]
    re = np.bincount(dest, weights=vals.real, minlength=flat.size)
    im = np.bincount(dest, weights=vals.imag, minlength=flat.size)
    return (re + 1j * im).reshape(counts.shape)


def _initial_pool(P_mean: float, z: np.ndarray, m: int) -> np.ndarray:
    q = max(1, int(round(P_mean)))
    g0 = np.asarray(semicircle_transform(q, z)).reshape(-1)
    return np.repeat(g0[:, None], m, axis=1)


def _run(z: np.ndarray, m: int, sweeps: int, window: int, init_mean: float, draw, rng,
         init=None) -> PoolBatch:
    """Synchronous sweeps.  ``draw(rng, shape)`` returns ``(counts, extra)``:
    the number of pool picks and an additive complex term per destination."""
    pool = _initial_pool(init_mean, z, m) if init is None else np.array(init, dtype=complex)
    history = []
    for _ in range(sweeps):
        counts, extra = draw(rng, pool.shape)
        sums = _gather_sums(pool, counts, rng)
        if extra is not None:
            sums = sums + extra
        pool = -1.0 / (z[:, None] + sums)
        _check_pool(pool, z)
        history.append(pool.mean(axis=1))
        if len(history) > window:
            history.pop(0)
    if len(history) >= 2:
        drift = np.abs(history[-1] - history[0])
    else:
        drift = np.zeros(z.size)
    sigma = np.abs(pool.std(axis=1)) / np.sqrt(m)
    return PoolBatch(z, pool, sweeps, drift, sigma)


def evolve_pools(P: OffspringDistribution, z, params: PoolParams = PoolParams(), rng=None,
                 init=None) -> PoolBatch:
    """Plain RDE pools for an array of ``z`` values (one row each)."""
    z = _check_z(z)
    rng = _as_rng(rng)

    def draw(r, shape):
        return P.sample(r, shape[0] * shape[1]).reshape(shape), None

    return _run(z, params.pool_size, params.sweeps, params.window, P.mean, draw, rng, init)


def evolve_pool(P: OffspringDistribution, z: complex, pool_size: int = 10_000,
                sweeps: int = 200, rng=None, window: int = 20) -> ResolventEnsemble:
    """Population dynamics for ``G_o = -(z + sum_{i <= N} G_i)^{-1}``, ``N ~ P``.

    All samples start at the semicircle fixed point for ``q = max(1, round(mean P))``.
    """
    params = PoolParams(pool_size=pool_size, sweeps=sweeps, window=window)
    return evolve_pools(P, z, params, rng).ensemble(0)


# -- extinct subtrees -----------------------------------------------------------

def tree_root_resolvent(tree: RootedTree, z):
    """Exact root resolvent of a finite rooted tree by bottom-up Schur complements.

    Vectorized over ``z``; cost is ``O(n)`` per ``z`` value.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(z.imag <= 0):
        raise ValueError("needs Im z > 0")
    n = tree.n
    lp = tree.level_ptr
    acc = np.zeros((n, z.size), dtype=complex)
    for d in range(lp.size - 2, -1, -1):
        lo, hi = lp[d], lp[d + 1]
        g = -1.0 / (z[None, :] + acc[lo:hi])
        if d == 0:
            return g[0] if g[0].size > 1 else complex(g[0, 0])
        np.add.at(acc, tree.parent[lo:hi], g)
    raise AssertionError("unreachable")


def extinct_forest_resolvents(Q: OffspringDistribution, z_roots: np.ndarray, rng,
                              vertex_cap: int = 10**6) -> np.ndarray:
    """Root resolvents of independent complete GW(Q) trees, one per entry of ``z_roots``.

    All trees grow together level by level; the resolvents are then obtained
    exactly from the leaves upwards.  ``vertex_cap`` bounds the total size
    of the forest.
    """
    z_roots = np.asarray(z_roots, dtype=complex).ravel()
    k = z_roots.size
    if k == 0:
        return np.zeros(0, dtype=complex)
    parents = []
    zs = [z_roots]
    size = k
    level = k
    while level:
        counts = Q.sample(rng, level)
        total = int(counts.sum())
        if total == 0:
            break
        size += total
        if size > vertex_cap:
            raise CapExceededError(f"extinct forest exceeded {vertex_cap} vertices")
        par = np.repeat(np.arange(level), counts)
        parents.append(par)
        zs.append(zs[-1][par])
        level = total
    acc = np.zeros(zs[-1].size, dtype=complex)
    for d in range(len(parents), 0, -1):
        g = -1.0 / (zs[d] + acc)
        acc = np.zeros(zs[d - 1].size, dtype=complex)
        np.add.at(acc, parents[d - 1], g)
    return -1.0 / (z_roots + acc)


def sample_V(L: SkeletonLaws, z: complex, n_e: int, extinct_cap: int = 10**6, rng=None) -> complex:
    """Sum of the root resolvents of ``n_e`` independent extinct subtrees.

    Each subtree is sampled whole and diagonalized exactly.
    """
    z = complex(z)
    if z.imag <= 0:
        raise ValueError("needs Im z > 0")
    if n_e == 0:
        return 0j
    rng = _as_rng(rng)
    total = 0j
    for _ in range(n_e):
        tree = sample_extinct_tree(L, vertex_cap=extinct_cap, rng=rng)
        if tree.n == 1:
            total += -1.0 / z
            continue
        E = eigendecompose(tree.graph, size_cap=max(tree.n, 1))
        total += stieltjes(vertex_spectral_measure(E, 0), z)
    return complex(total)


def _skeleton_draw(L: SkeletonLaws, z: np.ndarray, extinct_cap: int):
    Q = L.extinct_offspring

    def draw(r, shape):
        ns, ne = sample_conditioned_pair(L, r, size=shape)
        if Q is None or not ne.any():
            return ns, None
        owner = np.repeat(np.arange(ne.size), ne.ravel())
        zr = np.repeat(z, shape[1])[owner]
        g = extinct_forest_resolvents(Q, zr, r, vertex_cap=extinct_cap)
        re = np.bincount(owner, weights=g.real, minlength=ne.size)
        im = np.bincount(owner, weights=g.imag, minlength=ne.size)
        return ns, (re + 1j * im).reshape(shape)

    return draw


def evolve_skeleton_pools(L: SkeletonLaws, z, params: PoolParams = PoolParams(),
                          rng=None) -> PoolBatch:
    z = _check_z(z)
    if L.survival_prob <= 0:
        raise ValueError("the skeleton is empty when the survival probability is 0")
    rng = _as_rng(rng)
    draw = _skeleton_draw(L, z, params.extinct_cap)
    return _run(z, params.pool_size, params.sweeps, params.window, L.mean_survivors(), draw, rng)


def evolve_skeleton_pool(L: SkeletonLaws, z: complex, pool_size: int = 10_000,
                         sweeps: int = 200, extinct_cap: int = 10**6, rng=None,
                         window: int = 20) -> ResolventEnsemble:
    """Pool for ``G^s_o = -(z + sum_{i <= N's} G^s_i + V(z))^{-1}``.

    ``(N's, N'e)`` is the offspring pair conditioned on survival and ``V`` sums
    the root resolvents of ``N'e`` independent extinct subtrees.
    """
    params = PoolParams(pool_size=pool_size, sweeps=sweeps, window=window,
                        extinct_cap=extinct_cap)
    return evolve_skeleton_pools(L, z, params, rng).ensemble(0)


def extinct_root_resolvents(L: SkeletonLaws, z: complex, n: int, rng=None,
                            vertex_cap: int = 10**6) -> np.ndarray:
    """``n`` samples of the root resolvent of a GW tree conditioned to die out."""
    if L.extinct_offspring is None:
        raise ValueError("extinction probability is 0")
    zr = np.full(n, complex(z))
    return extinct_forest_resolvents(L.extinct_offspring, zr, _as_rng(rng), vertex_cap)


# -- unimodular root -------------------------------------------------------------

def ugw_root_resolvent(P: OffspringDistribution, z: complex, pool: ResolventEnsemble,
                       n_draws: int, rng=None) -> np.ndarray:
    """Samples of ``-(z + sum_{i <= N} Ghat_i)^{-1}`` with ``N ~ P`` and ``Ghat``
    drawn from a pool built for the size-biased law."""
    z = complex(z)
    if z.imag <= 0:
        raise ValueError("needs Im z > 0")
    if not np.isclose(pool.z, z, rtol=0, atol=1e-14):
        raise ValueError(f"pool was built at z = {pool.z}, requested {z}")
    rng = _as_rng(rng)
    return ugw_root_batch(P, np.array([z]), pool.samples[None, :], n_draws, rng)[0]


def ugw_root_batch(P: OffspringDistribution, z: np.ndarray, pools: np.ndarray,
                   n_draws: int, rng) -> np.ndarray:
    counts = P.sample(rng, z.size * n_draws).reshape(z.size, n_draws)
    sums = _gather_sums(pools, counts, rng)
    return -1.0 / (z[:, None] + sums)


# -- density of states -----------------------------------------------------------

@dataclass(frozen=True)
class DosSpec:
    """What to solve: ``kind`` is ``"gw"`` (root of GW(P)), ``"ugw"`` (root of
    UGW(P)) or ``"skeleton"`` (root of GW(P) conditioned on survival)."""

    kind: str
    law: OffspringDistribution

    def __post_init__(self):
        if self.kind not in ("gw", "ugw", "skeleton"):
            raise ValueError(f"unknown pool kind {self.kind!r}")


def root_samples(spec: DosSpec, z, params: PoolParams = PoolParams(), rng=None,
                 n_draws: int | None = None) -> np.ndarray:
    """Equilibrated root-resolvent samples, shape ``(len(z), replicas, m)``."""
    z = _check_z(z)
    rng = _as_rng(rng)
    R = params.replicas
    zz = np.repeat(z, R)
    if spec.kind == "gw":
        out = evolve_pools(spec.law, zz, params, rng).samples
    elif spec.kind == "skeleton":
        from .distributions import skeleton_laws
        out = evolve_skeleton_pools(skeleton_laws(spec.law), zz, params, rng).samples
    else:
        hat = size_bias_shift(spec.law)
        pools = evolve_pools(hat, zz, params, rng).samples
        out = ugw_root_batch(spec.law, zz, pools, n_draws or params.pool_size, rng)
    return out.reshape(z.size, R, -1)


def density_of_states(spec: DosSpec, lambda_grid, eta: float,
                      params: PoolParams = PoolParams(), rng=None):
    """``mean(Im G) / pi`` at ``lambda + i eta`` and its standard error.

    The standard error comes from the spread of independent replica pools
    when ``replicas > 1``, otherwise from the within-pool spread.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    lam = np.asarray(lambda_grid, dtype=float)
    s = root_samples(spec, lam + 1j * eta, params, rng)
    im = s.imag / np.pi
    dos = im.mean(axis=(1, 2))
    if params.replicas > 1:
        err = im.mean(axis=2).std(axis=1, ddof=1) / np.sqrt(params.replicas)
    else:
        err = im[:, 0].std(axis=1, ddof=1) / np.sqrt(im.shape[2])
    return dos, err


def dos_to_csv(path, lambda_grid, eta, dos, stderr) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lambda", "eta", "dos", "stderr"])
        for l, d, e in zip(lambda_grid, dos, stderr):
            w.writerow([repr(float(l)), repr(float(eta)), repr(float(d)), repr(float(e))])


# -- Lyapunov exponent and discrepancy ---------------------------------------------

@dataclass(frozen=True)
class LyapunovReport:
    interval: tuple
    eta: float
    gamma_value: float
    mc_error: float
    n_samples: int
    mean_log_survivors: float

    @property
    def nonnegative_within_noise(self) -> bool:
        return self.gamma_value >= -3.0 * self.mc_error


def lyapunov(L: SkeletonLaws, interval, eta: float, params: PoolParams = PoolParams(),
             rng=None, n_energies: int = 32) -> LyapunovReport:
    """``gamma = E[-log|G^s_o(E + i eta)|] - E[log N's] / 2`` with ``E`` uniform on the interval.

    ``E log N's`` is enumerated exactly from the conditioned pmf; the
    standard error is the spread of the per-energy estimates.
    """
    a, b = map(float, interval)
    if not a < b:
        raise ValueError("interval must be nonempty")
    eta = max(float(eta), ETA_FLOOR)
    rng = _as_rng(rng)
    E = rng.uniform(a, b, size=n_energies)
    pools = evolve_skeleton_pools(L, E + 1j * eta, params, rng).samples
    per_e = -np.log(np.abs(pools)).mean(axis=1)
    half_log = 0.5 * L.mean_log_survivors()
    gamma = float(per_e.mean() - half_log)
    err = float(per_e.std(ddof=1) / np.sqrt(n_energies)) if n_energies > 1 else 0.0
    return LyapunovReport((a, b), eta, gamma, err, pools.size, 2 * half_log)


def lyapunov_pointwise(pool: np.ndarray, L: SkeletonLaws):
    """``L_P(z)`` from one equilibrated skeleton pool, with its standard error."""
    v = -np.log(np.abs(pool))
    return float(v.mean() - 0.5 * L.mean_log_survivors()), float(v.std(ddof=1) / np.sqrt(v.size))


def _pair_terms(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    num = np.abs(x - y)
    den = x + y
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    return r


def discrepancy_kappa(samples, rng=None, return_error: bool = False):
    """Estimate ``kappa(X) = E|X - X'| / (X + X')`` (``0/0 = 0``) from
    the disjoint pairs of one random shuffle."""
    x = np.asarray(samples, dtype=float).ravel()
    if np.any(x < 0):
        raise ValueError("kappa is defined for non-negative samples")
    if x.size < 2:
        raise ValueError("need at least two samples")
    perm = _as_rng(rng).permutation(x.size)
    half = x.size // 2
    t = _pair_terms(x[perm[:half]], x[perm[half:2 * half]])
    k = float(t.mean())
    if return_error:
        return k, float(t.std(ddof=1) / np.sqrt(half)) if half > 1 else 0.0
    return k


def kappa_exact(values, probs) -> float:
    """``kappa`` of a finitely supported law by enumerating every outcome pair."""
    v = np.asarray(values, dtype=float)
    p = np.asarray(probs, dtype=float)
    if np.any(v < 0):
        raise ValueError("kappa is defined for non-negative variables")
    return float(p @ _pair_terms(v[:, None], v[None, :]) @ p)


@dataclass(frozen=True)
class KappaBoundReport:
    z: complex
    kappa_im: float
    kappa_im_err: float
    kappa_mod2: float
    kappa_mod2_err: float
    lyap: float
    lyap_err: float
    bound1: float
    bound1_ok: bool
    bound2: float
    bound2_margin: float
    d_tv: float
    mean_survivors: float
    mean_extinct: float
    prob_any_extinct: float


def kappa_bound_check(L: SkeletonLaws, z: complex, params: PoolParams = PoolParams(),
                      rng=None, q: int | None = None) -> KappaBoundReport:
    """Compare ``kappa(Im G^s)`` with ``sqrt(2 L_P(z))`` on one equilibrated pool.

    Also reports the margin of the second estimate
    ``kappa(|G^s|^2) <= 6 d_TV^2 + 6 sqrt(2) (q+1) sqrt(L) + 6 P(N'e >= 1)``
    together with the quantities that decide whether its regime applies.
    """
    rng = _as_rng(rng)
    if q is None:
        q = max(1, int(round(L.base.mean)))
    pool = evolve_skeleton_pools(L, complex(z), params, rng).samples[0]
    k_im, e_im = discrepancy_kappa(pool.imag, rng, return_error=True)
    k_m2, e_m2 = discrepancy_kappa(np.abs(pool) ** 2, rng, return_error=True)
    lyap, lyap_err = lyapunov_pointwise(pool, L)
    upper_l = max(lyap + 3 * lyap_err, 0.0)
    bound1 = float(np.sqrt(2 * max(lyap, 0.0)))
    ok = k_im - 3 * e_im <= np.sqrt(2 * upper_l) + 1e-12
    dtv = tv_distance(L.base, OffspringDistribution.dirac(q))
    p_ext = L.prob_any_extinct()
    bound2 = 6 * dtv**2 + 6 * np.sqrt(2) * (q + 1) * np.sqrt(max(lyap, 0.0)) + 6 * p_ext
    return KappaBoundReport(complex(z), k_im, e_im, k_m2, e_m2, lyap, lyap_err, bound1,
                            bool(ok), float(bound2), float(bound2 - k_m2), dtv,
                            L.mean_survivors(), L.mean_extinct(), p_ext)


# -- V(z) away from finite-tree eigenvalues --------------------------------------

def tree_eigenvalue_sets(K: int = 8) -> list[np.ndarray]:
    """``Lambda_k`` for ``k = 1..K``: distinct eigenvalues of trees on ``k`` vertices."""
    return [enumerate_trees(k).lambda_k for k in range(1, K + 1)]


def avoidance_grid(a: float, b: float, n_points: int, eps: float, K: int = 8) -> np.ndarray:
    """Uniform grid on ``[a, b]`` with every point within ``eps 2^-k / |Lambda_k|``
    of ``Lambda_k`` removed, for ``k <= K``."""
    grid = np.linspace(a, b, n_points)
    keep = np.ones(grid.size, dtype=bool)
    for k, lam in enumerate(tree_eigenvalue_sets(K), start=1):
        margin = eps * 2.0**-k / lam.size
        keep &= np.min(np.abs(grid[:, None] - lam[None, :]), axis=1) > margin
    return grid[keep]


def V_moment(L: SkeletonLaws, lambdas, eta: float, n_samples: int, p: float = 1.0,
             rng=None, extinct_cap: int = 10**6) -> float:
    """Monte Carlo ``sup_lambda E|V(lambda + i eta)|^p`` over the given energies."""
    rng = _as_rng(rng)
    lam = np.asarray(lambdas, dtype=float)
    Q = L.extinct_offspring
    if Q is None:
        return 0.0
    best = 0.0
    for l in lam:
        _, ne = sample_conditioned_pair(L, rng, size=n_samples)
        owner = np.repeat(np.arange(n_samples), ne)
        g = extinct_forest_resolvents(Q, np.full(owner.size, l + 1j * eta), rng, extinct_cap)
        v = np.bincount(owner, weights=g.real, minlength=n_samples) \
            + 1j * np.bincount(owner, weights=g.imag, minlength=n_samples)
        best = max(best, float(np.mean(np.abs(v) ** p)))
    return best
