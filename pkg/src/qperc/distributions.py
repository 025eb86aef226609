"""Offspring distributions on the non-negative integers.

Every law is materialized as a finite pmf table.  Parametric laws (Poisson,
binomial) are cut where the remaining tail mass drops below ``TAIL_MASS``,
so sums over the support are finite and reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy import stats
from scipy.special import comb

from .errors import ConvergenceError

TAIL_MASS = 1e-14
NORM_TOL = 1e-12


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


@dataclass(frozen=True, eq=False)
class OffspringDistribution:
    """A probability law on ``{0, 1, 2, ...}`` stored as a pmf table.

    Parameters
    ----------
    kind : str
        One of ``"dirac"``, ``"binomial"``, ``"poisson"``, ``"explicit"``.
    params : dict
        The parameters the law was built from (echoed into configs).
    pmf : ndarray
        ``pmf[k]`` is the probability of ``k`` offspring.
    """

    kind: str
    params: dict
    pmf: np.ndarray
    mean: float = field(init=False)
    _cdf: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        pmf = np.asarray(self.pmf, dtype=float)
        if pmf.ndim != 1 or pmf.size == 0:
            raise ValueError("pmf must be a non-empty 1-d table")
        if np.any(pmf < 0):
            raise ValueError("pmf has negative entries")
        total = pmf.sum()
        if abs(total - 1.0) > NORM_TOL and self.kind == "explicit":
            raise ValueError(f"pmf sums to {total!r}, not 1")
        pmf = pmf / total
        # trailing zeros carry no information
        nz = np.flatnonzero(pmf)
        pmf = pmf[: nz[-1] + 1].copy()
        pmf.setflags(write=False)
        cdf = np.cumsum(pmf)
        cdf[-1] = 1.0
        cdf.setflags(write=False)
        object.__setattr__(self, "pmf", pmf)
        object.__setattr__(self, "_cdf", cdf)
        object.__setattr__(self, "mean", float(np.dot(np.arange(pmf.size), pmf)))

    # -- constructors -----------------------------------------------------
    @classmethod
    def dirac(cls, q: int) -> "OffspringDistribution":
        if q < 0:
            raise ValueError("q must be non-negative")
        pmf = np.zeros(q + 1)
        pmf[q] = 1.0
        return cls("dirac", {"q": int(q)}, pmf)

    @classmethod
    def binomial(cls, n: int, p: float) -> "OffspringDistribution":
        if n < 0 or not 0.0 <= p <= 1.0:
            raise ValueError("binomial needs n >= 0 and p in [0, 1]")
        pmf = stats.binom.pmf(np.arange(n + 1), n, p)
        return cls("binomial", {"n": int(n), "p": float(p)}, pmf)

    @classmethod
    def poisson(cls, c: float) -> "OffspringDistribution":
        if c < 0:
            raise ValueError("poisson mean must be non-negative")
        if c == 0:
            return cls("poisson", {"c": 0.0}, np.array([1.0]))
        kmax = int(stats.poisson.isf(TAIL_MASS, c)) + 1
        while stats.poisson.sf(kmax, c) >= TAIL_MASS:
            kmax += 1
        pmf = stats.poisson.pmf(np.arange(kmax + 1), c)
        return cls("poisson", {"c": float(c)}, pmf)

    @classmethod
    def explicit(cls, pmf) -> "OffspringDistribution":
        """Build from a ``{k: prob}`` mapping or a sequence indexed by k."""
        if isinstance(pmf, Mapping):
            items = {int(k): float(v) for k, v in pmf.items()}
            if any(k < 0 for k in items):
                raise ValueError("support must be non-negative")
            table = np.zeros(max(items) + 1)
            for k, v in items.items():
                table[k] += v
            params = {"pmf": {str(k): v for k, v in sorted(items.items())}}
        else:
            table = np.asarray(pmf, dtype=float)
            params = {"pmf": {str(k): float(v) for k, v in enumerate(table) if v}}
        return cls("explicit", params, table)

    @classmethod
    def mixture(cls, weights: Mapping[int, float]) -> "OffspringDistribution":
        """Mixture of Dirac masses, e.g. ``{3: 0.9, 0: 0.1}``."""
        return cls.explicit(weights)

    @classmethod
    def from_config(cls, spec: Mapping) -> "OffspringDistribution":
        kind = spec.get("kind")
        if kind == "dirac":
            return cls.dirac(int(spec["q"]))
        if kind == "binomial":
            return cls.binomial(int(spec["n"]), float(spec["p"]))
        if kind == "poisson":
            return cls.poisson(float(spec["c"]))
        if kind == "explicit":
            return cls.explicit(spec["pmf"])
        raise ValueError(f"unknown offspring kind {kind!r}")

    def to_config(self) -> dict:
        return {"kind": self.kind, **self.params}

    # -- queries ----------------------------------------------------------
    @property
    def support_max(self) -> int:
        return self.pmf.size - 1

    def prob(self, k: int) -> float:
        return float(self.pmf[k]) if 0 <= k < self.pmf.size else 0.0

    def padded(self, length: int) -> np.ndarray:
        out = np.zeros(max(length, self.pmf.size))
        out[: self.pmf.size] = self.pmf
        return out

    def pgf(self, x, extended: bool = False):
        """Generating function ``sum_k P(k) x^k``.

        ``extended=True`` lifts the ``[0, 1]`` restriction; the sum is then
        over the materialized support only.
        """
        x = np.asarray(x, dtype=float)
        if not extended and (np.any(x < 0) or np.any(x > 1)):
            raise ValueError("pgf argument must lie in [0, 1]")
        val = np.polynomial.polynomial.polyval(x, self.pmf)
        return float(val) if val.ndim == 0 else val

    def pgf_derivative(self, x):
        d = np.polynomial.polynomial.polyder(self.pmf)
        if d.size == 0:
            d = np.zeros(1)
        val = np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), d)
        return float(val) if np.ndim(val) == 0 else val

    def moment(self, order: float) -> float:
        k = np.arange(self.pmf.size, dtype=float)
        return float(np.dot(k**order, self.pmf))

    def sample(self, rng, size=None):
        rng = _as_rng(rng)
        u = rng.random(size)
        out = np.searchsorted(self._cdf, u, side="right")
        return int(out) if size is None else out.astype(np.int64)

    def __repr__(self):
        return f"OffspringDistribution({self.kind}, {self.params})"


def pgf(P: OffspringDistribution, x):
    return P.pgf(x)


def wasserstein_to_dirac(P: OffspringDistribution, q: int, p: float = 1.0) -> float:
    """``E|N - q|^p`` for ``N ~ P``."""
    if q < 0:
        raise ValueError("q must be non-negative")
    if p < 1:
        raise ValueError("p must be >= 1")
    k = np.arange(P.pmf.size, dtype=float)
    return float(np.dot(np.abs(k - q) ** p, P.pmf))


def tv_distance(P: OffspringDistribution, Q: OffspringDistribution) -> float:
    n = max(P.pmf.size, Q.pmf.size)
    return 0.5 * float(np.abs(P.padded(n) - Q.padded(n)).sum())


def size_bias_shift(P: OffspringDistribution) -> OffspringDistribution:
    """The law ``(k+1) P(k+1) / mean(P)`` of the forward degree in UGW(P)."""
    if P.mean <= 0:
        raise ValueError("size-biasing needs a positive mean")
    k = np.arange(1, P.pmf.size)
    if k.size == 0:
        raise ValueError("size-biasing needs a positive mean")
    return OffspringDistribution("explicit", {"size_biased": P.to_config()},
                                 k * P.pmf[1:] / P.mean)


def extinction_probability(P: OffspringDistribution, tol: float = 1e-12,
                           max_iter: int = 10**6) -> float:
    """Smallest root of ``x = pgf(x)``, by iterating ``x <- pgf(x)`` from 0."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    if P.mean <= 1.0 and not (P.pmf.size == 2 and P.pmf[1] == 1.0):
        return 1.0
    coef = P.pmf
    x = 0.0
    for _ in range(max_iter):
        fx = float(np.polynomial.polynomial.polyval(x, coef))
        if abs(fx - x) < tol:
            return fx
        x = fx
    raise ConvergenceError(f"extinction iteration did not converge in {max_iter} steps")


@dataclass(frozen=True, eq=False)
class SkeletonLaws:
    """Laws attached to the survival skeleton of a supercritical GW(P) tree.

    ``extinct_offspring`` is ``None`` when the extinction probability is 0:
    extinct subtrees are then never sampled.
    """

    base: OffspringDistribution
    pi_e: float
    extinct_offspring: OffspringDistribution | None
    survival_prob: float

    def joint_pmf(self) -> np.ndarray:
        """``M[j, k] = P(N's = j, N'e = k)`` for the pair conditioned on ``N_s >= 1``."""
        pmf = self.base.pmf
        kmax = pmf.size
        j = np.arange(kmax)[:, None]
        k = np.arange(kmax)[None, :]
        n = j + k
        inside = n < kmax
        pn = np.where(inside, pmf[np.minimum(n, kmax - 1)], 0.0)
        s = 1.0 - self.pi_e
        with np.errstate(invalid="ignore"):
            m = pn * comb(n, j) * s**j * self.pi_e**k
        m = np.where(inside, m, 0.0)
        m[0, :] = 0.0
        return m / (1.0 - self.base.pgf(self.pi_e))

    def pair_pgf(self, x, y):
        """Closed-form generating function of the conditioned pair.

        ``E[x^Ns y^Ne ; Ns >= 1] = phi((1 - pi_e) x + pi_e y) - phi(pi_e y)``,
        normalized by ``P(Ns >= 1) = 1 - phi(pi_e) = 1 - pi_e``.
        """
        phi = self.base.pgf
        pe = self.pi_e
        return (phi((1 - pe) * x + pe * y) - phi(pe * y)) / (1 - phi(pe))

    def survivor_pmf(self) -> np.ndarray:
        return self.joint_pmf().sum(axis=1)

    def mean_log_survivors(self) -> float:
        """``E log N's`` by exact enumeration."""
        ps = self.survivor_pmf()
        j = np.arange(1, ps.size)
        return float(np.dot(np.log(j), ps[1:]))

    def mean_survivors(self) -> float:
        ps = self.survivor_pmf()
        return float(np.dot(np.arange(ps.size), ps))

    def mean_extinct(self) -> float:
        pe = self.joint_pmf().sum(axis=0)
        return float(np.dot(np.arange(pe.size), pe))

    def prob_any_extinct(self) -> float:
        return float(1.0 - self.joint_pmf()[:, 0].sum())


def skeleton_laws(P: OffspringDistribution, tol: float = 1e-13) -> SkeletonLaws:
    if P.mean <= 1.0:
        raise ValueError("skeleton laws need a supercritical law (mean > 1)")
    pi_e = extinction_probability(P, tol=tol)
    if pi_e == 0.0:
        extinct = None
    else:
        k = np.arange(P.pmf.size)
        q = P.pmf * pi_e ** (k - 1.0)
        extinct = OffspringDistribution("explicit", {"extinct_of": P.to_config()}, q / q.sum())
    return SkeletonLaws(P, pi_e, extinct, 1.0 - pi_e)


def sample_conditioned_pair(L: SkeletonLaws, rng, size=None, max_attempts: int = 10**6):
    """Draw ``(N's, N'e)``: thin ``N ~ P`` with Bernoulli(pi_e) and reject ``N_s = 0``."""
    if L.survival_prob <= 0:
        raise ValueError("conditioning needs a positive survival probability")
    rng = _as_rng(rng)
    m = 1 if size is None else int(np.prod(size))
    ns = np.zeros(m, dtype=np.int64)
    ne = np.zeros(m, dtype=np.int64)
    todo = np.arange(m)
    for _ in range(max_attempts):
        if todo.size == 0:
            break
        n = L.base.sample(rng, todo.size)
        e = rng.binomial(n, L.pi_e) if L.pi_e > 0 else np.zeros_like(n)
        s = n - e
        ok = s >= 1
        ns[todo[ok]] = s[ok]
        ne[todo[ok]] = e[ok]
        todo = todo[~ok]
    else:
        if todo.size:
            raise ConvergenceError("conditioning on N_s >= 1 hit the rejection cap")
    if size is None:
        return int(ns[0]), int(ne[0])
    return ns.reshape(size), ne.reshape(size)
