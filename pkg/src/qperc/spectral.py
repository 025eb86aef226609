"""Exact spectral computations on finite graphs and the tree limit laws.

Contains eigendecompositions, vertex and empirical spectral measures,
Cauchy-Stieltjes transforms, the semicircle and Kesten-McKay closed forms,
interval-mass regularity checks and delocalization statistics.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import HypothesisViolation
from .graphs import DEFAULT_SIZE_CAP, Graph, connected_components


@dataclass(frozen=True, eq=False)
class SpectralMeasure:
    """Finite atomic measure ``sum_k w_k delta_{lambda_k}``, atoms ascending."""

    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.atoms, dtype=float).ravel()
        w = np.asarray(self.weights, dtype=float).ravel()
        if lam.shape != w.shape:
            raise ValueError("atoms and weights differ in length")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        order = np.argsort(lam, kind="stable")
        object.__setattr__(self, "atoms", lam[order])
        object.__setattr__(self, "weights", w[order])

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    @classmethod
    def dirac(cls, a: float = 0.0) -> "SpectralMeasure":
        return cls(np.array([a]), np.array([1.0]))

    def moment(self, k: int) -> float:
        return float(np.dot(self.atoms**k, self.weights))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["lambda", "weight"])
            for lam, wt in zip(self.atoms, self.weights):
                w.writerow([repr(float(lam)), repr(float(wt))])

    @classmethod
    def from_csv(cls, path) -> "SpectralMeasure":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, 0], data[:, 1])


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Eigenvalues ascending with orthonormal eigenvectors in the columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self) -> int:
        return self.eigenvalues.size

    def residuals(self, A: np.ndarray) -> np.ndarray:
        r = A @ self.eigenvectors - self.eigenvectors * self.eigenvalues
        return np.linalg.norm(r, axis=0)


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    # first coordinate with |x| > tiny is made positive
    mag = np.abs(vecs) > 1e-12
    first = np.argmax(mag, axis=0)
    s = np.sign(vecs[first, np.arange(vecs.shape[1])])
    s[s == 0] = 1.0
    return vecs * s


def eigendecompose(G: Graph, size_cap: int = DEFAULT_SIZE_CAP,
                   by_component: bool = True) -> EigenSystem:
    """Full eigendecomposition of the adjacency matrix.

    With ``by_component`` the matrix is diagonalized block by block over the
    connected components, so every eigenvector is supported on a single
    component.  This is still an orthonormal eigenbasis of the whole matrix,
    and it avoids the arbitrary mixing a dense solver performs inside large
    degenerate eigenspaces (isolated vertices, repeated small components).
    """
    n = G.n
    if n > size_cap:
        raise ValueError(f"graph has {n} vertices, above the eigensolver cap {size_cap}")
    if n == 0:
        return EigenSystem(np.zeros(0), np.zeros((0, 0)))
    if not by_component:
        w, v = np.linalg.eigh(G.adjacency_matrix())
        return EigenSystem(w, _fix_signs(v))
    vals = np.empty(n)
    vecs = np.zeros((n, n))
    col = 0
    for comp in connected_components(G):
        k = comp.size
        if k == 1:
            vals[col] = 0.0
            vecs[comp[0], col] = 1.0
        else:
            w, v = np.linalg.eigh(G.subgraph(comp).adjacency_matrix())
            vals[col:col + k] = w
            vecs[np.ix_(comp, np.arange(col, col + k))] = v
        col += k
    order = np.argsort(vals, kind="stable")
    return EigenSystem(vals[order], _fix_signs(vecs[:, order]))


def eigenvalues(G: Graph, size_cap: int = DEFAULT_SIZE_CAP) -> np.ndarray:
    """Spectrum only, assembled from the connected components."""
    if G.n > size_cap:
        raise ValueError(f"graph has {G.n} vertices, above the eigensolver cap {size_cap}")
    parts = []
    for comp in connected_components(G):
        if comp.size == 1:
            parts.append(np.zeros(1))
        else:
            parts.append(np.linalg.eigvalsh(G.subgraph(comp).adjacency_matrix()))
    return np.sort(np.concatenate(parts)) if parts else np.zeros(0)


def vertex_spectral_measure(E: EigenSystem, v: int) -> SpectralMeasure:
    """Atoms ``(lambda_k, |psi_k(v)|^2)``."""
    if not 0 <= v < E.n:
        raise ValueError("vertex out of range")
    return SpectralMeasure(E.eigenvalues, E.eigenvectors[v] ** 2)


def empirical_spectral_measure(E) -> SpectralMeasure:
    """Uniform measure on the eigenvalues (accepts an EigenSystem or an array)."""
    lam = E.eigenvalues if isinstance(E, EigenSystem) else np.asarray(E, dtype=float)
    return SpectralMeasure(lam, np.full(lam.size, 1.0 / lam.size))


def stieltjes(m: SpectralMeasure, z):
    """``g(z) = sum_k w_k / (lambda_k - z)``; vectorized over ``z``."""
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag <= 0):
        raise ValueError("Stieltjes transform needs Im z > 0")
    flat = z.ravel()
    out = np.empty(flat.size, dtype=complex)
    step = max(1, 2**22 // max(m.atoms.size, 1))
    for i in range(0, flat.size, step):
        zz = flat[i:i + step]
        out[i:i + step] = (m.weights[None, :] / (m.atoms[None, :] - zz[:, None])).sum(axis=1)
    out = out.reshape(z.shape)
    return complex(out) if out.ndim == 0 else out


def smoothed_density(m: SpectralMeasure, lam, eta: float):
    """``Im g(lambda + i eta) / pi``: the measure convolved with a Cauchy kernel."""
    lam = np.asarray(lam, dtype=float)
    return np.imag(stieltjes(m, lam + 1j * eta)) / np.pi


# -- closed-form limit laws ----------------------------------------------------

def semicircle_density(q: int, lam):
    """Root spectral density of the infinite ``q``-ary tree."""
    if q < 1:
        raise ValueError("q must be >= 1")
    lam = np.asarray(lam, dtype=float)
    val = np.sqrt(np.clip(4.0 * q - lam**2, 0.0, None)) / (2.0 * np.pi * q)
    return float(val) if val.ndim == 0 else val


def kesten_mckay_density(q: int, lam):
    """Root spectral density of the infinite ``(q+1)``-regular tree."""
    if q < 1:
        raise ValueError("q must be >= 1")
    lam = np.asarray(lam, dtype=float)
    inside = lam**2 < 4.0 * q
    # outside the support the formula may read 0/0 (q = 1 at |lambda| = 2)
    den = np.where(inside, (q + 1) ** 2 - lam**2, 1.0)
    val = np.where(inside, (q + 1) / (2.0 * np.pi) * np.sqrt(np.where(inside, 4.0 * q - lam**2, 0.0))
                   / den, 0.0)
    return float(val) if val.ndim == 0 else val


def semicircle_transform(q: int, z):
    """Root ``g`` of ``q g^2 + z g + 1 = 0`` with ``Im g > 0``, i.e. the
    fixed point of ``g = -1 / (z + q g)``."""
    if q < 1:
        raise ValueError("q must be >= 1")
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag <= 0):
        raise ValueError("needs Im z > 0")
    r = 2.0 * np.sqrt(q)
    # sqrt(z - r) sqrt(z + r) is the branch ~ z at infinity, analytic off [-r, r]
    s = np.sqrt(z - r) * np.sqrt(z + r)
    g = (-z + s) / (2.0 * q)
    # use the smaller-modulus root's partner via Vieta where cancellation bites
    other = (-z - s) / (2.0 * q)
    big = np.abs(other) > np.abs(g)
    g = np.where(big, 1.0 / (q * np.where(big, other, 1.0)), g)
    g = np.where(g.imag > 0, g, 1.0 / (q * g))
    # one Newton step on q g^2 + z g + 1 polishes the last bits
    g = g - (q * g * g + z * g + 1.0) / (2.0 * q * g + z)
    return complex(g) if g.ndim == 0 else g


def kesten_mckay_transform(q: int, z):
    """Stieltjes transform of the Kesten-McKay law: ``-1 / (z + (q+1) g(z))``."""
    z = np.asarray(z, dtype=complex)
    g = semicircle_transform(q, z)
    out = -1.0 / (z + (q + 1) * np.asarray(g))
    return complex(out) if np.ndim(out) == 0 else out


# -- interval masses and regularity checks --------------------------------------

def interval_mass(m: SpectralMeasure, a: float, b: float, closed: bool = True) -> float:
    if a > b:
        raise ValueError("need a <= b")
    lam = m.atoms
    inside = (lam >= a) & (lam <= b) if closed else (lam > a) & (lam < b)
    return float(m.weights[inside].sum())


def _premise_grid(eta: float, s: float, b: float, points: int) -> np.ndarray:
    # Im g(lambda + iy) <= 1/y, so beyond y = 1/b the upper premise is automatic
    y_top = max(2.0 / b, 2.0 * eta, s)
    geo = np.geomspace(eta, y_top, points)
    dyadic = (s / 2.0) * 2.0 ** np.arange(0, int(np.ceil(np.log2(y_top / (s / 2.0)))) + 2)
    return np.unique(np.concatenate([geo, dyadic[dyadic >= eta]]))


@dataclass(frozen=True)
class DeconvolutionCheck:
    lhs_ok: bool | None
    rhs_ok: bool
    rho: float
    ratio_open: float
    ratio_closed: float
    lower_bound: float | None
    upper_bound: float


def weakdeconv_check(m: SpectralMeasure, lam: float, eta: float, a: float, b: float,
                     s: float, grid_points: int = 64, rtol: float = 1e-12) -> DeconvolutionCheck:
    """Check ``a / (2 rho) <= mu(I) / s <= b`` on ``I`` of length ``s`` centred at ``lam``.

    Premises (verified, not assumed): ``Im g(lam + i eta) >= a`` and
    ``Im g(lam + i y) <= b`` for ``y >= eta`` on a geometric grid that also
    contains every dyadic point ``(s/2) 2^k`` used by the estimate.  The
    lower bound is only asserted when ``rho = s / eta >= 8 b / a``.
    Both the open and the closed interval are tested.
    """
    if not (eta > 0 and a > 0 and b > 0):
        raise ValueError("eta, a, b must be positive")
    if s < 2 * eta:
        raise ValueError("interval length must be at least 2 eta")
    g_eta = np.imag(stieltjes(m, lam + 1j * eta))
    if g_eta < a * (1 - rtol):
        raise HypothesisViolation(f"Im g(lambda + i eta) = {g_eta} < a = {a}")
    ys = _premise_grid(eta, s, b, grid_points)
    g_y = np.imag(stieltjes(m, lam + 1j * ys))
    if np.any(g_y > b * (1 + rtol)):
        raise HypothesisViolation(f"Im g(lambda + i y) reaches {g_y.max()} > b = {b}")
    rho = s / eta
    r_open = interval_mass(m, lam - s / 2, lam + s / 2, closed=False) / s
    r_closed = interval_mass(m, lam - s / 2, lam + s / 2, closed=True) / s
    rhs_ok = bool(max(r_open, r_closed) <= b * (1 + rtol))
    lhs_ok, lower = None, None
    if rho >= 8 * b / a:
        lower = a / (2 * rho)
        lhs_ok = bool(min(r_open, r_closed) >= lower * (1 - rtol))
    return DeconvolutionCheck(lhs_ok, rhs_ok, rho, r_open, r_closed, lower, b)


def psik_check(E: EigenSystem, o: int, lam: float, eta: float, a: float, b: float,
               s: float, **kw) -> DeconvolutionCheck:
    """The same two-sided bound for ``sum_{k in Lambda_I} |psi_k(o)|^2``."""
    return weakdeconv_check(vertex_spectral_measure(E, o), lam, eta, a, b, s, **kw)


@dataclass(frozen=True)
class CoareaCheck:
    """``long_components`` records whether every interval of ``U`` has length
    at least ``t``; the inequality is guaranteed under that condition but can
    fail for shorter intervals (e.g. a Dirac mass inside ``(-t/10, t/10)``)."""

    mass: float
    integral: float
    ok: bool
    long_components: bool


def poisson_integral(m: SpectralMeasure, a: float, b: float, t: float) -> float:
    """``int_a^b Im g(x + i t) dx`` in closed form (arctangent of the Cauchy kernel)."""
    lam, w = m.atoms, m.weights
    return float(np.dot(w, np.arctan((b - lam) / t) - np.arctan((a - lam) / t)))


def coaire_check(m: SpectralMeasure, U, t: float, tol: float = 1e-12) -> CoareaCheck:
    """Check ``mu(U) <= 2 int_U Im g(x + i t) dx`` for a union of disjoint open intervals."""
    if t <= 0:
        raise ValueError("t must be positive")
    U = [(float(a), float(b)) for a, b in U]
    for i, (a, b) in enumerate(sorted(U)):
        if a >= b:
            raise ValueError("intervals must be non-empty")
        if i and a < sorted(U)[i - 1][1]:
            raise ValueError("intervals must be disjoint")
    mass = sum(interval_mass(m, a, b, closed=False) for a, b in U)
    integral = 2.0 * sum(poisson_integral(m, a, b, t) for a, b in U)
    long_components = all(b - a >= t for a, b in U)
    return CoareaCheck(mass, integral, mass <= integral + tol, long_components)


# -- delocalization ------------------------------------------------------------

def delocalization_profile(psi, eps: float, norm_tol: float = 1e-9) -> float:
    """Largest ``rho`` for which ``psi`` is ``(rho, eps)``-delocalized: the
    squared mass on coordinates of modulus at most ``eps``."""
    psi = np.asarray(psi)
    mass = np.abs(psi) ** 2
    if abs(mass.sum() - 1.0) > norm_tol:
        raise ValueError("psi must be a unit vector")
    return float(mass[np.abs(psi) <= eps].sum())


def delocalization_profiles(E: EigenSystem, eps: float) -> np.ndarray:
    """Profiles of every eigenvector at once."""
    V = E.eigenvectors
    sq = V**2
    if np.any(np.abs(sq.sum(axis=0) - 1.0) > 1e-9):
        raise ValueError("eigenvectors must be unit vectors")
    return np.where(np.abs(V) <= eps, sq, 0.0).sum(axis=0)


def count_delocalized(E: EigenSystem, rho: float, eps: float, tol: float = 1e-12) -> int:
    """Eigenvectors whose profile at level ``eps`` reaches ``rho`` (up to rounding ``tol``)."""
    return int(np.count_nonzero(delocalization_profiles(E, eps) >= rho - tol))


def transform_grid_to_csv(z, g, path) -> None:
    z = np.ravel(z)
    g = np.ravel(g)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["re_z", "im_z", "re_g", "im_g"])
        for zz, gg in zip(z, g):
            w.writerow([repr(float(zz.real)), repr(float(zz.imag)),
                        repr(float(gg.real)), repr(float(gg.imag))])
