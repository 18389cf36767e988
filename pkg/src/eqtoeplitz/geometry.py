"""Exact geometry of projective space with the hyperplane bundle.

The ambient picture is concrete: the circle bundle is the unit sphere of
C^(d+1), the base is the sphere modulo a global phase, and level-k sections
are degree-k homogeneous monomials evaluated on unit vectors.  The volume
normalization is vol(M) = pi^d / d!, and the circle-fiber constant kappa_X
is calibrated once (see `eqtoeplitz.conventions`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, ndtri
from scipy.stats import qmc

__all__ = [
    "ProjectiveModel",
    "PointX",
    "multi_indices",
    "SectionBasis",
    "section_basis",
    "log_monomial_norm",
    "monomial_norm",
    "szego_kernel",
    "sample_sphere",
    "monomial_matrix",
    "kernel_pair_values",
]

#: Circle-fiber normalization: vol_X = KAPPA_X * vol_M.  Calibrated once by
#: the on-diagonal kernel scaling identity (k/pi)^d; see conventions module.
KAPPA_X = 1.0


@dataclass(frozen=True)
class ProjectiveModel:
    """Complex projective space of dimension d with its unit circle bundle.

    vol_M is pinned to pi^d/d!; vol_X = kappa_x * vol_M with kappa_x frozen
    by the one-time calibration.
    """

    d: int
    kappa_x: float = KAPPA_X

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be a positive integer")
        if self.kappa_x <= 0:
            raise ValueError("kappa_x must be positive")

    @property
    def n_coords(self) -> int:
        return self.d + 1

    @property
    def vol_M(self) -> float:
        return math.pi ** self.d / math.factorial(self.d)

    @property
    def vol_X(self) -> float:
        return self.kappa_x * self.vol_M

    def dim_sections(self, k: int) -> int:
        return math.comb(k + self.d, self.d)


class PointX:
    """A point of the circle bundle: a unit vector in C^(d+1).

    The circle action multiplies all coordinates by a unit complex number;
    the projection to the base forgets that phase.
    """

    __slots__ = ("coords",)

    def __init__(self, coords):
        c = np.asarray(coords, dtype=complex).reshape(-1)
        nrm = np.linalg.norm(c)
        if abs(nrm - 1.0) > 1e-12:
            raise ValueError(f"coords must be a unit vector, got norm {nrm!r}")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @staticmethod
    def normalized(coords) -> "PointX":
        c = np.asarray(coords, dtype=complex).reshape(-1)
        return PointX(c / np.linalg.norm(c))

    def rotate(self, t: complex) -> "PointX":
        """Circle action r_t, |t| = 1."""
        if abs(abs(t) - 1.0) > 1e-12:
            raise ValueError("t must lie on the unit circle")
        return PointX(self.coords * t)

    def base_distance(self, other: "PointX") -> float:
        """Chordal distance on the base (phase forgotten)."""
        return math.sqrt(max(0.0, 2.0 - 2.0 * abs(np.vdot(other.coords, self.coords))))

    def __repr__(self):
        return f"PointX({np.array2string(self.coords, precision=6)})"


def coords_of(x) -> np.ndarray:
    return x.coords if isinstance(x, PointX) else np.asarray(x, dtype=complex)


def multi_indices(k: int, n_vars: int) -> np.ndarray:
    """All multi-indices of degree k in n_vars variables, lex-descending in
    the first coordinate.  Shape (binom(k+n-1, n-1), n_vars).

    Built level by level over the variable count so the cost is linear in
    the output size."""
    if k < 0 or n_vars < 1:
        raise ValueError("need k >= 0 and n_vars >= 1")
    table = [np.array([[j]], dtype=np.int64) for j in range(k + 1)]

    def extend(tab, j):
        heads = np.repeat(np.arange(j, -1, -1, dtype=np.int64),
                          [tab[j - a].shape[0] for a in range(j, -1, -1)])
        tails = np.vstack([tab[j - a] for a in range(j, -1, -1)])
        return np.hstack([heads[:, None], tails])

    for _ in range(n_vars - 2):
        table = [extend(table, j) for j in range(k + 1)]
    return table[k] if n_vars == 1 else extend(table, k)


@dataclass(frozen=True)
class SectionBasis:
    """The monomial basis of level-k sections with L2(X) log-norms."""

    k: int
    indices: np.ndarray     # (N, d+1) int64
    log_norms: np.ndarray   # (N,)
    model: ProjectiveModel = field(repr=False)

    @property
    def dim(self) -> int:
        return self.indices.shape[0]


def log_monomial_norm(alpha: np.ndarray, model: ProjectiveModel) -> np.ndarray:
    """log N_k(alpha) with N_k(alpha) = vol_X * d! * alpha! / (d+k)!.

    Accepts a single multi-index or a stack of them; everything stays in
    log space so (d+k)! never overflows.
    """
    a = np.asarray(alpha, dtype=np.int64)
    single = a.ndim == 1
    a = np.atleast_2d(a)
    if a.shape[1] != model.n_coords:
        raise ValueError("multi-index length must be d+1")
    if np.any(a < 0):
        raise ValueError("multi-index entries must be nonnegative")
    k = a.sum(axis=1)
    d = model.d
    out = (
        math.log(model.vol_X)
        + gammaln(d + 1)
        + gammaln(a + 1).sum(axis=1)
        - gammaln(d + k + 1)
    )
    return out[0] if single else out


def monomial_norm(alpha, model: ProjectiveModel) -> float:
    return float(np.exp(log_monomial_norm(alpha, model)))


def section_basis(k: int, model: ProjectiveModel) -> SectionBasis:
    if k < 0:
        raise ValueError("level k must be nonnegative")
    idx = multi_indices(k, model.n_coords)
    return SectionBasis(k=k, indices=idx, log_norms=log_monomial_norm(idx, model), model=model)


def szego_kernel(x, y, k: int, model: ProjectiveModel) -> complex:
    """Full level-k kernel: binom(k+d, d)/vol_X * <x, y>^k.

    <x, y> = sum_j x_j * conj(y_j).  Stable for large k via log magnitude.
    """
    xv, yv = coords_of(x), coords_of(y)
    ip = complex(np.sum(xv * np.conj(yv)))
    c = math.comb(k + model.d, model.d) / model.vol_X
    if ip == 0:
        return 0.0 if k >= 1 else complex(c)
    mag = math.exp(k * math.log(abs(ip)))
    return c * mag * complex(math.cos(k * np.angle(ip)), math.sin(k * np.angle(ip)))


def sample_sphere(n: int, seed: int, model: ProjectiveModel) -> np.ndarray:
    """Deterministic quasi-random unit vectors in C^(d+1), rows of shape (n, d+1).

    Scrambled Sobol points mapped through the Gaussian-normalize
    construction; identical (n, seed, d) always yields the same array.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    dim = 2 * model.n_coords
    eng = qmc.Sobol(d=dim, scramble=True, seed=seed)
    m = max(1, math.ceil(math.log2(n)))
    u = eng.random_base2(m)
    if u.shape[0] < n:
        u = np.vstack([u, eng.random(n - u.shape[0])])
    u = np.clip(u[:n], 1e-15, 1.0 - 1e-15)
    gau = ndtri(u)
    z = gau[:, ::2] + 1j * gau[:, 1::2]
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    return z


#: Stand-in for log(0) that keeps 0 * log == 0 exact in matrix products while
#: exp(k * _LOG_ZERO + anything bounded) underflows to exactly 0.
_LOG_ZERO = -1e30


def _log_abs(points: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        la = np.log(np.abs(points))
    return np.where(np.isfinite(la), la, _LOG_ZERO)


def monomial_matrix(points: np.ndarray, indices: np.ndarray,
                    log_norms: np.ndarray | None = None) -> np.ndarray:
    """Evaluate z^alpha at each point: (n_points, n_indices) complex.

    With log_norms given, returns the orthonormalized values
    z^alpha / sqrt(N(alpha)).  Zero coordinates are exact: 0^0 = 1 and
    0^positive = 0.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=complex))
    A = np.asarray(indices, dtype=np.int64)
    shift = 0.0 if log_norms is None else 0.5 * np.asarray(log_norms)
    logmag = _log_abs(pts) @ A.T
    phase = np.angle(pts) @ A.T
    return np.exp(logmag - shift) * np.exp(1j * phase)


def kernel_pair_values(xs: np.ndarray, ys: np.ndarray, indices: np.ndarray,
                       log_norms: np.ndarray) -> np.ndarray:
    """sum_alpha z^alpha(x_i) conj(z^alpha(y_i)) / N(alpha) for paired rows.

    Stable summation: per-row terms are rescaled by their largest log
    magnitude before exponentiation.
    """
    xs = np.atleast_2d(np.asarray(xs, dtype=complex))
    ys = np.atleast_2d(np.asarray(ys, dtype=complex))
    A = np.asarray(indices, dtype=np.int64)
    if A.shape[0] == 0:
        return np.zeros(xs.shape[0], dtype=complex)
    logmag = (_log_abs(xs) + _log_abs(ys)) @ A.T - np.asarray(log_norms)[None, :]
    phase = (np.angle(xs) - np.angle(ys)) @ A.T

    peak = np.max(logmag, axis=1, keepdims=True)
    peak = np.minimum(np.maximum(peak, -700.0), 700.0)
    vals = np.exp(logmag - peak) * np.exp(1j * phase)
    return np.exp(peak[:, 0]) * vals.sum(axis=1)
