"""Torus actions on projective space, isotype decompositions, and the
commuting diagonal symmetry with its bundle lift.

Sign conventions (weight sign, moment-map sign, lift phase sign) follow the
pinned calibration: monomials pulled back by the action transform with
character t^(-W alpha); the moment map is -(W u); the lift acts on level-k
monomials by e^{i k theta_A} e^{-i <phi, alpha>}.  The self-test suite pins
each of these against independent identities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .geometry import ProjectiveModel, SectionBasis, coords_of, kernel_pair_values, szego_kernel

__all__ = [
    "TorusAction",
    "DiagonalSymmetry",
    "IsotypeBasis",
    "weight_of",
    "isotype_basis",
    "moment_map",
    "moment_polytope_contains",
    "vanishing_level",
    "occurring_weights",
    "gamma_phase",
    "equivariant_kernel",
    "equivariant_kernel_pairs",
    "equivariant_kernel_fourier",
]


@dataclass(frozen=True)
class TorusAction:
    """Linear T^g action on C^(d+1): column j of W is the weight of z_j."""

    W: np.ndarray

    def __post_init__(self):
        W = np.asarray(self.W, dtype=np.int64)
        if W.ndim != 2:
            raise ValueError("W must be a g x (d+1) integer matrix")
        W.setflags(write=False)
        object.__setattr__(self, "W", W)

    @property
    def g(self) -> int:
        return self.W.shape[0]

    @property
    def n_coords(self) -> int:
        return self.W.shape[1]

    def act(self, theta: np.ndarray, points: np.ndarray) -> np.ndarray:
        """mu_t with t = e^{i theta}: multiplies z_j by e^{i <theta, W_j>}."""
        theta = np.asarray(theta, dtype=float).reshape(self.g)
        pts = np.asarray(points, dtype=complex)
        fac = np.exp(1j * (theta @ self.W))
        return pts * fac

    def fundamental_fields(self, points: np.ndarray) -> np.ndarray:
        """Generator vector fields at sphere lifts: (..., g, d+1)."""
        pts = np.atleast_2d(np.asarray(points, dtype=complex))
        return 1j * self.W[None, :, :] * pts[:, None, :]

    def orbit_gram(self, points: np.ndarray) -> np.ndarray:
        """Gram matrix of the generator fields in the base metric, (..., g, g).

        At moment-map zeros the fields are horizontal, so this is
        W diag(u) W^T with u the squared coordinate moduli.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=complex))
        u = np.abs(pts) ** 2
        G = np.einsum("ij,nj,lj->nil", self.W.astype(float), u, self.W.astype(float))
        # remove the vertical (circle-fiber) component: subtract outer product
        # of the projections <xi_i, i x> = -Phi_i
        phi = -(u @ self.W.T.astype(float))
        G -= phi[:, :, None] * phi[:, None, :]
        return G


def weight_of(alpha: np.ndarray, action: TorusAction) -> np.ndarray:
    """Character label of the monomial z^alpha under pull-back: -W alpha."""
    a = np.asarray(alpha, dtype=np.int64)
    single = a.ndim == 1
    out = -np.atleast_2d(a) @ action.W.T
    return out[0] if single else out


def moment_map(x, action: TorusAction) -> np.ndarray:
    """Phi_i = -sum_j W_ij |x_j|^2 on unit vectors; batched over rows."""
    pts = np.asarray(coords_of(x), dtype=complex)
    single = pts.ndim == 1
    u = np.abs(np.atleast_2d(pts)) ** 2
    out = -(u @ action.W.T.astype(float))
    return out[0] if single else out


def moment_polytope_contains(action: TorusAction, target: np.ndarray,
                             scale: float = 1.0, tol: float = 1e-9) -> bool:
    """Is target inside scale * Phi(M)?  Phi(M) is the convex hull of the
    columns of -W; decided by an exact-feasibility LP."""
    if action.g == 0:
        return True
    verts = -action.W.T.astype(float) * scale      # (d+1, g)
    n = verts.shape[0]
    A_eq = np.vstack([verts.T, np.ones((1, n))])
    b_eq = np.concatenate([np.asarray(target, dtype=float), [1.0]])
    res = linprog(np.zeros(n), A_eq=A_eq, b_eq=b_eq,
                  bounds=[(0, None)] * n, method="highs")
    return bool(res.status == 0 and res.success)


def vanishing_level(action: TorusAction, varpi) -> int | None:
    """Smallest k0 with varpi outside k*Phi(M) for every k >= k0.

    The largest admissible k solves the LP  max sum(nu) s.t. -W nu = varpi,
    nu >= 0  (substituting nu = k * barycentric weights).  Returns None when
    the LP is unbounded, i.e. 0 lies in Phi(M) and the support never
    empties; returns 0 when varpi is never admissible at all.
    """
    varpi = np.asarray(varpi, dtype=float).reshape(action.g)
    n = action.n_coords
    res = linprog(-np.ones(n), A_eq=-action.W.astype(float), b_eq=varpi,
                  bounds=[(0, None)] * n, method="highs")
    if res.status == 3:   # unbounded: 0 in Phi(M)
        return None
    if res.status == 2 or not res.success:
        return 0
    return int(math.floor(-res.fun + 1e-9)) + 1


@dataclass(frozen=True)
class DiagonalSymmetry:
    """Gamma = diag(e^{i phi_j}) with an extra global lift phase theta_A.

    Always unitary and commuting with any diagonal torus action.  The
    private phase_sign exists only for the negative-control self-test that
    demonstrates the pinned lift convention.
    """

    phi: np.ndarray
    theta_A: float = 0.0
    phase_sign: int = field(default=-1, repr=False)

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=float).reshape(-1)
        phi.setflags(write=False)
        object.__setattr__(self, "phi", phi)
        if self.phase_sign not in (-1, 1):
            raise ValueError("phase_sign must be +-1")

    @property
    def n_coords(self) -> int:
        return self.phi.shape[0]

    def gamma_M(self, points: np.ndarray) -> np.ndarray:
        """The symmetry on ambient coordinates (projectively, the map on M)."""
        return np.asarray(points, dtype=complex) * np.exp(1j * self.phi)

    def gamma_X(self, points: np.ndarray) -> np.ndarray:
        """Lifted contactomorphism on the circle bundle: e^{-i theta_A} Gamma."""
        return self.gamma_M(points) * np.exp(-1j * self.theta_A)

    def gamma_X_inv(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=complex) * np.exp(1j * (self.theta_A - self.phi))


def gamma_phase(alpha: np.ndarray, sym: DiagonalSymmetry) -> np.ndarray:
    """Eigenvalue of the induced level-k map on the monomial z^alpha:
    e^{i k theta_A} e^{-i <phi, alpha>} (k = |alpha|)."""
    a = np.asarray(alpha, dtype=np.int64)
    single = a.ndim == 1
    a2 = np.atleast_2d(a)
    k = a2.sum(axis=1)
    out = np.exp(1j * (k * sym.theta_A + sym.phase_sign * (a2 @ sym.phi)))
    return out[0] if single else out


@dataclass(frozen=True)
class IsotypeBasis:
    """Sub-basis of a fixed character label inside a level-k basis."""

    k: int
    varpi: tuple
    indices: np.ndarray
    log_norms: np.ndarray
    parent: SectionBasis = field(repr=False)

    @property
    def dim(self) -> int:
        return self.indices.shape[0]


def isotype_basis(k: int, varpi, action: TorusAction, basis: SectionBasis) -> IsotypeBasis:
    """Filter the level-k monomials with weight_of(alpha) == varpi.

    Empty results are valid (that is the content of the vanishing statement).
    """
    if basis.k != k:
        raise ValueError("basis level mismatch")
    varpi_vec = np.asarray(varpi, dtype=np.int64).reshape(action.g)
    w = weight_of(basis.indices, action)
    mask = np.all(w == varpi_vec[None, :], axis=1) if action.g else np.ones(basis.dim, bool)
    return IsotypeBasis(k=k, varpi=tuple(int(v) for v in varpi_vec),
                        indices=basis.indices[mask], log_norms=basis.log_norms[mask],
                        parent=basis)


def occurring_weights(k: int, action: TorusAction, basis: SectionBasis) -> np.ndarray:
    """Distinct character labels present at level k, lexicographically sorted."""
    w = weight_of(basis.indices, action)
    return np.unique(w, axis=0)


def equivariant_kernel(x, y, iso: IsotypeBasis) -> complex:
    """Pi_{varpi,k}(x, y) by direct summation over the isotype basis."""
    xv = np.atleast_2d(coords_of(x))
    yv = np.atleast_2d(coords_of(y))
    out = kernel_pair_values(xv, yv, iso.indices, iso.log_norms)
    return complex(out[0])


def equivariant_kernel_pairs(xs, ys, iso: IsotypeBasis) -> np.ndarray:
    return kernel_pair_values(xs, ys, iso.indices, iso.log_norms)


def equivariant_kernel_fourier(x, y, k: int, varpi, action: TorusAction,
                               model: ProjectiveModel, n_nodes: int | None = None) -> complex:
    """Character-average cross-check: (1/2pi)^g int chi_varpi(t) Pi_k(t.x, y) dt.

    Trapezoid rule per circle factor; exact once the node count exceeds the
    trigonometric bandwidth k * max|W| + |varpi|.
    """
    varpi_vec = np.asarray(varpi, dtype=np.int64).reshape(action.g)
    if action.g == 0:
        return szego_kernel(x, y, k, model)
    band = int(k * np.abs(action.W).max() + np.abs(varpi_vec).sum())
    n = n_nodes or (2 * band + 5)
    nodes = 2.0 * np.pi * np.arange(n) / n
    grids = np.meshgrid(*([nodes] * action.g), indexing="ij")
    thetas = np.stack([gg.ravel() for gg in grids], axis=1)
    xv, yv = coords_of(x), coords_of(y)
    total = 0.0 + 0.0j
    for th in thetas:
        chi = np.exp(1j * float(varpi_vec @ th))
        total += chi * szego_kernel(action.act(th, xv), yv, k, model)
    return complex(total / thetas.shape[0])
