"""Zero level set of the moment map, the reduced space, and every fixed-point
invariant feeding the leading trace term.

Geometry is Monte-Carlo over the ambient sphere with a coarea correction;
fixed loci of the descended symmetry are found algebraically on coordinate
support patterns (phase congruences over the weight lattice) with a numeric
orbit-distance sweep available as a completeness oracle.

Conventions pinned here and validated by the self-test suite:

- the effective volume of an orbit is the Riemannian volume of its image,
  (2pi)^g sqrt(det Gram) divided by the order of the finite stabilizer;
- "free" means free modulo the constant finite stabilizer along the zero
  locus (the kernel of the projective action); a non-constant stabilizer is
  a hypothesis violation;
- fixed-point data (g_m, h_l, chi) are stored together with the stabilizer
  coset so downstream predictions can average over branches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog
from scipy.special import gammaln

from ._intlinalg import homogeneous_torsion_angles, solve_phase_congruence, smith_normal_form
from .geometry import ProjectiveModel, coords_of, sample_sphere
from .observables import Observable
from .symmetry import DiagonalSymmetry, TorusAction, moment_map, moment_polytope_contains

__all__ = [
    "ReductionHypothesisError",
    "DegenerateSymmetryError",
    "ZeroLocusSample",
    "ReductionDiagnostics",
    "FixedComponentReport",
    "zero_locus_sample",
    "check_regular_and_free",
    "effective_volume",
    "reduced_volume",
    "reduced_space_integral",
    "find_fixed_components",
    "component_invariants",
    "f_bar_integral",
]


class ReductionHypothesisError(RuntimeError):
    """Raised when 0 fails to be a regular value or the action is not free
    modulo a constant finite stabilizer; carries a witness point."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class DegenerateSymmetryError(RuntimeError):
    """The normal return map has an eigenvalue 1: the determinant factor
    vanishes and the leading-term formula does not apply."""


# ---------------------------------------------------------------------------
# stabilizer structure on support patterns

def _difference_rows(W: np.ndarray, support) -> np.ndarray:
    S = list(support)
    j0 = S[0]
    return np.array([W[:, j] - W[:, j0] for j in S[1:]], dtype=np.int64).reshape(len(S) - 1, W.shape[0])


def stabilizer_info(action: TorusAction, support) -> dict:
    """Structure of {t in T^g : t fixes the points of the open support-S
    stratum}: finite order, representative angles, continuous rank."""
    g = action.g
    D = _difference_rows(action.W, support)
    if g == 0:
        return {"order": 1, "angles": np.zeros((1, 0)), "free_rank": 0}
    if D.shape[0] == 0:
        return {"order": None, "angles": None, "free_rank": g}
    _, S, _ = smith_normal_form(D)
    diag = [int(S[i][i]) for i in range(min(D.shape[0], g))]
    rank = sum(1 for d in diag if d != 0)
    if rank < g:
        return {"order": None, "angles": None, "free_rank": g - rank}
    angles = homogeneous_torsion_angles(D)
    return {"order": angles.shape[0], "angles": angles, "free_rank": 0}


def point_support(x, tol: float = 1e-8) -> tuple:
    c = np.abs(coords_of(x))
    return tuple(int(j) for j in np.nonzero(c > tol)[0])


# ---------------------------------------------------------------------------
# zero-locus sampling

def _ball_volume(g: int, eps: float) -> float:
    return math.pi ** (g / 2.0) * eps ** g / math.exp(gammaln(g / 2.0 + 1.0))


def _newton_refine(points: np.ndarray, action: TorusAction, tol: float = 1e-12,
                   max_iter: int = 60) -> np.ndarray:
    """Project sphere points onto the moment-map zero set by damped Newton
    steps along the gradient directions, renormalizing each step."""
    if action.g == 0:
        return points
    pts = points.copy()
    W = action.W.astype(float)
    for _ in range(max_iter):
        u = np.abs(pts) ** 2
        phi = -(u @ W.T)
        bad = np.linalg.norm(phi, axis=1) > tol
        if not np.any(bad):
            break
        sub = pts[bad]
        usub = np.abs(sub) ** 2
        G = np.einsum("ij,nj,lj->nil", W, usub, W)
        phis = -(usub @ W.T)
        G = G - phis[:, :, None] * phis[:, None, :]
        try:
            c = np.linalg.solve(G, (phis / 2.0)[..., None])[..., 0]
        except np.linalg.LinAlgError:
            raise ReductionHypothesisError("singular orbit Gram during refinement",
                                           witness=sub[0])
        step = np.einsum("ni,ij,nj->nj", c, W, sub)
        new = sub + step
        new /= np.linalg.norm(new, axis=1, keepdims=True)
        pts[bad] = new
    return pts


@dataclass(frozen=True)
class ZeroLocusSample:
    """Refined points on the zero locus with coarea-corrected weights.

    sum(weights * h(points)) estimates the integral of h over the locus with
    respect to the induced Riemannian volume of the base.
    """

    points: np.ndarray
    weights: np.ndarray
    n_total: int
    band: float
    support: tuple | None = None

    def integrate(self, h_values) -> tuple[float, float]:
        h = np.asarray(h_values, dtype=float)
        est = float(np.sum(self.weights * h))
        contrib = self.weights * h * self.n_total
        s2 = float(np.sum(contrib ** 2))
        var = max(s2 / self.n_total - est ** 2, 0.0) / self.n_total
        return est, math.sqrt(var)


def zero_locus_sample(action: TorusAction, model: ProjectiveModel, n_samples: int,
                      seed: int, band: float = 0.05, support=None) -> ZeroLocusSample:
    """Sample the moment-map zero set inside the (sub)stratum of the given
    coordinate support (default: all coordinates).

    The sample count is rounded up to a power of two: Sobol blocks are
    balanced only at those sizes, which matters for the thin-band indicator.
    """
    if support is None:
        support = tuple(range(model.n_coords))
    support = tuple(sorted(support))
    sub_d = len(support) - 1
    if sub_d < 1:
        raise ValueError("support must contain at least two coordinates to sample")
    n_samples = 2 ** max(1, math.ceil(math.log2(n_samples)))
    sub_model = ProjectiveModel(sub_d, kappa_x=model.kappa_x)
    sub_action = TorusAction(action.W[:, list(support)])
    pts = sample_sphere(n_samples, seed, sub_model)
    phi = moment_map(pts, sub_action)
    in_band = np.linalg.norm(np.atleast_2d(phi.reshape(n_samples, -1)), axis=1) < band
    kept = pts[in_band]
    if kept.shape[0] == 0:
        return ZeroLocusSample(points=np.zeros((0, model.n_coords), complex),
                               weights=np.zeros(0), n_total=n_samples, band=band,
                               support=support)
    refined = _newton_refine(kept, sub_action)
    resid = np.linalg.norm(np.atleast_2d(moment_map(refined, sub_action).reshape(len(refined), -1)), axis=1)
    ok = resid <= 1e-9
    refined = refined[ok]
    G = sub_action.orbit_gram(refined)
    detG = np.linalg.det(G) if action.g else np.ones(refined.shape[0])
    jac = (2.0 ** action.g) * np.sqrt(np.maximum(detG, 0.0))
    w = sub_model.vol_M * jac / (n_samples * _ball_volume(action.g, band))
    emb = np.zeros((refined.shape[0], model.n_coords), complex)
    emb[:, list(support)] = refined
    return ZeroLocusSample(points=emb, weights=w, n_total=n_samples, band=band,
                           support=support)


# ---------------------------------------------------------------------------
# effective volume and reduced integrals

def effective_volume(x, action: TorusAction, model: ProjectiveModel,
                     stab_order: int | None = None) -> float:
    """Riemannian volume of the orbit through x: (2pi)^g sqrt(det Gram)
    divided by the finite stabilizer order.  Returns 1 for a trivial group."""
    if action.g == 0:
        return 1.0
    xv = coords_of(x)
    if stab_order is None:
        info = stabilizer_info(action, point_support(xv))
        if info["free_rank"] > 0:
            raise ReductionHypothesisError("positive-dimensional stabilizer", witness=xv)
        stab_order = info["order"]
    G = action.orbit_gram(xv)[0]
    det = float(np.linalg.det(G))
    if det <= 1e-16:
        raise ReductionHypothesisError("degenerate orbit Gram (non-locally-free point)",
                                       witness=xv)
    return (2.0 * math.pi) ** action.g * math.sqrt(det) / stab_order


def reduced_space_integral(action: TorusAction, model: ProjectiveModel,
                           n_samples: int, seed: int, h=None, support=None,
                           band: float = 0.05) -> tuple[float, float]:
    """Monte-Carlo of int_{reduced space of the support stratum} h-average,
    i.e. the zero-locus integral of h / V_eff.  h maps point rows to floats
    (default 1)."""
    sample = zero_locus_sample(action, model, n_samples, seed, band=band, support=support)
    if sample.points.shape[0] == 0:
        raise ReductionHypothesisError("empty zero locus in the requested stratum")
    supp = sample.support
    info = stabilizer_info(action, supp)
    if info["free_rank"] > 0:
        raise ReductionHypothesisError("positive-dimensional stabilizer on stratum",
                                       witness=sample.points[0])
    order = info["order"]
    if action.g:
        G = TorusAction(action.W[:, list(supp)]).orbit_gram(sample.points[:, list(supp)])
        det = np.linalg.det(G)
        if np.any(det <= 1e-16):
            raise ReductionHypothesisError("degenerate orbit Gram on zero locus",
                                           witness=sample.points[int(np.argmin(det))])
        veff = (2.0 * math.pi) ** action.g * np.sqrt(det) / order
    else:
        veff = np.ones(sample.points.shape[0])
    hv = np.ones(sample.points.shape[0]) if h is None else np.asarray(h(sample.points), float)
    return sample.integrate(hv / veff)


def reduced_volume(action: TorusAction, model: ProjectiveModel, n_samples: int,
                   seed: int, band: float = 0.05) -> tuple[float, float]:
    """vol(M0) = int over the zero locus of 1/V_eff, with standard error."""
    return reduced_space_integral(action, model, n_samples, seed, h=None, band=band)


# ---------------------------------------------------------------------------
# hypothesis diagnostics

@dataclass(frozen=True)
class ReductionDiagnostics:
    empty_locus: bool
    regular_value: bool
    min_singular_dphi: float
    free_action: bool
    kernel_order: int | None
    stabilizer_order: int | None
    stabilizer_constant: bool
    orbit_injectivity_proxy: float
    vol_M0: float | None
    vol_M0_stderr: float | None
    v_eff_min: float | None
    v_eff_mean: float | None
    v_eff_max: float | None
    n_samples: int


def _generic_support(action: TorusAction, model: ProjectiveModel, tol: float = 1e-9) -> tuple:
    """Coordinates that can be nonzero somewhere on the zero locus: for each
    j maximize u_j over the feasible polytope {u >= 0, sum u = 1, W u = 0}."""
    n = model.n_coords
    members = []
    for j in range(n):
        c = np.zeros(n)
        c[j] = -1.0
        A_eq = np.vstack([np.ones((1, n)), action.W.astype(float)]) if action.g else np.ones((1, n))
        b_eq = np.concatenate([[1.0], np.zeros(action.g)])
        res = linprog(c, A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * n, method="highs")
        if res.success and -res.fun > tol:
            members.append(j)
    return tuple(members)


def _d_phi_fd(x: np.ndarray, action: TorusAction, step: float = 1e-6) -> np.ndarray:
    """Finite-difference differential of the moment map in an orthonormal
    real frame of the base tangent space at x; shape (g, 2d)."""
    basis_c = null_space(np.conj(x)[None, :])      # (d+1, d) complex columns
    dirs = []
    for i in range(basis_c.shape[1]):
        dirs.append(basis_c[:, i])
        dirs.append(1j * basis_c[:, i])
    cols = []
    for v in dirs:
        xp = x + step * v
        xm = x - step * v
        xp /= np.linalg.norm(xp)
        xm /= np.linalg.norm(xm)
        cols.append((moment_map(xp, action) - moment_map(xm, action)) / (2 * step))
    return np.array(cols).T.reshape(action.g, -1)


def check_regular_and_free(action: TorusAction, model: ProjectiveModel,
                           n_samples: int = 200_000, seed: int = 0,
                           band: float = 0.05, n_probe: int = 64) -> ReductionDiagnostics:
    """Estimate the reduction hypotheses: 0 a regular value, action free
    modulo a constant finite stabilizer; also report vol(M0) and V_eff stats."""
    if action.g == 0:
        vol, err = reduced_volume(action, model, n_samples, seed, band=band)
        return ReductionDiagnostics(
            empty_locus=False, regular_value=True, min_singular_dphi=float("inf"),
            free_action=True, kernel_order=1, stabilizer_order=1, stabilizer_constant=True,
            orbit_injectivity_proxy=float("inf"), vol_M0=vol, vol_M0_stderr=err,
            v_eff_min=1.0, v_eff_mean=1.0, v_eff_max=1.0, n_samples=n_samples)

    if not moment_polytope_contains(action, np.zeros(action.g)):
        return ReductionDiagnostics(
            empty_locus=True, regular_value=False, min_singular_dphi=0.0,
            free_action=False, kernel_order=None, stabilizer_order=None,
            stabilizer_constant=True, orbit_injectivity_proxy=0.0,
            vol_M0=None, vol_M0_stderr=None, v_eff_min=None, v_eff_mean=None,
            v_eff_max=None, n_samples=0)

    supp = _generic_support(action, model)
    if len(supp) < 2:
        raise ReductionHypothesisError("zero locus degenerate to coordinate points")
    info = stabilizer_info(action, supp)
    if info["free_rank"] > 0:
        raise ReductionHypothesisError(
            "torus does not act locally freely on the zero locus (continuous stabilizer)")
    kernel = stabilizer_info(action, tuple(range(model.n_coords)))
    sample = zero_locus_sample(action, model, n_samples, seed, band=band, support=supp)
    if sample.points.shape[0] == 0:
        # polytope feasible but measure-zero band: boundary case
        return ReductionDiagnostics(
            empty_locus=False, regular_value=False, min_singular_dphi=0.0,
            free_action=False, kernel_order=None, stabilizer_order=info["order"],
            stabilizer_constant=True, orbit_injectivity_proxy=0.0,
            vol_M0=None, vol_M0_stderr=None, v_eff_min=None, v_eff_mean=None,
            v_eff_max=None, n_samples=n_samples)

    pts = sample.points
    probe_idx = np.linspace(0, pts.shape[0] - 1, min(n_probe, pts.shape[0])).astype(int)
    min_sv = float("inf")
    stab_ok = True
    inj = float("inf")
    veffs = []
    for i in probe_idx:
        x = pts[i]
        sv = np.linalg.svd(_d_phi_fd(x, action), compute_uv=False)
        min_sv = min(min_sv, float(sv[-1]))
        pinfo = stabilizer_info(action, point_support(x))
        if pinfo["free_rank"] > 0:
            raise ReductionHypothesisError("continuous stabilizer on zero locus", witness=x)
        if pinfo["order"] != info["order"]:
            stab_ok = False
        veffs.append(effective_volume(x, action, model, stab_order=pinfo["order"]))
        inj = min(inj, _injectivity_proxy(x, action, pinfo["angles"]))
    vol, err = reduced_space_integral(action, model, n_samples, seed, support=supp, band=band)
    regular = min_sv > 1e-6
    free = stab_ok and info["free_rank"] == 0
    return ReductionDiagnostics(
        empty_locus=False, regular_value=regular, min_singular_dphi=min_sv,
        free_action=free, kernel_order=kernel["order"], stabilizer_order=info["order"],
        stabilizer_constant=stab_ok, orbit_injectivity_proxy=inj,
        vol_M0=vol, vol_M0_stderr=err,
        v_eff_min=float(np.min(veffs)), v_eff_mean=float(np.mean(veffs)),
        v_eff_max=float(np.max(veffs)), n_samples=n_samples)


def _injectivity_proxy(x: np.ndarray, action: TorusAction, stab_angles: np.ndarray,
                       n_grid: int = 48) -> float:
    """min over torus grid points away from the stabilizer of
    dist_M(mu_t x, x) / dist_T(t, Stab); coarse lower-bound proxy."""
    if action.g == 0:
        return float("inf")
    grid = np.linspace(0, 2 * math.pi, n_grid, endpoint=False)
    mesh = np.meshgrid(*([grid] * action.g), indexing="ij")
    thetas = np.stack([mm.ravel() for mm in mesh], axis=1)
    best = float("inf")
    for th in thetas:
        dt = _torus_distance(th, stab_angles)
        if dt < 0.3:
            continue
        moved = action.act(th, x)
        dist = math.sqrt(max(0.0, 2.0 - 2.0 * abs(np.vdot(moved, x))))
        best = min(best, dist / dt)
    return best


def _torus_distance(theta: np.ndarray, angles: np.ndarray) -> float:
    diff = theta[None, :] - angles
    diff = np.angle(np.exp(1j * diff))
    return float(np.min(np.linalg.norm(diff, axis=1)))


# ---------------------------------------------------------------------------
# fixed components of the descended symmetry

@dataclass(frozen=True)
class FixedComponentReport:
    """Per-component invariants feeding the leading trace term."""

    support: tuple
    d_l: int
    codim: int
    t_angles: np.ndarray          # one solution g_m of gamma(m) = mu_t(m)
    stab_order: int
    stab_angles: np.ndarray       # (order, g): the g_m ambiguity coset is t * stab
    u_star: np.ndarray            # interior barycentric representative (full length)
    representative: np.ndarray    # unit vector over the component
    suspected_nongeneric: bool = False
    h_l: complex | None = None
    c_l: complex | None = None
    c_l_exact: complex | None = None
    normal_eigenvalues: np.ndarray | None = None
    f_bar_integral: complex | None = None
    f_bar_stderr: float | None = None
    frame_diag_error: float | None = None

    def chi(self, varpi) -> complex:
        v = np.asarray(varpi, dtype=float).reshape(-1)
        return complex(np.exp(1j * float(v @ self.t_angles)))

    def branch_phases(self, varpi, k: int) -> np.ndarray:
        """Phase multipliers over the stabilizer coset: replacing t by t*s
        multiplies h_l^k chi_varpi by e^{i(k <W_j0, th_s> + <varpi, th_s>)}."""
        v = np.asarray(varpi, dtype=float).reshape(-1)
        return np.exp(1j * (k * (self.stab_angles @ self._w_j0) + self.stab_angles @ v))

    # populated by find_fixed_components
    _w_j0: np.ndarray = field(default=None, repr=False)


def _support_feasibility(action: TorusAction, support, tol: float = 1e-9):
    """LP: maximize the interior margin of {u >= eps on S, sum u = 1, W u = 0}.
    Returns (u_star or None, margin)."""
    S = list(support)
    n = len(S)
    g = action.g
    WS = action.W[:, S].astype(float)
    # variables: u (n), eps
    c = np.zeros(n + 1)
    c[-1] = -1.0
    A_eq = np.zeros((1 + g, n + 1))
    A_eq[0, :n] = 1.0
    if g:
        A_eq[1:, :n] = WS
    b_eq = np.concatenate([[1.0], np.zeros(g)])
    A_ub = np.hstack([-np.eye(n), np.ones((n, 1))])
    b_ub = np.zeros(n)
    res = linprog(c, A_eq=A_eq, b_eq=b_eq, A_ub=A_ub, b_ub=b_ub,
                  bounds=[(0, None)] * n + [(0, 1)], method="highs")
    if not res.success or -res.fun <= tol:
        return None, 0.0
    return res.x[:n], float(-res.fun)


def find_fixed_components(action: TorusAction, sym: DiagonalSymmetry,
                          model: ProjectiveModel, tol_phase: float = 1e-8,
                          resonance_band: float = 5e-2) -> list[FixedComponentReport]:
    """Enumerate the fixed components of the descended symmetry.

    Support patterns S are kept when (a) the zero-locus polytope meets the
    open stratum and (b) the phase congruence e^{i phi_j} = c t^{W_j} (j in S)
    is solvable over the torus; patterns contained in a solvable pattern are
    absorbed into it.  Near-resonant but unsolvable patterns and overlapping
    maximal patterns are flagged rather than merged.
    """
    n = model.n_coords
    g = action.g
    candidates = []
    near_resonant = []
    for mask in range(1, 1 << n):
        S = tuple(j for j in range(n) if mask & (1 << j))
        u_star, margin = _support_feasibility(action, S)
        if u_star is None:
            continue
        D = _difference_rows(action.W, S)
        j0 = S[0]
        delta = np.array([sym.phi[j] - sym.phi[j0] for j in S[1:]])
        theta, info = solve_phase_congruence(D, delta, tol=tol_phase)
        if info["free_rank"] > 0:
            raise ReductionHypothesisError(
                "continuous stabilizer on a zero-locus stratum", witness=S)
        if theta is None:
            if info["residual"] < resonance_band:
                near_resonant.append(S)
            continue
        stab = stabilizer_info(action, S)
        full_u = np.zeros(n)
        full_u[list(S)] = u_star
        rep = np.zeros(n, complex)
        rep[list(S)] = np.sqrt(u_star)
        candidates.append(dict(
            support=S, t_angles=theta, stab_order=stab["order"],
            stab_angles=stab["angles"], u_star=full_u, representative=rep,
            d_l=len(S) - 1 - g))

    # absorb patterns contained in a larger solvable pattern
    supports = [set(c["support"]) for c in candidates]
    keep = []
    for i, c in enumerate(candidates):
        if any(i != j and supports[i] < supports[j] for j in range(len(candidates))):
            continue
        keep.append(c)

    # overlapping maximal patterns: closures may intersect; report, don't merge
    flagged = set()
    for i in range(len(keep)):
        for j in range(i + 1, len(keep)):
            common = tuple(sorted(set(keep[i]["support"]) & set(keep[j]["support"])))
            if not common:
                continue
            u_c, _ = _support_feasibility(action, common, tol=-1.0)
            if u_c is not None:
                flagged.update({i, j})
    if near_resonant:
        flagged.update(range(len(keep)))

    out = []
    for i, c in enumerate(keep):
        out.append(FixedComponentReport(
            support=c["support"], d_l=c["d_l"], codim=model.d - g - c["d_l"],
            t_angles=c["t_angles"], stab_order=c["stab_order"],
            stab_angles=c["stab_angles"], u_star=c["u_star"],
            representative=c["representative"],
            suspected_nongeneric=(i in flagged),
            _w_j0=action.W[:, c["support"][0]].astype(float)))
    return out


# ---------------------------------------------------------------------------
# component invariants

def _affine_chart(zeta: np.ndarray, base: np.ndarray) -> np.ndarray:
    ip = np.sum(zeta * np.conj(base))
    if abs(ip) < 1e-12:
        raise ValueError("point left the affine chart")
    return zeta / ip - base


def _horizontal_frames(rep: np.ndarray, support, action: TorusAction):
    """Orthonormal frames of the horizontal space at a component lift,
    split into (tangent-to-component, normal) blocks."""
    n = rep.shape[0]
    S = list(support)
    comp = [j for j in range(n) if j not in S]
    normal = np.zeros((n, len(comp)), complex)
    for i, b in enumerate(comp):
        normal[b, i] = 1.0
    rows = [np.conj(rep[S])]
    for i in range(action.g):
        rows.append(np.conj(action.W[i, S] * rep[S]))
    sub = null_space(np.array(rows)) if S else np.zeros((0, 0))
    tangent = np.zeros((n, sub.shape[1]), complex)
    tangent[S, :] = sub
    return tangent, normal


def _descended_differential(rep, support, t_angles, sym, action, step: float):
    """Finite-difference matrix of the descended symmetry differential in the
    (tangent, normal) horizontal frame at the representative."""
    tangent, normal = _horizontal_frames(rep, support, action)
    frame = np.hstack([tangent, normal])
    ncols = frame.shape[1]
    base = rep / np.linalg.norm(rep)

    def push(v):
        zeta = sym.gamma_M(base + v)
        zeta = action.act(-t_angles, zeta)
        return _affine_chart(zeta, base)

    D = np.zeros((ncols, ncols), complex)
    for b in range(ncols):
        col = (push(step * frame[:, b]) - push(-step * frame[:, b])) / (2 * step)
        D[:, b] = np.conj(frame).T @ col
    nt = tangent.shape[1]
    return D, nt


def component_invariants(report: FixedComponentReport, sym: DiagonalSymmetry,
                         action: TorusAction, model: ProjectiveModel,
                         fd_step: float = 1e-5, c_tol: float = 1e-8) -> FixedComponentReport:
    """Fill in c_l, h_l and the normal eigenvalues of a fixed component.

    The descended differential is computed by central finite differences of
    gamma followed by mu_{g_m^{-1}} and horizontal projection; h_l is the
    residual circle phase of the lift at the representative.
    """
    rep = report.representative
    D, nt = _descended_differential(rep, report.support, report.t_angles, sym,
                                    action, fd_step)
    DNN = D[nt:, nt:]
    diag_err = 0.0
    if nt:
        diag_err = max(float(np.max(np.abs(D[:nt, :nt] - np.eye(nt)))),
                       float(np.max(np.abs(D[:nt, nt:]))) if D.shape[1] > nt else 0.0,
                       float(np.max(np.abs(D[nt:, :nt]))) if D.shape[1] > nt else 0.0)
    eigs = np.linalg.eigvals(DNN) if DNN.shape[0] else np.zeros(0, complex)
    if DNN.shape[0]:
        c_l = complex(np.linalg.det(np.eye(DNN.shape[0]) - np.linalg.inv(DNN)))
    else:
        c_l = 1.0 + 0.0j
    if abs(c_l) <= c_tol:
        raise DegenerateSymmetryError(
            f"determinant factor {c_l!r} vanishes on component {report.support}")

    # exact phase-arithmetic counterpart (diagonal data)
    j0 = report.support[0]
    S = set(report.support)
    lam = []
    for b in range(model.n_coords):
        if b in S:
            continue
        ang = (sym.phi[b] - sym.phi[j0]
               + float(report.t_angles @ (action.W[:, j0] - action.W[:, b])))
        lam.append(np.exp(1j * ang))
    c_exact = complex(np.prod([1.0 - np.conj(l) for l in lam])) if lam else 1.0 + 0.0j

    # residual circle phase of the lift: gamma_X^{-1}(x) = r_{h} mu_{t^{-1}}(x)
    lift = rep / np.linalg.norm(rep)
    xg = sym.gamma_X_inv(lift)
    yg = action.act(-report.t_angles, lift)
    h = complex(np.sum(xg * np.conj(yg)))
    if abs(abs(h) - 1.0) > 1e-10:
        raise DegenerateSymmetryError(
            f"representative of {report.support} is not fixed (|h| = {abs(h)})")
    h /= abs(h)

    return replace(report, c_l=c_l, c_l_exact=c_exact,
                   normal_eigenvalues=np.array(lam), h_l=h,
                   frame_diag_error=diag_err)


def component_representatives(report: FixedComponentReport, action: TorusAction,
                              n: int, seed: int = 0) -> list[np.ndarray]:
    """Distinct lifts over the component: random stratum phases and, for
    positive-dimensional components, interior moduli variations."""
    rng = np.random.default_rng(seed)
    S = list(report.support)
    out = [report.representative]
    g = action.g
    for _ in range(n - 1):
        u = report.u_star[S].copy()
        if report.d_l > 0:
            nS = len(S)
            c = rng.normal(size=nS)
            A_eq = np.zeros((1 + g, nS))
            A_eq[0] = 1.0
            if g:
                A_eq[1:] = action.W[:, S].astype(float)
            res = linprog(c, A_eq=A_eq, b_eq=np.concatenate([[1.0], np.zeros(g)]),
                          bounds=[(0, None)] * nS, method="highs")
            if res.success:
                u = 0.6 * u + 0.4 * res.x
        z = np.zeros(report.representative.shape[0], complex)
        z[S] = np.sqrt(u) * np.exp(1j * rng.uniform(0, 2 * math.pi, size=len(S)))
        out.append(z)
    return out


def f_bar_integral(report: FixedComponentReport, f: Observable, action: TorusAction,
                   model: ProjectiveModel, n_samples: int = 200_000,
                   seed: int = 0) -> FixedComponentReport:
    """int_{F_l} (G-average of f) vol_{F_l}.

    Point components evaluate the averaged observable at the representative
    (vol(point) = 1); positive-dimensional components restrict to their
    support stratum, which is again a projective-space model, and reuse the
    reduced-space Monte-Carlo there.
    """
    favg = f.g_average(action)
    if report.d_l == 0:
        val = complex(favg.value(report.representative[None, :])[0])
        return replace(report, f_bar_integral=val, f_bar_stderr=0.0)
    if action.g == 0 and len(report.support) == model.n_coords:
        # the component is all of M: the moment-free integral is closed form
        return replace(report, f_bar_integral=complex(favg.integral_over_M(model)),
                       f_bar_stderr=0.0)
    est, err = reduced_space_integral(
        action, model, n_samples, seed,
        h=lambda pts: favg.value(pts), support=report.support)
    return replace(report, f_bar_integral=complex(est), f_bar_stderr=err)
