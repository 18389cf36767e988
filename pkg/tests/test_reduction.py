import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.optimize import minimize_scalar
from scipy.special import gammaln

from eqtoeplitz.geometry import sample_sphere
from eqtoeplitz.observables import Observable
from eqtoeplitz.symmetry import DiagonalSymmetry, TorusAction, moment_map
from eqtoeplitz.reduction import (DegenerateSymmetryError, ReductionHypothesisError,
                                  check_regular_and_free, component_invariants,
                                  component_representatives, effective_volume,
                                  f_bar_integral, find_fixed_components, reduced_volume,
                                  stabilizer_info, zero_locus_sample)


def sym_of(*phis, theta_A=0.0):
    return DiagonalSymmetry(phi=list(phis), theta_A=theta_A)


class TestDiagnostics:
    def test_p2_regular_and_free(self, p2, circle_p2):
        diag = check_regular_and_free(circle_p2, p2, n_samples=2 ** 16, seed=3)
        assert not diag.empty_locus
        assert diag.regular_value and diag.min_singular_dphi > 1.0
        assert diag.free_action and diag.stabilizer_constant
        assert diag.kernel_order == 2 and diag.stabilizer_order == 2
        # exact d Phi singular value is 2 sqrt(min eig Gram) = 2 here
        assert diag.min_singular_dphi == pytest.approx(2.0, abs=1e-4)
        assert diag.v_eff_mean == pytest.approx(math.pi, rel=1e-10)

    def test_p1_circle_locus(self, p1, circle_p1):
        diag = check_regular_and_free(circle_p1, p1, n_samples=2 ** 15, seed=5)
        assert diag.regular_value and diag.free_action
        assert diag.vol_M0 == pytest.approx(1.0, abs=5 * diag.vol_M0_stderr + 5e-3)

    def test_empty_locus_flag(self, p1):
        diag = check_regular_and_free(TorusAction([[1, 1]]), p1, n_samples=1000, seed=1)
        assert diag.empty_locus

    def test_continuous_stabilizer_raises(self, p1):
        act = TorusAction([[1, -1], [2, -2]])
        with pytest.raises(ReductionHypothesisError):
            check_regular_and_free(act, p1, n_samples=4096, seed=1)

    def test_trivial_group(self, p1, trivial_g1):
        diag = check_regular_and_free(trivial_g1, p1, n_samples=2 ** 15, seed=2)
        assert diag.vol_M0 == pytest.approx(p1.vol_M, rel=1e-12)


class TestZeroLocusSample:
    def test_refinement_quality(self, p2, circle_p2):
        s = zero_locus_sample(circle_p2, p2, 2 ** 15, seed=7)
        assert s.points.shape[0] > 100
        resid = np.linalg.norm(moment_map(s.points, circle_p2), axis=1)
        assert np.max(resid) <= 1e-9
        assert np.all(s.weights > 0)

    def test_support_restriction(self, p2, circle_p2):
        s = zero_locus_sample(circle_p2, p2, 2 ** 13, seed=7, support=(0, 1))
        assert np.max(np.abs(s.points[:, 2])) == 0.0
        resid = np.linalg.norm(moment_map(s.points, circle_p2), axis=1)
        assert np.max(resid) <= 1e-9


class TestEffectiveVolume:
    def test_trivial_group_point_orbit(self, p1, trivial_g1):
        x = sample_sphere(1, 3, p1)[0]
        assert effective_volume(x, trivial_g1, p1) == 1.0

    def test_p1_balanced_value(self, p1, circle_p1):
        x = np.array([1, 1], complex) / math.sqrt(2)
        # orbit sweeps the equator twice: image length is pi
        assert effective_volume(x, circle_p1, p1) == pytest.approx(math.pi, rel=1e-12)

    def test_on_diagonal_scaling_identity(self, p1, circle_p1):
        # oracle: exact equivariant kernel at the balanced point,
        # Pi_{0,k}(x,x) = 2^{-k} (k+1)!/((k/2)!)^2 / vol_X
        x = np.array([1, 1], complex) / math.sqrt(2)
        veff = effective_volume(x, circle_p1, p1)
        for k in (512, 2048):
            logv = k * math.log(0.5) + gammaln(k + 2) - 2 * gammaln(k / 2 + 1) \
                - math.log(p1.vol_X)
            pred = (k / math.pi) ** 0.5 * 2 ** 0.5 / veff
            ratio = math.exp(logv) / pred
            assert abs(ratio - 1) < 2.0 / k

    def test_invariance_along_orbit(self, p1, circle_p1):
        x = np.array([1, 1], complex) / math.sqrt(2)
        vals = [effective_volume(circle_p1.act(np.array([t]), x), circle_p1, p1)
                for t in np.linspace(0, 2, 7)]
        assert np.max(np.abs(np.array(vals) - vals[0])) < 1e-8


class TestReducedVolume:
    def test_p1_point_volume(self, p1, circle_p1):
        vol, err = reduced_volume(circle_p1, p1, 2 ** 17, seed=11)
        assert abs(vol - 1.0) <= 3 * err + 5e-3

    def test_p2_value(self, p2, circle_p2):
        vol, err = reduced_volume(circle_p2, p2, 2 ** 18, seed=13)
        assert abs(vol - math.pi / 2) <= 3 * err + 5e-3

    def test_p2_matches_dimension_slope(self, p2, circle_p2):
        # oracle: dim of the invariant isotype grows like (k/pi) vol(M0)
        from eqtoeplitz.geometry import section_basis
        from eqtoeplitz.symmetry import isotype_basis
        k = 300
        dim = isotype_basis(k, (0,), circle_p2, section_basis(k, p2)).dim
        assert dim == k // 2 + 1
        vol, err = reduced_volume(circle_p2, p2, 2 ** 18, seed=17)
        assert abs(dim * math.pi / k - vol) <= 5.0 / k + 3 * err

    def test_halving_rate(self, p2, circle_p2):
        _, e1 = reduced_volume(circle_p2, p2, 2 ** 16, seed=19)
        _, e2 = reduced_volume(circle_p2, p2, 2 ** 17, seed=19)
        assert 1.2 <= e1 / e2 <= 1.7

    def test_empty_locus_raises(self, p1):
        with pytest.raises(ReductionHypothesisError):
            reduced_volume(TorusAction([[1, 1]]), p1, 2 ** 12, seed=1)


class TestFixedComponents:
    def test_p2_generic_two_points(self, p2, circle_p2):
        comps = find_fixed_components(circle_p2, sym_of(0.0, 0.9, 2.1), p2)
        assert len(comps) == 2
        assert sorted(c.support for c in comps) == [(0, 1), (0, 2)]
        for c in comps:
            assert c.d_l == 0 and c.codim == 1
            assert c.stab_order == 2
            assert not c.suspected_nongeneric

    def test_identity_symmetry_full_component(self, p2, circle_p2):
        comps = find_fixed_components(circle_p2, sym_of(0.0, 0.0, 0.0), p2)
        assert len(comps) == 1
        assert comps[0].support == (0, 1, 2)
        assert comps[0].d_l == p2.d - circle_p2.g

    def test_p1_single_point(self, p1, circle_p1):
        comps = find_fixed_components(circle_p1, sym_of(0.0, 1.3), p1)
        assert len(comps) == 1 and comps[0].d_l == 0

    def test_lefschetz_points_trivial_group(self, p2, trivial_g2):
        comps = find_fixed_components(trivial_g2, sym_of(0.0, 0.9, 2.1), p2)
        assert sorted(c.support for c in comps) == [(0,), (1,), (2,)]
        assert all(c.d_l == 0 for c in comps)

    def test_near_resonance_flagged(self, p2, trivial_g2):
        comps = find_fixed_components(trivial_g2, sym_of(0.0, 1e-4, 2.0), p2)
        assert all(c.suspected_nongeneric for c in comps)

    def test_resonant_phase_merges_to_reduced_space(self, p2, circle_p2):
        # phi1 = phi2 makes the descended map the identity: one component
        comps = find_fixed_components(circle_p2, sym_of(0.0, 1.3, 1.3), p2)
        assert len(comps) == 1
        assert comps[0].support == (0, 1, 2) and comps[0].d_l == 1


class TestComponentInvariants:
    def test_p2_fd_matches_phase_arithmetic(self, p2, circle_p2):
        sym = sym_of(0.0, 0.9, 2.1)
        for c in find_fixed_components(circle_p2, sym, p2):
            done = component_invariants(c, sym, circle_p2, p2)
            assert abs(done.c_l - done.c_l_exact) < 1e-6
            # hand-derived: lambda = e^{i(phi_b - phi_j)} for the paired support
            j = done.support[1]
            b = 3 - j  # the missing coordinate among {1, 2}
            lam = np.exp(1j * (sym.phi[b] - sym.phi[j]))
            assert done.c_l_exact == pytest.approx(1 - np.conj(lam), rel=1e-12)
            assert abs(abs(done.h_l) - 1) < 1e-10

    def test_identity_invariants(self, p2, circle_p2):
        sym = sym_of(0.0, 0.0, 0.0, theta_A=0.3)
        c = component_invariants(find_fixed_components(circle_p2, sym, p2)[0],
                                 sym, circle_p2, p2)
        assert c.c_l == pytest.approx(1.0, abs=1e-12)
        assert c.h_l == pytest.approx(np.exp(0.3j), rel=1e-12)
        assert c.chi((0,)) == pytest.approx(1.0, rel=1e-14)

    def test_constancy_across_representatives(self, p2, circle_p2):
        sym = sym_of(0.0, 0.9, 2.1)
        comp = find_fixed_components(circle_p2, sym, p2)[0]
        vals = []
        for rep in component_representatives(comp, circle_p2, 3, seed=23):
            done = component_invariants(replace(comp, representative=rep),
                                        sym, circle_p2, p2)
            vals.append((done.c_l, done.h_l))
        for c_l, h_l in vals[1:]:
            assert abs(c_l - vals[0][0]) < 1e-6
            assert abs(h_l - vals[0][1]) < 1e-8

    def test_positive_dim_constancy(self, p2, circle_p2):
        sym = sym_of(0.0, 0.0, 0.0)
        comp = find_fixed_components(circle_p2, sym, p2)[0]
        for rep in component_representatives(comp, circle_p2, 3, seed=29):
            done = component_invariants(replace(comp, representative=rep),
                                        sym, circle_p2, p2)
            assert done.c_l == pytest.approx(1.0, abs=1e-9)
            assert done.frame_diag_error < 1e-9

    def test_degenerate_symmetry_error(self, p2, trivial_g2):
        # phi_1 within 1e-4 of phi_0: |c_l| ~ 1e-4 on the coordinate component
        sym = sym_of(0.0, 1e-4, 2.0)
        comps = find_fixed_components(trivial_g2, sym, p2)
        comp0 = next(c for c in comps if c.support == (0,))
        with pytest.raises(DegenerateSymmetryError):
            component_invariants(comp0, sym, trivial_g2, p2, c_tol=1e-3)

    def test_gm_well_defined_up_to_stabilizer(self, p2, circle_p2):
        # numeric orbit solve at a second representative recovers t mod Stab
        sym = sym_of(0.0, 0.9, 2.1)
        comp = find_fixed_components(circle_p2, sym, p2)[0]
        rep = component_representatives(comp, circle_p2, 2, seed=31)[1]

        def mismatch(theta):
            moved = circle_p2.act(np.array([theta]), rep)
            target = sym.gamma_M(rep)
            return -abs(np.vdot(moved, target))

        best = None
        for t0 in np.linspace(0, 2 * math.pi, 64, endpoint=False):
            res = minimize_scalar(mismatch, bracket=(t0, t0 + 0.05))
            if best is None or res.fun < best.fun:
                best = res
        t_num = best.x % (2 * math.pi)
        branches = [(comp.t_angles[0] + s[0]) % (2 * math.pi)
                    for s in comp.stab_angles]
        assert min(min(abs(t_num - b), 2 * math.pi - abs(t_num - b))
                   for b in branches) < 1e-8

    def test_h_l_theta_A_covariance(self, p2, circle_p2):
        delta = 0.41
        base = sym_of(0.0, 0.9, 2.1)
        shifted = sym_of(0.0, 0.9, 2.1, theta_A=delta)
        c0 = component_invariants(find_fixed_components(circle_p2, base, p2)[0],
                                  base, circle_p2, p2)
        c1 = component_invariants(find_fixed_components(circle_p2, shifted, p2)[0],
                                  shifted, circle_p2, p2)
        assert c1.h_l / c0.h_l == pytest.approx(np.exp(1j * delta), rel=1e-12)


class TestFBarIntegral:
    def test_constant_gives_volume(self, p2, circle_p2):
        sym = sym_of(0.0, 0.9, 2.1)
        comp = component_invariants(find_fixed_components(circle_p2, sym, p2)[0],
                                    sym, circle_p2, p2)
        one = Observable.constant(1.0, 3)
        done = f_bar_integral(comp, one, circle_p2, p2)
        assert done.f_bar_integral == pytest.approx(1.0, rel=1e-14)  # point component

    def test_full_component_volume(self, p2, circle_p2):
        sym = sym_of(0.0, 0.0, 0.0)
        comp = component_invariants(find_fixed_components(circle_p2, sym, p2)[0],
                                    sym, circle_p2, p2)
        one = Observable.constant(1.0, 3)
        done = f_bar_integral(comp, one, circle_p2, p2, n_samples=2 ** 17, seed=3)
        assert abs(done.f_bar_integral - math.pi / 2) <= 3 * done.f_bar_stderr + 5e-3

    def test_u1_on_point_component(self, p2, circle_p2):
        sym = sym_of(0.0, 0.9, 2.1)
        u1 = Observable.coordinate_modulus(1, 3)
        comps = [component_invariants(c, sym, circle_p2, p2)
                 for c in find_fixed_components(circle_p2, sym, p2)]
        vals = {c.support: f_bar_integral(c, u1, circle_p2, p2).f_bar_integral
                for c in comps}
        assert vals[(0, 1)] == pytest.approx(0.5, rel=1e-12)
        assert vals[(0, 2)] == pytest.approx(0.0, abs=1e-14)

    def test_invariant_average_is_identity(self, p2, circle_p2):
        # u-polynomials are torus-invariant: the average changes nothing
        f = Observable(u_terms={(1, 1, 0): 2.0})
        assert f.g_average(circle_p2).u_terms == f.u_terms
        pts = zero_locus_sample(circle_p2, p2, 2 ** 12, seed=3).points
        assert np.allclose(f.g_average(circle_p2).value(pts), f.value(pts), atol=1e-12)


class TestCompleteness:
    def test_no_missed_components(self, p2, circle_p2):
        # numeric orbit-distance sweep: zero-locus points that are nearly
        # fixed must lie near an enumerated component
        sym = sym_of(0.0, 0.9, 2.1)
        comps = find_fixed_components(circle_p2, sym, p2)
        pts = zero_locus_sample(circle_p2, p2, 2 ** 13, seed=37).points
        grid = np.linspace(0, 2 * math.pi, 512, endpoint=False)
        target = sym.gamma_M(pts)
        best = np.zeros(pts.shape[0])
        for th in grid:
            moved = circle_p2.act(np.array([th]), pts)
            best = np.maximum(best, np.abs(np.sum(moved * target.conj(), axis=1)))
        fix_dist = np.sqrt(np.maximum(0.0, 2 - 2 * best))
        near = pts[fix_dist < 1e-3]
        for x in near:
            dist_to_comp = min(np.linalg.norm(x[[j for j in range(3)
                                                 if j not in c.support]])
                               for c in comps)
            assert dist_to_comp < 5e-2

    def test_perturbed_component_point_detected(self, p2, circle_p2):
        sym = sym_of(0.0, 0.9, 2.1)
        comps = find_fixed_components(circle_p2, sym, p2)
        rep = comps[0].representative
        # small perturbation off the component, still on the zero locus
        x = rep + 1e-5 * np.array([0, 0, 1], complex)
        x /= np.linalg.norm(x)
        target = sym.gamma_M(x)

        def mismatch(theta):
            return -abs(np.vdot(circle_p2.act(np.array([theta]), x), target))

        grid = np.linspace(0, 2 * math.pi, 512, endpoint=False)
        t0 = min(grid, key=mismatch)
        res = minimize_scalar(mismatch, bracket=(t0 - 0.01, t0 + 0.01))
        assert math.sqrt(max(0.0, 2 + 2 * res.fun)) < 1e-4


class TestStabilizers:
    def test_kernel_of_projective_action(self, circle_p2):
        info = stabilizer_info(circle_p2, (0, 1, 2))
        assert info["order"] == 2 and info["free_rank"] == 0

    def test_singleton_support_continuous(self, circle_p1):
        info = stabilizer_info(circle_p1, (0,))
        assert info["free_rank"] == 1

    def test_trivial_group(self, trivial_g1):
        info = stabilizer_info(trivial_g1, (0, 1))
        assert info["order"] == 1 and info["angles"].shape == (1, 0)
