import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eqtoeplitz.geometry import ProjectiveModel, sample_sphere, section_basis, szego_kernel
from eqtoeplitz.symmetry import (DiagonalSymmetry, TorusAction, equivariant_kernel,
                                 equivariant_kernel_fourier, gamma_phase, isotype_basis,
                                 moment_map, moment_polytope_contains, occurring_weights,
                                 vanishing_level, weight_of)


class TestWeights:
    def test_balanced(self):
        act = TorusAction([[1, -1]])
        assert weight_of(np.array([1, 1]), act)[0] == 0

    def test_direct_evaluation(self):
        act = TorusAction([[1, -1, -1]])
        assert weight_of(np.array([2, 0, 0]), act)[0] == -2

    def test_unreachable_weight_empty(self, p1):
        # W = (1, 1): all weights at level k equal -k, so +3 never occurs
        act = TorusAction([[1, 1]])
        for k in range(21):
            basis = section_basis(k, p1)
            iso = isotype_basis(k, (3,), act, basis)
            assert iso.dim == 0

    def test_isotype_members_p2(self, p2, circle_p2):
        iso = isotype_basis(2, (0,), circle_p2, section_basis(2, p2))
        assert sorted(map(tuple, iso.indices)) == [(1, 0, 1), (1, 1, 0)]

    def test_parity_obstruction(self, p1, circle_p1):
        iso = isotype_basis(3, (0,), circle_p1, section_basis(3, p1))
        assert iso.dim == 0

    def test_dimension_bookkeeping_large(self, p2, circle_p2):
        for k in (40, 200):
            basis = section_basis(k, p2)
            w = weight_of(basis.indices, circle_p2)
            _, counts = np.unique(w, axis=0, return_counts=True)
            assert counts.sum() == math.comb(k + 2, 2)


class TestMomentMap:
    def test_coordinate_point(self, circle_p2):
        assert moment_map(np.array([1, 0, 0], complex), circle_p2)[0] == pytest.approx(-1.0)

    def test_balanced_point(self, circle_p2):
        x = np.array([1, 1, 0], complex) / math.sqrt(2)
        assert moment_map(x, circle_p2)[0] == pytest.approx(0.0, abs=1e-15)

    def test_support_principle_p1(self, p1, circle_p1):
        k = 10
        basis = section_basis(k, p1)
        ws = occurring_weights(k, circle_p1, basis)
        assert set(int(w[0]) for w in ws) == set(range(-10, 11, 2))
        for w in ws:
            assert moment_polytope_contains(circle_p1, np.asarray(w, float), scale=float(k))

    @given(st.lists(st.integers(-3, 3), min_size=3, max_size=3),
           st.integers(2, 14))
    @settings(max_examples=40, deadline=None)
    def test_support_principle_random(self, row, k):
        action = TorusAction([row])
        basis = section_basis(k, ProjectiveModel(2))
        for w in occurring_weights(k, action, basis):
            assert moment_polytope_contains(action, np.asarray(w, float), scale=float(k))


class TestVanishingLevel:
    def test_equal_weights_line(self):
        act = TorusAction([[1, 1]])
        assert vanishing_level(act, [-6]) == 7
        assert vanishing_level(act, [0]) == 1
        assert vanishing_level(act, [3]) == 0

    def test_zero_in_image(self, circle_p1):
        assert vanishing_level(circle_p1, [0]) is None


class TestGammaPhase:
    def test_identity(self):
        sym = DiagonalSymmetry(phi=[0.0, 0.0, 0.0])
        idx = np.array([[3, 1, 0], [0, 0, 4]])
        assert np.allclose(gamma_phase(idx, sym), 1.0)

    def test_direct_value(self):
        sym = DiagonalSymmetry(phi=[0.0, 0.7])
        k, b = 9, 4
        val = gamma_phase(np.array([k - b, b]), sym)
        assert val == pytest.approx(np.exp(-1j * b * 0.7), rel=1e-14)

    def test_theta_A(self):
        sym = DiagonalSymmetry(phi=[0.0, 0.7], theta_A=0.2)
        val = gamma_phase(np.array([5, 0]), sym)
        assert val == pytest.approx(np.exp(1j * 5 * 0.2), rel=1e-14)

    @given(st.lists(st.floats(-3, 3), min_size=3, max_size=3),
           st.lists(st.integers(0, 9), min_size=3, max_size=3))
    @settings(max_examples=60, deadline=None)
    def test_unitarity(self, phi, alpha):
        sym = DiagonalSymmetry(phi=phi, theta_A=0.3)
        assert abs(abs(gamma_phase(np.array(alpha), sym)) - 1.0) < 1e-12


class TestEquivariantKernel:
    def test_partition_of_basis(self, p2, circle_p2):
        k = 6
        basis = section_basis(k, p2)
        x, y = sample_sphere(2, 41, p2)
        total = sum(equivariant_kernel(x, y, isotype_basis(k, w, circle_p2, basis))
                    for w in occurring_weights(k, circle_p2, basis))
        assert abs(total - szego_kernel(x, y, k, p2)) < 1e-10

    def test_character_average_oracle(self, p2, circle_p2):
        k = 5
        basis = section_basis(k, p2)
        x, y = sample_sphere(2, 43, p2)
        for w in [(0,), (-2,), (3,)]:
            direct = equivariant_kernel(x, y, isotype_basis(k, w, circle_p2, basis))
            fourier = equivariant_kernel_fourier(x, y, k, w, circle_p2, p2)
            assert abs(direct - fourier) < 1e-12

    def test_character_average_rank2(self, p2):
        act = TorusAction([[1, -1, 0], [0, 1, -1]])
        k = 3
        basis = section_basis(k, p2)
        x, y = sample_sphere(2, 47, p2)
        w = (0, 1)
        direct = equivariant_kernel(x, y, isotype_basis(k, w, act, basis))
        fourier = equivariant_kernel_fourier(x, y, k, w, act, p2)
        assert abs(direct - fourier) < 1e-12

    def test_conjugation_invariance(self, p2, circle_p2):
        k = 7
        basis = section_basis(k, p2)
        sym = DiagonalSymmetry(phi=[0.3, 1.1, 2.9], theta_A=0.4)
        x, y = sample_sphere(2, 53, p2)
        for w in [(0,), (1,)]:
            iso = isotype_basis(k, w, circle_p2, basis)
            lhs = equivariant_kernel(sym.gamma_X(x), sym.gamma_X(y), iso)
            rhs = equivariant_kernel(x, y, iso)
            assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(rhs))

    def test_projector_laws_exact(self, p2, circle_p2):
        # in the orthonormalized monomial basis the isotype projector is a
        # 0/1 diagonal selector: idempotent, self-adjoint, and the selectors
        # partition the basis
        k = 8
        basis = section_basis(k, p2)
        w = weight_of(basis.indices, circle_p2)
        labels = np.unique(w, axis=0)
        masks = [np.all(w == lab[None, :], axis=1) for lab in labels]
        assert sum(m.sum() for m in masks) == basis.dim
        for m in masks[:4]:
            P = np.diag(m.astype(float))
            assert np.array_equal(P @ P, P)
            assert np.array_equal(P, P.T)

    def test_lift_commutes_with_projectors(self, p2, circle_p2):
        k = 6
        basis = section_basis(k, p2)
        sym = DiagonalSymmetry(phi=[0.3, 1.1, 2.9], theta_A=0.1)
        g = gamma_phase(basis.indices, sym)
        w = weight_of(basis.indices, circle_p2)
        for lab in np.unique(w, axis=0)[:5]:
            m = np.all(w == lab[None, :], axis=1).astype(float)
            # diagonal matrices commute exactly; check the composite action
            assert np.array_equal(g * m, m * g)


class TestTorusAction:
    def test_unitary(self, circle_p2, p2):
        pts = sample_sphere(8, 3, p2)
        moved = circle_p2.act(np.array([0.77]), pts)
        assert np.allclose(np.linalg.norm(moved, axis=1), 1.0, atol=1e-12)

    def test_g_leq_d_violation_detectable(self):
        act = TorusAction([[1, -1], [2, -2]])
        # rank of the weight lattice is 1 < g = 2; the diagnostics layer
        # rejects this (covered in reduction tests); here just shape checks
        assert act.g == 2 and act.n_coords == 2

    def test_pullback_convention(self, p1, circle_p1):
        # monomial z^alpha pulled back by mu_{t^{-1}} transforms by t^{-W alpha}
        k = 3
        basis = section_basis(k, p1)
        x = sample_sphere(1, 5, p1)[0]
        theta = np.array([0.37])
        from eqtoeplitz.geometry import monomial_matrix
        vals_moved = monomial_matrix(circle_p1.act(-theta, x[None, :]), basis.indices)
        vals = monomial_matrix(x[None, :], basis.indices)
        w = weight_of(basis.indices, circle_p1)
        expect = vals * np.exp(1j * (w @ theta))[None, :]
        assert np.allclose(vals_moved, expect, atol=1e-12)
