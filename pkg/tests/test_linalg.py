import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from siqrctl import control, linalg, model
from siqrctl.errors import DegreeUnsupported, NotSquare, ShapeMismatch
from siqrctl.model import REFERENCE_PARAMS


def sorted_complex(values):
    return np.array(sorted(np.asarray(values, dtype=complex), key=lambda z: (round(z.real, 9), z.imag)))


class TestPlumbing:
    def test_identity_law(self):
        b = control.INPUT_MATRIX
        np.testing.assert_array_equal(linalg.matmul(linalg.identity(4), b), b)

    def test_transpose_involution(self):
        a = control.build_system(REFERENCE_PARAMS).a
        np.testing.assert_array_equal(linalg.transpose(linalg.transpose(a)), a)

    def test_frobenius(self):
        assert linalg.frobenius_norm(np.diag([3.0, 4.0])) == 5.0

    def test_horzcat_keeps_rows(self):
        assert linalg.horzcat([np.ones((4, 2)), np.zeros((4, 3))]).shape == (4, 5)

    def test_shape_errors(self):
        with pytest.raises(ShapeMismatch) as err:
            linalg.matmul(np.ones((2, 3)), np.ones((2, 3)))
        assert "(2, 3)" in str(err.value)
        with pytest.raises(ShapeMismatch):
            linalg.horzcat([np.ones((4, 2)), np.ones((3, 2))])
        with pytest.raises(NotSquare):
            linalg.char_poly(np.ones((2, 3)))


class TestCharPoly:
    def test_endemic_block(self):
        alpha, s, i = 0.2, 1.6, 0.275
        block = np.array([[-(alpha * i + 0.07), -alpha * s], [alpha * i, 0.0]])
        np.testing.assert_allclose(linalg.char_poly(block), [1.0, 0.125, 0.0176], atol=1e-15)

    def test_diagonal(self):
        np.testing.assert_allclose(linalg.char_poly(np.diag([-1.0, -2.0])), [1, 3, 2])

    def test_zero(self):
        np.testing.assert_array_equal(linalg.char_poly(np.zeros((3, 3))), [1, 0, 0, 0])

    def test_against_numpy_poly(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            a = rng.uniform(-1, 1, (4, 4))
            np.testing.assert_allclose(linalg.char_poly(a), np.poly(a), atol=1e-12)

    @given(st.lists(st.floats(-2, 2), min_size=8, max_size=8))
    def test_block_triangular_factorises(self, entries):
        top = np.array(entries[:4]).reshape(2, 2)
        bottom = np.array(entries[4:]).reshape(2, 2)
        a = np.zeros((4, 4))
        a[:2, :2] = top
        a[2:, 2:] = bottom
        a[2:, :2] = 0.7  # coupling below the diagonal blocks
        expected = np.polymul(linalg.char_poly(top), linalg.char_poly(bottom))
        np.testing.assert_allclose(linalg.char_poly(a), expected, atol=1e-12)


class TestEigenvalues:
    def test_disease_free_jacobian(self):
        j = model.jacobian(REFERENCE_PARAMS, model.disease_free_equilibrium(REFERENCE_PARAMS).point)
        eig = linalg.eigenvalues(j)
        expected = [-0.07, 0.32 * (model.r0(REFERENCE_PARAMS) - 1), -0.32, -0.02]
        for target in expected:
            assert eig.contains(target, 1e-9)
        assert 0.32 * (model.r0(REFERENCE_PARAMS) - 1) == pytest.approx(0.2514, abs=1e-4)

    def test_below_threshold_stable(self):
        p = REFERENCE_PARAMS.replace(alpha=0.08)
        j = model.jacobian(p, model.disease_free_equilibrium(p).point)
        assert linalg.eigenvalues(j).max_real < 0

    def test_identity(self):
        eig = linalg.eigenvalues(np.eye(4))
        np.testing.assert_allclose(np.asarray(eig.values), np.ones(4), atol=1e-10)

    def test_repeated_pairs(self):
        eig = linalg.eigenvalues(np.diag([1.0, 1.0, 2.0, 2.0]))
        np.testing.assert_allclose(sorted(v.real for v in eig.values), [1, 1, 2, 2], atol=1e-10)

    def test_close_but_distinct(self):
        eig = linalg.eigenvalues(np.diag([1.0, 1.0 + 1e-6]))
        np.testing.assert_allclose(sorted(v.real for v in eig.values), [1.0, 1.0 + 1e-6], atol=1e-12)

    def test_sorted_by_real_then_imag(self):
        eig = linalg.eigenvalues(np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, -3.0]]))
        keys = [(z.real, z.imag) for z in eig.values]
        assert keys == sorted(keys) and keys[0] == (-3.0, 0.0)

    def test_rotation_is_complex_pair(self):
        eig = linalg.eigenvalues(np.array([[0.0, -1.0], [1.0, 0.0]]))
        np.testing.assert_allclose(sorted_complex(eig.values), [-1j, 1j], atol=1e-12)

    def test_random_matrices_residual_and_oracle(self):
        rng = np.random.default_rng(2024)
        for _ in range(1000):
            a = rng.uniform(-1, 1, (4, 4))
            coeffs = linalg.char_poly(a)
            eig = linalg.eigenvalues(a)
            for lam in eig.values:
                assert abs(np.polyval(coeffs, lam)) <= 1e-8
            np.testing.assert_allclose(
                sorted_complex(eig.values), sorted_complex(np.linalg.eigvals(a)), atol=1e-7
            )


class TestRank:
    def test_controllability_fixture(self):
        sys_ = control.build_system(REFERENCE_PARAMS)
        assert linalg.rank(control.controllability_matrix(sys_)) == 4

    def test_zero(self):
        assert linalg.rank(np.zeros((4, 8))) == 0

    def test_unit_columns(self):
        assert linalg.rank(control.INPUT_MATRIX) == 2

    def test_matches_svd_rank(self):
        rng = np.random.default_rng(5)
        for k in range(5):
            a = rng.normal(size=(4, k)) @ rng.normal(size=(k, 6))
            assert linalg.rank(a) == np.linalg.matrix_rank(a) == k

    @settings(max_examples=50)
    @given(st.integers(0, 2**32 - 1))
    def test_invariances(self, seed):
        rng = np.random.default_rng(seed)
        k = int(rng.integers(1, 5))
        a = rng.uniform(-1, 1, (4, k)) @ rng.uniform(-1, 1, (k, 8))
        base = linalg.rank(a)
        assert linalg.rank(a[rng.permutation(4)]) == base
        m = rng.uniform(-1, 1, (4, 4)) + 4 * np.eye(4)  # diagonally dominant, invertible
        assert linalg.rank(m @ a) == base


class TestRouthHurwitz:
    def test_endemic_quadratic(self):
        assert linalg.routh_hurwitz_stable([1, 0.125, 0.0176])

    def test_unstable_quadratic(self):
        assert not linalg.routh_hurwitz_stable([1, 0, -1])

    def test_companion_agrees_on_quadratic(self):
        companion_stable = np.linalg.eigvals(linalg.companion([1, 0.125, 0.0176])).real.max() < 0
        assert companion_stable == linalg.routh_hurwitz_stable([1, 0.125, 0.0176])

    def test_degree_limits(self):
        with pytest.raises(DegreeUnsupported):
            linalg.routh_hurwitz_stable([1, 1, 1, 1, 1, 1])
        with pytest.raises(DegreeUnsupported):
            linalg.routh_hurwitz_stable([1])

    def test_known_quartics(self):
        assert linalg.routh_hurwitz_stable(np.poly([-1, -2, -3, -4]))
        assert not linalg.routh_hurwitz_stable(np.real(np.poly([-1, -2, 0.1 + 1j, 0.1 - 1j])))
        # all coefficients positive but a right-half-plane pair
        assert not linalg.routh_hurwitz_stable([1, 1, 1, 10])

    @settings(max_examples=300)
    @given(st.integers(1, 4), st.lists(st.floats(-3, 3), min_size=4, max_size=4))
    def test_matches_companion_oracle(self, degree, roots_re):
        # build real polynomials from random roots so both signs occur often
        roots = np.array(roots_re[:degree], dtype=complex)
        if degree >= 2:
            roots[1] = complex(roots_re[0], roots_re[1])
            roots[0] = roots[1].conjugate()
        coeffs = np.real(np.poly(roots))
        top = np.linalg.eigvals(linalg.companion(coeffs)).real.max()
        if abs(top) < 1e-6:
            return  # too close to the imaginary axis for either test to be meaningful
        assert linalg.routh_hurwitz_stable(coeffs) == (top < 0)
