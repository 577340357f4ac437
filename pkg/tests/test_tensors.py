"""Tensor primitive tests: unfolding, Khatri-Rao, Kruskal, masked norms."""

import numpy as np
import pytest

from bayescp.errors import ShapeMismatchError
from bayescp.tensors import (
    ObservationMask,
    fold,
    generalized_inner_product,
    hadamard,
    khatri_rao,
    kruskal,
    masked_sq_frobenius,
    unfold,
)


class TestUnfoldFold:
    def test_matrix_mode0_is_identity(self):
        m = np.array([[1.0, 2.0], [3.0, 4.0]])
        np.testing.assert_array_equal(unfold(m, 0), m)

    def test_2x2x2_mode0_by_hand(self):
        # entries 1..8 in column-major layout order
        t = np.arange(1, 9, dtype=float).reshape((2, 2, 2), order="F")
        expected = np.array([[1, 3, 5, 7], [2, 4, 6, 8]], dtype=float)
        np.testing.assert_array_equal(unfold(t, 0), expected)

    def test_round_trip_all_modes(self):
        rng = np.random.default_rng(0)
        for shape in [(3, 4, 5), (2, 3, 2), (4,), (2, 2, 2, 3)]:
            t = rng.standard_normal(shape)
            for mode in range(len(shape)):
                back = fold(unfold(t, mode), mode, shape)
                np.testing.assert_array_equal(back, t)

    def test_row_fold(self):
        row = np.arange(5.0).reshape(1, 5)
        np.testing.assert_array_equal(fold(row, 0, (1, 5)), row.reshape(1, 5))

    def test_mode_out_of_range(self):
        with pytest.raises(ValueError):
            unfold(np.zeros((2, 2)), 2)

    def test_fold_dimension_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            fold(np.zeros((2, 5)), 0, (2, 2, 2))


class TestKhatriRao:
    def test_identity_columns(self):
        eye = np.eye(2)
        out = khatri_rao([eye, eye])
        np.testing.assert_array_equal(out[:, 0], [1, 0, 0, 0])
        np.testing.assert_array_equal(out[:, 1], [0, 0, 0, 1])

    def test_first_factor_varies_fastest(self):
        a = np.array([[1.0], [2.0]])
        b = np.array([[3.0], [4.0]])
        np.testing.assert_array_equal(khatri_rao([a, b]).ravel(), [3, 6, 4, 8])
        # must agree with the column-major vec of the rank-1 kruskal tensor
        np.testing.assert_array_equal(
            khatri_rao([a, b]).ravel(), kruskal([a, b]).ravel(order="F")
        )

    def test_single_matrix(self):
        m = np.arange(6.0).reshape(3, 2)
        np.testing.assert_array_equal(khatri_rao([m]), m)

    def test_skip(self):
        rng = np.random.default_rng(1)
        mats = [rng.standard_normal((d, 3)) for d in (2, 3, 4)]
        np.testing.assert_array_equal(
            khatri_rao(mats, skip=1), khatri_rao([mats[0], mats[2]])
        )

    def test_column_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            khatri_rao([np.zeros((2, 2)), np.zeros((2, 3))])

    def test_row_count_multiplicative(self):
        rng = np.random.default_rng(2)
        mats = [rng.standard_normal((d, 2)) for d in (2, 5, 3)]
        assert khatri_rao(mats).shape == (30, 2)


class TestHadamard:
    def test_ones_neutral(self):
        x = np.arange(6.0).reshape(2, 3)
        np.testing.assert_array_equal(hadamard([x, np.ones((2, 3))]), x)

    def test_arithmetic(self):
        a = np.array([[1.0, 2.0], [3.0, 4.0]])
        b = np.array([[2.0, 0.0], [1.0, 5.0]])
        np.testing.assert_array_equal(hadamard([a, b]), [[2, 0], [3, 20]])

    def test_power(self):
        x = np.array([[2.0, 3.0]])
        np.testing.assert_array_equal(hadamard([x, x, x]), x ** 3)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            hadamard([np.zeros((2, 2)), np.zeros((3, 2))])


class TestKruskal:
    def test_rank_one_outer_product(self):
        a = np.array([[1.0], [2.0]])
        b = np.array([[3.0], [4.0]])
        c = np.array([[5.0], [6.0]])
        x = kruskal([a, b, c])
        assert x[0, 0, 0] == 15.0
        assert x[1, 1, 1] == 48.0

    def test_zero_component_is_noop(self):
        rng = np.random.default_rng(3)
        mats1 = [rng.standard_normal((d, 1)) for d in (2, 3, 4)]
        mats2 = [np.hstack([m, np.zeros((m.shape[0], 1))]) for m in mats1]
        np.testing.assert_allclose(kruskal(mats2), kruskal(mats1), atol=1e-15)

    def test_unfolding_identity(self):
        rng = np.random.default_rng(4)
        mats = [rng.standard_normal((3, 2)) for _ in range(3)]
        x = kruskal(mats)
        for n in range(3):
            expected = mats[n] @ khatri_rao(mats, skip=n).T
            np.testing.assert_allclose(unfold(x, n), expected, rtol=1e-10)

    def test_direct_elementwise_sum_oracle(self):
        rng = np.random.default_rng(5)
        mats = [rng.standard_normal((3, 2)) for _ in range(3)]
        x = kruskal(mats)
        naive = np.zeros((3, 3, 3))
        for i in range(3):
            for j in range(3):
                for k in range(3):
                    naive[i, j, k] = sum(
                        mats[0][i, r] * mats[1][j, r] * mats[2][k, r]
                        for r in range(2)
                    )
        np.testing.assert_allclose(x, naive, atol=1e-12)

    def test_entry_equals_generalized_inner_product_of_rows(self):
        rng = np.random.default_rng(6)
        mats = [rng.standard_normal((d, 3)) for d in (2, 4, 3)]
        x = kruskal(mats)
        idx = (1, 2, 0)
        rows = [mats[n][i] for n, i in enumerate(idx)]
        assert x[idx] == pytest.approx(generalized_inner_product(rows), rel=1e-12)


class TestGeneralizedInnerProduct:
    def test_three_vectors(self):
        assert generalized_inner_product(
            [np.array([1.0, 2.0]), np.array([3.0, 4.0]), np.array([5.0, 6.0])]
        ) == pytest.approx(63.0)

    def test_zero_vector(self):
        vecs = [np.ones(3), np.zeros(3), np.ones(3)]
        assert generalized_inner_product(vecs) == 0.0

    def test_two_vectors_is_dot(self):
        rng = np.random.default_rng(7)
        a, b = rng.standard_normal(5), rng.standard_normal(5)
        assert generalized_inner_product([a, b]) == pytest.approx(a @ b)

    def test_length_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            generalized_inner_product([np.ones(2), np.ones(3)])


class TestMaskedNorm:
    def test_all_observed(self):
        rng = np.random.default_rng(8)
        t = rng.standard_normal((3, 4))
        mask = ObservationMask.all_observed((3, 4))
        assert masked_sq_frobenius(t, mask) == pytest.approx(np.sum(t ** 2))

    def test_all_missing(self):
        t = np.ones((2, 2))
        mask = ObservationMask(np.zeros((2, 2), dtype=bool))
        assert masked_sq_frobenius(t, mask) == 0.0

    def test_diagonal(self):
        t = np.array([[1.0, 2.0], [3.0, 4.0]])
        mask = ObservationMask(np.eye(2, dtype=bool))
        assert masked_sq_frobenius(t, mask) == pytest.approx(17.0)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            masked_sq_frobenius(np.ones((2, 3)), ObservationMask.all_observed((2, 2)))


class TestObservationMask:
    def test_slice_caches_enumerate_observed(self):
        rng = np.random.default_rng(9)
        flags = rng.random((4, 5, 3)) < 0.6
        mask = ObservationMask(flags)
        assert mask.count == int(flags.sum())
        for mode in range(3):
            for i in range(flags.shape[mode]):
                sel = mask.slice_entries(mode, i)
                idx = mask.indices[sel]
                assert np.all(idx[:, mode] == i)
                expected = int(np.take(flags, i, axis=mode).sum())
                assert sel.size == expected

    def test_gather_matches_flags(self):
        rng = np.random.default_rng(10)
        t = rng.standard_normal((3, 4))
        flags = rng.random((3, 4)) < 0.5
        mask = ObservationMask(flags)
        got = np.sort(mask.gather(t))
        np.testing.assert_allclose(got, np.sort(t[flags]))

    def test_missing_indices_partition(self):
        flags = np.array([[True, False], [False, True]])
        mask = ObservationMask(flags)
        assert mask.missing_count == 2
        missing = mask.missing_indices()
        assert {tuple(row) for row in missing} == {(1, 0), (0, 1)}

    def test_order_cap(self):
        with pytest.raises(ValueError):
            ObservationMask(np.ones((1,) * 9, dtype=bool))
