import numpy as np
import pandas as pd
import pytest

from chainforge.specialization import (
    EmptyTradeError,
    binarize,
    compute_rca,
    diversification,
    read_matrix,
    ubiquity,
    write_matrix,
)
from oracles import rca_by_hand


class TestComputeRca:
    def test_single_cell_is_one(self):
        assert compute_rca([[5.0]]).values.iloc[0, 0] == 1.0

    def test_uniform_matrix_all_ones(self):
        rca = compute_rca(np.ones((2, 2)))
        assert np.allclose(rca.values.to_numpy(), 1.0)

    def test_hand_computed_marginals(self):
        rca = compute_rca([[10.0, 0.0], [5.0, 5.0]])
        expected = np.array([[4.0 / 3.0, 0.0], [2.0 / 3.0, 2.0]])
        assert np.allclose(rca.values.to_numpy(), expected, atol=1e-12)

    def test_matches_loop_oracle_on_random_matrices(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            w = rng.random((int(rng.integers(2, 8)), int(rng.integers(2, 8)))) * 100
            w[w < 20] = 0.0
            if w.sum() == 0:
                continue
            got = compute_rca(w).values.to_numpy()
            assert np.allclose(got, np.array(rca_by_hand(w)), atol=1e-12)

    def test_all_zero_matrix_errors(self):
        with pytest.raises(EmptyTradeError):
            compute_rca(np.zeros((3, 3)))

    def test_negative_entries_rejected(self):
        with pytest.raises(ValueError):
            compute_rca([[1.0, -2.0]])

    def test_zero_marginals_give_zero_rows(self):
        rca = compute_rca([[0.0, 0.0], [5.0, 5.0]])
        assert np.all(rca.values.to_numpy()[0] == 0.0)

    def test_global_scale_invariance(self):
        rng = np.random.default_rng(4)
        w = rng.random((5, 6)) * 1e6
        base = compute_rca(w).values.to_numpy()
        for alpha in (1e-6, 3.0, 1e8):
            assert np.allclose(compute_rca(alpha * w).values.to_numpy(), base, rtol=1e-12)

    def test_trade_share_weighted_mean_is_one(self):
        rng = np.random.default_rng(12)
        for _ in range(10):
            w = rng.random((6, 5)) + 0.05  # all marginals positive
            rca = compute_rca(w).values.to_numpy()
            weights = w.sum(axis=1) / w.sum()
            per_product = weights @ rca
            assert np.allclose(per_product, 1.0, atol=1e-12)

    def test_dataframe_labels_preserved(self):
        w = pd.DataFrame([[1.0, 2.0]], index=["DEU"], columns=["a", "b"])
        rca = compute_rca(w, year=2020)
        assert rca.countries == ["DEU"] and rca.products == ["a", "b"] and rca.year == 2020


class TestBinarize:
    def test_hand_fixture(self):
        m = binarize(compute_rca([[10.0, 0.0], [5.0, 5.0]]), 1.0)
        assert m.m.to_numpy().tolist() == [[1, 0], [0, 1]]

    def test_boundary_is_inclusive(self):
        rca = compute_rca(np.ones((2, 2)))  # all exactly 1
        m = binarize(rca, 1.0)
        assert m.m.to_numpy().sum() == 4

    def test_zero_row_stays_zero(self):
        m = binarize(compute_rca([[0.0, 0.0], [5.0, 5.0]]), 1.0)
        assert m.m.to_numpy()[0].sum() == 0

    def test_monotone_in_threshold(self):
        rng = np.random.default_rng(8)
        rca = compute_rca(rng.random((6, 7)) * 10)
        previous = binarize(rca, 0.5).m.to_numpy()
        for threshold in (0.8, 1.0, 1.5, 3.0):
            current = binarize(rca, threshold).m.to_numpy()
            assert np.all(current <= previous)
            previous = current

    def test_nonpositive_threshold_rejected(self):
        with pytest.raises(ValueError):
            binarize(compute_rca([[1.0]]), 0.0)


class TestCounts:
    def test_diversification_and_ubiquity(self):
        from chainforge.specialization import SpecializationMatrix

        m = SpecializationMatrix(m=pd.DataFrame([[1, 1], [0, 1]], index=["a", "b"], columns=["p", "q"]))
        assert diversification(m).tolist() == [2, 1]
        assert ubiquity(m).tolist() == [1, 2]

    def test_full_matrix(self):
        m = binarize(compute_rca(np.ones((3, 4))), 1.0)
        assert diversification(m).tolist() == [4, 4, 4]
        assert ubiquity(m).tolist() == [3, 3, 3, 3]


class TestMatrixIO:
    def test_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(17)
        w = pd.DataFrame(rng.random((4, 3)) * 1e9, index=list("ABCD"), columns=["110000", "220000", "330000"])
        rca = compute_rca(w)
        path = tmp_path / "rca.csv"
        write_matrix(rca.values, path, header_lines=["seed=0"])
        back = read_matrix(path)
        assert list(back.index) == list(rca.values.index)
        assert list(back.columns) == list(rca.values.columns)
        assert np.array_equal(back.to_numpy(), rca.values.to_numpy())
