import numpy as np
import pytest
from scipy import linalg

from ahofm.basis import diff_penalty, eval_basis_matrix, make_spec
from ahofm.smoothing import df_exact, dffun, dro, homogeneous_smoothing, sv2la


def random_basis(rng, n=200, m=10, order=2, uniform=False):
    # uniform draws guarantee support in every knot interval; normal draws
    # exercise uneven designs but can starve the tails for small n
    x = rng.uniform(-3.0, 3.0, size=n) if uniform else rng.normal(size=n)
    spec = make_spec(x, num_basis=m, penalty_order=order)
    return eval_basis_matrix(x, spec), diff_penalty(m, order)


class TestDro:
    def test_matches_generalized_eigenvalues(self):
        """Independent route: eigenvalues of (P, B'B) as a generalized problem."""
        rng = np.random.default_rng(0)
        for _ in range(10):
            b, p = random_basis(rng, m=int(rng.integers(6, 12)))
            s = dro(b, p).values
            ref = linalg.eigh(p.values, b.values.T @ b.values, eigvals_only=True)[::-1]
            ref = np.where(ref < ref.max() * 1e-9, 0.0, ref)
            np.testing.assert_allclose(s, ref, rtol=1e-6, atol=1e-9)

    def test_descending_nonnegative_null_count(self):
        rng = np.random.default_rng(1)
        for order in (1, 2, 3):
            b, p = random_basis(rng, m=10, order=order)
            s = dro(b, p)
            assert np.all(np.diff(s.values) <= 0)
            assert np.all(s.values >= 0)
            assert s.null_dim == order


class TestDffun:
    def test_lambda_zero_gives_m(self):
        rng = np.random.default_rng(2)
        b, p = random_basis(rng, m=9)
        assert dffun(dro(b, p), 0.0) == 9.0

    def test_analytic_value(self):
        # s = (2, 1, 0), lam = 1: 1/3 + 1/2 + 1 = 11/6
        np.testing.assert_allclose(dffun(np.array([2.0, 1.0, 0.0]), 1.0), 11 / 6)

    def test_monotone_decreasing_in_lambda(self):
        rng = np.random.default_rng(3)
        b, p = random_basis(rng)
        s = dro(b, p)
        lams = np.logspace(-6, 8, 30)
        vals = [dffun(s, l) for l in lams]
        assert np.all(np.diff(vals) < 0)

    def test_negative_lambda_rejected(self):
        with pytest.raises(ValueError):
            dffun(np.array([1.0]), -0.5)


class TestSv2La:
    def test_analytic_inverse(self):
        # 1/(1 + lam) + 1 = 1.5  =>  lam = 1
        lam = sv2la(np.array([1.0, 0.0]), 1.5)
        np.testing.assert_allclose(lam, 1.0, rtol=1e-6)

    def test_round_trip_random_bases(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            m = int(rng.integers(10, 13))
            b, p = random_basis(rng, n=int(rng.integers(100, 300)), m=m, uniform=True)
            s = dro(b, p)
            for df in (3.0, 5.0, 10.0, float(m)):
                lam = sv2la(s, df)
                assert abs(dffun(s, lam) - df) <= 1e-6

    def test_df_equal_m_gives_exact_zero(self):
        rng = np.random.default_rng(5)
        b, p = random_basis(rng, m=8)
        assert sv2la(dro(b, p), 8.0) == 0.0

    def test_huge_lambda_approaches_null_dim(self):
        rng = np.random.default_rng(6)
        for order in (1, 2):
            b, p = random_basis(rng, m=10, order=order)
            s = dro(b, p)
            assert abs(dffun(s, 1e10) - order) <= 1e-3

    def test_unreachable_df(self):
        rng = np.random.default_rng(7)
        b, p = random_basis(rng, m=10, order=2)
        s = dro(b, p)
        with pytest.raises(ValueError, match=r"unreachable df.*\(2, 10\]"):
            sv2la(s, 2.0)
        with pytest.raises(ValueError, match="unreachable df"):
            sv2la(s, 11.0)


class TestHomogeneousSmoothing:
    def test_replicated_across_factors_and_complete(self):
        rng = np.random.default_rng(8)
        bases, penalties = [], []
        for j in range(3):
            b, p = random_basis(rng)
            bases.append(b)
            penalties.append(p)
        table = homogeneous_smoothing(
            bases, penalties, {1: 6.0, 2: 5.0, 3: 4.0}, {2: 4, 3: 2}
        )
        keys = set(table.lambdas)
        expected = {(1, j, 0) for j in range(3)}
        expected |= {(2, j, f) for j in range(3) for f in range(4)}
        expected |= {(3, j, f) for j in range(3) for f in range(2)}
        assert keys == expected
        for j in range(3):
            lams2 = {table.lam(2, j, f) for f in range(4)}
            assert len(lams2) == 1
            # same feature, different degree target, different lambda
            assert table.lam(2, j, 0) != table.lam(3, j, 0)

    def test_lambda_reproduces_df_per_feature(self):
        rng = np.random.default_rng(9)
        bases, penalties = [], []
        for j in range(2):
            b, p = random_basis(rng, n=150)
            bases.append(b)
            penalties.append(p)
        table = homogeneous_smoothing(bases, penalties, {1: 7.0, 2: 4.5}, {2: 3})
        for j in range(2):
            s = dro(bases[j], penalties[j])
            assert abs(dffun(s, table.lam(1, j, 0)) - 7.0) <= 1e-6
            assert abs(dffun(s, table.lam(2, j, 1)) - 4.5) <= 1e-6

    def test_error_names_feature(self):
        rng = np.random.default_rng(10)
        b, p = random_basis(rng, m=6)
        with pytest.raises(ValueError, match="feature 0, degree 1"):
            homogeneous_smoothing([b], [p], {1: 1.0, 2: 5.0}, {2: 1})

    def test_rows_sorted(self):
        rng = np.random.default_rng(11)
        b, p = random_basis(rng)
        table = homogeneous_smoothing([b], [p], {1: 5.0, 2: 4.0}, {2: 2})
        rows = table.rows()
        assert [r[:3] for r in rows] == sorted(r[:3] for r in rows)
        assert all(len(r) == 5 for r in rows)


class TestDfExact:
    def test_unpenalized_equals_m(self):
        rng = np.random.default_rng(12)
        b, p = random_basis(rng, n=80, m=7)
        np.testing.assert_allclose(df_exact(b, p, 0.0), 7.0, atol=1e-8)

    def test_matches_hat_matrix_trace(self):
        """Direct n x n hat-matrix construction as the reference."""
        rng = np.random.default_rng(13)
        b, p = random_basis(rng, n=60, m=6)
        for lam in (0.1, 3.0, 50.0):
            h = b.values @ linalg.solve(
                b.values.T @ b.values + lam * p.values, b.values.T, assume_a="pos"
            )
            ref = float(2.0 * np.trace(h) - np.trace(h.T @ h))
            np.testing.assert_allclose(df_exact(b, p, lam), ref, rtol=1e-9)

    def test_exceeds_tr_h_for_positive_lambda(self):
        rng = np.random.default_rng(14)
        b, p = random_basis(rng)
        s = dro(b, p)
        for lam in (0.5, 10.0):
            assert df_exact(b, p, lam) > dffun(s, lam)
