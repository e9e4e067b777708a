import numpy as np
import pytest

from ahofm.basis import diff_penalty, eval_basis, eval_basis_matrix, make_spec


def cox_de_boor(x, knots, degree, m):
    """Literal textbook recursion, used as an independent reference."""
    if degree == 0:
        return 1.0 if knots[m] <= x < knots[m + 1] else 0.0
    left = 0.0
    den = knots[m + degree] - knots[m]
    if den > 0:
        left = (x - knots[m]) / den * cox_de_boor(x, knots, degree - 1, m)
    right = 0.0
    den = knots[m + degree + 1] - knots[m + 1]
    if den > 0:
        right = (knots[m + degree + 1] - x) / den * cox_de_boor(x, knots, degree - 1, m + 1)
    return left + right


class TestMakeSpec:
    def test_knot_layout_example(self):
        spec = make_spec(np.array([0.0, 10.0]), num_basis=6, degree=3)
        expected = [0, 0, 0, 0, 10 / 3, 20 / 3, 10, 10, 10, 10]
        np.testing.assert_allclose(spec.knots, expected, atol=1e-12)
        assert spec.num_knots == 6 + 3 + 1 == len(spec.knots)

    def test_domain_from_data(self):
        rng = np.random.default_rng(0)
        x = rng.uniform(-2.0, 7.0, size=100)
        spec = make_spec(x, num_basis=10)
        assert spec.domain_lo == x.min()
        assert spec.domain_hi == x.max()

    def test_degenerate_column_rejected(self):
        with pytest.raises(ValueError, match="degenerate feature"):
            make_spec(np.full(10, 3.0), feature_index=4)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError, match="non-finite"):
            make_spec(np.array([0.0, np.nan, 1.0]))

    def test_too_few_basis_functions(self):
        with pytest.raises(ValueError, match="num_basis"):
            make_spec(np.array([0.0, 1.0]), num_basis=3, degree=3)


class TestEvalBasis:
    def test_boundary_values(self):
        spec = make_spec(np.array([0.0, 1.0]), num_basis=7)
        lo = eval_basis(0.0, spec)
        hi = eval_basis(1.0, spec)
        assert lo[0] == 1.0 and np.all(lo[1:] == 0.0)
        assert hi[-1] == 1.0 and np.all(hi[:-1] == 0.0)

    def test_partition_of_unity_and_nonnegative(self):
        rng = np.random.default_rng(1)
        for trial in range(20):
            x = rng.normal(size=50) * rng.uniform(0.5, 5.0)
            spec = make_spec(x, num_basis=int(rng.integers(5, 13)))
            b = eval_basis_matrix(x, spec).values
            np.testing.assert_allclose(b.sum(axis=1), 1.0, atol=1e-12)
            assert np.all(b >= 0)

    def test_out_of_range_clamps_to_boundary(self):
        spec = make_spec(np.array([0.0, 1.0]), num_basis=6)
        below = eval_basis(-3.5, spec)
        above = eval_basis(9.9, spec)
        np.testing.assert_array_equal(below, eval_basis(0.0, spec))
        np.testing.assert_array_equal(above, eval_basis(1.0, spec))

    def test_local_support(self):
        spec = make_spec(np.array([0.0, 1.0]), num_basis=12, degree=3)
        rng = np.random.default_rng(2)
        b = eval_basis_matrix(rng.uniform(0, 1, 200), spec).values
        for row in b:
            nz = np.nonzero(row)[0]
            assert nz.size <= spec.degree + 1
            assert np.all(np.diff(nz) == 1)

    def test_symmetric_design_reflects(self):
        spec = make_spec(np.array([-1.0, 1.0]), num_basis=8)
        x = np.array([0.3, -0.3])
        b = eval_basis_matrix(x, spec).values
        np.testing.assert_allclose(b[0], b[1][::-1], atol=1e-12)

    def test_matches_literal_recursion(self):
        rng = np.random.default_rng(3)
        for degree in (1, 2, 3):
            spec = make_spec(np.array([0.0, 1.0]), num_basis=7, degree=degree)
            xs = rng.uniform(0.01, 0.99, size=25)
            b = eval_basis_matrix(xs, spec).values
            ref = np.array(
                [[cox_de_boor(x, spec.knots, degree, m) for m in range(7)] for x in xs]
            )
            np.testing.assert_allclose(b, ref, atol=1e-12)

    def test_non_finite_rejected(self):
        spec = make_spec(np.array([0.0, 1.0]))
        with pytest.raises(ValueError, match="non-finite"):
            eval_basis_matrix(np.array([0.1, np.inf]), spec)


class TestDiffPenalty:
    def test_first_order_example(self):
        p = diff_penalty(3, order=1).values
        np.testing.assert_array_equal(p, [[1, -1, 0], [-1, 2, -1], [0, -1, 1]])

    def test_psd_and_null_space(self):
        for m, order in [(5, 1), (8, 2), (10, 2), (12, 3)]:
            p = diff_penalty(m, order).values
            eig = np.linalg.eigvalsh(p)
            assert eig.min() >= -1e-10
            assert np.sum(eig < 1e-10 * max(eig.max(), 1.0)) == order
            # polynomial coefficient sequences of degree < order are annihilated
            for deg in range(order):
                v = np.arange(m, dtype=float) ** deg
                np.testing.assert_allclose(p @ v, 0.0, atol=1e-10)

    def test_quadratic_form_is_sum_of_squared_differences(self):
        rng = np.random.default_rng(4)
        beta = rng.normal(size=9)
        for order in (1, 2, 3):
            p = diff_penalty(9, order).values
            direct = float(np.sum(np.diff(beta, n=order) ** 2))
            np.testing.assert_allclose(beta @ p @ beta, direct, rtol=1e-12)

    def test_bad_order(self):
        with pytest.raises(ValueError):
            diff_penalty(4, order=0)
        with pytest.raises(ValueError):
            diff_penalty(4, order=4)
