import numpy as np
import pytest
from scipy.integrate import quad

from kboundary import (
    BoundaryFactorization,
    DiscreteMeasure,
    FiniteKernel,
    IndexOutOfRange,
    KernelSpec,
    NotPsd,
    PointSet,
    SampleBatch,
    ShapeMismatch,
    SingularCovariance,
    assemble_gram,
    consistency_check,
    empirical_covariance,
    log_density,
    minimality_test,
    realize,
    sample,
)


def _table_kernel(matrix, field_tag="complex"):
    g = np.asarray(matrix, dtype=complex)
    return FiniteKernel(
        points=PointSet.from_points(np.arange(g.shape[0], dtype=complex)),
        gram=g,
        field_tag=field_tag,
    )


class TestRealize:
    def test_identity_factor(self):
        R = realize(_table_kernel(np.eye(2)))
        np.testing.assert_allclose(R.factor @ np.conj(R.factor).T, np.eye(2), atol=1e-12)

    def test_two_by_two(self):
        G = np.array([[2.0, 1.0], [1.0, 2.0]])
        R = realize(_table_kernel(G))
        np.testing.assert_allclose(R.factor @ np.conj(R.factor).T, G, atol=1e-12)

    def test_rank_one(self):
        R = realize(_table_kernel([[1.0, 1.0], [1.0, 1.0]]))
        assert R.rank == 1
        col = R.factor[:, 0]
        assert abs(col[0] - col[1]) <= 1e-12
        np.testing.assert_allclose(np.abs(col), [1.0, 1.0], atol=1e-12)

    def test_not_psd(self):
        with pytest.raises(NotPsd):
            realize(_table_kernel([[1.0, 2.0], [2.0, 1.0]]))

    def test_deterministic(self):
        G = np.array([[2.0, 1.0], [1.0, 2.0]])
        R1 = realize(_table_kernel(G), seed=9)
        R2 = realize(_table_kernel(G), seed=9)
        assert np.array_equal(R1.factor, R2.factor)


class TestSample:
    def test_zero_kernel_draws_zero(self):
        batch = sample(realize(_table_kernel([[0.0]])), 100)
        assert np.all(batch.draws == 0.0)

    def test_scalar_real_mean(self):
        K = _table_kernel([[1.0]], field_tag="real")
        batch = sample(realize(K, seed=12345), 1_000_000)
        assert abs(batch.draws.mean()) <= 0.005

    def test_fixed_seed_bit_identical(self):
        K = _table_kernel([[2.0, 1.0], [1.0, 2.0]], field_tag="real")
        b1 = sample(realize(K, seed=77), 10_000)
        b2 = sample(realize(K, seed=77), 10_000)
        assert np.array_equal(b1.draws, b2.draws)

    def test_chunked_layout_is_part_of_the_contract(self):
        K = _table_kernel([[1.0]], field_tag="real")
        R = realize(K, seed=5)
        b1 = sample(R, 3000, chunk_size=1024)
        b2 = sample(R, 3000, chunk_size=1024)
        assert np.array_equal(b1.draws, b2.draws)
        assert b1.seed_record == {"seed": 5, "chunk_size": 1024, "count": 3000}

    def test_count_validated(self):
        with pytest.raises(ShapeMismatch):
            sample(realize(_table_kernel([[1.0]])), 0)


class TestEmpiricalCovariance:
    def test_zero_draws(self):
        batch = SampleBatch(draws=np.zeros((10, 2)), seed_record={"seed": 0})
        np.testing.assert_allclose(empirical_covariance(batch), np.zeros((2, 2)))

    def test_needs_two_draws(self):
        batch = SampleBatch(draws=np.zeros((1, 2)), seed_record={"seed": 0})
        with pytest.raises(ShapeMismatch):
            empirical_covariance(batch)

    def test_identity_real(self):
        K = _table_kernel(np.eye(2), field_tag="real")
        batch = sample(realize(K, seed=101), 200_000)
        emp = empirical_covariance(batch)
        assert np.abs(emp - np.eye(2)).max() <= 0.02

    def test_complex_circular_convention(self):
        rng = np.random.default_rng(3)
        A = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        G = A @ np.conj(A).T
        K = _table_kernel(G)
        batch = sample(realize(K, seed=55), 200_000)
        emp = empirical_covariance(batch)
        assert np.abs(emp - G).max() <= 4.0 * np.abs(G).max() / np.sqrt(200_000)


class TestLogDensity:
    def test_standard_normal_at_mode(self):
        K = _table_kernel([[1.0]], field_tag="real")
        assert log_density(K, [0.0]) == pytest.approx(-0.5 * np.log(2 * np.pi))

    def test_standard_normal_quadratic_term(self):
        K = _table_kernel([[1.0]], field_tag="real")
        assert log_density(K, [1.0]) == pytest.approx(-0.5 * np.log(2 * np.pi) - 0.5)

    def test_circular_complex_normalization(self):
        K = _table_kernel([[1.0]])
        assert log_density(K, [0.0]) == pytest.approx(-np.log(np.pi))

    def test_singular_covariance(self):
        with pytest.raises(SingularCovariance):
            log_density(_table_kernel([[1.0, 1.0], [1.0, 1.0]]), [0.0, 0.0])

    def test_density_integrates_to_one(self):
        K = _table_kernel([[0.7]], field_tag="real")
        total, _ = quad(lambda x: np.exp(log_density(K, [x])), -10, 10)
        assert total == pytest.approx(1.0, abs=1e-6)


class TestConsistency:
    def test_full_subset(self):
        K = _table_kernel(np.eye(3), field_tag="real")
        res = consistency_check(K, [0, 1, 2], 20_000, seed=1)
        assert res["exact_ok"]

    def test_identity_submatrix_exact(self):
        K = _table_kernel(np.eye(3), field_tag="real")
        res = consistency_check(K, [0, 2], 20_000, seed=2)
        assert res["exact_ok"]

    def test_szego_grid_subsample(self):
        ps = PointSet.from_points([0.0, 0.2, -0.3, 0.25j, -0.1 - 0.4j])
        K = assemble_gram(KernelSpec.szego(), ps)
        res = consistency_check(K, [1, 3], 100_000, seed=8)
        assert res["exact_ok"]
        assert res["empirical_deviation"] <= 0.03

    def test_index_out_of_range(self):
        K = _table_kernel(np.eye(2))
        with pytest.raises(IndexOutOfRange):
            consistency_check(K, [0, 5], 100, seed=0)


def test_sampled_factorization_is_not_minimal():
    # Viewing N >> n draws as atoms of an empirical factorization exposes
    # the non-minimality of the Gaussian solution.
    rng = np.random.default_rng(7)
    A = rng.standard_normal((3, 3))
    G = A @ A.T
    K = _table_kernel(G, field_tag="real")
    batch = sample(realize(K, seed=19), 64)
    weights = np.full(64, 1.0 / 64.0)
    measure = DiscreteMeasure(atoms=tuple(range(64)), weights=weights, normalized=True)
    F = BoundaryFactorization(
        kernel=K, measure=measure, features=batch.draws.T, tol=1.0
    )
    result = minimality_test(F)
    assert not result["is_minimal"]
    assert result["feature_rank"] <= 3
