import numpy as np
import pytest

from ibquant.info import (
    ConditionalDist,
    JointXY,
    Pmf,
    avg_kl_distortion,
    entropy,
    kl_divergence,
    mutual_information,
    push_through_quantizer,
)
from ibquant.ib import Quantizer


def random_joint(rng, nx, ny):
    m = rng.uniform(size=(nx, ny))
    return JointXY(m / m.sum())


def random_quantizer(rng, ny, nz, deterministic):
    if deterministic:
        labels = rng.integers(0, nz, size=ny)
        return Quantizer.from_labels(labels, nz)
    return Quantizer.random_stochastic(ny, nz, rng)


def mi_by_hand(matrix):
    """Direct double loop over the definition, independent of the library path."""
    px = matrix.sum(axis=1)
    py = matrix.sum(axis=0)
    total = 0.0
    for i in range(matrix.shape[0]):
        for j in range(matrix.shape[1]):
            if matrix[i, j] > 0:
                total += matrix[i, j] * np.log2(matrix[i, j] / (px[i] * py[j]))
    return total


class TestPmf:
    def test_normalizes_small_deviation(self):
        p = Pmf(np.array([0.5, 0.5 + 5e-7]))
        assert abs(p.probs.sum() - 1.0) < 1e-15

    def test_rejects_large_deviation(self):
        with pytest.raises(ValueError):
            Pmf(np.array([0.5, 0.6]))

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            Pmf(np.array([1.1, -0.1]))

    def test_immutable(self):
        p = Pmf.uniform(3)
        with pytest.raises(ValueError):
            p.probs[0] = 0.7


class TestEntropy:
    def test_uniform_four_symbols(self):
        assert entropy(Pmf.uniform(4)) == pytest.approx(2.0, abs=1e-12)

    def test_point_mass(self):
        assert entropy(Pmf.point_mass(1, 5)) == 0.0

    def test_dyadic(self):
        assert entropy(Pmf(np.array([0.5, 0.25, 0.25]))) == pytest.approx(1.5, abs=1e-12)

    def test_bounded_by_log_alphabet(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            k = int(rng.integers(2, 9))
            raw = rng.uniform(size=k)
            h = entropy(Pmf(raw / raw.sum()))
            assert 0.0 <= h <= np.log2(k) + 1e-12


class TestKlDivergence:
    def test_identity_is_zero(self):
        p = Pmf(np.array([0.3, 0.7]))
        assert kl_divergence(p, p) == 0.0

    def test_log2_case(self):
        p = Pmf(np.array([1.0, 0.0]))
        q = Pmf(np.array([0.5, 0.5]))
        assert kl_divergence(p, q) == pytest.approx(1.0, abs=1e-12)

    def test_absolute_continuity_failure(self):
        p = Pmf(np.array([0.5, 0.5]))
        q = Pmf(np.array([1.0, 0.0]))
        assert kl_divergence(p, q) == float("inf")

    def test_alphabet_mismatch(self):
        with pytest.raises(ValueError):
            kl_divergence(Pmf.uniform(2), Pmf.uniform(3))

    def test_nonnegative_zero_iff_equal(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            k = int(rng.integers(2, 7))
            raw_p = rng.uniform(size=k)
            raw_q = rng.uniform(size=k)
            p = Pmf(raw_p / raw_p.sum())
            q = Pmf(raw_q / raw_q.sum())
            d = kl_divergence(p, q)
            assert d >= 0.0
            if np.abs(p.probs - q.probs).max() > 1e-9:
                assert d > 0.0
            assert kl_divergence(p, p) == 0.0


class TestMutualInformation:
    def test_product_joint_is_zero(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            raw_x = rng.uniform(size=4)
            raw_y = rng.uniform(size=5)
            px = raw_x / raw_x.sum()
            py = raw_y / raw_y.sum()
            assert mutual_information(JointXY(np.outer(px, py))) == pytest.approx(0.0, abs=1e-12)

    def test_noiseless_binary(self):
        j = JointXY(np.array([[0.5, 0.0], [0.0, 0.5]]))
        assert mutual_information(j) == pytest.approx(1.0, abs=1e-12)

    def test_bsc_011_against_binary_entropy(self):
        eps = 0.11
        j = JointXY(0.5 * np.array([[1 - eps, eps], [eps, 1 - eps]]))
        h2 = -eps * np.log2(eps) - (1 - eps) * np.log2(1 - eps)
        assert mutual_information(j) == pytest.approx(1.0 - h2, abs=1e-12)
        assert mutual_information(j) == pytest.approx(0.5000, abs=2e-4)

    def test_matches_hand_summation(self):
        rng = np.random.default_rng(19)
        for _ in range(25):
            j = random_joint(rng, int(rng.integers(2, 5)), int(rng.integers(2, 7)))
            assert mutual_information(j) == pytest.approx(mi_by_hand(j.matrix), abs=1e-12)


class TestPushThrough:
    def test_identity_returns_joint_unchanged(self):
        rng = np.random.default_rng(5)
        j = random_joint(rng, 3, 4)
        out = push_through_quantizer(j, Quantizer.identity(4))
        assert np.array_equal(out.matrix, j.matrix)

    def test_single_cluster_collapses(self):
        rng = np.random.default_rng(6)
        j = random_joint(rng, 3, 5)
        out = push_through_quantizer(j, Quantizer.single_cluster(5))
        assert np.allclose(out.matrix[:, 0], j.x_marginal().probs, atol=1e-15)
        assert mutual_information(out) == pytest.approx(0.0, abs=1e-12)

    def test_matches_hand_summation(self):
        rng = np.random.default_rng(8)
        j = random_joint(rng, 3, 2)
        labels = np.array([1, 0])
        q = Quantizer.from_labels(labels, 2)
        out = push_through_quantizer(j, q)
        expected = np.zeros((3, 2))
        for x in range(3):
            for y in range(2):
                expected[x, labels[y]] += j.matrix[x, y]
        assert np.allclose(out.matrix, expected, atol=1e-15)

    def test_dimension_mismatch(self):
        rng = np.random.default_rng(9)
        j = random_joint(rng, 2, 4)
        with pytest.raises(ValueError):
            push_through_quantizer(j, Quantizer.identity(5))

    def test_marginal_and_posterior_consistency(self):
        rng = np.random.default_rng(10)
        j = random_joint(rng, 3, 6)
        q = random_quantizer(rng, 6, 3, deterministic=False)
        out = push_through_quantizer(j, q)
        pz = j.y_marginal().probs @ q.mapping.rows
        assert np.allclose(out.y_marginal().probs, pz, atol=1e-12)


class TestAvgKlDistortion:
    def test_identity_is_zero(self):
        rng = np.random.default_rng(12)
        j = random_joint(rng, 4, 5)
        assert avg_kl_distortion(j, Quantizer.identity(5)) == pytest.approx(0.0, abs=1e-12)

    def test_single_cluster_equals_mi(self):
        rng = np.random.default_rng(13)
        j = random_joint(rng, 4, 5)
        got = avg_kl_distortion(j, Quantizer.single_cluster(5))
        assert got == pytest.approx(mutual_information(j), abs=1e-12)

    def test_equals_mi_difference(self):
        rng = np.random.default_rng(14)
        j = random_joint(rng, 4, 6)
        q = random_quantizer(rng, 6, 3, deterministic=True)
        lhs = avg_kl_distortion(j, q)
        rhs = mutual_information(j) - mutual_information(push_through_quantizer(j, q))
        assert abs(lhs - rhs) < 1e-10


class TestInvariants:
    def test_data_processing_inequality(self):
        rng = np.random.default_rng(21)
        for _ in range(100):
            j = random_joint(rng, int(rng.integers(2, 6)), int(rng.integers(2, 10)))
            nz = int(rng.integers(1, j.num_y + 1))
            q = random_quantizer(rng, j.num_y, nz, deterministic=bool(rng.integers(2)))
            assert mutual_information(push_through_quantizer(j, q)) <= mutual_information(j) + 1e-9

    def test_distortion_identity_over_random_pairs(self):
        rng = np.random.default_rng(22)
        for _ in range(100):
            j = random_joint(rng, int(rng.integers(2, 6)), int(rng.integers(2, 10)))
            nz = int(rng.integers(1, 7))
            q = random_quantizer(rng, j.num_y, nz, deterministic=bool(rng.integers(2)))
            gap = mutual_information(j) - mutual_information(push_through_quantizer(j, q))
            assert abs(avg_kl_distortion(j, q) - gap) < 1e-9

    def test_deterministic_rate_identity(self):
        rng = np.random.default_rng(23)
        for _ in range(50):
            j = random_joint(rng, 3, int(rng.integers(2, 9)))
            nz = int(rng.integers(1, 5))
            q = random_quantizer(rng, j.num_y, nz, deterministic=True)
            py = j.y_marginal().probs
            pz = Pmf(py @ q.mapping.rows)
            rate = mutual_information(JointXY(py[:, None] * q.mapping.rows))
            assert abs(rate - entropy(pz)) < 1e-9

    def test_rows_stay_normalized(self):
        rng = np.random.default_rng(24)
        j = random_joint(rng, 3, 5)
        q = random_quantizer(rng, 5, 3, deterministic=False)
        out = push_through_quantizer(j, q)
        assert abs(out.matrix.sum() - 1.0) < 1e-9
        cond = out.posterior_x_given_y()
        assert np.allclose(cond.rows.sum(axis=1), 1.0, atol=1e-9)


def test_conditional_dist_identity():
    c = ConditionalDist.identity(3)
    assert np.array_equal(c.rows, np.eye(3))
