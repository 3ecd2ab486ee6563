import numpy as np
import pytest

from parachain import (
    BadLugsailParams,
    BatchSpec,
    ChainSet,
    DomainError,
    GibbsParams,
    RngState,
    TooFewBatches,
    TooFewChains,
    abm,
    autocovariance,
    batch_means,
    bm,
    default_batch_size,
    frobenius_norm,
    gibbs_run,
    gibbs_start_points,
    lugsail_bm,
    lugsail_combine,
    mix64,
    naive,
    rbm,
)

TWO_CHAINS = ChainSet([np.array([1.0, 2.0, 3.0, 4.0]), np.array([5.0, 6.0, 7.0, 8.0])])


def random_chain_set(rng, m=None, n=None, p=None):
    m = m or int(rng.integers(1, 5))
    n = n or int(rng.integers(8, 40))
    p = p or int(rng.integers(1, 4))
    return ChainSet(rng.standard_normal((m, n, p)))


class TestBatchMeans:
    def test_hand_example(self):
        got = batch_means([1.0, 2.0, 3.0, 4.0], 2)
        np.testing.assert_allclose(got.ravel(), [1.5, 3.5])

    def test_trailing_rows_discarded(self):
        got = batch_means([1.0, 2.0, 3.0, 4.0, 9.0], 2)
        np.testing.assert_allclose(got.ravel(), [1.5, 3.5])

    def test_constant_chain(self):
        got = batch_means(np.full(12, 3.25), 3)
        np.testing.assert_allclose(got.ravel(), [3.25] * 4)

    def test_too_few_batches(self):
        with pytest.raises(TooFewBatches):
            batch_means([1.0, 2.0, 3.0, 4.0], 3)

    def test_bad_batch_size(self):
        with pytest.raises(DomainError):
            batch_means([1.0, 2.0, 3.0, 4.0], 0)


class TestBm:
    def test_hand_example(self):
        np.testing.assert_allclose(bm([1.0, 2.0, 3.0, 4.0], 2).matrix, [[4.0]])

    def test_constant_chain_is_zero(self):
        np.testing.assert_allclose(bm(np.full(20, 7.0), 4).matrix, [[0.0]])

    def test_iid_normal_recovers_unit_variance(self):
        # one-chain batch means on iid N(0,1): sampling sd ~ sqrt(2 b / n) ~ 0.08
        n = 100_000
        chain = RngState(seed=404, stream=0).generator().standard_normal(n)
        est = bm(chain, int(np.sqrt(n)))
        assert abs(est.matrix[0, 0] - 1.0) <= 0.15

    def test_metadata(self):
        est = bm(np.arange(10.0), 3)
        assert (est.method, est.b, est.n, est.m, est.r, est.c) == ("bm", 3, 10, 1, 1, 0.0)


class TestLugsailCombine:
    def test_r_one_is_identity(self):
        base = bm([1.0, 2.0, 3.0, 4.0], 2)
        got = lugsail_combine(base, base, r=1, c=0.5)
        np.testing.assert_array_equal(got.matrix, base.matrix)

    def test_c_zero_is_identity(self):
        base = bm([1.0, 2.0, 3.0, 4.0], 2)
        other = bm([1.0, 2.0, 3.0, 4.0], 1)
        got = lugsail_combine(base, other, r=2, c=0.0)
        np.testing.assert_array_equal(got.matrix, base.matrix)

    def test_weights(self):
        a = bm(np.arange(12.0), 3)
        b = bm(np.arange(12.0), 1)
        a = type(a)(matrix=np.array([[4.0]]), method="bm", r=1, c=0.0, b=3, n=12, m=1)
        b = type(b)(matrix=np.array([[3.0]]), method="bm", r=1, c=0.0, b=1, n=12, m=1)
        got = lugsail_combine(a, b, r=3, c=0.5)
        np.testing.assert_allclose(got.matrix, [[5.0]])

    @pytest.mark.parametrize("r,c", [(0, 0.5), (3, 1.0), (3, 1.5), (3, -0.1)])
    def test_bad_params(self, r, c):
        base = bm([1.0, 2.0, 3.0, 4.0], 2)
        with pytest.raises(BadLugsailParams):
            lugsail_combine(base, base, r=r, c=c)

    def test_mismatched_pair(self):
        a = bm(np.arange(12.0), 4)
        b = bm(np.arange(12.0), 2)  # floor(4/3) is 1, not 2
        with pytest.raises(BadLugsailParams):
            lugsail_combine(a, b, r=3, c=0.5)


class TestAbm:
    def test_single_chain_equals_lugsail_bm(self):
        rng = np.random.default_rng(8)
        chain = rng.standard_normal((50, 2))
        spec = BatchSpec(b=7, r=3, c=0.5)
        got = abm(ChainSet([chain]), spec)
        np.testing.assert_array_equal(got.matrix, lugsail_bm(chain, spec).matrix)

    def test_two_chains_hand_example(self):
        np.testing.assert_allclose(abm(TWO_CHAINS, BatchSpec(b=2)).matrix, [[4.0]])

    def test_identical_chains_average_to_one(self):
        rng = np.random.default_rng(9)
        chain = rng.standard_normal((30, 2))
        spec = BatchSpec(b=5)
        got = abm(ChainSet([chain, chain.copy()]), spec)
        np.testing.assert_allclose(got.matrix, lugsail_bm(chain, spec).matrix, rtol=1e-14)


class TestRbm:
    def test_single_chain_reduces_to_bm_exactly(self):
        rng = np.random.default_rng(10)
        for _ in range(10):
            chain = rng.standard_normal((int(rng.integers(8, 60)), int(rng.integers(1, 4))))
            b = int(rng.integers(1, chain.shape[0] // 2 + 1))
            got = rbm(ChainSet([chain]), BatchSpec(b=b))
            np.testing.assert_array_equal(got.matrix, bm(chain, b).matrix)

    def test_two_chains_hand_example(self):
        np.testing.assert_allclose(rbm(TWO_CHAINS, BatchSpec(b=2)).matrix, [[40.0 / 3.0]])

    def test_separated_chains_dominate_abm(self):
        got_rbm = rbm(TWO_CHAINS, BatchSpec(b=2)).matrix[0, 0]
        got_abm = abm(TWO_CHAINS, BatchSpec(b=2)).matrix[0, 0]
        assert got_rbm > 3.0 * got_abm

    def test_plain_versions_are_positive_semidefinite(self):
        rng = np.random.default_rng(12)
        for _ in range(25):
            cs = random_chain_set(rng)
            b = int(rng.integers(1, cs.n // 2 + 1))
            for mat in (rbm(cs, BatchSpec(b=b)).matrix, abm(cs, BatchSpec(b=b)).matrix):
                eig = np.linalg.eigvalsh(mat)
                assert eig.min() >= -1e-10 * max(1.0, eig.max())

    def test_chain_permutation_invariance(self):
        rng = np.random.default_rng(13)
        cs = random_chain_set(rng, m=4, n=30, p=2)
        perm = ChainSet(cs.values[[2, 0, 3, 1]])
        spec = BatchSpec(b=5, r=3, c=0.5)
        np.testing.assert_allclose(rbm(cs, spec).matrix, rbm(perm, spec).matrix, rtol=1e-12, atol=1e-13)
        np.testing.assert_allclose(abm(cs, spec).matrix, abm(perm, spec).matrix, rtol=1e-12, atol=1e-13)
        np.testing.assert_allclose(naive(cs).matrix, naive(perm).matrix, rtol=1e-12, atol=1e-13)


class TestNaive:
    def test_hand_example(self):
        np.testing.assert_allclose(naive(TWO_CHAINS).matrix, [[32.0]])

    def test_identical_chains_vanish(self):
        chain = np.random.default_rng(14).standard_normal((20, 2))
        got = naive(ChainSet([chain, chain.copy()]))
        np.testing.assert_allclose(got.matrix, np.zeros((2, 2)), atol=1e-12)

    def test_rank_at_most_m_minus_one(self):
        rng = np.random.default_rng(15)
        cs = random_chain_set(rng, m=2, n=25, p=2)
        assert np.linalg.matrix_rank(naive(cs).matrix, tol=1e-10) <= 1

    def test_needs_two_chains(self):
        with pytest.raises(TooFewChains):
            naive(ChainSet([np.arange(10.0)]))


class TestAutocovariance:
    def test_lag_zero_divisor_n(self):
        np.testing.assert_allclose(autocovariance([0.0, 2.0], 0), [[1.0]])

    def test_constant_chain(self):
        np.testing.assert_allclose(autocovariance(np.full(10, 2.0), 3), [[0.0]])

    def test_alternating_limit(self):
        n = 10_000
        chain = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
        got = autocovariance(chain, 1)[0, 0]
        assert got == pytest.approx(-1.0, abs=2e-4)

    def test_lag_domain(self):
        with pytest.raises(DomainError):
            autocovariance([1.0, 2.0], 2)
        with pytest.raises(DomainError):
            autocovariance([1.0, 2.0], -1)


class TestDefaultBatchSize:
    def test_sqrt(self):
        assert default_batch_size(10_000, "sqrt") == 100

    def test_cube_root(self):
        assert default_batch_size(1000, "cube_root", 1.0) == 10

    def test_cube_root_multiplier(self):
        assert default_batch_size(1000, "cube_root", 3.0) == 30

    def test_exact_integer_cube_roots(self):
        # float cube roots land just under the integer for perfect cubes
        for k in (5, 10, 21, 64):
            assert default_batch_size(k**3, "cube_root", 1.0) == k

    def test_clamped_to_two_batches(self):
        assert default_batch_size(100, "cube_root", 50.0) == 50

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            default_batch_size(3, "sqrt")
        with pytest.raises(DomainError):
            default_batch_size(100, "sqrt", -1.0)
        with pytest.raises(DomainError):
            default_batch_size(100, "fourth_root")


class TestIdentities:
    """Exact algebraic structure of the estimators."""

    def test_decomposition_into_abm_plus_between_term(self):
        # rbm = (m(a-1)/(am-1)) abm + (ab/(am-1)) sum_k outer(mu_k - mu)
        rng = np.random.default_rng(16)
        for _ in range(100):
            m = int(rng.integers(1, 5))
            a = int(rng.integers(2, 7))
            b = int(rng.integers(1, 6))
            p = int(rng.integers(1, 4))
            cs = ChainSet(rng.standard_normal((m, a * b, p)))
            spec = BatchSpec(b=b)
            got = rbm(cs, spec).matrix
            abm_part = m * (a - 1) / (a * m - 1) * abm(cs, spec).matrix
            chain_means = cs.values.mean(axis=1)
            dev = chain_means - chain_means.mean(axis=0)
            between = a * b / (a * m - 1) * (dev.T @ dev)
            err = frobenius_norm(got - abm_part - between)
            assert err <= 1e-10 * max(1.0, frobenius_norm(got))

    def test_centering_shift_identity(self):
        # sum_k outer(mu_k - mu) = sum_k outer(mu_k - ref) - m outer(mu - ref)
        rng = np.random.default_rng(17)
        for _ in range(100):
            m = int(rng.integers(2, 6))
            p = int(rng.integers(1, 4))
            chain_means = rng.standard_normal((m, p))
            ref = rng.standard_normal(p)
            mu = chain_means.mean(axis=0)
            lhs = (chain_means - mu).T @ (chain_means - mu)
            dev_ref = chain_means - ref
            rhs = dev_ref.T @ dev_ref - m * np.outer(mu - ref, mu - ref)
            assert frobenius_norm(lhs - rhs) <= 1e-10 * max(1.0, frobenius_norm(lhs))

    def test_affine_equivariance(self):
        rng = np.random.default_rng(18)
        for _ in range(20):
            cs = random_chain_set(rng, m=3, n=24, p=2)
            amat = rng.standard_normal((2, 2)) + 2 * np.eye(2)
            shift = rng.standard_normal(2)
            mapped = ChainSet(cs.values @ amat.T + shift)
            spec = BatchSpec(b=4, r=3, c=0.5)
            for fn in (
                lambda c: rbm(c, spec).matrix,
                lambda c: abm(c, spec).matrix,
                lambda c: naive(c).matrix,
            ):
                want = amat @ fn(cs) @ amat.T
                got = fn(mapped)
                assert frobenius_norm(got - want) <= 1e-9 * max(1.0, frobenius_norm(want))

    def test_lugsail_inflates_under_strong_autocorrelation(self):
        # With heavy positive autocorrelation the plain estimator biases low;
        # the (r=3, c=1/2) recombination lands on the high side instead.
        params = GibbsParams(rho=0.999)
        starts = gibbs_start_points(params, 5)
        reps, n, b = 200, 1000, 10
        plain_traces = np.empty(reps)
        lug_traces = np.empty(reps)
        for j in range(reps):
            chains = [
                gibbs_run(params, n, starts[k], RngState(seed=55, stream=mix64(55, j, k)))
                for k in range(5)
            ]
            cs = ChainSet(np.stack(chains), validate=False)
            plain_traces[j] = np.trace(rbm(cs, BatchSpec(b=b)).matrix)
            lug_traces[j] = np.trace(rbm(cs, BatchSpec(b=b, r=3, c=0.5)).matrix)
        assert lug_traces.mean() > plain_traces.mean()
