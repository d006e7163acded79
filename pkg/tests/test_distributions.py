import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy import stats

from chansim.distributions import (
    BoxUniform,
    Categorical,
    Gaussian,
    GaussianTransform,
    InfiniteDivergenceError,
    TransformedTruncatedGaussian,
    TruncatedGaussian,
    TruncatedGaussianSpec,
    UnitCellUniform,
    compute_m,
    compute_wmin_gaussian,
    dirichlet_sample,
    gaussian_mutual_information,
    kl_bits,
    normal_cdf,
    normal_ppf,
    tvd,
    uniform_categorical,
)
from chansim.randomness import Stream, StreamKey

mp.mp.dps = 40


def mp_cdf(x, var):
    return mp.ncdf(mp.mpf(x) / mp.sqrt(var))


def mp_m(sigma, theta, dim):
    tc = 1 - (1 - mp.mpf(theta)) ** (mp.mpf(1) / dim)
    b = mp.sqrt(2) * mp.erfinv(1 - tc)
    var = mp.mpf(sigma) ** 2 + 1
    return int(mp.floor(1 / (mp_cdf(b, var) - mp_cdf(-b, var))))


def prob_vectors(min_size=2, max_size=12):
    return st.lists(st.floats(0.0, 1.0), min_size=min_size, max_size=max_size).filter(
        lambda w: sum(w) > 1e-3
    ).map(lambda w: np.asarray(w) / np.sum(w))


# --- normal CDF accuracy --------------------------------------------------

@pytest.mark.parametrize("x", [-12.0, -8.5, -5.0, -3.89, -1.0, 0.0, 0.3, 2.0, 3.89, 7.0])
@pytest.mark.parametrize("var", [1.0, 101.0, 2501.0])
def test_normal_cdf_against_mpmath(x, var):
    x = x * math.sqrt(var)
    assert abs(normal_cdf(x, var) - float(mp_cdf(x, var))) <= 1e-12
    # relative accuracy in the lower tail matters for M near theta = 1e-4
    assert normal_cdf(x, var) == pytest.approx(float(mp_cdf(x, var)), rel=1e-12)


@given(st.floats(1e-15, 1 - 1e-15))
def test_normal_ppf_inverts_cdf(p):
    assert normal_cdf(normal_ppf(p)) == pytest.approx(p, rel=1e-10, abs=1e-15)


# --- log_density ----------------------------------------------------------

def test_log_density_examples():
    assert Categorical([0.5, 0.5]).log_density(0) == pytest.approx(math.log(0.5))
    assert UnitCellUniform([0.0]).log_density([0.6]) == -np.inf
    assert UnitCellUniform([0.0]).log_density([-0.5]) == 0.0
    assert UnitCellUniform([0.0]).log_density([0.5]) == -np.inf
    spec = TruncatedGaussianSpec((0.0,), 2.0, 0.5)
    assert TruncatedGaussian(spec).log_density([spec.lower - 1e-9]) == -np.inf
    assert np.isfinite(TruncatedGaussian(spec).log_density([spec.lower + 1e-9]))


def test_log_density_dimension_mismatch():
    with pytest.raises(ValueError):
        Gaussian(np.zeros(2)).log_density(np.zeros(3))
    with pytest.raises(ValueError):
        BoxUniform([3, 3]).log_density([1.0])
    with pytest.raises(ValueError):
        Categorical([0.5, 0.5]).log_density(2)


def test_box_uniform_density():
    box = BoxUniform([3, 5])
    assert box.log_density([2.9, 4.9]) == pytest.approx(-math.log(15))
    assert box.log_density([3.0, 1.0]) == -np.inf


def test_truncated_gaussian_normalised():
    spec = TruncatedGaussianSpec((0.7,), 3.0, 0.2)
    z = np.linspace(spec.x[0] + spec.lower, spec.x[0] + spec.upper, 200_001)
    dens = np.exp(TruncatedGaussian(spec).log_density(z[:, None]))
    assert np.trapezoid(dens, z) == pytest.approx(1.0, abs=1e-6)


def test_truncated_spec_invariants():
    spec = TruncatedGaussianSpec((0.0, 0.0), 1.0, 0.1)
    assert spec.lower < 0 < spec.upper
    assert 1 - (1 - spec.theta_coord) ** 2 == pytest.approx(0.1)
    assert normal_cdf(spec.upper) - normal_cdf(spec.lower) == pytest.approx(1 - spec.theta_coord)


# --- tvd / kl -------------------------------------------------------------

def test_tvd_examples():
    assert tvd(Categorical([0.3, 0.7]), Categorical([0.3, 0.7])) == 0
    assert tvd(Categorical([1, 0]), Categorical([0, 1])) == 1
    assert tvd(Categorical([0.5, 0.5]), Categorical([1, 0])) == 0.5
    with pytest.raises(ValueError):
        tvd(Categorical([1.0]), Categorical([0.5, 0.5]))


@given(st.integers(2, 10).flatmap(lambda n: st.tuples(*[prob_vectors(n, n)] * 3)))
def test_tvd_is_a_metric(triple):
    p, q, r = triple
    assert tvd(p, q) == pytest.approx(tvd(q, p))
    assert tvd(p, r) <= tvd(p, q) + tvd(q, r) + 1e-12
    assert 0 <= tvd(p, q) <= 1 + 1e-12
    assert tvd(p, p) == 0


def test_kl_examples():
    assert kl_bits(Categorical([0.2, 0.8]), Categorical([0.2, 0.8])) == 0
    assert kl_bits(Categorical([1, 0]), Categorical([0.5, 0.5])) == pytest.approx(1.0)
    # mpmath: 0.75 log2 1.5 + 0.25 log2 0.5
    assert kl_bits(Categorical([0.75, 0.25]), Categorical([0.5, 0.5])) == pytest.approx(0.1887218755, abs=1e-9)
    with pytest.raises(InfiniteDivergenceError):
        kl_bits(Categorical([0.5, 0.5]), Categorical([1, 0]))


@given(st.integers(2, 10).flatmap(lambda n: st.tuples(prob_vectors(n, n), prob_vectors(n, n))))
def test_kl_nonnegative(pair):
    q, p = pair
    assume(np.all(p[q > 0] > 1e-12))
    assert kl_bits(q, p) >= 0
    assert kl_bits(q, q) == 0


def test_gaussian_mutual_information():
    assert gaussian_mutual_information(0.0, 1) == 0
    assert gaussian_mutual_information(1.0, 1) == pytest.approx(0.5)
    assert gaussian_mutual_information(math.sqrt(3), 2) == pytest.approx(2.0)


# --- M, w_min and the transform -------------------------------------------

@pytest.mark.parametrize("sigma", [0.5, 1, 2, 5, 7.5, 10, 20, 50, 200])
@pytest.mark.parametrize("dim", [1, 2, 4])
def test_compute_m_against_mpmath(sigma, dim):
    assert compute_m(sigma, 1e-4, dim) == mp_m(sigma, 1e-4, dim)


def test_compute_m_examples():
    assert compute_m(10.0, 1e-4, 1) == 3
    for sigma in (0.1, 1.0, 3.0, 5.0):
        assert compute_m(sigma, 1e-4, 1) == 1


def test_transformed_support_fits_cell():
    # mpmath width of the transformed support at sigma = 10: 3 * 0.30133881826...
    spec = TruncatedGaussianSpec((0.0,), 10.0, 1e-4)
    target = TransformedTruncatedGaussian(spec, compute_m(10.0, 1e-4, 1))
    width = float(target.support_high[0] - target.support_low[0])
    assert width == pytest.approx(0.904016454802398, abs=1e-12)
    assert width <= 1


@given(st.floats(0.05, 60), st.floats(1e-6, 0.5), st.integers(1, 4), st.floats(-1, 1))
def test_support_fits_for_typical_means(sigma, theta, dim, frac):
    spec0 = TruncatedGaussianSpec((0.0,) * dim, sigma, theta)
    x = frac * spec0.upper * sigma
    spec = TruncatedGaussianSpec((x,) * dim, sigma, theta)
    m = compute_m(sigma, theta, dim)
    target = TransformedTruncatedGaussian(spec, m)
    assert np.all(target.support_high - target.support_low <= 1 + 1e-12)


def test_wmin_examples():
    assert compute_wmin_gaussian(TruncatedGaussianSpec((0.0,), math.sqrt(3), 0.0)) == pytest.approx(0.5)
    for sigma, theta, dim in [(2.0, 1e-4, 1), (10.0, 0.3, 3), (0.1, 0.0, 2)]:
        spec = TruncatedGaussianSpec((0.0,) * dim, sigma, theta)
        assert compute_wmin_gaussian(spec) == pytest.approx((1 - theta) / (sigma**2 + 1) ** (dim / 2))
    assert compute_wmin_gaussian(TruncatedGaussianSpec((0.0,), 1e-4, 0.0)) == pytest.approx(1.0)
    # mpmath ratio N(z;0,5)/N(z;1.3,1) at z = 5/4 * 1.3 times 1 - 1e-3
    spec = TruncatedGaussianSpec((1.3,), 2.0, 1e-3)
    assert compute_wmin_gaussian(spec) == pytest.approx(0.361689396367779, rel=1e-12)
    with pytest.raises(ValueError):
        compute_wmin_gaussian(TruncatedGaussianSpec((0.0,), 0.0, 0.1))


@given(st.floats(0.1, 30), st.floats(0, 0.5), st.lists(st.floats(-3, 3), min_size=1, max_size=3))
def test_wmin_bounds_density_ratio(sigma, theta, xs):
    spec = TruncatedGaussianSpec(tuple(sigma * v for v in xs), sigma, theta)
    w = compute_wmin_gaussian(spec)
    assert 0 < w <= 1
    target = TruncatedGaussian(spec)
    proposal = Gaussian(np.zeros(spec.dim), spec.marginal_var)
    rng = np.random.default_rng(0)
    lo, hi = spec.x + spec.lower, spec.x + spec.upper
    if not np.all(np.isfinite(lo)):
        lo, hi = spec.x - 8, spec.x + 8
    z = rng.uniform(lo, hi, size=(500, spec.dim))
    log_ratio = proposal.log_density(z) - target.log_density(z)
    assert np.all(log_ratio >= math.log(w) - 1e-9)


def test_wmin_invariant_under_transform():
    spec = TruncatedGaussianSpec((4.0,), 10.0, 1e-4)
    m = compute_m(10.0, 1e-4, 1)
    target = TransformedTruncatedGaussian(spec, m)
    raw_t = TruncatedGaussian(spec)
    raw_p = Gaussian([0.0], spec.marginal_var)
    z_raw = np.linspace(spec.x[0] + spec.lower + 0.01, spec.x[0] + spec.upper - 0.01, 101)[:, None]
    z = target.transform.forward(z_raw)
    raw_ratio = raw_p.log_density(z_raw) - raw_t.log_density(z_raw)
    box_ratio = BoxUniform([m]).log_density(z) - target.log_density(z)
    assert np.allclose(raw_ratio, box_ratio, atol=1e-8)


def test_transform_examples():
    tr = GaussianTransform(10.0, 3)
    assert tr.forward(0.0) == pytest.approx(1.5)
    grid = np.linspace(1e-6, 3 - 1e-6, 1000)
    assert np.allclose(tr.forward(tr.inverse(grid)), grid, atol=1e-9)
    z_raw = np.linspace(-40, 40, 1000)
    assert np.allclose(tr.inverse(tr.forward(z_raw)), z_raw, atol=1e-9)
    for bad in (0.0, 3.0, -1.0):
        with pytest.raises(ValueError):
            tr.inverse(bad)


def test_transform_maps_proposal_to_uniform():
    sigma, m = 10.0, 3
    z_raw = stats.norm(0, math.sqrt(sigma**2 + 1)).rvs(100_000, random_state=1)
    z = GaussianTransform(sigma, m).forward(z_raw)
    assert stats.kstest(z, "uniform", args=(0, m)).pvalue > 1e-3


def test_transformed_density_normalised():
    spec = TruncatedGaussianSpec((-7.0,), 10.0, 1e-4)
    target = TransformedTruncatedGaussian(spec, 3)
    z = np.linspace(target.support_low[0], target.support_high[0], 400_001)
    dens = np.exp(target.log_density(z[:, None]))
    assert np.trapezoid(dens, z) == pytest.approx(1.0, abs=1e-5)


# --- dirichlet ------------------------------------------------------------

def test_dirichlet_concentrates_for_large_alpha():
    hits = 0
    for i in range(200):
        q = dirichlet_sample(1e4, 4, StreamKey(5, Stream.TARGET, i))
        hits += np.all(np.abs(q.probs - 0.25) < 0.05)
    assert hits / 200 > 0.99


@given(st.floats(1e-4, 50), st.integers(1, 300), st.integers(0, 2**32))
def test_dirichlet_sums_to_one(alpha, size, seed):
    q = dirichlet_sample(alpha, size, StreamKey(seed, Stream.TARGET, 0))
    assert q.size == size
    assert abs(q.probs.sum() - 1) < 1e-9


def test_dirichlet_reproducible_and_sparse():
    a = dirichlet_sample(3e-4, 2**16, StreamKey(1, Stream.TARGET, 0))
    b = dirichlet_sample(3e-4, 2**16, StreamKey(1, Stream.TARGET, 0))
    assert np.array_equal(a.probs, b.probs)
    # almost all mass on a handful of symbols
    assert np.sort(a.probs)[::-1][:100].sum() > 0.99


def test_categorical_sampling_matches_probs():
    q = Categorical([0.1, 0.0, 0.6, 0.3])
    u = np.random.default_rng(0).random((100_000, 1))
    counts = np.bincount(q.from_uniform(u), minlength=4)
    assert counts[1] == 0
    assert stats.chisquare(counts[[0, 2, 3]], 1e5 * q.probs[[0, 2, 3]]).pvalue > 1e-3
    assert np.array_equal(uniform_categorical(8).from_uniform(np.array([[0.0], [0.999999]])), [0, 7])
