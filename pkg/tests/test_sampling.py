import math

import numpy as np
import pytest
from scipy import stats

from maxent_reweight.expr import ExprDomainError, ExprError, parse
from maxent_reweight.model import BaseDistributionSpec
from maxent_reweight.sampling import (CHUNK, SampleBatch, SamplingError, derived_values,
                                      sample_base, spec_hash)

SQUARE = BaseDistributionSpec.uniform_box([0, 0], [1, 1])
GAUSS3 = BaseDistributionSpec.gaussian(0.0, 5.0, dimension=3)


@pytest.fixture(scope="module")
def square_1e6():
    return sample_base(SQUARE, 10**6, 42)


def test_uniform_square_mean(square_1e6):
    pts = square_1e6.points
    assert pts.shape == (10**6, 2)
    assert np.all((pts > 0) & (pts < 1))
    # CLT: 3 sigma / sqrt(N) with sigma = 1/sqrt(12) is about 0.00087
    np.testing.assert_array_less(np.abs(pts.mean(axis=0) - 0.5), 0.002)


def test_gaussian_std():
    pts = sample_base(GAUSS3, 10**6, 7).points
    np.testing.assert_array_less(np.abs(pts.std(axis=0, ddof=1) / 5.0 - 1.0), 0.01)
    np.testing.assert_array_less(np.abs(pts.mean(axis=0)), 3 * 5.0 / 1000)


def test_empty_batch():
    b = sample_base(SQUARE, 0, 1)
    assert len(b) == 0 and b.points.shape == (0, 2)
    assert derived_values(b, parse("x1+x2", 2)).shape == (0,)


@pytest.mark.parametrize("n,seed", [(-1, 0), (1.5, 0), (10, -1), (10, 2**64)])
def test_invalid_arguments(n, seed):
    with pytest.raises(SamplingError):
        sample_base(SQUARE, n, seed)


def test_largest_seed_accepted():
    assert len(sample_base(SQUARE, 5, 2**64 - 1)) == 5


@pytest.mark.parametrize("spec", [SQUARE, GAUSS3], ids=["box", "gauss"])
def test_thread_count_does_not_change_batch(spec):
    n = 3 * CHUNK + 17
    a = sample_base(spec, n, 99, threads=1).points
    b = sample_base(spec, n, 99, threads=4).points
    assert a.tobytes() == b.tobytes()


def test_prefix_stability():
    # point i depends on (seed, i) only, so a shorter run is a prefix of a longer one
    a = sample_base(GAUSS3, CHUNK + 10, 5).points
    b = sample_base(GAUSS3, 2 * CHUNK + 3, 5).points
    assert a.tobytes() == b[: CHUNK + 10].tobytes()


def test_seeds_differ():
    a = sample_base(SQUARE, 100, 1).points
    b = sample_base(SQUARE, 100, 2).points
    assert not np.array_equal(a, b)


def test_batch_is_read_only(square_1e6):
    with pytest.raises(ValueError):
        square_1e6.points[0, 0] = 0.0


def test_batch_metadata(square_1e6):
    assert isinstance(square_1e6, SampleBatch)
    assert square_1e6.seed == 42
    assert square_1e6.spec_hash == spec_hash(SQUARE)
    assert spec_hash(SQUARE) != spec_hash(BaseDistributionSpec.uniform_box([0, 0], [1, 2]))


@pytest.mark.parametrize("spec,cdf", [
    (SQUARE, stats.uniform(0, 1).cdf),
    (GAUSS3, stats.norm(0, 5).cdf),
], ids=["uniform", "gaussian"])
def test_marginals_pass_ks(spec, cdf):
    n = 10**5
    pts = sample_base(spec, n, 2024).points
    for k in range(spec.dimension):
        d = stats.kstest(pts[:, k], cdf).statistic
        assert d < 1.63 / math.sqrt(n)


def test_derived_sum_mean(square_1e6):
    f = derived_values(square_1e6, parse("x1+x2", 2))
    assert abs(f.mean() - 1.0) < 0.002
    np.testing.assert_array_equal(f, square_1e6.points.sum(axis=1))


def test_derived_values_threads(square_1e6):
    e = parse("log(mean(exp(x)))", 2)
    a = derived_values(square_1e6, e, threads=1)
    b = derived_values(square_1e6, e, threads=3)
    assert a.tobytes() == b.tobytes()


def test_derived_dimension_mismatch(square_1e6):
    with pytest.raises(ExprError):
        derived_values(square_1e6, parse("x1", 3))


def test_derived_domain_error_has_global_index():
    b = sample_base(BaseDistributionSpec.gaussian(0, 1, dimension=1), 3 * CHUNK, 11)
    first_neg = int(np.flatnonzero(b.points[CHUNK:, 0] <= 0)[0]) + CHUNK
    with pytest.raises(ExprDomainError) as info:
        derived_values(b, parse("log(x1)", 1))
    assert info.value.index == int(np.flatnonzero(b.points[:, 0] <= 0)[0])
    # with the first chunk made positive the failing row sits in a later chunk
    pts = np.array(b.points)
    pts[:CHUNK] = np.abs(pts[:CHUNK]) + 1.0
    with pytest.raises(ExprDomainError) as info:
        derived_values(SampleBatch(pts, b.seed, b.spec_hash), parse("log(x1)", 1), threads=2)
    assert info.value.index == first_neg
