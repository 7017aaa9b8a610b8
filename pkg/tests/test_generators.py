import numpy as np
import pytest

from ttmax import (
    GeneratorSpec,
    TTTensor,
    generate,
    identity_tensor,
    identity_tt,
    random_tt_init,
    tt_to_dense,
    uniform_tensor,
)
from ttmax.tnsr import dumps, loads


def test_identity_examples():
    np.testing.assert_array_equal(identity_tensor(2, 2), np.eye(2))
    a = identity_tensor(3, 3)
    assert np.count_nonzero(a) == 3
    assert a[1, 1, 1] == 1 and a[0, 1, 1] == 0
    with pytest.raises(ValueError):
        identity_tensor(3, 1)


@pytest.mark.parametrize("n, d", [(1, 2), (4, 2), (3, 3), (2, 5)])
def test_identity_tt_is_exact(n, d):
    np.testing.assert_array_equal(tt_to_dense(identity_tt(n, d)), identity_tensor(n, d))


def test_uniform_range_and_mean():
    a = uniform_tensor((100, 1000), seed=0)
    assert np.max(np.abs(a)) < 1
    assert abs(a.mean()) < 0.02
    np.testing.assert_array_equal(a, uniform_tensor((100, 1000), seed=0))
    assert not np.array_equal(a, uniform_tensor((100, 1000), seed=1))


def test_random_init_scaling():
    tt = random_tt_init((3, 4), 1, seed=2)
    raw = np.random.default_rng(2)
    first = raw.standard_normal((1, 3, 1))
    np.testing.assert_array_equal(tt.cores[0], first)  # r = 1, d = 2: no rescaling


@pytest.mark.parametrize("dims, r", [((3, 4, 5), 2), ((2, 2, 2, 2), 3), ((5, 5), 4)])
def test_random_init_scaled_once(dims, r):
    tt = random_tt_init(dims, r, seed=9)
    rng = np.random.default_rng(9)
    ranks = (1,) + (r,) * (len(dims) - 1) + (1,)
    raw = TTTensor([rng.standard_normal((ranks[s], n, ranks[s + 1])) for s, n in enumerate(dims)])
    ratio = np.linalg.norm(tt_to_dense(tt)) / np.linalg.norm(tt_to_dense(raw))
    assert ratio == pytest.approx(float(r) ** (1 - len(dims)), rel=1e-12)
    assert tt.ranks == ranks[1:-1]
    for g, h in zip(tt.cores[1:], random_tt_init(dims, r, seed=9).cores[1:]):
        np.testing.assert_array_equal(g, h)


def test_spec_validation():
    with pytest.raises(ValueError):
        GeneratorSpec("gaussian", (2, 2))
    with pytest.raises(ValueError):
        GeneratorSpec("identity", (2, 3))
    with pytest.raises(ValueError):
        GeneratorSpec("random_tt", (2, 3))
    with pytest.raises(ValueError):
        GeneratorSpec("uniform", (4,))


def test_generate_dispatch():
    np.testing.assert_array_equal(generate(GeneratorSpec("identity", (3, 3, 3))), identity_tensor(3, 3))
    np.testing.assert_array_equal(generate(GeneratorSpec("uniform", (2, 5), seed=4)),
                                  uniform_tensor((2, 5), 4))
    tt = generate(GeneratorSpec("random_tt", (2, 3, 2), rank=2, seed=1))
    assert isinstance(tt, TTTensor) and tt.ranks == (2, 2)


def test_generators_serialize():
    for a in (identity_tensor(3, 3), uniform_tensor((2, 3, 2), 5),
              tt_to_dense(random_tt_init((2, 3), 2, 0))):
        np.testing.assert_array_equal(loads(dumps(a)), a)
