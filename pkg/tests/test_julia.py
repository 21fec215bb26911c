import math

import numpy as np
import pytest

from randpress.base import deterministic_process, iid_process
from randpress.errors import ConfigError, ResourceLimitError
from randpress.fibers import cantor_family, quadratic_family
from randpress.julia import inverse_tree, julia_bowen, julia_pressure


def test_inverse_tree_shape_and_consistency():
    fam = quadratic_family(2, [0.1, -0.1])
    tree = inverse_tree(fam, [0, 1, 0, 1], 1.2 + 0.1j, 1.0)
    assert tree.depth == 4
    assert tree.points.shape == (16,)
    assert tree.forward_consistency(fam) < 1e-9


def test_inverse_tree_rejects_interval_family():
    with pytest.raises(ConfigError):
        inverse_tree(cantor_family(), [0, 1], 0.5, 1.0)


def test_inverse_tree_leaf_cap():
    fam = quadratic_family(2, [0.0])
    with pytest.raises(ResourceLimitError):
        inverse_tree(fam, [0] * 25, 1.0, 1.0)


def test_circle_tree_sum_closed_form():
    # c = 0: all inverse orbits of z = 1 stay on the unit circle, |T'| = 2,
    # so log S_n = n(1 - t) log 2 exactly
    fam = quadratic_family(2, [0.0])
    for t in (0.5, 1.0, 1.7):
        for n in (3, 6, 9):
            tree = inverse_tree(fam, [0] * n, 1.0 + 0.0j, t)
            assert np.allclose(np.abs(tree.points), 1.0, atol=1e-12)
            assert tree.log_sum() == pytest.approx(
                n * (1 - t) * math.log(2), abs=1e-10
            )


def test_julia_pressure_circle():
    fam = quadratic_family(2, [0.0])
    proc = deterministic_process(0, 1)
    for t in (0.5, 1.0, 1.5):
        est = julia_pressure(fam, proc, t, depth=12)
        assert est.value == pytest.approx((1 - t) * math.log(2), abs=1e-9)
        assert est.n_samples == 1  # deterministic base collapses sampling
    with pytest.raises(ConfigError):
        julia_pressure(fam, proc, 1.0, depth=2)


def test_julia_pressure_decreasing_in_t():
    fam = quadratic_family(2, [0.1, -0.1])
    proc = iid_process([0.5, 0.5])
    vals = [julia_pressure(fam, proc, t, depth=10, n_samples=4, seed=0).value
            for t in (0.5, 1.0, 1.5)]
    assert vals[0] > vals[1] > vals[2]


def test_julia_bowen_circle_is_one():
    fam = quadratic_family(2, [0.0])
    proc = deterministic_process(0, 1)
    res = julia_bowen(fam, proc, depth=14, seed=0)
    assert res.h == pytest.approx(1.0, abs=0.01)


def test_julia_bowen_mixed_parameters_in_band():
    fam = quadratic_family(2, [0.1, -0.1])
    proc = iid_process([0.5, 0.5])
    res = julia_bowen(fam, proc, depth=12, n_samples=8, seed=0)
    assert 1.0 < res.h < 2.0
