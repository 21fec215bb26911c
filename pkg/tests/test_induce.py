import math

import numpy as np
import pytest

from randpress.base import iid_process, sample_path
from randpress.errors import ConfigError, NotMeanExpandingError, ResourceLimitError
from randpress.fibers import (
    cantor_family,
    mean_example_affine_surrogate,
    mean_example_family,
)
from randpress.induce import (
    find_expanding_set,
    induced_interval_family,
    induced_path,
    induced_potential_sum,
    induced_pressure_consistency,
    mean_example_bowen,
    mean_example_pressure,
)
from randpress.transfer import GeometricT


@pytest.fixture(scope="module")
def mean_setup():
    fam = mean_example_family()
    proc = iid_process([0.5, 0.5])
    spec = find_expanding_set(fam, proc, 8)
    return fam, proc, spec


def test_uniformly_expanding_family_accepts_everything():
    fam = cantor_family()
    proc = iid_process([0.5, 0.5])
    spec = find_expanding_set(fam, proc, 4)
    assert spec.level == 0
    assert spec.m_estimate == pytest.approx(1.0)
    assert all(spec.accepts(w) for w in spec.table)


def test_not_mean_expanding_rejected():
    fam = mean_example_affine_surrogate()
    # heavy weight on the contracting symbol: E log gamma < 0
    proc = iid_process([0.95, 0.05])
    assert 0.95 * math.log(0.5) + 0.05 * math.log(8.0) < 0
    with pytest.raises(NotMeanExpandingError):
        find_expanding_set(fam, proc, 6)


def test_window_cap():
    fam = cantor_family()
    proc = iid_process([0.5, 0.5])
    with pytest.raises(ConfigError):
        find_expanding_set(fam, proc, 0)
    with pytest.raises(ConfigError):
        find_expanding_set(fam, proc, 30)


def test_expanding_set_nontrivial(mean_setup):
    fam, proc, spec = mean_setup
    n_acc = len(spec.accepted_windows())
    assert 0 < n_acc < 2**8
    assert 0.0 < spec.m_estimate < 1.0
    # all accepted windows start with the expanding symbol and carry a
    # positive-log-product prefix; the constant windows are clear-cut
    log_g = [math.log(g) for g in spec.gammas]
    for w in spec.accepted_windows():
        assert w[0] == 1
        prods = np.cumsum([log_g[s] for s in w])
        assert np.any(prods > 0)
    assert spec.accepts((1,) * 8)
    assert not spec.accepts((0,) * 8)


def test_induced_blocks_expand(mean_setup):
    fam, proc, spec = mean_setup
    gammas = spec.gammas
    for s in range(10):
        path = sample_path(proc, seed=1000 + s)
        blocks = induced_path(fam, spec, path, n_blocks=12)
        for b in blocks:
            assert b.expansion_product(gammas) > 1.0
            assert b.tau >= 1


def test_induced_blocks_tile_the_path(mean_setup):
    fam, proc, spec = mean_setup
    path = sample_path(proc, seed=4)
    blocks = induced_path(fam, spec, path, n_blocks=8)
    pos = blocks[0].start
    for b in blocks:
        assert b.start == pos
        assert tuple(int(s) for s in path.symbols(pos, pos + b.tau)) == b.word
        pos += b.tau


def test_induced_potential_sum_is_birkhoff_sum(mean_setup):
    fam, proc, spec = mean_setup
    pot = GeometricT(0.3)
    word = (1, 0)
    z = 0.01
    total = induced_potential_sum(fam, pot, z, word)
    # hand Birkhoff sum
    acc, w = 0.0, z
    for a in word:
        for b_idx, br in enumerate(fam.branches(a)):
            if br.lo - 1e-12 <= w <= br.hi + 1e-12:
                acc += -0.3 * float(br.log_deriv(np.asarray([w]))[0])
                w = float(br.forward(w))
                break
    assert total == pytest.approx(acc, abs=1e-12)


def test_induced_interval_family_composition(mean_setup):
    fam, proc, spec = mean_setup
    word = (1, 1)
    ind = induced_interval_family(fam, word)
    assert ind.n_symbols == 1
    assert ind.degree(0) == 4  # 2 branches per step, squared
    # every branch inverts the two-step composition
    for br in ind.branches(0):
        mid = 0.5 * (br.lo + br.hi)
        assert float(br.forward(mid)) == pytest.approx(
            fam.apply_map(1, fam.apply_map(1, mid)), abs=1e-9
        )
    assert ind.min_expansion() > 1.0  # 8 * 8 with full-slope branches


def test_induced_pressure_agrees_with_direct_at_zero(mean_setup):
    fam, proc, spec = mean_setup
    rep = induced_pressure_consistency(fam, proc, 0.0, spec=spec, seed=1)
    # t = 0 counts branches: both routes give exactly log 2 per step
    assert rep.direct_value == pytest.approx(math.log(2), abs=1e-10)
    assert rep.induced_value == pytest.approx(math.log(2), abs=1e-10)


def test_induced_pressure_agrees_at_positive_t(mean_setup):
    fam, proc, spec = mean_setup
    rep = induced_pressure_consistency(fam, proc, 0.3, spec=spec, seed=2)
    assert abs(rep.difference) <= 3 * rep.combined_stderr + 1e-12


def test_mean_example_bowen_reasonable(mean_setup):
    h = mean_example_bowen(seed=2)
    assert 0.0 < h <= 0.52
    # pressure at the root should be near zero on the induced route
    fam, proc, spec = mean_setup
    val, err = mean_example_pressure(fam, proc, h, spec, seed=9)
    assert abs(val) <= 3 * err + 0.05
