import math

import numpy as np
import pytest

from randpress.base import (
    deterministic_process,
    iid_process,
    periodic_process,
    sample_path,
)
from randpress.classify import (
    asymptotic_variance,
    classify_system,
    gibbs_ratio_extremes,
    step_pressures,
)
from randpress.errors import ConfigError
from randpress.fibers import cantor_family
from randpress.transfer import GeometricT

H_CANTOR = math.log(4) / math.log(12)
A_STEP = math.log(2) - H_CANTOR * math.log(3)  # per-step pressure is +/- this


def test_step_pressures_two_point():
    fam = cantor_family()
    path = sample_path(iid_process([0.5, 0.5]), seed=5)
    p = step_pressures(fam, path, GeometricT(H_CANTOR), 64)
    for j, v in enumerate(p):
        expect = A_STEP if path.symbol(j) == 0 else -A_STEP
        assert v == pytest.approx(expect, abs=1e-12)


def test_asymptotic_variance_matches_iid_closed_form():
    # +/- a coin flips: Var(S_n)/n = a^2 exactly, for every n
    fam = cantor_family()
    proc = iid_process([0.5, 0.5])
    var = asymptotic_variance(fam, proc, GeometricT(H_CANTOR), n_samples=400, seed=0)
    assert abs(var.sigma2 - A_STEP**2) / A_STEP**2 < 0.10
    assert not var.centered_empirically
    # i.i.d. steps: the whole ladder sits near a^2, no drift
    assert np.all(np.abs(var.ladder_values - A_STEP**2) < 5 * var.stderr + 1e-3)


def test_asymptotic_variance_against_direct_simulation():
    # independent oracle: simulate +/- a walks with numpy's own RNG
    rng = np.random.default_rng(12345)
    walks = A_STEP * rng.choice([1.0, -1.0], size=(400, 1024)).cumsum(axis=1)
    oracle = walks[:, -1].var(ddof=1) / 1024
    fam = cantor_family()
    var = asymptotic_variance(
        fam, iid_process([0.5, 0.5]), GeometricT(H_CANTOR), n_samples=400, seed=7
    )
    assert abs(var.sigma2 - oracle) < 0.2 * A_STEP**2


def test_classify_cantor_essential():
    fam = cantor_family()
    verdict = classify_system(fam, iid_process([0.5, 0.5]), H_CANTOR, seed=0)
    assert verdict.verdict == "Essential"
    assert "Hausdorff" in verdict.consequences
    assert verdict.lil_max > 0 > verdict.lil_min


def test_classify_single_map_quasi_deterministic():
    fam = cantor_family()
    h0 = math.log(2) / math.log(3)
    verdict = classify_system(fam, deterministic_process(0, 2), h0, seed=0)
    assert verdict.verdict == "QuasiDeterministic"
    assert verdict.variance.sigma2 <= 1e-8
    assert "coboundary" in verdict.consequences


def test_classify_periodic_base_quasi_deterministic():
    # alternating 0101... has bounded centered sums and zero LIL variance
    fam = cantor_family()
    proc = periodic_process([0, 1])
    h = 2 * math.log(2) / math.log(12)  # root of the averaged pressure
    verdict = classify_system(fam, proc, h, seed=0)
    assert verdict.verdict == "QuasiDeterministic"
    assert verdict.max_abs_sum <= verdict.l_cap


def test_variance_validation():
    fam = cantor_family()
    with pytest.raises(ConfigError):
        asymptotic_variance(fam, iid_process([0.5, 0.5]), GeometricT(1.0),
                            n_samples=2)


def test_gibbs_ratio_extremes_shape_and_bounds():
    fam = cantor_family()
    path = sample_path(iid_process([0.5, 0.5]), seed=2)
    ext = gibbs_ratio_extremes(fam, path, H_CANTOR, 1024)
    assert ext.ns[-1] == 1024
    assert np.all(ext.running_min[1:] <= ext.running_min[:-1] + 1e-15)
    assert np.all(ext.running_max[1:] >= ext.running_max[:-1] - 1e-15)
    # ratio after n steps equals exp(-S_n P) with S_n a +/- a walk
    assert ext.overall_max >= 1.0 >= ext.overall_min > 0.0
    with pytest.raises(ConfigError):
        gibbs_ratio_extremes(fam, path, H_CANTOR, 5)


def test_gibbs_ratio_extremes_flat_for_deterministic():
    fam = cantor_family()
    path = sample_path(deterministic_process(0, 2), seed=0)
    h0 = math.log(2) / math.log(3)
    ext = gibbs_ratio_extremes(fam, path, h0, 64)
    assert ext.overall_max == pytest.approx(1.0, abs=1e-9)
    assert ext.overall_min == pytest.approx(1.0, abs=1e-9)
