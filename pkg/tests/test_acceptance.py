"""Acceptance gate: one test per headline criterion, one printed line each."""

import math
import time

import numpy as np
import pytest

from randpress.base import deterministic_process, iid_process, sample_path
from randpress.classify import classify_system
from randpress.fibers import (
    cantor_family,
    doubling_family,
    mean_example_family,
    quadratic_family,
    two_slope_family,
)
from randpress.induce import (
    find_expanding_set,
    induced_path,
    induced_pressure_consistency,
    mean_example_bowen,
)
from randpress.julia import julia_bowen
from randpress.multifractal import (
    legendre_spectrum,
    temperature_curve,
    temperature_derivative,
)
from randpress.pressure import (
    bowen_dimension,
    expected_pressure,
    pressure_convexity_probe,
)
from randpress.transfer import (
    BranchConstant,
    GeometricT,
    conformal_cylinder_masses,
    correlation_decay_slope,
    correlation_series,
    distortion_check,
)

H_CANTOR = math.log(4) / math.log(12)
A_STEP = math.log(2) - H_CANTOR * math.log(3)


@pytest.fixture(autouse=True)
def _live_report(capfd):
    # let report() lines bypass capture so every run log shows the verdicts
    global _CAPFD
    _CAPFD = capfd
    yield
    _CAPFD = None


def report(num, name, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num:2d} ({name}): {detail}"
    with _CAPFD.disabled():
        print(line, flush=True)
    assert ok, line


def test_criterion_01_cantor_bowen_dimension():
    t0 = time.perf_counter()
    res = bowen_dimension(cantor_family(), iid_process([0.5, 0.5]),
                          tol_t=1e-4, seed=0)
    dt = time.perf_counter() - t0
    err = abs(res.h - H_CANTOR)
    report(1, "cantor-bowen", err <= 1e-3 and dt < 10.0,
           f"h={res.h:.6f} vs {H_CANTOR:.6f}, |err|={err:.2e}, {dt:.2f}s")


def test_criterion_02_deterministic_fibers():
    fam = cantor_family()
    h0 = bowen_dimension(fam, deterministic_process(0, 2), tol_t=1e-8, seed=0).h
    h1 = bowen_dimension(fam, deterministic_process(1, 2), tol_t=1e-8, seed=0).h
    e0 = abs(h0 - math.log(2) / math.log(3))
    e1 = abs(h1 - 0.5)
    report(2, "deterministic-fibers", e0 <= 1e-6 and e1 <= 1e-6,
           f"h0={h0:.8f} (err {e0:.1e}), h1={h1:.8f} (err {e1:.1e})")


def test_criterion_03_expected_pressure_closed_form():
    fam = cantor_family()
    proc = iid_process([0.5, 0.5])
    t0 = time.perf_counter()
    ok = True
    details = []
    for t in (0.0, 0.25, H_CANTOR, 1.0):
        est = expected_pressure(fam, proc, GeometricT(t), n_steps=200,
                                n_samples=200, seed=2, method="mc")
        want = math.log(2) - 0.5 * t * math.log(12)
        diff = abs(est.value - want)
        ok = ok and diff <= 3 * est.stderr + 1e-14
        details.append(f"t={t:.3f}: |d|={diff:.1e} (3s={3 * est.stderr:.1e})")
    dt = time.perf_counter() - t0
    report(3, "pressure-closed-form", ok and dt < 30.0,
           "; ".join(details) + f"; {dt:.2f}s")


def test_criterion_04_variance_classification():
    fam = cantor_family()
    verdict = classify_system(fam, iid_process([0.5, 0.5]), H_CANTOR, seed=0,
                              n_samples=800)
    rel = abs(verdict.variance.sigma2 - A_STEP**2) / A_STEP**2
    ok1 = rel <= 0.10 and verdict.verdict == "Essential"

    h0 = math.log(2) / math.log(3)
    single = classify_system(fam, deterministic_process(0, 2), h0, seed=0)
    ok2 = single.variance.sigma2 <= 1e-8 and single.verdict == "QuasiDeterministic"
    report(4, "variance-dichotomy", ok1 and ok2,
           f"sigma2={verdict.variance.sigma2:.4e} vs {A_STEP**2:.4e} "
           f"(rel {rel:.1%}, {verdict.verdict}); "
           f"single-map sigma2={single.variance.sigma2:.1e} ({single.verdict})")


def test_criterion_05_gibbs_cylinder_masses():
    fam = cantor_family()
    path = sample_path(iid_process([0.5, 0.5]), seed=5)
    ok = True
    worst = 0.0
    for t in (0.0, 0.4, H_CANTOR, 1.2):
        for depth in (1, 4, 10):
            meas = conformal_cylinder_masses(fam, path, GeometricT(t), depth)
            dev = float(np.max(np.abs(meas.masses - 2.0**-depth)))
            sum_dev = abs(meas.masses.sum() - 1.0)
            worst = max(worst, dev, sum_dev)
            ok = ok and dev <= 1e-10 and sum_dev <= 1e-10

    ts_fam = two_slope_family(2.0, 4.0)
    ts_path = sample_path(deterministic_process(0, 1), seed=0)
    meas = conformal_cylinder_masses(ts_fam, ts_path, GeometricT(1.0), 1)
    got = sorted(meas.masses.tolist(), reverse=True)
    dev2 = max(abs(got[0] - 2 / 3), abs(got[1] - 1 / 3))
    ok = ok and dev2 <= 1e-12
    report(5, "cylinder-masses", ok,
           f"cantor worst dev {worst:.1e} (<=1e-10); "
           f"two-slope dev {dev2:.1e} (<=1e-12)")


def test_criterion_06_temperature_function():
    fam = cantor_family()
    proc = iid_process([0.5, 0.5])
    phi = BranchConstant(((-math.log(2),) * 2, (-math.log(2),) * 2))
    qs = np.arange(-2.0, 2.01, 0.25)
    curve = temperature_curve(fam, proc, phi, qs, tol=1e-8)
    err1 = float(np.max(np.abs(curve.ts - (1 - qs) * H_CANTOR)))

    dfam = doubling_family()
    dproc = deterministic_process(0, 1)
    dphi = BranchConstant(((math.log(0.3), math.log(0.7)),))
    qs2 = np.arange(-4.0, 4.01, 0.25)
    curve2 = temperature_curve(dfam, dproc, dphi, qs2, tol=1e-8)
    closed = np.log(0.3**qs2 + 0.7**qs2) / math.log(2)
    err2 = float(np.max(np.abs(curve2.ts - closed)))
    spec = legendre_spectrum(curve2)
    tangency = abs(spec.tangency_gap())
    peak_gap = abs(spec.peak() - curve2.value(0.0))
    ok = err1 <= 1e-3 and err2 <= 1e-3 and tangency <= 2e-3 and peak_gap <= 2e-3
    report(6, "temperature-function", ok,
           f"cantor max err {err1:.1e}, bernoulli max err {err2:.1e}, "
           f"tangency {tangency:.1e}, peak gap {peak_gap:.1e}")


def test_criterion_07_derivative_cross_check():
    fam = doubling_family()
    proc = deterministic_process(0, 1)
    phi = BranchConstant(((math.log(0.3), math.log(0.7)),))
    ok = True
    details = []
    for q in (0.0, 1.0, 2.0):
        fd, fd_err = temperature_derivative(fam, proc, phi, q, method="fd")
        ra, ra_err = temperature_derivative(fam, proc, phi, q, method="ratio",
                                            seed=11)
        sigma = math.hypot(fd_err, ra_err)
        ok = ok and abs(fd - ra) <= 3 * sigma and fd < 0 and ra < 0
        details.append(f"q={q}: fd={fd:.4f} ratio={ra:.4f} (3s={3 * sigma:.1e})")
    report(7, "derivative-cross-check", ok, "; ".join(details))


def test_criterion_08_decay_of_correlations():
    fam = cantor_family()
    path = sample_path(iid_process([0.5, 0.5]), seed=11)
    pot = GeometricT(H_CANTOR)
    corr = correlation_series(fam, path, pot, lambda x: x, lambda x: x, 12)
    slope = correlation_decay_slope(corr, n_lo=2, n_hi=12)

    const = correlation_series(fam, path, pot, lambda x: x,
                               lambda x: np.ones_like(x), 6)
    const_dev = float(np.max(np.abs(const[1:])))
    ok = slope <= -0.1 and const_dev <= 1e-10
    report(8, "correlation-decay", ok,
           f"slope={slope:.3f} (<= -0.1), constant-g dev {const_dev:.1e}")


def test_criterion_09_distortion_bound():
    families = {
        "cantor": cantor_family(),
        "two-slope": two_slope_family(2.0, 4.0),
        "doubling": doubling_family(),
    }
    ok = True
    details = []
    for name, fam in families.items():
        proc = iid_process([1.0 / fam.n_symbols] * fam.n_symbols)
        path = sample_path(proc, seed=3)
        # xi-close probe pairs inside each depth-0 branch domain
        pairs = []
        for sym in range(fam.n_symbols):
            for br in fam.branches(sym):
                mid = 0.5 * (br.lo + br.hi)
                step = min(fam.xi, br.hi - br.lo) / 4
                pairs.append((mid - step, mid + step))
        rep = distortion_check(fam, path, GeometricT(H_CANTOR), 6, pairs)
        ok = ok and not rep.violated and rep.max_log_ratio <= 1e-12
        details.append(f"{name}: ratio {rep.max_log_ratio:.1e}")
    report(9, "distortion-budget", ok,
           "; ".join(details) + " (all branch-constant, budget 0 + 1e-8)")


def test_criterion_10_convexity_monotonicity():
    fam = cantor_family()
    proc = iid_process([0.5, 0.5])
    rep = pressure_convexity_probe(
        fam, proc, GeometricT(H_CANTOR),
        np.linspace(-1.0, 1.0, 5), np.linspace(0.2, 1.0, 5), seed=0,
    )
    ok1 = rep.max_violation <= 0.0 + 1e-12 and rep.n_triples > 0

    ts = np.linspace(0.0, 1.5, 7)
    vals = [expected_pressure(fam, proc, GeometricT(float(t))).value for t in ts]
    slopes = np.diff(vals) / np.diff(ts)
    bound = -math.log(fam.min_expansion())
    ok2 = bool(np.all(slopes <= bound + 1e-12))
    report(10, "convexity-monotonicity", ok1 and ok2,
           f"max midpoint violation {rep.max_violation:.1e} over "
           f"{rep.n_triples} triples; max slope {slopes.max():.3f} "
           f"<= {bound:.3f}")


def test_criterion_11_inducing():
    fam = mean_example_family()
    proc = iid_process([0.5, 0.5])
    spec = find_expanding_set(fam, proc, 8)
    blocks_ok = True
    for s in range(8):
        path = sample_path(proc, seed=500 + s)
        for b in induced_path(fam, spec, path, n_blocks=10):
            blocks_ok = blocks_ok and b.expansion_product(spec.gammas) > 1.0

    ok_t = True
    details = []
    for t in (0.0, 0.3):
        rep = induced_pressure_consistency(fam, proc, t, spec=spec, seed=2)
        z = abs(rep.difference) <= 3 * rep.combined_stderr + 1e-12
        ok_t = ok_t and z
        details.append(
            f"t={t}: |d|={abs(rep.difference):.2e} (3s={3 * rep.combined_stderr:.2e})"
        )

    h = mean_example_bowen(seed=2)
    ok = blocks_ok and ok_t and h <= 0.52
    report(11, "inducing", ok,
           f"all blocks expand; {'; '.join(details)}; h={h:.4f} (<= 0.52)")


def test_criterion_12_random_julia():
    t0 = time.perf_counter()
    circle = julia_bowen(quadratic_family(2, [0.0]),
                         deterministic_process(0, 1), depth=18, seed=0)
    ok1 = abs(circle.h - 1.0) <= 0.02

    fam = quadratic_family(2, [0.1, -0.1])
    proc = iid_process([0.5, 0.5])
    r14 = julia_bowen(fam, proc, depth=14, n_samples=8, seed=0)
    r18 = julia_bowen(fam, proc, depth=18, n_samples=8, seed=0)
    stab = abs(r14.h - r18.h)
    dt = time.perf_counter() - t0
    ok = ok1 and 1.0 < r18.h < 2.0 and stab <= 0.02 and dt < 300.0
    report(12, "random-julia", ok,
           f"circle h={circle.h:.4f} (1.00 +/- 0.02); mixed h14={r14.h:.4f}, "
           f"h18={r18.h:.4f}, |dh|={stab:.4f} (<= 0.02); {dt:.1f}s")
