"""Acceptance gate: one PASS/FAIL line per criterion, at the stated tolerances.

Run with ``pytest tests/test_acceptance.py -v``; the lines print even when
output capture is on.
"""

import math
import time

import numpy as np
import pytest

import oracle
from bridgeloss import kernels
from bridgeloss.conductivity import AL, TA, clear_cache, sigma1_ratio, sigma2_ratio
from bridgeloss.constants import H
from bridgeloss.fields import FieldSampleSet, limiting_q_from_rs, participation_from_fields
from bridgeloss.loss_models import REFERENCE_T, ResonatorGeometry, expected_qi_scaling, fractional_frequency_shift
from bridgeloss.resonance import DcmParams, fit_s21, synthesize_trace
from bridgeloss.sweeps import LossSweep, fit_participation, fit_power_sweep
from bridgeloss.synth import POWER_MODEL_35, power_sweep, temperature_sweep


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        status = ok if isinstance(ok, str) else ("PASS" if ok else "FAIL")
        with capsys.disabled():
            print(f"\nACCEPTANCE {number} {status}: {detail}")
    return emit


def test_1_sigma2_low_temperature_limit(report):
    clear_cache()
    t0 = time.perf_counter()
    errs = {}
    for mat in (AL, TA):
        analytic = math.pi * mat.gap0 / (H * 6e9)
        errs[mat.name] = (sigma2_ratio(mat, 0.01 * mat.tc, 6e9) - analytic) / analytic
    dt = time.perf_counter() - t0
    ok = all(abs(e) <= 0.005 for e in errs.values()) and dt < 1.0
    report(1, ok, f"rel. error Al {errs['al']:+.2e}, Ta {errs['ta']:+.2e} (tol 5e-3), "
                  f"{dt * 1e3:.1f} ms")
    assert ok


def test_2_quadrature_matches_oracle(report):
    rng = np.random.default_rng(20240607)
    points = [((AL, TA)[i % 2], rng.uniform(0.1, 0.95), rng.uniform(4e9, 8e9)) for i in range(20)]
    clear_cache()
    t0 = time.perf_counter()
    ours = [(sigma1_ratio(m, t * m.tc, f), sigma2_ratio(m, t * m.tc, f)) for m, t, f in points]
    dt = time.perf_counter() - t0
    t0 = time.perf_counter()
    worst = 0.0
    for (m, t, f), (s1, s2) in zip(points, ours):
        T = t * m.tc
        gap = oracle.gap_interp(oracle.material(m.name)["gap0"], m.tc, T)
        worst = max(worst, abs(s1 / oracle.sigma1(gap, T, f) - 1), abs(s2 / oracle.sigma2(gap, T, f) - 1))
    dt_oracle = time.perf_counter() - t0
    ok = worst <= 1e-4 and dt < 30.0
    report(2, ok, f"worst rel. deviation {worst:.2e} over 20 points (tol 1e-4); "
                  f"package {dt * 1e3:.1f} ms ({kernels.BACKEND}), oracle {dt_oracle:.1f} s")
    assert ok


def test_3_qi_scaling(report):
    q = expected_qi_scaling(0.0085, 0.042, 5e-7, 1e-7)
    ok = abs(q / 4.97e6 - 1) <= 0.02
    report(3, ok, f"expected Q_i = {q:.4g} (target 4.97e6 +/- 2%), half of the observed 1e7")
    assert ok


def test_4_s21_round_trip(report):
    truth = DcmParams.from_qi(6.15e9, 7.5e5, 3e5, phi=0.1, baseline=0.8 - 0.3j)
    t0 = time.perf_counter()
    errs = np.array([abs(fit_s21(synthesize_trace(truth, noise_sigma=0.01, seed=s)).q_i / 7.5e5 - 1)
                     for s in range(100)])
    dt = time.perf_counter() - t0
    med, p95 = float(np.median(errs)), float(np.percentile(errs, 95))
    ok = med <= 0.03 and p95 <= 0.10 and dt < 10.0
    report(4, ok, f"Q_i error median {med:.2%} (tol 3%), 95th pct {p95:.2%} (tol 10%), "
                  f"100 fits in {dt:.2f} s")
    assert ok


PARTICIPATION_CASES = ((0.0085, 1 / 7.5e5), (0.02, 1 / 7.5e5), (0.042, 1 / 4.5e5))
SWEEP_T = np.linspace(0.4, 1.15, 20)


def _participation_trial(seed, weighted=True):
    rng = np.random.default_rng(seed)
    fitted = []
    for p, q in PARTICIPATION_CASES:
        s = temperature_sweep(p, q, SWEEP_T, f_r=6.15e9, noise=0.02, rng=rng)
        if not weighted:
            s = LossSweep("temperature", s.x, s.q_inv, f_r=s.f_r)
        fitted.append(fit_participation(s, TA, AL).p)
    return fitted


def test_5_participation_round_trip(report):
    worst, ordered = 0.0, True
    for seed in range(50):
        ps = _participation_trial(seed)
        worst = max(worst, *(abs(f / p - 1) for f, (p, _) in zip(ps, PARTICIPATION_CASES)))
        ordered &= ps[0] < ps[1] < ps[2]
    ok = worst <= 0.05 and ordered
    report(5, ok, f"worst rel. p error {worst:.2%} over 50 seeds x 3 sweeps (tol 5%), "
                  f"ordering p8 < p20 < p35 {'held' if ordered else 'BROKEN'} in all seeds")
    # uniform weighting for reference, not part of the gate
    worst_u = max(max(abs(f / p - 1) for f, (p, _) in zip(_participation_trial(s, False),
                                                           PARTICIPATION_CASES)) for s in range(50))
    with_u = "within" if worst_u <= 0.05 else "outside"
    report(5, "INFO", f"uniform weighting worst {worst_u:.2%} ({with_u} 5%)")
    assert ok


def test_6_power_sweep_decomposition(report):
    errs = []
    for seed in range(20):
        m = fit_power_sweep(power_sweep(POWER_MODEL_35, noise=0.01, rng=np.random.default_rng(seed)))
        errs.append(abs(m.q_const_inv / 5e-7 - 1))
    worst = max(errs)
    ok = worst <= 0.10
    report(6, ok, f"Q_const^-1 worst rel. error {worst:.2%} over 20 seeds, 1% noise, "
                  f"<n_p> in [1, 1e8] (tol 10%)")
    assert ok


def test_7_frequency_shift(report):
    geom = ResonatorGeometry.calibrated(6.15e9, 16e-12, TA, AL)
    ps = (0.0, 0.006, 0.02, 0.034)
    hot = [fractional_frequency_shift(geom, p, 1.1) for p in ps]
    cold = [fractional_frequency_shift(geom, p, REFERENCE_T) for p in ps]
    ok = all(a > b for a, b in zip(hot, hot[1:])) and all(c == 0.0 for c in cold)
    report(7, ok, "shifts at 1.1 K " + ", ".join(f"{s:.3e}" for s in hot)
                  + f"; at 10 mK max |shift| {max(map(abs, cold)):.1e}")
    assert ok


def test_8_field_participation(report):
    rng = np.random.default_rng(8)
    worst_p = worst_q = 0.0
    for r in (0.006, 0.034, 0.25, 0.5):
        n = 200
        wc, wb = rng.uniform(1e-12, 1e-10, n), rng.uniform(1e-12, 1e-10, n)
        hc, hb = rng.uniform(0.1, 1, n), rng.uniform(0.1, 1, n)
        hc *= (1 - r) / math.fsum(hc * wc)
        hb *= r / math.fsum(hb * wb)
        vw = rng.uniform(1e-16, 1e-15, n)
        s = FieldSampleSet(("chip",) * n + ("bridge",) * n, np.concatenate([hc, hb]),
                           np.concatenate([wc, wb]), rng.uniform(0.1, 1, n), vw, 6e9)
        exact = math.fsum(hb * wb) / (math.fsum(hc * wc) + math.fsum(hb * wb))
        worst_p = max(worst_p, abs(participation_from_fields(s).p - exact), abs(exact - r))
        q = limiting_q_from_rs(1e-4, s)
        for c in (1e-3, 7.0, 1e5):
            worst_q = max(worst_q, abs(limiting_q_from_rs(1e-4, s.scaled(c)) / q - 1))
    ok = worst_p <= 1e-12 and worst_q <= 1e-12
    report(8, ok, f"|p - r| max {worst_p:.1e} (tol 1e-12); Q_s^-1 rescale deviation "
                  f"max {worst_q:.1e} (tol 1e-12)")
    assert ok


def test_9_documentary(report):
    report(9, "INFO", "documentary: measured sweep data are unpublished; "
                    "criteria 4-7 stand in with round-trips and ordering checks")
