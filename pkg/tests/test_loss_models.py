import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bridgeloss.conductivity import AL, TA, DomainError, kinetic_inductance
from bridgeloss.loss_models import (
    REFERENCE_T,
    CompositeLossModel,
    PowerLossModel,
    ResonatorGeometry,
    composite_loss,
    expected_qi_scaling,
    fractional_frequency_shift,
    power_dependent_loss,
    quasiparticle_loss,
    resonance_frequency,
    thickness_factor,
)

GOLD_TA_1K = 4.590487827328229e-06  # Ta, 1.0 K, 5.4 GHz
GOLD_COMPOSITE = 7.86297696449464e-05  # p = 0.042, 1.0 K, 6.15 GHz


def test_thickness_factor_limits():
    assert thickness_factor(0.0, 1e-7) == 2.0
    assert thickness_factor(1e-12, 1e-7) == pytest.approx(2.0, abs=1e-9)
    assert thickness_factor(1e-3, 1e-7) == pytest.approx(1.0, abs=1e-12)
    # both branches agree at the switch point
    lam = 1e-7
    d = 10.0 * lam
    x = 2 * d / lam
    assert thickness_factor(d, lam) == pytest.approx(1 + x / math.sinh(x), rel=1e-14)


def test_quasiparticle_loss_golden():
    assert quasiparticle_loss(TA, 1.0, 5.4e9) == pytest.approx(GOLD_TA_1K, rel=1e-9)


@pytest.mark.parametrize("mat", [AL, TA])
def test_quasiparticle_loss_monotone(mat):
    ts = np.linspace(0.3, 0.95, 25) * mat.tc
    q = [quasiparticle_loss(mat, t, 6e9) for t in ts]
    assert all(a < b for a, b in zip(q, q[1:]))


def test_composite_endpoints_exact():
    assert composite_loss(CompositeLossModel(0.0), 0.8, 6e9, TA, AL) == quasiparticle_loss(TA, 0.8, 6e9)
    assert composite_loss(CompositeLossModel(1.0), 0.8, 6e9, TA, AL) == quasiparticle_loss(AL, 0.8, 6e9)


def test_composite_golden():
    got = composite_loss(CompositeLossModel(0.042), 1.0, 6.15e9, TA, AL)
    assert got == pytest.approx(GOLD_COMPOSITE, rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(p=st.floats(0, 1), t=st.floats(0.4, 1.1), q=st.floats(0, 1e-5))
def test_composite_affine_in_p(p, t, q):
    a = composite_loss(CompositeLossModel(0.0, q), t, 6e9, TA, AL)
    b = composite_loss(CompositeLossModel(1.0, q), t, 6e9, TA, AL)
    direct = composite_loss(CompositeLossModel(p, q), t, 6e9, TA, AL)
    assert direct == pytest.approx((1 - p) * a + p * b, rel=1e-12)


def test_composite_model_validation():
    with pytest.raises(ValueError):
        CompositeLossModel(1.2)
    with pytest.raises(ValueError):
        CompositeLossModel(0.1, -1e-6)


def test_expected_qi_scaling():
    assert expected_qi_scaling(0.0085, 0.042, 5e-7, 1e-7) == pytest.approx(4.97e6, rel=2e-3)
    assert expected_qi_scaling(0.02, 0.02, 4e-6, 0.0) == pytest.approx(1 / 4e-6, rel=1e-15)
    assert expected_qi_scaling(0.0, 0.02, 4e-6, 2e-7) == pytest.approx(1 / 2e-7, rel=1e-15)
    with pytest.raises(DomainError):
        expected_qi_scaling(0.01, 0.0, 1e-7, 1e-7)
    with pytest.raises(DomainError):
        expected_qi_scaling(0.0, 0.1, 1e-7, 0.0)


@settings(max_examples=50, deadline=None)
@given(c=st.floats(1e-3, 1e3), q=st.floats(1e-9, 1e-5), r=st.floats(1e-9, 1e-5))
def test_expected_qi_scaling_homogeneous(c, q, r):
    base = expected_qi_scaling(0.0085, 0.042, q, r)
    assert expected_qi_scaling(0.0085, 0.042, c * q, c * r) == pytest.approx(base / c, rel=1e-12)


@pytest.fixture(scope="module")
def geom():
    return ResonatorGeometry.calibrated(6.15e9, 16e-12, TA, AL)


def test_resonance_frequency(geom):
    lk0 = kinetic_inductance(TA, REFERENCE_T, 6.15e9)
    assert resonance_frequency(geom, lk0) == pytest.approx(6.15e9, rel=1e-14)
    doubled = ResonatorGeometry(geom.f_r0, geom.length_l, geom.l_g, 2 * geom.capacitance_c, TA)
    assert resonance_frequency(doubled, lk0) == pytest.approx(6.15e9 / math.sqrt(2), rel=1e-14)
    assert 5.38e9 <= resonance_frequency(geom, lk0) <= 6.15e9
    with pytest.raises(ValueError):
        ResonatorGeometry(25e9, 5e-3, 16e-12, 1e-10, TA)


def test_shift_zero_at_reference(geom):
    for p in (0.0, 0.006, 0.02, 0.034):
        assert fractional_frequency_shift(geom, p, REFERENCE_T) == 0.0


def test_shift_literal_reference_offset(geom):
    off = fractional_frequency_shift(geom, 0.034, REFERENCE_T, reference_includes_bridge=False)
    assert -1e-3 < off < 0.0


def test_shift_p_zero_is_trace_only(geom):
    T = 1.1
    lk0 = kinetic_inductance(TA, REFERENCE_T, 6.15e9)
    lk = kinetic_inductance(TA, T, 6.15e9)
    expected = math.sqrt((geom.l_g + lk0) / (geom.l_g + lk)) - 1
    assert fractional_frequency_shift(geom, 0.0, T) == pytest.approx(expected, rel=1e-14)


def test_shift_monotone_in_t_and_p(geom):
    ps = [0.0, 0.006, 0.02, 0.034]
    at_11 = [fractional_frequency_shift(geom, p, 1.1) for p in ps]
    assert all(a > b for a, b in zip(at_11, at_11[1:]))
    ts = np.linspace(0.05, 1.15, 30)
    for p in ps:
        s = [fractional_frequency_shift(geom, p, t) for t in ts]
        assert all(a > b for a, b in zip(s, s[1:]))


def test_shift_requires_bridge():
    g = ResonatorGeometry.calibrated(6e9, 16e-12, TA)
    with pytest.raises(ValueError):
        fractional_frequency_shift(g, 0.02, 1.0)


def test_power_loss_limits():
    m = PowerLossModel(1.72e-6, 10.0, 0.3, 5e-7)
    assert power_dependent_loss(m, 0.0) == pytest.approx(1.72e-6 + 5e-7, rel=1e-15)
    assert power_dependent_loss(m, 1e40) == pytest.approx(5e-7, rel=1e-3)
    arr = power_dependent_loss(m, np.logspace(0, 8, 9))
    assert np.all(np.diff(arr) < 0)
    assert 1 / power_dependent_loss(m, 1.0) == pytest.approx(4.5e5, rel=0.02)
    assert 1 / power_dependent_loss(m, 1e8) == pytest.approx(1.5e6, rel=0.03)
    with pytest.raises(ValueError):
        power_dependent_loss(m, -1.0)
    with pytest.raises(ValueError):
        PowerLossModel(1e-6, 0.0)
