import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hybrid_ee.model import (
    BeamformingMode,
    CircuitModel,
    EnergyBreakdown,
    PaModel,
    SystemConfig,
    ThetaOverflowError,
    dbm_to_watt,
    energy_efficiency,
    noise_power,
    pa_power,
    theta,
    total_energy,
    watt_to_dbm,
)

from helpers import EPS, N0, P_BASE, P_IDLE, reference_setup


def _cfg(**kw):
    base = dict(bandwidth=1.0, slot=1.0, noise_psd=1.0, rate=1.0, num_subarrays=1, antennas_per_subarray=1)
    base.update(kw)
    return SystemConfig(**base)


# -- noise power -----------------------------------------------------------------


def test_noise_power_reference():
    cfg, *_ = reference_setup()
    assert noise_power(cfg) == pytest.approx(10**-13.4, rel=1e-12)
    assert noise_power(cfg) == pytest.approx(3.981e-14, rel=1e-3)


def test_noise_power_unit_and_product():
    assert noise_power(_cfg()) == 1.0
    assert noise_power(_cfg(noise_psd=2e-21, bandwidth=5e6)) == pytest.approx(1e-14, rel=1e-15)


def test_config_rejects_nonpositive_fields():
    with pytest.raises(ValueError, match="slot"):
        _cfg(slot=0.0)
    with pytest.raises(ValueError, match="num_subarrays"):
        _cfg(num_subarrays=0)


# -- theta -------------------------------------------------------------------------


def test_theta_unit_exponent():
    cfg = _cfg(noise_psd=3.0, rate=5.0, slot=2.0, bandwidth=10.0)  # r T = t W at t = 1
    assert theta(1.0, cfg) == pytest.approx(noise_power(cfg), rel=1e-15)


def test_theta_exponent_two():
    cfg = _cfg(rate=2.0)
    assert theta(1.0, cfg) == pytest.approx(3.0, rel=1e-15)


def test_theta_reference_against_high_precision():
    cfg, *_ = reference_setup(rate_mbps=10.0)
    sigma2 = N0 * 10e6
    with mpmath.workdps(50):
        exact = (mpmath.power(2, mpmath.mpf(10e6) * mpmath.mpf("0.01") / (mpmath.mpf("0.01") * 10e6)) - 1) * sigma2
    assert theta(cfg.slot, cfg) == pytest.approx(float(exact), rel=1e-14)
    assert theta(cfg.slot, cfg) == pytest.approx(3.981e-14, rel=1e-3)


def test_theta_small_exponent_keeps_precision():
    cfg = _cfg(rate=1e-12)
    assert theta(1.0, cfg) == pytest.approx(1e-12 * math.log(2), rel=1e-9)


def test_theta_overflow_guard():
    cfg = _cfg(rate=1e4)
    with pytest.raises(ThetaOverflowError):
        theta(1.0, cfg)


def test_theta_vectorized():
    cfg, *_ = reference_setup()
    ts = np.linspace(2e-3, 1e-2, 5)
    np.testing.assert_allclose(theta(ts, cfg), [theta(t, cfg) for t in ts], rtol=1e-15)


@settings(max_examples=100, deadline=None)
@given(frac=st.floats(0.05, 0.95), rate=st.floats(1.0, 150.0))
def test_theta_decreasing_and_convex(frac, rate):
    cfg, *_ = reference_setup(rate_mbps=rate)
    t = frac * cfg.slot
    h = 1e-3 * t
    lo, mid, hi = theta(t - h, cfg), theta(t, cfg), theta(t + h, cfg)
    assert lo > mid > hi
    assert lo + hi - 2 * mid >= -1e-12 * mid


# -- amplifier ---------------------------------------------------------------------------


def test_pa_power_zero_and_full_drive():
    pa = PaModel(p_max=dbm_to_watt(46), eta_max=0.35)
    assert pa_power(0.0, pa) == 0.0
    assert pa_power(pa.full_drive, pa) == pa.p_max


def test_pa_power_quarter_drive():
    pa = PaModel(p_max=40.0, eta_max=0.35)
    p = 40.0 * 0.35**2 / 4
    assert p == pytest.approx(1.225)
    assert pa_power(p, pa) == pytest.approx(20.0, rel=1e-14)


def test_pa_power_matches_square_root_law():
    pa = PaModel(p_max=40.0, eta_max=0.35)
    p = np.linspace(0, pa.full_drive, 17)
    np.testing.assert_allclose(pa_power(p, pa), np.sqrt(p * pa.p_max) / pa.eta_max, rtol=1e-13)


def test_pa_power_domain_error():
    pa = PaModel(p_max=40.0, eta_max=0.35)
    with pytest.raises(ValueError):
        pa_power(pa.full_drive * 1.01, pa)
    with pytest.raises(ValueError):
        pa_power(-1e-3, pa)


@settings(max_examples=100, deadline=None)
@given(a=st.floats(0.0, 1.0), b=st.floats(0.0, 1.0), lam=st.floats(0.0, 1.0))
def test_pa_power_increasing_and_concave(a, b, lam):
    pa = PaModel(p_max=40.0, eta_max=0.35)
    pa_, pb = sorted((a * pa.full_drive, b * pa.full_drive))
    assert pa_power(pa_, pa) <= pa_power(pb, pa)
    mix = lam * pa_ + (1 - lam) * pb
    assert pa_power(mix, pa) >= lam * pa_power(pa_, pa) + (1 - lam) * pa_power(pb, pa) - 1e-12


def test_pa_model_validation():
    with pytest.raises(ValueError):
        PaModel(p_max=1.0, eta_max=1.5)
    with pytest.raises(ValueError):
        PaModel(p_max=0.0, eta_max=0.5)


# -- energy --------------------------------------------------------------------------------


def test_all_idle_slot():
    cfg, pa, circuit, _ = reference_setup(M=4)
    e = total_energy(0.004, np.zeros(4), circuit, pa, cfg)
    assert e.total == pytest.approx(4 * P_IDLE * cfg.slot, rel=1e-15)
    assert e.pa_energy == e.static_circuit_energy == e.dynamic_circuit_energy == 0.0


def test_single_subarray_full_slot():
    cfg, pa, circuit, _ = reference_setup(M=1, rate_mbps=40)
    e = total_energy(cfg.slot, [pa.full_drive], circuit, pa, cfg)
    expected = pa.p_max * cfg.slot + EPS * cfg.rate * cfg.slot + P_BASE * cfg.slot
    assert e.total == pytest.approx(expected, rel=1e-13)


def test_two_subarrays_one_active_half_slot():
    cfg, _, circuit, _ = reference_setup(M=2, rate_mbps=60)
    pa = PaModel(p_max=40.0, eta_max=0.35)
    e = total_energy(0.005, [pa.full_drive, 0.0], circuit, pa, cfg)
    expected = 40 * 0.005 + EPS * 60e6 * 0.01 + 0.05 * 0.005 + 0.03 * 0.005 + 0.03 * 0.01
    assert e.total == pytest.approx(expected, rel=1e-13)


def test_nonlinear_dynamic_power_is_used():
    cfg, pa, _, _ = reference_setup(M=1, rate_mbps=40)
    circuit = CircuitModel(P_BASE, P_IDLE, dynamic=lambda r: 1e-18 * np.asarray(r) ** 2)
    e = total_energy(cfg.slot / 2, [pa.full_drive / 4], circuit, pa, cfg)
    assert e.dynamic_circuit_energy == pytest.approx(1e-18 * (2 * cfg.rate) ** 2 * cfg.slot / 2)


@settings(max_examples=100, deadline=None)
@given(
    frac=st.floats(0.01, 1.0),
    levels=st.lists(st.floats(0.0, 1.0), min_size=1, max_size=6),
    rate=st.floats(1.0, 200.0),
)
def test_breakdown_sums_and_ee_identity(frac, levels, rate):
    cfg, pa, circuit, _ = reference_setup(M=len(levels), rate_mbps=rate)
    powers = np.array(levels) * pa.full_drive
    e = total_energy(frac * cfg.slot, powers, circuit, pa, cfg)
    parts = [e.pa_energy, e.static_circuit_energy, e.dynamic_circuit_energy, e.idle_energy]
    assert min(parts) >= 0
    assert e.total == pytest.approx(math.fsum(parts), rel=1e-12)
    assert energy_efficiency(e, cfg) == cfg.rate * cfg.slot / e.total


def test_energy_efficiency_examples():
    cfg = _cfg(rate=1e6)
    assert energy_efficiency(EnergyBreakdown(1.0, 0, 0, 0), cfg) == pytest.approx(1e6)
    assert energy_efficiency(EnergyBreakdown(2.0, 0, 0, 0), cfg) == pytest.approx(0.5e6)
    cfg, *_ = reference_setup(rate_mbps=60)
    assert energy_efficiency(EnergyBreakdown(0.05, 0.02, 0.02, 0.01), cfg) == pytest.approx(6e6)


def test_dbm_round_trip():
    assert dbm_to_watt(30.0) == pytest.approx(1.0)
    assert watt_to_dbm(dbm_to_watt(46.0)) == pytest.approx(46.0)
    assert dbm_to_watt(46.0) == pytest.approx(39.81, rel=1e-3)


def test_mode_is_coerced():
    assert _cfg(mode="coherent").mode is BeamformingMode.COHERENT
