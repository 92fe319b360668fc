import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hybrid_ee.channel import (
    PathLossModel,
    effective_amplitudes,
    effective_from_amplitudes,
    effective_gains,
    read_channel_dump,
    sample_channels,
    write_channel_dump,
)
from hybrid_ee.model import BeamformingMode, ChannelRealization, PaModel, SystemConfig

from helpers import reference_setup

COH, NC = BeamformingMode.COHERENT, BeamformingMode.NONCOHERENT


def _cfg(M, K):
    return SystemConfig(bandwidth=1e7, slot=1e-2, noise_psd=1e-20, rate=1e7, num_subarrays=M, antennas_per_subarray=K)


def test_path_loss_formula():
    pl = PathLossModel(distance=200.0)
    assert pl.loss_db() == pytest.approx(61.4 + 20 * math.log10(200.0))
    assert pl.loss_db(3.0) == pytest.approx(pl.loss_db() + 3.0)


def test_unshadowed_one_metre_mean_power():
    pl = PathLossModel(distance=1.0, shadowing_sigma=0.0)
    real = sample_channels(_cfg(100, 1000), pl, seed=3, trial=0)
    mean_sq = np.mean(np.abs(real.coefficients) ** 2)
    assert mean_sq == pytest.approx(10**-6.14, rel=0.02)
    assert real.shadowing_db == 0.0


def test_unit_variance_fading():
    pl = PathLossModel(distance=1.0, shadowing_sigma=0.0, intercept=0.0, slope=0.0)
    real = sample_channels(_cfg(100, 1000), pl, seed=11, trial=5)
    assert 0.99 <= np.mean(np.abs(real.coefficients) ** 2) <= 1.01
    # circular symmetry: real and imaginary parts each carry half the power
    assert np.var(real.coefficients.real) == pytest.approx(0.5, abs=0.01)


def test_sampling_is_deterministic_per_key():
    cfg, _, _, pl = reference_setup(M=4, K=8)
    a = sample_channels(cfg, pl, seed=2**63 + 5, trial=7)
    b = sample_channels(cfg, pl, seed=2**63 + 5, trial=7)
    c = sample_channels(cfg, pl, seed=2**63 + 5, trial=8)
    assert np.array_equal(a.coefficients, b.coefficients)
    assert a.shadowing_db == b.shadowing_db
    assert not np.array_equal(a.coefficients, c.coefficients)


def test_shadowing_shared_across_geometry_and_distance():
    cfg, _, _, pl = reference_setup(M=4, K=8)
    a = sample_channels(cfg, pl, seed=1, trial=3)
    b = sample_channels(_cfg(2, 2), PathLossModel(distance=50.0), seed=1, trial=3)
    assert a.shadowing_db == b.shadowing_db


def test_single_antenna_modes_agree():
    pa = PaModel(40.0, 0.35)
    real = ChannelRealization(np.array([[1 + 2j], [0.5 - 0.1j]]))
    a, b = effective_gains(real, COH, pa), effective_gains(real, NC, pa)
    np.testing.assert_allclose(a.h, np.abs(real.coefficients[:, 0]))
    np.testing.assert_allclose(b.h, a.h)


def test_aligned_phases():
    K, a = 5, 0.3
    coeffs = np.full((2, K), a, dtype=complex)
    for mode in (COH, NC):
        np.testing.assert_allclose(effective_amplitudes(coeffs, mode), math.sqrt(K) * a)


def test_cancellation():
    a = 0.7
    coeffs = np.array([[a, -a]], dtype=complex)
    assert effective_amplitudes(coeffs, NC)[0] == pytest.approx(0.0, abs=1e-16)
    assert effective_amplitudes(coeffs, COH)[0] == pytest.approx(math.sqrt(2) * a)


def test_kappa_scaling_and_tie_break():
    pa = PaModel(40.0, 0.35)
    eff = effective_from_amplitudes([1.0, 3.0, 1.0, 3.0], COH, pa)
    np.testing.assert_allclose(eff.kappa, 0.35 / math.sqrt(40.0) * np.array([1.0, 3.0, 1.0, 3.0]))
    assert list(eff.order) == [1, 3, 0, 2]


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**64 - 1), trial=st.integers(0, 10**6), M=st.integers(1, 8), K=st.integers(1, 8))
def test_coherent_dominates_and_order_sorted(seed, trial, M, K):
    cfg, pa, _, pl = reference_setup(M=M, K=K)
    real = sample_channels(cfg, pl, seed, trial)
    coh, nc = effective_gains(real, COH, pa), effective_gains(real, NC, pa)
    assert np.all(coh.h >= nc.h * (1 - 1e-12))
    assert np.all(coh.kappa >= nc.kappa * (1 - 1e-12))
    for eff in (coh, nc):
        assert np.all(np.diff(eff.sorted_kappa) <= 0)
        assert sorted(eff.order) == list(range(M))


def test_channel_dump_round_trip(tmp_path):
    cfg, _, _, pl = reference_setup(M=3, K=2)
    reals = {t: sample_channels(cfg, pl, 9, t) for t in (0, 4)}
    path = tmp_path / "ch.csv"
    write_channel_dump(path, reals)
    back = read_channel_dump(path)
    assert sorted(back) == [0, 4]
    for t in reals:
        assert np.array_equal(back[t].coefficients, reals[t].coefficients)


def test_channel_dump_rejects_missing_columns(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("trial,m,k,re\n0,0,0,1.0\n")
    with pytest.raises(ValueError, match="missing"):
        read_channel_dump(path)


def test_channel_dump_rejects_partial_grid(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("trial,m,k,re,im\n0,0,0,1.0,0.0\n0,1,1,1.0,0.0\n")
    with pytest.raises(ValueError, match="full"):
        read_channel_dump(path)
