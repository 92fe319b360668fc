"""Shared fixtures-by-function for the test suite."""

from __future__ import annotations

import math

import mpmath
import numpy as np

from hybrid_ee import BeamformingMode, CircuitModel, PaModel, SystemConfig
from hybrid_ee.channel import PathLossModel, effective_from_amplitudes, effective_gains, sample_channels

# Reference scenario, written out here rather than read from the package config
W = 10e6
T = 10e-3
N0 = 10 ** (-174 / 10) * 1e-3
P_MAX = 10 ** (46 / 10) * 1e-3
ETA = 0.35
P_IDLE = 30e-3
P_BASE = 50e-3
EPS = 5e-3 / 1e6


def reference_setup(M=2, K=4, rate_mbps=60.0, mode=BeamformingMode.NONCOHERENT, slot=T):
    cfg = SystemConfig(bandwidth=W, slot=slot, noise_psd=N0, rate=rate_mbps * 1e6,
                       num_subarrays=M, antennas_per_subarray=K, mode=mode)
    return cfg, PaModel(P_MAX, ETA), CircuitModel(P_BASE, P_IDLE, EPS), PathLossModel()


def instance(seed, trial, M=2, K=4, rate_mbps=60.0, mode=BeamformingMode.NONCOHERENT):
    """``(eff, pa, circuit, cfg)`` for one reference-scenario realization."""
    cfg, pa, circuit, pl = reference_setup(M, K, rate_mbps, mode)
    real = sample_channels(cfg, pl, seed, trial)
    return effective_gains(real, mode, pa), pa, circuit, cfg


def from_kappa(kappa, mode, pa):
    """Effective channel with prescribed gains ``kappa``."""
    h = np.asarray(kappa, dtype=float) * math.sqrt(pa.p_max) / pa.eta_max
    return effective_from_amplitudes(h, mode, pa)


def unit_config(mode=BeamformingMode.NONCOHERENT, M=2, rate=1.0, slot=1.0):
    """W = 1 Hz, sigma^2 = 1 W: handy for hand-checkable examples."""
    return SystemConfig(bandwidth=1.0, slot=slot, noise_psd=1.0, rate=rate,
                        num_subarrays=M, antennas_per_subarray=1, mode=mode)


def t_for_theta(theta, cfg):
    """Duration at which the required received power equals ``theta``."""
    return cfg.bits_per_slot / (cfg.bandwidth * math.log2(1 + theta / (cfg.noise_psd * cfg.bandwidth)))


def mp_segment_energy(t, m, eff, pa, circuit, cfg, dps=40):
    """Slot energy with the best ``m`` subarrays on (``m - 1`` saturated),
    evaluated from scratch in extended precision."""
    with mpmath.workdps(dps):
        t = mpmath.mpf(t)
        ks = [mpmath.mpf(float(k)) for k in eff.sorted_kappa]
        P = mpmath.mpf(pa.p_max)
        sigma2 = mpmath.mpf(cfg.noise_psd) * cfg.bandwidth
        bits = mpmath.mpf(cfg.rate) * mpmath.mpf(cfg.slot)
        th = (mpmath.power(2, bits / (t * cfg.bandwidth)) - 1) * sigma2
        if eff.mode is BeamformingMode.COHERENT:
            v = (mpmath.sqrt(th) - P * mpmath.fsum(ks[: m - 1])) / ks[m - 1]
        else:
            v = mpmath.sqrt((th - P**2 * mpmath.fsum(k**2 for k in ks[: m - 1])) / ks[m - 1] ** 2)
        drawn = (m - 1) * P + v
        per_chain = mpmath.mpf(circuit.p_base) - circuit.p_idle + mpmath.mpf(circuit.epsilon) * bits / t
        return (drawn + m * per_chain) * t + cfg.num_subarrays * mpmath.mpf(circuit.p_idle) * cfg.slot


def mp_second_derivative(t, h, *args, dps=40):
    with mpmath.workdps(dps):
        f = lambda s: mp_segment_energy(s, *args, dps=dps)
        t, h = mpmath.mpf(t), mpmath.mpf(h)
        return (f(t + h) - 2 * f(t) + f(t - h)) / h**2
