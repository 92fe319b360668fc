"""Rayleigh channel sampling and reduction to per-subarray effective gains."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Union

import numpy as np

from .model import BeamformingMode, ChannelRealization, EffectiveChannel, PaModel, SystemConfig


@dataclass(frozen=True)
class PathLossModel:
    """Log-distance path loss ``intercept + slope * log10(d) + xi`` in dB with
    log-normal shadowing ``xi ~ N(0, shadowing_sigma^2)``."""

    distance: float = 200.0
    shadowing_sigma: float = 5.8
    intercept: float = 61.4
    slope: float = 20.0

    def __post_init__(self):
        if not self.distance > 0:
            raise ValueError(f"distance must be positive, got {self.distance!r}")
        if self.shadowing_sigma < 0:
            raise ValueError("shadowing_sigma must be non-negative")

    def loss_db(self, shadowing_db: float = 0.0) -> float:
        return self.intercept + self.slope * math.log10(self.distance) + shadowing_db


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Counter-based generator keyed only by ``(seed, trial)``."""
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), int(trial)])
    return np.random.Generator(np.random.Philox(ss))


def sample_channels(
    cfg: SystemConfig, pl: PathLossModel, seed: int, trial: int
) -> ChannelRealization:
    """Draw one block-fading realization for trial ``trial``.

    The shadowing term is drawn first and shared by every antenna, followed
    by ``M*K`` unit-variance circularly-symmetric Gaussian coefficients, so
    changing the geometry or the distance keeps the shadowing draw fixed.
    """
    rng = trial_rng(seed, trial)
    xi = float(rng.standard_normal()) * pl.shadowing_sigma
    M, K = cfg.num_subarrays, cfg.antennas_per_subarray
    g = (rng.standard_normal((M, K)) + 1j * rng.standard_normal((M, K))) / math.sqrt(2.0)
    amplitude = 10.0 ** (-pl.loss_db(xi) / 20.0)
    return ChannelRealization(g * amplitude, distance=pl.distance, shadowing_db=xi)


def effective_amplitudes(coefficients: np.ndarray, mode: BeamformingMode) -> np.ndarray:
    coefficients = np.asarray(coefficients, dtype=complex)
    K = coefficients.shape[1]
    if BeamformingMode(mode) is BeamformingMode.COHERENT:
        return np.sum(np.abs(coefficients), axis=1) / math.sqrt(K)
    return np.abs(np.sum(coefficients, axis=1)) / math.sqrt(K)


def effective_gains(
    real: ChannelRealization, mode: BeamformingMode, pa: PaModel
) -> EffectiveChannel:
    """Reduce a realization to effective amplitudes ``h_m``, gains
    ``kappa_m = eta_max / sqrt(p_max) * h_m`` and their descending order.

    Coherent combining adds antenna magnitudes; non-coherent combining takes
    the magnitude of the complex sum. Ties in kappa keep the lower index first.
    """
    mode = BeamformingMode(mode)
    h = effective_amplitudes(real.coefficients, mode)
    return effective_from_amplitudes(h, mode, pa)


def effective_from_amplitudes(h, mode: BeamformingMode, pa: PaModel) -> EffectiveChannel:
    h = np.asarray(h, dtype=float)
    kappa = pa.eta_max / math.sqrt(pa.p_max) * h
    order = np.argsort(-kappa, kind="stable")
    return EffectiveChannel(h=h, kappa=kappa, order=order, mode=BeamformingMode(mode))


# -- channel dump (trial, m, k, re, im) ------------------------------------

DUMP_HEADER = ("trial", "m", "k", "re", "im")


def write_channel_dump(path: Union[str, Path], realizations: Dict[int, ChannelRealization]) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(DUMP_HEADER)
        for trial in sorted(realizations):
            coeffs = realizations[trial].coefficients
            for m, k in np.ndindex(coeffs.shape):
                c = coeffs[m, k]
                writer.writerow([trial, m, k, repr(float(c.real)), repr(float(c.imag))])


def read_channel_dump(path: Union[str, Path]) -> Dict[int, ChannelRealization]:
    path = Path(path)
    entries: Dict[int, Dict[tuple, complex]] = {}
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(DUMP_HEADER) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: channel dump missing columns {sorted(missing)}")
        for row in reader:
            trial = int(row["trial"])
            key = (int(row["m"]), int(row["k"]))
            entries.setdefault(trial, {})[key] = complex(float(row["re"]), float(row["im"]))
    out = {}
    for trial, cells in entries.items():
        M = max(m for m, _ in cells) + 1
        K = max(k for _, k in cells) + 1
        if len(cells) != M * K:
            raise ValueError(f"{path}: trial {trial} does not cover a full {M}x{K} grid")
        coeffs = np.empty((M, K), dtype=complex)
        for (m, k), c in cells.items():
            coeffs[m, k] = c
        out[trial] = ChannelRealization(coeffs)
    return out


