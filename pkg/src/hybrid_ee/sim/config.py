"""Flat ``key = value`` experiment configuration.

Every key carries its unit in the name (``p_max_dbm``, ``slot_ms``...). A
user file only needs the keys it changes; the rest come from the packaged
``default.ini``. Values are converted to SI once, when the model objects are
built.
"""

from __future__ import annotations

import configparser
import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

from ..baselines import SchemeId
from ..channel import PathLossModel
from ..model import BeamformingMode, CircuitModel, PaModel, SystemConfig, dbm_to_watt

DEFAULT_PATH = Path(__file__).with_name("default.ini")
_SECTION = "experiment"


class ConfigError(ValueError):
    """Invalid or unknown configuration entry; ``field`` names the key."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


# swept parameter -> (config key, axis label)
SWEEPABLE: Dict[str, Tuple[str, str]] = {
    "r_dl": ("rate_mbps", "Target rate r_dl (Mbit/s)"),
    "M": ("num_subarrays", "Number of subarrays M"),
    "K": ("antennas_per_subarray", "Antennas per subarray K"),
    "P_max": ("p_max_dbm", "Maximum PA output P_max (dBm)"),
    "eta_max": ("eta_max", "Maximum PA efficiency eta_max"),
    "epsilon": ("epsilon_mw_per_mbps", "Dynamic circuit power epsilon (mW per Mbit/s)"),
    "P_base": ("p_base_mw", "Static circuit power P_base (mW)"),
    "T": ("slot_ms", "Slot duration T (ms)"),
    "distance": ("distance_m", "Distance d (m)"),
}

_INT_KEYS = {"num_subarrays", "antennas_per_subarray", "seed", "trials"}
_POSITIVE = {
    "bandwidth_mhz",
    "slot_ms",
    "rate_mbps",
    "distance_m",
    "eta_max",
    "num_subarrays",
    "antennas_per_subarray",
    "trials",
}
_NON_NEGATIVE = {"p_idle_mw", "p_base_mw", "epsilon_mw_per_mbps", "shadowing_sigma_db", "fixed_total_bits", "seed"}


@dataclass(frozen=True)
class ExperimentConfig:
    """Parsed configuration in the file's own units."""

    bandwidth_mhz: float
    slot_ms: float
    n0_dbm_per_hz: float
    rate_mbps: float
    num_subarrays: int
    antennas_per_subarray: int
    distance_m: float
    pl_intercept_db: float
    pl_slope_db: float
    shadowing_sigma_db: float
    p_idle_mw: float
    p_base_mw: float
    epsilon_mw_per_mbps: float
    p_max_dbm: float
    eta_max: float
    modes: Tuple[BeamformingMode, ...]
    schemes: Tuple[SchemeId, ...]
    seed: int
    trials: int
    sweep_parameter: str
    sweep_values: Tuple[float, ...]
    fixed_total_bits: float = 0.0
    source: Optional[str] = field(default=None, compare=False)

    # -- model objects ------------------------------------------------------

    @property
    def rate(self) -> float:
        """Target rate in bit/s, derived from the fixed bit budget if set."""
        if self.fixed_total_bits > 0:
            return self.fixed_total_bits / (self.slot_ms * 1e-3)
        return self.rate_mbps * 1e6

    def system(self, mode: BeamformingMode = BeamformingMode.NONCOHERENT) -> SystemConfig:
        return SystemConfig(
            bandwidth=self.bandwidth_mhz * 1e6,
            slot=self.slot_ms * 1e-3,
            noise_psd=dbm_to_watt(self.n0_dbm_per_hz),
            rate=self.rate,
            num_subarrays=self.num_subarrays,
            antennas_per_subarray=self.antennas_per_subarray,
            mode=mode,
        )

    def pa(self) -> PaModel:
        return PaModel(p_max=dbm_to_watt(self.p_max_dbm), eta_max=self.eta_max)

    def circuit(self) -> CircuitModel:
        # mW per Mbit/s == 1e-9 W per bit/s
        return CircuitModel(
            p_base=self.p_base_mw * 1e-3,
            p_idle=self.p_idle_mw * 1e-3,
            epsilon=self.epsilon_mw_per_mbps * 1e-9,
        )

    def pathloss(self) -> PathLossModel:
        return PathLossModel(
            distance=self.distance_m,
            shadowing_sigma=self.shadowing_sigma_db,
            intercept=self.pl_intercept_db,
            slope=self.pl_slope_db,
        )

    # -- sweeping -------------------------------------------------------------

    def with_value(self, parameter: str, value: float) -> "ExperimentConfig":
        """Copy with the swept ``parameter`` set to ``value`` (config units)."""
        if parameter not in SWEEPABLE:
            raise ConfigError("sweep_parameter", f"unknown parameter {parameter!r}")
        key = SWEEPABLE[parameter][0]
        if key in _INT_KEYS:
            if value != int(value):
                raise ConfigError("sweep_values", f"{parameter} needs integer values, got {value!r}")
            value = int(value)
        return dataclasses.replace(self, **{key: value})

    def replace(self, **changes) -> "ExperimentConfig":
        cfg = dataclasses.replace(self, **changes)
        _validate(cfg)
        return cfg


# -- parsing -------------------------------------------------------------------

_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
_KEYS = (set(_FIELDS) - {"modes", "source"}) | {"mode"}


def _read_pairs(text: str, origin: str) -> Dict[str, str]:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(f"[{_SECTION}]\n" + text, source=origin)
    except configparser.Error as exc:
        raise ConfigError("<file>", f"{origin}: {exc}") from None
    if parser.sections() != [_SECTION]:
        extra = [s for s in parser.sections() if s != _SECTION]
        raise ConfigError("<file>", f"{origin}: sections are not supported ({extra})")
    return dict(parser[_SECTION])


def _parse_modes(raw: str) -> Tuple[BeamformingMode, ...]:
    raw = raw.strip().lower()
    if raw == "both":
        return (BeamformingMode.COHERENT, BeamformingMode.NONCOHERENT)
    try:
        return tuple(BeamformingMode(m.strip()) for m in raw.split(",") if m.strip())
    except ValueError:
        raise ConfigError("mode", f"expected coherent, noncoherent or both, got {raw!r}") from None


def _parse_schemes(raw: str) -> Tuple[SchemeId, ...]:
    raw = raw.strip().lower()
    if raw == "all":
        return tuple(SchemeId)
    try:
        return tuple(SchemeId(s.strip()) for s in raw.split(",") if s.strip())
    except ValueError:
        choices = ", ".join(s.value for s in SchemeId)
        raise ConfigError("schemes", f"expected 'all' or a list of {choices}; got {raw!r}") from None


def _number(key: str, raw: str):
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(key, f"not a number: {raw!r}") from None
    if not math.isfinite(value):
        raise ConfigError(key, f"must be finite, got {raw!r}")
    if key in _INT_KEYS:
        if value != int(value):
            raise ConfigError(key, f"must be an integer, got {raw!r}")
        return int(value)
    return value


def _validate(cfg: ExperimentConfig) -> None:
    for key in _POSITIVE:
        if not getattr(cfg, key) > 0:
            raise ConfigError(key, f"must be positive, got {getattr(cfg, key)!r}")
    for key in _NON_NEGATIVE:
        if getattr(cfg, key) < 0:
            raise ConfigError(key, f"must be non-negative, got {getattr(cfg, key)!r}")
    if cfg.eta_max > 1:
        raise ConfigError("eta_max", f"must lie in (0, 1], got {cfg.eta_max!r}")
    if cfg.seed >= 2**64:
        raise ConfigError("seed", "must fit in 64 bits")
    if not cfg.modes:
        raise ConfigError("mode", "no beamforming mode selected")
    if not cfg.schemes:
        raise ConfigError("schemes", "no scheme selected")
    if cfg.sweep_parameter not in SWEEPABLE:
        raise ConfigError("sweep_parameter", f"expected one of {sorted(SWEEPABLE)}, got {cfg.sweep_parameter!r}")
    vals = cfg.sweep_values
    if not vals:
        raise ConfigError("sweep_values", "needs at least one value")
    if len(vals) > 1:
        steps = [b - a for a, b in zip(vals, vals[1:])]
        if not (all(s > 0 for s in steps) or all(s < 0 for s in steps)):
            raise ConfigError("sweep_values", "must be strictly monotone")
    for v in vals:
        try:
            probe = cfg.with_value(cfg.sweep_parameter, v)
        except ConfigError as exc:
            raise ConfigError("sweep_values", str(exc)) from None
        key = SWEEPABLE[cfg.sweep_parameter][0]
        if key in _POSITIVE and not getattr(probe, key) > 0:
            raise ConfigError("sweep_values", f"{cfg.sweep_parameter} must be positive, got {v!r}")
        if key in _NON_NEGATIVE and getattr(probe, key) < 0:
            raise ConfigError("sweep_values", f"{cfg.sweep_parameter} must be non-negative, got {v!r}")
        if key == "eta_max" and v > 1:
            raise ConfigError("sweep_values", f"eta_max must not exceed 1, got {v!r}")


def parse_config(text: str, origin: str = "<string>", base: Optional[Dict[str, str]] = None) -> ExperimentConfig:
    """Parse ``text`` on top of ``base`` (raw key/value strings)."""
    pairs = dict(base or {})
    user = _read_pairs(text, origin)
    unknown = sorted(set(user) - _KEYS)
    if unknown:
        raise ConfigError(unknown[0], f"unknown key in {origin} (known keys: {', '.join(sorted(_KEYS))})")
    pairs.update(user)
    missing = sorted(_KEYS - set(pairs))
    if missing:
        raise ConfigError(missing[0], f"missing from {origin}")

    kw = {}
    for key, raw in pairs.items():
        if key == "mode":
            kw["modes"] = _parse_modes(raw)
        elif key == "schemes":
            kw["schemes"] = _parse_schemes(raw)
        elif key == "sweep_parameter":
            kw[key] = raw.strip()
        elif key == "sweep_values":
            kw[key] = tuple(_number(key, v) for v in raw.split(",") if v.strip())
        else:
            kw[key] = _number(key, raw)
    cfg = ExperimentConfig(source=origin, **kw)
    _validate(cfg)
    return cfg


def load_config(path: Optional[Union[str, Path]] = None) -> ExperimentConfig:
    """Packaged defaults, overlaid with ``path`` when given."""
    defaults = _read_pairs(DEFAULT_PATH.read_text(), str(DEFAULT_PATH))
    if path is None:
        return parse_config("", origin=str(DEFAULT_PATH), base=defaults)
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text, origin=str(path), base=defaults)
