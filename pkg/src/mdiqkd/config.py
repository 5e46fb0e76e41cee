"""Scenario description and the flat key=value configuration format.

A config file holds one ``section.key = value`` pair per line, with
``#`` comments and blank lines ignored::

    source.kind = css
    source.signal_mu = 0.1
    source.decoy_mu = 0.01
    system.dark_count = 1e-7
    grid.start_km = 0
    grid.stop_km = 400
    grid.step_km = 25
    finite_key.method = standard

Unknown keys, duplicate keys and malformed values are rejected with the
offending line number, so typos fail loudly instead of silently running
with defaults.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Dict, Optional, Tuple

from .errors import ConfigError
from .finite_key import DEFAULT_EPSILON, FiniteKeyConfig, FluctuationMethod
from .rates import SystemParams
from .sources import SourceKind, SourceSpec

# Estimator applied to phase-randomized coherent sources.  Only the
# generic two-decoy scheme is implemented; the knob exists so configs
# state the choice explicitly.
WCS_ESTIMATORS = ("two_decoy_generic",)

_METHODS = {m.value: m for m in FluctuationMethod}

_SIGNAL_KINDS = {
    "css": SourceKind.CSS,
    "nonideal_css": SourceKind.NONIDEAL_CSS,
    "wcs": SourceKind.WCS,
    "sps": SourceKind.SPS,
}


@dataclass(frozen=True)
class DistanceGrid:
    """Inclusive arithmetic grid of total source-to-source distances."""

    start_km: float = 0.0
    stop_km: float = 400.0
    step_km: float = 25.0

    def __post_init__(self) -> None:
        if self.start_km < 0.0:
            raise ConfigError(f"grid start must be >= 0, got {self.start_km}")
        if self.stop_km < self.start_km:
            raise ConfigError(
                f"grid stop ({self.stop_km}) must be >= start ({self.start_km})"
            )
        if not self.step_km > 0.0:
            raise ConfigError(f"grid step must be > 0, got {self.step_km}")

    def distances(self) -> Tuple[float, ...]:
        count = int(math.floor((self.stop_km - self.start_km) / self.step_km + 1e-9))
        return tuple(self.start_km + k * self.step_km for k in range(count + 1))


@dataclass(frozen=True)
class Scenario:
    """Complete description of one rate-versus-distance computation."""

    source_kind: SourceKind = SourceKind.CSS
    signal_mu: float = 0.1
    decoy_mu: float = 0.01
    odd_weight: float = 0.7
    tail_tolerance: float = 1e-15
    system: SystemParams = SystemParams()
    grid: DistanceGrid = DistanceGrid()
    finite_key: FiniteKeyConfig = FiniteKeyConfig()
    cutoff: int = 15
    wcs_estimator: str = "two_decoy_generic"
    mu1_candidates: Tuple[float, ...] = (0.05, 0.1, 0.2, 0.3)
    mu2_candidates: Tuple[float, ...] = (0.01, 0.02, 0.05)

    def __post_init__(self) -> None:
        if self.source_kind not in _SIGNAL_KINDS.values():
            raise ConfigError(f"{self.source_kind} cannot be used as a signal source")
        if self.source_kind is not SourceKind.SPS:
            if not self.signal_mu > self.decoy_mu > 0.0:
                raise ConfigError(
                    f"intensities must satisfy signal_mu > decoy_mu > 0, got "
                    f"({self.signal_mu}, {self.decoy_mu})"
                )
        if not 0.0 < self.odd_weight <= 1.0:
            raise ConfigError(f"odd_weight must lie in (0, 1], got {self.odd_weight}")
        if not 0.0 < self.tail_tolerance <= 1e-6:
            raise ConfigError(
                f"tail_tolerance must lie in (0, 1e-6], got {self.tail_tolerance}"
            )
        if self.cutoff < 1:
            raise ConfigError(f"cutoff must be >= 1, got {self.cutoff}")
        if self.wcs_estimator not in WCS_ESTIMATORS:
            raise ConfigError(
                f"wcs_estimator must be one of {WCS_ESTIMATORS}, got "
                f"{self.wcs_estimator!r}"
            )
        if not self.mu1_candidates or not self.mu2_candidates:
            raise ConfigError("optimization grids must be non-empty")

    def signal_spec(self, mu: Optional[float] = None) -> SourceSpec:
        """Source specification at intensity ``mu`` (default: signal_mu)."""
        mu = self.signal_mu if mu is None else mu
        kind = self.source_kind
        if kind is SourceKind.CSS:
            return SourceSpec.css(mu)
        if kind is SourceKind.NONIDEAL_CSS:
            return SourceSpec.nonideal_css(mu, self.odd_weight)
        if kind is SourceKind.WCS:
            return SourceSpec.wcs(mu)
        return SourceSpec.sps()

    def scheme(self) -> str:
        """Decoy scheme used for this source family."""
        if self.source_kind is SourceKind.CSS:
            return "one_decoy_css"
        if self.source_kind is SourceKind.SPS:
            return "single_photon_direct"
        return self.wcs_estimator if self.source_kind is SourceKind.WCS else "two_decoy_generic"


def parse_kv_text(text: str) -> Dict[str, str]:
    """Parse ``key = value`` lines into a mapping, tracking line numbers."""
    mapping: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in mapping:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"line {lineno}: empty value for {key!r}")
        mapping[key] = value
    return mapping


def _parse_float(key: str, value: str) -> float:
    try:
        out = float(value)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {value!r}") from None
    if not math.isfinite(out):
        raise ConfigError(f"{key}: value must be finite, got {value!r}")
    return out


def _parse_int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {value!r}") from None


def _parse_float_list(key: str, value: str) -> Tuple[float, ...]:
    items = [item.strip() for item in value.split(",") if item.strip()]
    if not items:
        raise ConfigError(f"{key}: expected a comma-separated list of numbers")
    return tuple(_parse_float(key, item) for item in items)


def _parse_kind(key: str, value: str) -> SourceKind:
    try:
        return _SIGNAL_KINDS[value]
    except KeyError:
        raise ConfigError(
            f"{key}: expected one of {sorted(_SIGNAL_KINDS)}, got {value!r}"
        ) from None


def _parse_method(key: str, value: str) -> FluctuationMethod:
    try:
        return _METHODS[value]
    except KeyError:
        raise ConfigError(
            f"{key}: expected one of {sorted(_METHODS)}, got {value!r}"
        ) from None


_KEY_PARSERS = {
    "source.kind": _parse_kind,
    "source.signal_mu": _parse_float,
    "source.decoy_mu": _parse_float,
    "source.odd_weight": _parse_float,
    "source.tail_tolerance": _parse_float,
    "system.detector_efficiency": _parse_float,
    "system.dark_count": _parse_float,
    "system.fiber_loss_db_km": _parse_float,
    "system.misalignment": _parse_float,
    "system.ec_efficiency": _parse_float,
    "grid.start_km": _parse_float,
    "grid.stop_km": _parse_float,
    "grid.step_km": _parse_float,
    "finite_key.method": _parse_method,
    "finite_key.pulse_pairs": _parse_float,
    "finite_key.sigmas": _parse_float,
    "finite_key.epsilon": _parse_float,
    "bsm.cutoff": _parse_int,
    "decoy.wcs_estimator": lambda key, value: value,
    "optimize.mu1_values": _parse_float_list,
    "optimize.mu2_values": _parse_float_list,
}


def scenario_from_mapping(mapping: Dict[str, str]) -> Scenario:
    """Build a validated Scenario from raw config pairs."""
    values = {}
    for key, raw in mapping.items():
        if key not in _KEY_PARSERS:
            raise ConfigError(f"unknown config key {key!r}")
        values[key] = _KEY_PARSERS[key](key, raw)

    def take(key: str, default):
        return values[key] if key in values else default

    try:
        system = SystemParams(
            distance_km=0.0,
            detector_efficiency=take("system.detector_efficiency", 0.40),
            dark_count=take("system.dark_count", 1e-7),
            fiber_loss_db_km=take("system.fiber_loss_db_km", 0.2),
            misalignment=take("system.misalignment", 0.015),
            ec_efficiency=take("system.ec_efficiency", 1.16),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    grid = DistanceGrid(
        start_km=take("grid.start_km", 0.0),
        stop_km=take("grid.stop_km", 400.0),
        step_km=take("grid.step_km", 25.0),
    )
    finite = FiniteKeyConfig(
        method=take("finite_key.method", FluctuationMethod.ASYMPTOTIC),
        pulse_pairs=take("finite_key.pulse_pairs", 1e14),
        sigmas=take("finite_key.sigmas", 5.0),
        epsilon=take("finite_key.epsilon", DEFAULT_EPSILON),
    )
    kind = take("source.kind", SourceKind.CSS)
    defaults = Scenario()
    return Scenario(
        source_kind=kind,
        signal_mu=take("source.signal_mu", defaults.signal_mu),
        decoy_mu=take("source.decoy_mu", defaults.decoy_mu),
        odd_weight=take("source.odd_weight", defaults.odd_weight),
        tail_tolerance=take("source.tail_tolerance", defaults.tail_tolerance),
        system=system,
        grid=grid,
        finite_key=finite,
        cutoff=take("bsm.cutoff", defaults.cutoff),
        wcs_estimator=take("decoy.wcs_estimator", defaults.wcs_estimator),
        mu1_candidates=take("optimize.mu1_values", defaults.mu1_candidates),
        mu2_candidates=take("optimize.mu2_values", defaults.mu2_candidates),
    )


def load_scenario(
    text: Optional[str] = None,
    method: Optional[str] = None,
    pulse_pairs: Optional[float] = None,
) -> Scenario:
    """Parse config text and apply command-line overrides."""
    scenario = scenario_from_mapping(parse_kv_text(text) if text else {})
    updates = {}
    if method is not None:
        updates["finite_key"] = replace(
            scenario.finite_key, method=_parse_method("--method", method)
        )
    if pulse_pairs is not None:
        base = updates.get("finite_key", scenario.finite_key)
        updates["finite_key"] = replace(base, pulse_pairs=pulse_pairs)
    return replace(scenario, **updates) if updates else scenario
