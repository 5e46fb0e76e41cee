"""Rate-versus-distance pipelines and the CSV result format.

``evaluate_point`` wires the full chain for one distance: photon
statistics -> relay yield tables -> observed gains -> decoy bounds with
finite-size worst-casing -> key rate.  Yield tables depend only on the
overall efficiency, dark-count probability and cutoff, so they are
cached and shared across sources and intensity settings.

All pipelines are deterministic; parallel execution with ``workers > 1``
partitions the distance grid and returns bit-identical results in the
same order as a serial run.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache, partial
from typing import IO, Iterable, List, Optional, Sequence, Tuple, Union

from .bsm import DetectorParams, YieldTable, yield_tables
from .config import Scenario
from .decoy import (
    FLAG_ERROR_ABOVE_HALF,
    DecoyInputs,
    DecoyEstimate,
    VacuumGains,
)
from .errors import DomainError
from .finite_key import FiniteKeyConfig, gain_interval, worst_case_decoy
from .rates import GainSet, KeyRatePoint, gains, key_rate
from .sources import PhotonDistribution, SourceKind, SourceSpec, build_distribution


@lru_cache(maxsize=256)
def _cached_tables(params: DetectorParams, cutoff: int) -> YieldTable:
    return yield_tables(params, cutoff)


@lru_cache(maxsize=256)
def _cached_distribution(spec: SourceSpec, tail_tolerance: float) -> PhotonDistribution:
    return build_distribution(spec, tail_tolerance)


def _sps_estimate(signal: GainSet, config: FiniteKeyConfig) -> DecoyEstimate:
    """Direct single-photon bounds: no decoy algebra is needed.

    The (1, 1) channel is observed directly, so the worst case is just
    the unfavorable interval endpoint of each observed gain.
    """
    y11 = gain_interval(signal.total_z, config).lower
    q_x = gain_interval(signal.total_x, config).lower
    eq_x = gain_interval(signal.error_weighted_x, config).upper
    e11 = eq_x / q_x if q_x > 0.0 else math.inf
    flags = {FLAG_ERROR_ABOVE_HALF} if e11 > 0.5 else set()
    return DecoyEstimate(y11_lower=y11, e11_upper=e11, flags=frozenset(flags))


def evaluate_point(scenario: Scenario, distance_km: float) -> KeyRatePoint:
    """Evaluate the key rate of one scenario at one distance."""
    system = replace(scenario.system, distance_km=distance_km)
    table = _cached_tables(system.detector_params(), scenario.cutoff)
    e_d = system.misalignment
    scheme = scenario.scheme()

    if scheme == "single_photon_direct":
        dist = _cached_distribution(SourceSpec.sps(), scenario.tail_tolerance)
        gains_signal = gains(dist, dist, table, e_d)
        estimate = _sps_estimate(gains_signal, scenario.finite_key)
        mu_signal = mu_decoy = 0.0
        p1 = 1.0
    else:
        dist_signal = _cached_distribution(
            scenario.signal_spec(scenario.signal_mu), scenario.tail_tolerance
        )
        dist_decoy = _cached_distribution(
            scenario.signal_spec(scenario.decoy_mu), scenario.tail_tolerance
        )
        gains_signal = gains(dist_signal, dist_signal, table, e_d)
        gains_decoy = gains(dist_decoy, dist_decoy, table, e_d)
        vacuum = None
        if scheme == "two_decoy_generic":
            dist_vac = _cached_distribution(SourceSpec.vacuum(), scenario.tail_tolerance)
            vacuum = VacuumGains(
                signal_vacuum=gains(dist_signal, dist_vac, table, e_d),
                vacuum_signal=gains(dist_vac, dist_signal, table, e_d),
                decoy_vacuum=gains(dist_decoy, dist_vac, table, e_d),
                vacuum_decoy=gains(dist_vac, dist_decoy, table, e_d),
                vacuum_vacuum=gains(dist_vac, dist_vac, table, e_d),
            )
        inputs = DecoyInputs(
            mu_signal=scenario.signal_mu,
            mu_decoy=scenario.decoy_mu,
            dist_signal=dist_signal,
            dist_decoy=dist_decoy,
            gains_signal=gains_signal,
            gains_decoy=gains_decoy,
            vacuum=vacuum,
        )
        estimate = worst_case_decoy(inputs, scenario.finite_key, scheme)
        mu_signal, mu_decoy = scenario.signal_mu, scenario.decoy_mu
        p1 = dist_signal.prob(1)

    q11_z = p1 * p1 * estimate.y11_lower
    raw = key_rate(
        q11_z,
        estimate.e11_upper,
        gains_signal.total_z,
        gains_signal.qber_z,
        system.ec_efficiency,
        clamped=False,
    )
    return KeyRatePoint(
        distance_km=distance_km,
        source=scenario.source_kind.value,
        method=scenario.finite_key.method.value,
        mu_signal=mu_signal,
        mu_decoy=mu_decoy,
        gains_signal=gains_signal,
        y11_lower=estimate.y11_lower,
        e11_upper=estimate.e11_upper,
        q11_z=q11_z,
        rate=max(0.0, raw),
        rate_unclamped=raw,
        flags=estimate.flags,
    )


def _map_distances(
    scenario: Scenario, distances: Sequence[float], workers: int
) -> List[KeyRatePoint]:
    if workers <= 1 or len(distances) <= 1:
        return [evaluate_point(scenario, d) for d in distances]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        chunk = max(1, len(distances) // (4 * workers))
        return list(
            pool.map(partial(evaluate_point, scenario), distances, chunksize=chunk)
        )


def run_sweep(scenario: Scenario, workers: int = 1) -> List[KeyRatePoint]:
    """Key rate at every grid distance, ordered by distance."""
    return _map_distances(scenario, scenario.grid.distances(), workers)


# Benchmark intensity settings used by the source comparison, chosen so
# each family runs with its natural estimator.
COMPARISON_SETTINGS = (
    (SourceKind.SPS, None, None),
    (SourceKind.CSS, 0.1, 0.01),
    (SourceKind.NONIDEAL_CSS, 0.1, 0.01),
    (SourceKind.WCS, 0.4, 0.07),
)


def comparison_scenarios(base: Scenario) -> List[Scenario]:
    """The four standard source setups sharing the base system and grid."""
    scenarios = []
    for kind, mu1, mu2 in COMPARISON_SETTINGS:
        updates = {"source_kind": kind}
        if mu1 is not None:
            updates.update(signal_mu=mu1, decoy_mu=mu2)
        scenarios.append(replace(base, **updates))
    return scenarios


def compare_sources(base: Scenario, workers: int = 1) -> List[KeyRatePoint]:
    """Sweep all four standard sources; rows grouped by source."""
    points: List[KeyRatePoint] = []
    for scenario in comparison_scenarios(base):
        points.extend(run_sweep(scenario, workers=workers))
    return points


def _best_point(scenario: Scenario, pairs: Sequence[Tuple[float, float]], distance_km: float) -> KeyRatePoint:
    best = None
    for mu1, mu2 in pairs:
        candidate = evaluate_point(
            replace(scenario, signal_mu=mu1, decoy_mu=mu2), distance_km
        )
        # Strict comparison keeps the first (smallest mu1, then mu2)
        # among rate ties, so results do not depend on grid order.
        if best is None or candidate.rate > best.rate:
            best = candidate
    return best


def optimize_intensities(scenario: Scenario, workers: int = 1) -> List[KeyRatePoint]:
    """Best (signal, decoy) intensity pair per distance, by key rate."""
    if scenario.source_kind is SourceKind.SPS:
        raise DomainError("single-photon sources have no intensities to optimize")
    pairs = [
        (mu1, mu2)
        for mu1 in sorted(scenario.mu1_candidates)
        for mu2 in sorted(scenario.mu2_candidates)
        if mu1 > mu2 > 0.0
    ]
    if not pairs:
        raise DomainError(
            "no feasible intensity pairs: every candidate violates mu1 > mu2 > 0"
        )
    distances = scenario.grid.distances()
    if workers <= 1 or len(distances) <= 1:
        return [_best_point(scenario, pairs, d) for d in distances]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(partial(_best_point, scenario, pairs), distances))


def cutoff_distance(
    scenario: Scenario, max_km: float = 800.0, step_km: float = 5.0
) -> Optional[float]:
    """Largest grid distance with a positive key rate.

    Searches the arithmetic grid {0, step, 2 step, ...} up to ``max_km``
    by bisection, relying on the rate being nonincreasing in distance.
    Returns None when the rate already vanishes at zero distance.
    """
    steps = int(math.floor(max_km / step_km + 1e-9))

    def positive(index: int) -> bool:
        return evaluate_point(scenario, index * step_km).rate > 0.0

    if not positive(0):
        return None
    lo, hi = 0, steps
    if positive(hi):
        return hi * step_km
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if positive(mid):
            lo = mid
        else:
            hi = mid
    return lo * step_km


@dataclass(frozen=True)
class CalibrationResult:
    """Outcome of tuning the pulse count to hit a cutoff window."""

    pulse_pairs: float
    cutoff_km: Optional[float]
    in_window: bool


def _with_pulse_pairs(scenario: Scenario, pulse_pairs: float) -> Scenario:
    return replace(
        scenario, finite_key=replace(scenario.finite_key, pulse_pairs=pulse_pairs)
    )


def calibrate_pulse_pairs(
    scenario: Scenario,
    window: Tuple[float, float] = (170.0, 230.0),
    bounds: Tuple[float, float] = (1e12, 1e16),
    start: float = 1e14,
    step_km: float = 5.0,
    max_km: float = 600.0,
) -> CalibrationResult:
    """Tune the pulse count until the cutoff distance enters ``window``.

    The cutoff distance grows monotonically with the number of pulse
    pairs, so a bisection in log(N) converges quickly.  When no count
    inside ``bounds`` reaches the window, the nearest bound and its
    cutoff are reported with ``in_window=False``.
    """
    lo_w, hi_w = window

    def cut(pulse_pairs: float) -> float:
        result = cutoff_distance(
            _with_pulse_pairs(scenario, pulse_pairs), max_km=max_km, step_km=step_km
        )
        return -1.0 if result is None else result

    def result(pulse_pairs: float) -> CalibrationResult:
        c = cut(pulse_pairs)
        return CalibrationResult(
            pulse_pairs, None if c < 0.0 else c, lo_w <= c <= hi_w
        )

    start = min(max(start, bounds[0]), bounds[1])
    c0 = cut(start)
    if lo_w <= c0 <= hi_w:
        return result(start)

    if c0 < lo_w:
        # Too few pulses: grow until the window's lower edge is reached.
        lo_n, hi_n = start, start
        while cut(hi_n) < lo_w:
            if hi_n >= bounds[1]:
                return result(bounds[1])
            lo_n, hi_n = hi_n, min(hi_n * 10.0, bounds[1])
        predicate = lambda n: cut(n) >= lo_w
    else:
        # Too many pulses: shrink until the window's upper edge is met.
        lo_n, hi_n = start, start
        while cut(lo_n) > hi_w:
            if lo_n <= bounds[0]:
                return result(bounds[0])
            lo_n, hi_n = max(lo_n / 10.0, bounds[0]), lo_n
        predicate = lambda n: cut(n) > hi_w

    # Invariant: predicate flips between lo_n and hi_n.  Tighten the
    # bracket until the endpoints nearly coincide, then report the
    # endpoint on the window side of the flip.
    while hi_n / lo_n > 1.02:
        mid = math.sqrt(lo_n * hi_n)
        if predicate(mid):
            hi_n = mid
        else:
            lo_n = mid
    for candidate in (hi_n, lo_n):
        outcome = result(candidate)
        if outcome.in_window:
            return outcome
    return outcome


CSV_COLUMNS = (
    "distance_km",
    "source",
    "method",
    "mu1",
    "mu2",
    "q_z",
    "E_z",
    "y11_lower",
    "e11_upper",
    "rate",
)


def _format_value(value: float) -> str:
    return format(float(value), ".17g")


def csv_rows(points: Iterable[KeyRatePoint]) -> List[str]:
    rows = [",".join(CSV_COLUMNS)]
    for p in points:
        rows.append(
            ",".join(
                (
                    _format_value(p.distance_km),
                    p.source,
                    p.method,
                    _format_value(p.mu_signal),
                    _format_value(p.mu_decoy),
                    _format_value(p.q_z),
                    _format_value(p.qber_z),
                    _format_value(p.y11_lower),
                    _format_value(p.e11_upper),
                    _format_value(p.rate),
                )
            )
        )
    return rows


def write_csv(points: Iterable[KeyRatePoint], out: Union[str, IO[str]]) -> None:
    """Write results with full float precision and a fixed column order."""
    text = "\n".join(csv_rows(points)) + "\n"
    if isinstance(out, str):
        with open(out, "w", encoding="ascii", newline="") as handle:
            handle.write(text)
    else:
        out.write(text)
