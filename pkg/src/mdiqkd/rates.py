"""Gains, error rates and the secret-key-rate formula.

Gains are obtained by weighting the per-photon-pair yield tables with
the two sources' photon-number distributions.  Misalignment enters only
here: a fraction e_d of intrinsically correct coincidences is recorded
as an error and vice versa, so the error-weighted gain of a channel is

    E Q = e_d Q_correct + (1 - e_d) Q_error.

The secret fraction follows the standard decoy-state form

    R = Q11_Z (1 - H(e11_X)) - Q_Z f H(E_Z)

per pulse pair in the matched-basis channel, clamped at zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .bsm import DetectorParams, YieldTable
from .errors import CutoffError, DomainError
from .sources import PhotonDistribution


@dataclass(frozen=True)
class SystemParams:
    """Link and hardware parameters of one symmetric relay setup.

    The relay sits halfway between the two sources, so each arm spans
    ``distance_km / 2`` of fiber and both arms share one overall
    efficiency.
    """

    distance_km: float = 0.0
    detector_efficiency: float = 0.40
    dark_count: float = 1e-7
    fiber_loss_db_km: float = 0.2
    misalignment: float = 0.015
    ec_efficiency: float = 1.16

    def __post_init__(self) -> None:
        if self.distance_km < 0.0:
            raise DomainError(f"distance must be >= 0, got {self.distance_km}")
        if not 0.0 < self.detector_efficiency <= 1.0:
            raise DomainError(
                f"detector efficiency must lie in (0, 1], got {self.detector_efficiency}"
            )
        if not 0.0 <= self.dark_count < 1.0:
            raise DomainError(f"dark count must lie in [0, 1), got {self.dark_count}")
        if self.fiber_loss_db_km < 0.0:
            raise DomainError(f"fiber loss must be >= 0, got {self.fiber_loss_db_km}")
        if not 0.0 <= self.misalignment <= 1.0:
            raise DomainError(f"misalignment must lie in [0, 1], got {self.misalignment}")
        if self.ec_efficiency < 1.0:
            raise DomainError(
                f"error-correction efficiency must be >= 1, got {self.ec_efficiency}"
            )

    def overall_efficiency(self) -> float:
        """Detector efficiency times one arm's fiber transmittance."""
        return self.detector_efficiency * 10.0 ** (
            -self.fiber_loss_db_km * self.distance_km / 20.0
        )

    def detector_params(self) -> DetectorParams:
        return DetectorParams(
            efficiency=self.overall_efficiency(), dark_count=self.dark_count
        )


@dataclass(frozen=True)
class GainSet:
    """Per-pulse-pair gains of one intensity pair, both bases.

    ``total`` = correct + error coincidence gain; ``error_weighted`` is
    E Q with misalignment already mixed in.
    """

    correct_z: float
    error_z: float
    total_z: float
    error_weighted_z: float
    correct_x: float
    error_x: float
    total_x: float
    error_weighted_x: float

    def __post_init__(self) -> None:
        for name in (
            "correct_z",
            "error_z",
            "total_z",
            "error_weighted_z",
            "correct_x",
            "error_x",
            "total_x",
            "error_weighted_x",
        ):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise DomainError(f"gain {name}={value} outside [0, 1]")

    @property
    def qber_z(self) -> float:
        """Observed Z-basis error rate (0 when the gain vanishes)."""
        return self.error_weighted_z / self.total_z if self.total_z > 0.0 else 0.0

    @property
    def qber_x(self) -> float:
        return self.error_weighted_x / self.total_x if self.total_x > 0.0 else 0.0


def gains(
    dist_a: PhotonDistribution,
    dist_b: PhotonDistribution,
    table: YieldTable,
    misalignment: float,
) -> GainSet:
    """Contract two photon-number distributions against a yield table."""
    if not 0.0 <= misalignment <= 1.0:
        raise DomainError(f"misalignment must lie in [0, 1], got {misalignment}")
    size = table.cutoff + 1
    if dist_a.cutoff + 1 > size or dist_b.cutoff + 1 > size:
        raise CutoffError(
            f"distribution cutoffs ({dist_a.cutoff}, {dist_b.cutoff}) exceed "
            f"the yield-table cutoff {table.cutoff}"
        )
    pa, pb = dist_a.padded(size), dist_b.padded(size)
    correct_z = float(pa @ table.correct_z @ pb)
    error_z = float(pa @ table.error_z @ pb)
    correct_x = float(pa @ table.correct_x @ pb)
    error_x = float(pa @ table.error_x @ pb)
    e_d = misalignment
    return GainSet(
        correct_z=correct_z,
        error_z=error_z,
        total_z=correct_z + error_z,
        error_weighted_z=e_d * correct_z + (1.0 - e_d) * error_z,
        correct_x=correct_x,
        error_x=error_x,
        total_x=correct_x + error_x,
        error_weighted_x=e_d * correct_x + (1.0 - e_d) * error_x,
    )


def binary_entropy(e: float) -> float:
    """Shannon entropy of a bit with bias ``e``, in bits.

    H(0) and H(1) are exactly 0; inputs outside [0, 1] are rejected.
    """
    if not 0.0 <= e <= 1.0:
        raise DomainError(f"entropy argument must lie in [0, 1], got {e}")
    if e == 0.0 or e == 1.0:
        return 0.0
    return -e * math.log2(e) - (1.0 - e) * math.log2(1.0 - e)


def key_rate(
    q11_z: float,
    e11_x: float,
    q_z: float,
    qber_z: float,
    ec_efficiency: float,
    clamped: bool = True,
) -> float:
    """Secret bits per pulse pair in the matched Z channel.

    ``e11_x`` is the single-photon phase-error bound.  Values at or
    above 1/2 saturate the privacy term (H evaluated at 1/2), which
    drives the rate to zero; this keeps flagged over-unity error bounds
    well defined.
    """
    if q11_z < 0.0 or q_z < 0.0:
        raise DomainError("gains must be >= 0")
    if e11_x < 0.0:
        raise DomainError(f"phase-error bound must be >= 0, got {e11_x}")
    if not 0.0 <= qber_z <= 1.0:
        raise DomainError(f"observed error rate must lie in [0, 1], got {qber_z}")
    if ec_efficiency < 1.0:
        raise DomainError(f"error-correction efficiency must be >= 1, got {ec_efficiency}")
    privacy = 1.0 - binary_entropy(min(e11_x, 0.5))
    raw = q11_z * privacy - q_z * ec_efficiency * binary_entropy(qber_z)
    return max(0.0, raw) if clamped else raw


@dataclass(frozen=True)
class SinglePhotonQuantities:
    """Exact (1, 1)-pair yields and error rates read off a yield table.

    ``e11_*`` is None when the corresponding yield vanishes: with no
    coincidences there is no error rate to define.
    """

    y11_z: float
    y11_x: float
    e11_z: Optional[float]
    e11_x: Optional[float]


def true_single_photon_quantities(
    table: YieldTable, misalignment: float
) -> SinglePhotonQuantities:
    """Ground-truth single-photon quantities for bound validation."""
    if not 0.0 <= misalignment <= 1.0:
        raise DomainError(f"misalignment must lie in [0, 1], got {misalignment}")
    e_d = misalignment
    out = {}
    for basis in ("z", "x"):
        correct, error = table.single_pair(basis.upper())
        y11 = correct + error
        e11 = (e_d * correct + (1.0 - e_d) * error) / y11 if y11 > 0.0 else None
        out[f"y11_{basis}"] = y11
        out[f"e11_{basis}"] = e11
    return SinglePhotonQuantities(**out)


@dataclass(frozen=True)
class KeyRatePoint:
    """One evaluated point of a rate-versus-distance sweep."""

    distance_km: float
    source: str
    method: str
    mu_signal: float
    mu_decoy: float
    gains_signal: GainSet
    y11_lower: float
    e11_upper: float
    q11_z: float
    rate: float
    rate_unclamped: float
    flags: frozenset

    @property
    def q_z(self) -> float:
        return self.gains_signal.total_z

    @property
    def qber_z(self) -> float:
        return self.gains_signal.qber_z
