"""Photon-number statistics of the pulse sources.

Every source is reduced to its phase-randomized photon-number
distribution p(n).  Supported families:

* ``css`` -- coherent-state superposition (odd cat).  Only odd photon
  numbers carry weight: p(2i+1) = mu^(2i+1) / ((2i+1)! sinh(mu)).
* ``nonideal_css`` -- cat state mixed with its even counterpart.  The
  odd part keeps weight ``odd_weight`` (called ``a`` in formulas), the
  even part gets 1 - a with cosh normalization.
* ``wcs`` -- weak coherent state, Poissonian p(n) = e^-mu mu^n / n!.
* ``sps`` -- ideal single-photon source, p(1) = 1.
* ``vacuum`` -- p(0) = 1.

Distributions are truncated at the smallest N whose analytic tail mass
falls below a tolerance; the tail is reported, never folded back into
the retained probabilities.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

# Terms beyond this photon number are never enumerated; intensities that
# need more are outside the regime this engine is built for.
_HARD_CAP = 512


class SourceKind(enum.Enum):
    CSS = "css"
    NONIDEAL_CSS = "nonideal_css"
    WCS = "wcs"
    SPS = "sps"
    VACUUM = "vacuum"


@dataclass(frozen=True)
class SourceSpec:
    """Declarative description of one pulse source.

    ``mu`` is the intensity setting (ignored for sps/vacuum) and
    ``odd_weight`` the odd-photon-sector weight: 1 for an ideal cat
    state, the fidelity-squared parameter a for a non-ideal one.
    """

    kind: SourceKind
    mu: float = 0.0
    odd_weight: float = 1.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.mu) or self.mu < 0.0:
            raise DomainError(f"intensity must be finite and >= 0, got {self.mu}")
        if self.kind is SourceKind.CSS and self.odd_weight != 1.0:
            raise DomainError("an ideal cat source has odd_weight fixed at 1")
        if self.kind is SourceKind.NONIDEAL_CSS:
            if not 0.0 < self.odd_weight <= 1.0:
                raise DomainError(
                    f"odd_weight must lie in (0, 1], got {self.odd_weight}"
                )

    @classmethod
    def css(cls, mu: float) -> "SourceSpec":
        return cls(SourceKind.CSS, mu)

    @classmethod
    def nonideal_css(cls, mu: float, odd_weight: float) -> "SourceSpec":
        return cls(SourceKind.NONIDEAL_CSS, mu, odd_weight)

    @classmethod
    def wcs(cls, mu: float) -> "SourceSpec":
        return cls(SourceKind.WCS, mu)

    @classmethod
    def sps(cls) -> "SourceSpec":
        return cls(SourceKind.SPS)

    @classmethod
    def vacuum(cls) -> "SourceSpec":
        return cls(SourceKind.VACUUM)


@dataclass(frozen=True)
class PhotonDistribution:
    """Truncated photon-number distribution of one source.

    ``probabilities[n]`` is the analytic p(n); entries are not
    renormalized after truncation.  ``tail_mass`` is the analytic mass
    above the cutoff, so sum(probabilities) + tail_mass == 1 up to
    floating-point error.
    """

    spec: SourceSpec
    probabilities: np.ndarray
    tail_mass: float

    @property
    def cutoff(self) -> int:
        """Largest photon number retained (N_max)."""
        return len(self.probabilities) - 1

    def prob(self, n: int) -> float:
        """p(n), zero above the cutoff."""
        if n < 0:
            raise DomainError(f"photon number must be >= 0, got {n}")
        if n > self.cutoff:
            return 0.0
        return float(self.probabilities[n])

    def mean(self) -> float:
        """Mean photon number of the retained part."""
        n = np.arange(len(self.probabilities))
        return float(n @ self.probabilities)

    def padded(self, length: int) -> np.ndarray:
        """Probabilities extended with zeros to the requested length."""
        if length < len(self.probabilities):
            raise DomainError(
                f"cannot pad distribution of cutoff {self.cutoff} "
                f"into {length} slots"
            )
        out = np.zeros(length)
        out[: len(self.probabilities)] = self.probabilities
        return out


def _log_terms(spec: SourceSpec) -> np.ndarray:
    """log p(n) for n = 0.._HARD_CAP, -inf where the sector is empty."""
    n = np.arange(_HARD_CAP + 1)
    log_fact = np.array([math.lgamma(k + 1.0) for k in n])
    mu = spec.mu
    out = np.full(n.shape, -np.inf)
    with np.errstate(divide="ignore"):
        base = n * math.log(mu) - log_fact
    if spec.kind is SourceKind.WCS:
        out = base - mu
    elif spec.kind is SourceKind.CSS:
        odd = n % 2 == 1
        out[odd] = base[odd] - math.log(math.sinh(mu))
    elif spec.kind is SourceKind.NONIDEAL_CSS:
        a = spec.odd_weight
        odd = n % 2 == 1
        out[odd] = base[odd] + math.log(a) - math.log(math.sinh(mu))
        if a < 1.0:
            even = ~odd
            out[even] = base[even] + math.log1p(-a) - math.log(math.cosh(mu))
    else:  # pragma: no cover - sps/vacuum never reach here
        raise DomainError(f"no series form for {spec.kind}")
    return out


def build_distribution(
    spec: SourceSpec, tail_tolerance: float = 1e-15
) -> PhotonDistribution:
    """Truncate the photon-number series of ``spec``.

    The cutoff N_max is the smallest N whose tail mass (sum of the
    analytic terms above N) is strictly below ``tail_tolerance``.
    """
    if not 0.0 < tail_tolerance <= 1e-6:
        raise DomainError(
            f"tail tolerance must lie in (0, 1e-6], got {tail_tolerance}"
        )

    # Degenerate and zero-intensity limits are analytic, not numeric.
    tail = 0.0
    if spec.kind is SourceKind.VACUUM:
        probs = np.array([1.0])
    elif spec.kind is SourceKind.SPS:
        probs = np.array([0.0, 1.0])
    elif spec.mu == 0.0:
        if spec.kind is SourceKind.WCS:
            probs = np.array([1.0])
        elif spec.kind is SourceKind.CSS:
            # mu/sinh(mu) -> 1: all mass at a single photon.
            probs = np.array([0.0, 1.0])
        else:
            a = spec.odd_weight
            probs = np.array([1.0 - a, a])
    else:
        terms = np.exp(_log_terms(spec))
        # Suffix sums accumulate small terms first, so the reported tail
        # is the analytic remainder rather than a cancellation residue.
        suffix = np.cumsum(terms[::-1])[::-1]
        if suffix[0] < 1.0 - 1e-9:  # pragma: no cover - guarded by _HARD_CAP
            raise DomainError(
                f"series for mu={spec.mu} does not converge within "
                f"{_HARD_CAP} photons"
            )
        tails = np.append(suffix[1:], 0.0)  # tails[N] = mass above N
        n_max = int(np.nonzero(tails < tail_tolerance)[0][0])
        probs = terms[: n_max + 1].copy()
        tail = float(tails[n_max])

    probs.setflags(write=False)
    return PhotonDistribution(spec=spec, probabilities=probs, tail_mass=tail)
