"""Fock-state simulation of the relay's Bell-state measurement.

Two pulses meet on a 50:50 beam splitter; each output arm passes a
polarizing beam splitter feeding two threshold detectors, so there are
four detector modes (1H, 1V, 2H, 2V).  For number states entering the
two ports the beam splitter acts by operator substitution

    a1 -> (c1 + c2) / sqrt(2),    a2 -> (c1 - c2) / sqrt(2)

per polarization mode.  Amplitudes landing on the same output monomial
are summed coherently before squaring; that coherent sum is what makes
two-photon Hong-Ou-Mandel dips exact zeros.

The expansion is organized so that float64 arithmetic is exact or
cancellation-free on every path:

* equal polarizations reduce to a single-mode interference kernel whose
  terms are products of binomial coefficients (exact integers below
  2**53), followed by per-arm binomial splits;
* H/V pairs factor into two independent arm splits;
* diagonal/antidiagonal pairs use normalized per-arm rotation rows
  (every summand has modulus < 1, so the coherent sum loses no digits);
* mixed-basis pairs expand the diagonal pulse into H/V sectors, which
  cannot interfere because the sector photon totals are measured.

Detector modelling (threshold detectors with efficiency eta and dark
count p_d) and the per-photon-pair Bell yields live here too.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import CutoffError, DomainError

# Beyond a 40-photon total the exact-integer guarantees of the kernel
# (products of binomials below 2**53) no longer hold.
MAX_TOTAL_PHOTONS = 40

_SQRT2 = math.sqrt(2.0)
_FACT = [float(math.factorial(n)) for n in range(MAX_TOTAL_PHOTONS + 1)]


class Polarization(enum.Enum):
    H = "H"
    V = "V"
    PLUS = "plus"       # (H + V) / sqrt(2)
    MINUS = "minus"     # (H - V) / sqrt(2)


class BellOutcome(enum.Enum):
    PSI_PLUS = "psi_plus"    # same-arm H and V clicks, other arm silent
    PSI_MINUS = "psi_minus"  # cross-arm H and V clicks, others silent


_DIAGONAL = (Polarization.PLUS, Polarization.MINUS)
_RECTILINEAR = (Polarization.H, Polarization.V)


@dataclass(frozen=True)
class DetectorParams:
    """Threshold-detector model shared by all four detectors."""

    efficiency: float
    dark_count: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.efficiency <= 1.0:
            raise DomainError(f"efficiency must lie in [0, 1], got {self.efficiency}")
        if not 0.0 <= self.dark_count < 1.0:
            raise DomainError(f"dark count must lie in [0, 1), got {self.dark_count}")


@dataclass(frozen=True)
class OutputDistribution:
    """Joint photon-number distribution over the four detector modes.

    ``configs`` is an (n, 4) int array of (n1h, n1v, n2h, n2v)
    occupations, ``probabilities`` the matching probabilities.  Rows are
    lexicographically sorted, so equal inputs give identical layouts.
    """

    input_photons: tuple[int, int]
    polarizations: tuple[Polarization, Polarization]
    configs: np.ndarray
    probabilities: np.ndarray

    @property
    def total_photons(self) -> int:
        return self.input_photons[0] + self.input_photons[1]

    def total(self) -> float:
        """Sum of retained probabilities (1 up to rounding)."""
        return float(self.probabilities.sum())

    def items(self) -> Iterator[tuple[tuple[int, int, int, int], float]]:
        for row, p in zip(self.configs, self.probabilities):
            yield tuple(int(x) for x in row), float(p)

    @functools.cached_property
    def _lookup(self) -> dict[tuple[int, int, int, int], float]:
        return dict(self.items())

    def probability(self, config: tuple[int, int, int, int]) -> float:
        return self._lookup.get(tuple(config), 0.0)

    def as_dict(self) -> dict[tuple[int, int, int, int], float]:
        return dict(self._lookup)


# ---------------------------------------------------------------------------
# small exact building blocks
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=None)
def _binom_row(n: int) -> np.ndarray:
    """[C(n, 0), ..., C(n, n)] as exact float64 values."""
    row = np.array([float(math.comb(n, k)) for k in range(n + 1)])
    row.setflags(write=False)
    return row


@functools.lru_cache(maxsize=None)
def _split_probs(n: int) -> np.ndarray:
    """Binomial(n, 1/2) weights: one pulse spreading over two modes."""
    row = _binom_row(n) * 0.5**n
    row.setflags(write=False)
    return row


@functools.lru_cache(maxsize=None)
def _pol_row(n: int, pol: Polarization) -> np.ndarray:
    """Integer H/V expansion coefficients of n photons of ``pol``.

    Entry r is the coefficient of (cH+)^r (cV+)^(n-r) in the raw binomial
    expansion, without the 2**(-n/2) normalization of diagonal states.
    """
    row = _binom_row(n).copy()
    if pol is Polarization.H:
        row = np.zeros(n + 1)
        row[n] = 1.0
    elif pol is Polarization.V:
        row = np.zeros(n + 1)
        row[0] = 1.0
    elif pol is Polarization.MINUS:
        signs = np.array([(-1.0) ** (n - r) for r in range(n + 1)])
        row = row * signs
    row.setflags(write=False)
    return row


@functools.lru_cache(maxsize=None)
def _interference_kernel(na: int, nb: int, coherent: bool = True) -> np.ndarray:
    """Arm-count distribution for equal-polarization pulses.

    ``na`` photons enter port 1 and ``nb`` port 2 in the same
    polarization mode.  Returns P(p) for p photons in output arm 1,
    p = 0..na+nb.  Every product of binomials is an exact integer in
    float64, so true interference zeros come out exactly 0.0.

    ``coherent=False`` reproduces the (incorrect) reading that squares
    each splitting term before summing; kept only as a diagnostic.
    """
    total = na + nb
    row_a = _binom_row(na)
    signed_b = _binom_row(nb) * np.array(
        [(-1.0) ** (nb - k) for k in range(nb + 1)]
    )
    shape = _FACT[: total + 1]
    p = np.arange(total + 1)
    weight = np.array(shape) * np.array(shape[::-1]) / (
        _FACT[na] * _FACT[nb] * 2.0**total
    )
    if coherent:
        amp = np.convolve(row_a, signed_b)
        probs = amp * amp * weight
    else:
        probs = np.zeros(total + 1)
        for k in range(nb + 1):
            for r in range(na + 1):
                probs[r + k] += (row_a[r] * signed_b[k]) ** 2
        probs = probs * weight
    probs.setflags(write=False)
    return probs


@functools.lru_cache(maxsize=None)
def _rotation_row(a: int, b: int, pol_a: Polarization, pol_b: Polarization) -> np.ndarray:
    """Normalized H/V amplitudes of ``a`` photons of pol_a plus ``b`` of pol_b
    sharing one arm.  Entry nh is the <nh, a+b-nh| amplitude."""
    conv = np.convolve(_pol_row(a, pol_a), _pol_row(b, pol_b))
    half_powers = a * (pol_a in _DIAGONAL) + b * (pol_b in _DIAGONAL)
    nh = np.arange(a + b + 1)
    norm = np.sqrt(
        np.array([_FACT[h] for h in nh]) * np.array([_FACT[a + b - h] for h in nh])
        / (_FACT[a] * _FACT[b])
    )
    row = conv * norm * 2.0 ** (-0.5 * half_powers)
    row.setflags(write=False)
    return row


# ---------------------------------------------------------------------------
# propagation
# ---------------------------------------------------------------------------


def _sorted_distribution(
    i: int,
    pol_a: Polarization,
    j: int,
    pol_b: Polarization,
    configs: np.ndarray,
    probs: np.ndarray,
) -> OutputDistribution:
    order = np.lexsort(configs.T[::-1])
    configs = np.ascontiguousarray(configs[order])
    probs = np.ascontiguousarray(probs[order])
    configs.setflags(write=False)
    probs.setflags(write=False)
    return OutputDistribution(
        input_photons=(i, j),
        polarizations=(pol_a, pol_b),
        configs=configs,
        probabilities=probs,
    )


def _configs_parallel(i: int, j: int, pol: Polarization, coherent: bool):
    """Both pulses share one polarization: interfere, then split per arm."""
    total = i + j
    kernel = _interference_kernel(i, j, coherent)
    configs, probs = [], []
    for p in range(total + 1):
        q = total - p
        if pol in _RECTILINEAR:
            split1 = np.ones(1)
            split2 = np.ones(1)
            nh1 = np.array([p if pol is Polarization.H else 0])
            nh2 = np.array([q if pol is Polarization.H else 0])
        else:
            split1, split2 = _split_probs(p), _split_probs(q)
            nh1, nh2 = np.arange(p + 1), np.arange(q + 1)
        block = kernel[p] * np.outer(split1, split2)
        g1, g2 = np.meshgrid(nh1, nh2, indexing="ij")
        configs.append(
            np.column_stack(
                [
                    g1.ravel(),
                    (p - g1).ravel(),
                    g2.ravel(),
                    (q - g2).ravel(),
                ]
            )
        )
        probs.append(block.ravel())
    return np.concatenate(configs), np.concatenate(probs)


def _configs_rectilinear_orthogonal(i: int, pol_a: Polarization, j: int):
    """(H, V) or (V, H): two independent binomial arm splits."""
    split_a, split_b = _split_probs(i), _split_probs(j)
    ka, kb = np.meshgrid(np.arange(i + 1), np.arange(j + 1), indexing="ij")
    probs = np.outer(split_a, split_b).ravel()
    ka, kb = ka.ravel(), kb.ravel()
    if pol_a is Polarization.H:
        configs = np.column_stack([ka, kb, i - ka, j - kb])
    else:
        configs = np.column_stack([kb, ka, j - kb, i - ka])
    return configs, probs


def _configs_diagonal_orthogonal(
    i: int, pol_a: Polarization, j: int, pol_b: Polarization, coherent: bool
):
    """(plus, minus) or (minus, plus): full four-mode coherent assembly.

    In the diagonal basis the two pulses occupy orthogonal modes and
    simply split over the arms; rotating each arm back to H/V couples
    the splittings coherently.  All summands are normalized amplitudes
    (modulus <= 1), so the float64 sum is benign.
    """
    total = i + j
    amp_a = np.sqrt(_binom_row(i) / 2.0**i)
    amp_b = np.sqrt(_binom_row(j) / 2.0**j) * np.array(
        [(-1.0) ** (j - k) for k in range(j + 1)]
    )
    configs, probs = [], []
    for n1 in range(total + 1):
        n2 = total - n1
        p_lo, p_hi = max(0, n1 - j), min(i, n1)
        if p_lo > p_hi:
            continue
        p_vals = range(p_lo, p_hi + 1)
        weights = np.array([amp_a[p] * amp_b[n1 - p] for p in p_vals])
        rows1 = np.vstack([_rotation_row(p, n1 - p, pol_a, pol_b) for p in p_vals])
        rows2 = np.vstack(
            [_rotation_row(i - p, j - n1 + p, pol_a, pol_b) for p in p_vals]
        )
        if coherent:
            amp = (rows1 * weights[:, None]).T @ rows2
            block = amp * amp
        else:
            block = (rows1**2 * (weights**2)[:, None]).T @ rows2**2
        g1, g2 = np.meshgrid(np.arange(n1 + 1), np.arange(n2 + 1), indexing="ij")
        configs.append(
            np.column_stack(
                [g1.ravel(), (n1 - g1).ravel(), g2.ravel(), (n2 - g2).ravel()]
            )
        )
        probs.append(block.ravel())
    return np.concatenate(configs), np.concatenate(probs)


def _configs_mixed(
    i: int, pol_a: Polarization, j: int, pol_b: Polarization, coherent: bool
):
    """One rectilinear and one diagonal pulse.

    The diagonal pulse is expanded into its H and V sectors.  Sector
    photon totals are observable in the detector counts, so the sectors
    add incoherently; within the sector shared with the rectilinear
    pulse the usual two-port interference kernel applies.
    """
    if pol_a in _RECTILINEAR:
        n_rect, pol_rect, rect_port = i, pol_a, 0
        n_diag = j
    else:
        n_rect, pol_rect, rect_port = j, pol_b, 1
        n_diag = i
    sector_weights = _split_probs(n_diag)

    configs, probs = [], []
    for t in range(n_diag + 1):
        # t diagonal photons fall into the sector of the rectilinear pulse.
        if rect_port == 0:
            kernel = _interference_kernel(n_rect, t, coherent)
        else:
            kernel = _interference_kernel(t, n_rect, coherent)
        other = _split_probs(n_diag - t)
        n_int = n_rect + t
        ki, ko = np.meshgrid(np.arange(n_int + 1), np.arange(n_diag - t + 1), indexing="ij")
        block = sector_weights[t] * np.outer(kernel, other)
        ki, ko = ki.ravel(), ko.ravel()
        if pol_rect is Polarization.H:
            block_configs = np.column_stack([ki, ko, n_int - ki, n_diag - t - ko])
        else:
            block_configs = np.column_stack([ko, ki, n_diag - t - ko, n_int - ki])
        configs.append(block_configs)
        probs.append(block.ravel())
    return np.concatenate(configs), np.concatenate(probs)


@functools.lru_cache(maxsize=None)
def propagate(
    i: int,
    pol_a: Polarization,
    j: int,
    pol_b: Polarization,
    coherent: bool = True,
) -> OutputDistribution:
    """Send |i> at ``pol_a`` and |j> at ``pol_b`` through the relay optics.

    Returns the exact joint photon-number distribution over the four
    detector modes before any detector imperfection is applied.

    ``coherent=False`` switches the internal interference sums to a
    literal squared-term reading.  That variant breaks unitarity and
    Hong-Ou-Mandel cancellation; it exists purely as a diagnostic
    comparison and must never feed yield tables.
    """
    if i < 0 or j < 0:
        raise DomainError(f"photon numbers must be >= 0, got ({i}, {j})")
    if i + j > MAX_TOTAL_PHOTONS:
        raise CutoffError(
            f"total photon number {i + j} exceeds the precision budget "
            f"({MAX_TOTAL_PHOTONS})"
        )
    if not isinstance(pol_a, Polarization) or not isinstance(pol_b, Polarization):
        raise DomainError("polarizations must be Polarization members")

    if pol_a is pol_b:
        configs, probs = _configs_parallel(i, j, pol_a, coherent)
    elif {pol_a, pol_b} == set(_RECTILINEAR):
        configs, probs = _configs_rectilinear_orthogonal(i, pol_a, j)
    elif {pol_a, pol_b} == set(_DIAGONAL):
        configs, probs = _configs_diagonal_orthogonal(i, pol_a, j, pol_b, coherent)
    else:
        configs, probs = _configs_mixed(i, pol_a, j, pol_b, coherent)
    return _sorted_distribution(i, pol_a, j, pol_b, configs, probs)


# ---------------------------------------------------------------------------
# detectors
# ---------------------------------------------------------------------------


def _one_minus_loss_power(n: np.ndarray, eta: float) -> np.ndarray:
    """1 - (1 - eta)**n, exact at n = 0 and stable for small eta*n."""
    if eta >= 1.0:
        return (n > 0).astype(float)
    return -np.expm1(n * math.log1p(-eta))


def click_probability(n: int, params: DetectorParams) -> float:
    """Probability that a threshold detector fires on n incident photons.

    Equals 1 - (1 - p_d) (1 - eta)^n: the detector stays silent only if
    every photon is lost and no dark count occurs.
    """
    if n < 0:
        raise DomainError(f"photon number must be >= 0, got {n}")
    survive = _one_minus_loss_power(np.array([n]), params.efficiency)[0]
    return params.dark_count + (1.0 - params.dark_count) * float(survive)


def bell_yield(
    dist: OutputDistribution, outcome: BellOutcome, params: DetectorParams
) -> float:
    """Probability of announcing ``outcome`` given the ideal-optics output.

    psi_plus requires H and V clicks in one arm with the other arm
    silent; psi_minus requires an H click in one arm and a V click in
    the other with the remaining detectors silent.
    """
    pd, q = params.dark_count, 1.0 - params.dark_count
    cols = dist.configs.T
    fired = [pd + q * _one_minus_loss_power(c, params.efficiency) for c in cols]
    d1h, d1v, d2h, d2v = fired
    s1h, s1v, s2h, s2v = (1.0 - d for d in fired)
    if outcome is BellOutcome.PSI_PLUS:
        pattern = d1h * d1v * s2h * s2v + d2h * d2v * s1h * s1v
    elif outcome is BellOutcome.PSI_MINUS:
        pattern = d1h * d2v * s1v * s2h + d1v * d2h * s1h * s2v
    else:
        raise DomainError(f"unknown Bell outcome {outcome}")
    return float(dist.probabilities @ pattern)


# ---------------------------------------------------------------------------
# per-photon-pair yield tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class YieldTable:
    """Bell-measurement yields per photon-number pair.

    Entry [i, j] is the psi_plus yield when the two sources emit i and j
    photons in the canonical input pair of that channel:

    * ``correct_z`` for (H, V), ``error_z`` for (H, H);
    * ``correct_x`` for (plus, plus), ``error_x`` for (plus, minus).

    The factor-4 multiplicity of equivalent input/outcome combinations
    cancels against the 1/4 probability of each basis-state pair, so
    these single-pair yields multiply photon-number probabilities
    directly in gain formulas.
    """

    params: DetectorParams
    cutoff: int
    correct_z: np.ndarray
    error_z: np.ndarray
    correct_x: np.ndarray
    error_x: np.ndarray

    def single_pair(self, basis: str) -> tuple[float, float]:
        """(correct, error) yields of the (1, 1) photon pair."""
        if basis == "Z":
            return float(self.correct_z[1, 1]), float(self.error_z[1, 1])
        if basis == "X":
            return float(self.correct_x[1, 1]), float(self.error_x[1, 1])
        raise DomainError(f"basis must be 'Z' or 'X', got {basis!r}")


# Highest per-side photon number the tables accept: keeps i + j within
# the propagation precision budget.
MAX_CUTOFF = MAX_TOTAL_PHOTONS // 2

_CHANNELS = {
    "correct_z": (Polarization.H, Polarization.V),
    "error_z": (Polarization.H, Polarization.H),
    "correct_x": (Polarization.PLUS, Polarization.PLUS),
    "error_x": (Polarization.PLUS, Polarization.MINUS),
}


def yield_tables(params: DetectorParams, cutoff: int) -> YieldTable:
    """Tabulate psi_plus yields for all photon pairs up to ``cutoff``."""
    if cutoff < 1:
        raise DomainError(f"cutoff must be >= 1, got {cutoff}")
    if cutoff > MAX_CUTOFF:
        raise CutoffError(
            f"cutoff {cutoff} exceeds the numeric precision budget "
            f"(max {MAX_CUTOFF} per side)"
        )
    tables = {}
    for name, (pol_a, pol_b) in _CHANNELS.items():
        table = np.empty((cutoff + 1, cutoff + 1))
        for i in range(cutoff + 1):
            for j in range(cutoff + 1):
                dist = propagate(i, pol_a, j, pol_b)
                table[i, j] = bell_yield(dist, BellOutcome.PSI_PLUS, params)
        table.setflags(write=False)
        tables[name] = table
    return YieldTable(params=params, cutoff=cutoff, **tables)
