"""Decoy-state estimators versus exact single-photon quantities."""

import math
from dataclasses import replace

import pytest

from mdiqkd import (
    DecoyInputs,
    DomainError,
    FLAG_CLAMPED,
    FLAG_ERROR_ABOVE_HALF,
    GainSet,
    SourceKind,
    SourceSpec,
    SystemParams,
    VacuumGains,
    build_distribution,
    gains,
    one_decoy_css,
    true_single_photon_quantities,
    two_decoy_generic,
    yield_tables,
)
from mdiqkd.decoy import css_y11_bound, generic_y11_bound, vacuum_substituted_gain


def _table(distance_km: float, cutoff: int = 15):
    system = SystemParams(distance_km=distance_km)
    return yield_tables(system.detector_params(), cutoff), system.misalignment


def _inputs(kind: SourceKind, mu1: float, mu2: float, distance_km: float, odd_weight=0.7):
    table, e_d = _table(distance_km)

    def spec(mu):
        if kind is SourceKind.CSS:
            return SourceSpec.css(mu)
        if kind is SourceKind.NONIDEAL_CSS:
            return SourceSpec.nonideal_css(mu, odd_weight)
        return SourceSpec.wcs(mu)

    ds, dd = build_distribution(spec(mu1)), build_distribution(spec(mu2))
    dv = build_distribution(SourceSpec.vacuum())
    vacuum = VacuumGains(
        signal_vacuum=gains(ds, dv, table, e_d),
        vacuum_signal=gains(dv, ds, table, e_d),
        decoy_vacuum=gains(dd, dv, table, e_d),
        vacuum_decoy=gains(dv, dd, table, e_d),
        vacuum_vacuum=gains(dv, dv, table, e_d),
    )
    return (
        DecoyInputs(
            mu_signal=mu1,
            mu_decoy=mu2,
            dist_signal=ds,
            dist_decoy=dd,
            gains_signal=gains(ds, ds, table, e_d),
            gains_decoy=gains(dd, dd, table, e_d),
            vacuum=vacuum,
        ),
        table,
        e_d,
    )


@pytest.mark.parametrize("distance_km", [0.0, 100.0, 300.0])
def test_one_decoy_brackets_truth(distance_km):
    inputs, table, e_d = _inputs(SourceKind.CSS, 0.1, 0.01, distance_km)
    estimate = one_decoy_css(inputs)
    truth = true_single_photon_quantities(table, e_d)
    assert estimate.y11_lower <= truth.y11_z + 1e-12
    assert estimate.e11_upper >= truth.e11_x - 1e-12
    # odd-only statistics make the single-decoy bound very tight
    assert estimate.y11_lower >= 0.99 * truth.y11_z
    assert estimate.flags == frozenset()


@pytest.mark.parametrize("distance_km", [0.0, 100.0, 300.0])
@pytest.mark.parametrize(
    "kind,mu1,mu2",
    [(SourceKind.WCS, 0.4, 0.07), (SourceKind.NONIDEAL_CSS, 0.1, 0.01)],
)
def test_two_decoy_brackets_truth(kind, mu1, mu2, distance_km):
    inputs, table, e_d = _inputs(kind, mu1, mu2, distance_km)
    estimate = two_decoy_generic(inputs)
    truth = true_single_photon_quantities(table, e_d)
    assert estimate.y11_lower <= truth.y11_z + 1e-12
    assert estimate.e11_upper >= truth.e11_x - 1e-12
    assert estimate.y11_lower > 0.0


def test_one_decoy_rejects_even_photon_mass():
    inputs, _, _ = _inputs(SourceKind.WCS, 0.4, 0.07, 0.0)
    with pytest.raises(DomainError):
        one_decoy_css(inputs)


def test_two_decoy_requires_vacuum_channels():
    inputs, _, _ = _inputs(SourceKind.WCS, 0.4, 0.07, 0.0)
    with pytest.raises(DomainError):
        two_decoy_generic(replace(inputs, vacuum=None))


def test_two_decoy_degenerate_for_odd_only_sources():
    """Ideal superposition sources have no two-photon component, which
    makes the two-point linear system singular."""
    inputs, _, _ = _inputs(SourceKind.CSS, 0.1, 0.01, 0.0)
    with pytest.raises(DomainError):
        two_decoy_generic(inputs)


def test_intensity_ordering_is_validated():
    ds = build_distribution(SourceSpec.css(0.1))
    table, e_d = _table(0.0)
    g = gains(ds, ds, table, e_d)
    with pytest.raises(DomainError):
        DecoyInputs(0.01, 0.1, ds, ds, g, g)
    with pytest.raises(DomainError):
        DecoyInputs(0.1, 0.0, ds, ds, g, g)


def _fabricated_inputs(q_signal_z, q_decoy_z, q_signal_x, q_decoy_x, eq_decoy_x):
    def gain_set(total_z, total_x, eq_x):
        return GainSet(
            correct_z=total_z,
            error_z=0.0,
            total_z=total_z,
            error_weighted_z=0.015 * total_z,
            correct_x=total_x,
            error_x=0.0,
            total_x=total_x,
            error_weighted_x=eq_x,
        )

    ds = build_distribution(SourceSpec.css(0.1))
    dd = build_distribution(SourceSpec.css(0.01))
    return DecoyInputs(
        mu_signal=0.1,
        mu_decoy=0.01,
        dist_signal=ds,
        dist_decoy=dd,
        gains_signal=gain_set(q_signal_z, q_signal_x, 0.015 * q_signal_x),
        gains_decoy=gain_set(q_decoy_z, q_decoy_x, eq_decoy_x),
    )


def test_negative_yield_bound_is_clamped_and_flagged():
    # a huge signal gain with a negligible decoy gain drives the
    # estimate negative
    inputs = _fabricated_inputs(0.9, 1e-9, 0.9, 1e-9, 1e-11)
    estimate = one_decoy_css(inputs)
    assert estimate.y11_lower == 0.0
    assert FLAG_CLAMPED in estimate.flags
    assert math.isinf(estimate.e11_upper)


def test_error_bound_above_half_is_flagged():
    # error-weighted gain close to the decoy gain forces e11 toward 1
    inputs = _fabricated_inputs(0.08, 0.008, 0.08, 0.008, 0.0079)
    estimate = one_decoy_css(inputs)
    assert estimate.y11_lower > 0.0
    assert estimate.e11_upper > 0.5
    assert FLAG_ERROR_ABOVE_HALF in estimate.flags


def test_css_bound_scalar_identity():
    """The bound is exact when gains contain only the (1,1) term."""
    mu1, mu2 = 0.1, 0.01
    y11 = 0.08
    p1 = lambda mu: mu / math.sinh(mu)
    q1 = p1(mu1) ** 2 * y11
    q2 = p1(mu2) ** 2 * y11
    got = css_y11_bound(mu1, mu2, q1, q2)
    assert got == pytest.approx(y11, rel=1e-12)


def test_generic_bound_scalar_identity():
    """Exact recovery when only (1,1) populates the vacuum-substituted
    gains."""
    y11 = 0.05
    p_sig = (0.67, 0.268, 0.054)
    p_dec = (0.93, 0.065, 0.0023)
    g_sig = p_sig[1] ** 2 * y11
    g_dec = p_dec[1] ** 2 * y11
    got = generic_y11_bound(p_sig, p_dec, g_sig, g_dec)
    assert got == pytest.approx(y11, rel=1e-12)


def test_generic_bound_degeneracy_detection():
    with pytest.raises(DomainError):
        generic_y11_bound((0.9, 0.1, 0.0), (0.99, 0.01, 0.0), 1e-3, 1e-4)
    # proportional (P1, P2) rows are singular even when nonzero
    with pytest.raises(DomainError):
        generic_y11_bound((0.8, 0.1, 0.05), (0.9, 0.05, 0.025), 1e-3, 1e-4)


def test_vacuum_substitution_removes_zero_photon_rows():
    # contract a rank-one yield model exactly
    p0 = 0.67
    q_mm, q_m0, q_0m, q_00 = 0.02, 0.005, 0.004, 0.001
    got = vacuum_substituted_gain(q_mm, q_m0, q_0m, q_00, p0)
    assert got == pytest.approx(
        q_mm - p0 * q_m0 - p0 * q_0m + p0 * p0 * q_00, rel=1e-15
    )
