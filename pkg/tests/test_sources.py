"""Photon-number statistics of the supported source families."""

import math

import numpy as np
import pytest

from mdiqkd import DomainError, SourceSpec, build_distribution


ALL_SPECS = [
    SourceSpec.css(0.1),
    SourceSpec.css(0.01),
    SourceSpec.css(1.3),
    SourceSpec.nonideal_css(0.1, 0.7),
    SourceSpec.nonideal_css(0.5, 0.95),
    SourceSpec.wcs(0.4),
    SourceSpec.wcs(0.07),
    SourceSpec.wcs(2.0),
    SourceSpec.sps(),
    SourceSpec.vacuum(),
]


@pytest.mark.parametrize("spec", ALL_SPECS, ids=str)
def test_probabilities_normalized_with_tail(spec):
    dist = build_distribution(spec)
    total = float(dist.probabilities.sum())
    assert abs(total + dist.tail_mass - 1.0) < 1e-12
    assert dist.tail_mass < 1e-15
    assert (dist.probabilities >= 0.0).all()


def test_css_has_odd_photon_numbers_only():
    dist = build_distribution(SourceSpec.css(0.1))
    assert (dist.probabilities[0::2] == 0.0).all()
    # frozen reference values for mu = 0.1
    assert dist.prob(1) == pytest.approx(0.9983352757296110, rel=1e-15)
    assert dist.prob(3) == pytest.approx(1.663892126216018e-3, rel=1e-15)
    assert dist.prob(5) == pytest.approx(8.319460631080091e-7, rel=1e-14)


def test_nonideal_css_mixes_both_parities():
    dist = build_distribution(SourceSpec.nonideal_css(0.1, 0.7))
    assert dist.prob(0) == pytest.approx(0.2985062246859679, rel=1e-15)
    assert dist.prob(1) == pytest.approx(0.6988346930107277, rel=1e-15)
    assert dist.prob(2) == pytest.approx(1.4925311234298397e-3, rel=1e-15)
    # odd / even sectors carry weight a and 1 - a respectively
    assert dist.probabilities[1::2].sum() + dist.tail_mass == pytest.approx(0.7, abs=1e-13)
    assert dist.probabilities[0::2].sum() == pytest.approx(0.3, abs=1e-13)


def test_wcs_is_poissonian():
    dist = build_distribution(SourceSpec.wcs(0.4))
    assert dist.prob(0) == pytest.approx(0.6703200460356393, rel=1e-15)
    assert dist.prob(1) == pytest.approx(0.2681280184142557, rel=1e-15)
    assert dist.prob(2) == pytest.approx(5.362560368285114e-2, rel=1e-15)
    assert dist.mean() == pytest.approx(0.4, rel=1e-12)


def test_degenerate_sources():
    sps = build_distribution(SourceSpec.sps())
    assert list(sps.probabilities) == [0.0, 1.0]
    vac = build_distribution(SourceSpec.vacuum())
    assert list(vac.probabilities) == [1.0]
    assert sps.tail_mass == 0.0 and vac.tail_mass == 0.0


def test_zero_intensity_limits():
    css0 = build_distribution(SourceSpec.css(0.0))
    assert list(css0.probabilities) == [0.0, 1.0]
    ni0 = build_distribution(SourceSpec.nonideal_css(0.0, 0.7))
    assert ni0.prob(0) == pytest.approx(1.0 - 0.7, abs=1e-16)
    assert ni0.prob(1) == pytest.approx(0.7, abs=1e-16)
    wcs0 = build_distribution(SourceSpec.wcs(0.0))
    assert list(wcs0.probabilities) == [1.0]


def test_css_mean_matches_closed_form():
    mu = 0.1
    dist = build_distribution(SourceSpec.css(mu))
    assert dist.mean() == pytest.approx(mu / math.tanh(mu), rel=1e-12)


def test_tail_shrinks_with_tolerance():
    loose = build_distribution(SourceSpec.wcs(0.4), tail_tolerance=1e-6)
    tight = build_distribution(SourceSpec.wcs(0.4), tail_tolerance=1e-15)
    assert tight.cutoff >= loose.cutoff
    assert loose.tail_mass < 1e-6
    assert tight.tail_mass < 1e-15


@pytest.mark.parametrize("bad", [0.0, -1e-9, 2e-6, 1.0, float("nan")])
def test_tail_tolerance_range_is_enforced(bad):
    with pytest.raises(DomainError):
        build_distribution(SourceSpec.wcs(0.4), tail_tolerance=bad)


def test_tail_tolerance_upper_edge_is_allowed():
    dist = build_distribution(SourceSpec.wcs(0.4), tail_tolerance=1e-6)
    assert dist.cutoff >= 1


@pytest.mark.parametrize(
    "factory",
    [
        lambda: SourceSpec.css(-0.1),
        lambda: SourceSpec.css(float("nan")),
        lambda: SourceSpec.css(float("inf")),
        lambda: SourceSpec.nonideal_css(0.1, 0.0),
        lambda: SourceSpec.nonideal_css(0.1, -0.2),
        lambda: SourceSpec.nonideal_css(0.1, 1.2),
        lambda: SourceSpec.wcs(-2.0),
    ],
)
def test_invalid_source_parameters(factory):
    with pytest.raises(DomainError):
        factory()


def test_nonideal_with_full_odd_weight_matches_css():
    pure = build_distribution(SourceSpec.css(0.2))
    limit = build_distribution(SourceSpec.nonideal_css(0.2, 1.0))
    n = min(pure.cutoff, limit.cutoff) + 1
    np.testing.assert_allclose(
        limit.probabilities[:n], pure.probabilities[:n], rtol=0, atol=1e-15
    )


def test_distribution_is_read_only():
    dist = build_distribution(SourceSpec.wcs(0.4))
    with pytest.raises(ValueError):
        dist.probabilities[0] = 0.5


def test_padded_extends_with_zeros():
    dist = build_distribution(SourceSpec.css(0.1))
    padded = dist.padded(dist.cutoff + 5)
    assert padded.shape == (dist.cutoff + 5,)
    assert (padded[dist.cutoff + 1 :] == 0.0).all()
