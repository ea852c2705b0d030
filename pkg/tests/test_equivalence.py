"""Tests for the Gaussian-swap resolvent-gap machinery."""

from __future__ import annotations

import numpy as np
import pytest

from mplab.ensembles import (
    BandToeplitz,
    GaussianCov,
    IIDGaussian,
    IIDRademacher,
    IIDSparseSpike,
    Identity,
    ParseError,
    Spiked,
    Toeplitz,
    WeakDependent,
    derive_rng,
)
from mplab.equivalence import (
    ConstantColumns,
    HeteroGapResult,
    RandomPSDUnitNorm,
    ScaledIdentity,
    SwapConfig,
    column_offset,
    column_spec_string,
    offset_matrix,
    offset_spec_string,
    paired_gaussian,
    parse_column_spec,
    parse_offset_spec,
    resolvent_gap,
    resolvent_gap_hetero,
)
from mplab.matcore import DomainError, spectral_norm


# ---------------------------------------------------------------------------
# twins


def test_paired_gaussian_mappings():
    assert paired_gaussian(IIDGaussian(), 8) == GaussianCov(Identity())
    assert paired_gaussian(IIDRademacher(), 8) == GaussianCov(Identity())
    g = GaussianCov(Toeplitz(0.3))
    assert paired_gaussian(g, 8) is g
    m = WeakDependent((1.0, 0.5))
    assert paired_gaussian(m, 8) == GaussianCov(BandToeplitz(m.autocovariances()))


def test_paired_gaussian_rejects_bad_dimension():
    with pytest.raises(DomainError):
        paired_gaussian(IIDGaussian(), 0)


# ---------------------------------------------------------------------------
# offsets


def test_offset_matrix_scaled_identity():
    b = offset_matrix(ScaledIdentity(0.5), 4)
    assert np.array_equal(b, 0.5 * np.eye(4))
    assert offset_matrix(None, 4) is None


def test_offset_matrix_psd_is_deterministic_unit_norm():
    b1 = offset_matrix(RandomPSDUnitNorm(7), 16)
    b2 = offset_matrix(RandomPSDUnitNorm(7), 16)
    b3 = offset_matrix(RandomPSDUnitNorm(8), 16)
    assert np.array_equal(b1, b2)
    assert not np.array_equal(b1, b3)
    assert spectral_norm(b1) == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.eigvalsh(b1).min() > -1e-12


def test_column_offset_constant_columns():
    c = column_offset(ConstantColumns(2.0), 4, 3)
    assert c.shape == (4, 3)
    assert np.allclose(c, 2.0 / np.sqrt(4.0))
    assert np.allclose(np.linalg.norm(c[:, 0]) ** 2, 4.0)  # gamma^2 per column
    assert column_offset(None, 4, 3) is None


def test_offset_grammar_round_trips():
    for spec in (ScaledIdentity(0.5), ScaledIdentity(1.0 / 3.0), RandomPSDUnitNorm(12)):
        assert parse_offset_spec(offset_spec_string(spec)) == spec
    c = ConstantColumns(1.0 / 3.0)
    assert parse_column_spec(column_spec_string(c)) == c


def test_offset_grammar_errors():
    with pytest.raises(ParseError):
        parse_offset_spec("diag:1,2")
    with pytest.raises(ParseError):
        parse_offset_spec("id:one")
    with pytest.raises(ParseError):
        parse_column_spec("rows:0.5")
    with pytest.raises(ParseError):
        parse_column_spec("const:x")


# ---------------------------------------------------------------------------
# config validation


def test_swap_config_validation():
    with pytest.raises(DomainError):
        SwapConfig(IIDGaussian(), 0, 8, 1j)
    with pytest.raises(DomainError):
        SwapConfig(IIDGaussian(), 8, 8, 1.0 - 1j)
    with pytest.raises(DomainError):
        SwapConfig(IIDGaussian(), 8, 4, 1j, hetero=(Identity(),) * 3)


def test_gap_entry_points_reject_wrong_variant():
    homo = SwapConfig(IIDGaussian(), 8, 8, 1j)
    het = SwapConfig(IIDGaussian(), 8, 4, 1j, hetero=(Identity(),) * 4)
    with pytest.raises(DomainError):
        resolvent_gap(het, derive_rng(0))
    with pytest.raises(DomainError):
        resolvent_gap_hetero(homo, derive_rng(0))
    with pytest.raises(DomainError):
        resolvent_gap_hetero(
            SwapConfig(GaussianCov(Toeplitz(0.5)), 8, 4, 1j, hetero=(Identity(),) * 4),
            derive_rng(0),
        )


# ---------------------------------------------------------------------------
# gap values


def test_gap_respects_deterministic_norm_bound():
    for z in (1j, 0.5 + 0.25j, -1.0 + 2.0j):
        cfg = SwapConfig(IIDSparseSpike(), 32, 64, z)
        for t in range(5):
            d = resolvent_gap(cfg, derive_rng(1, t))
            assert abs(d) <= 2.0 / complex(z).imag + 1e-12


def test_gap_of_gaussian_against_itself_is_small_not_zero():
    # The twin of iid-gauss is an independent Gaussian draw: the gap is a
    # nonzero random variable, just a concentrating one.
    cfg = SwapConfig(IIDGaussian(), 64, 128, 1j)
    d = resolvent_gap(cfg, derive_rng(2))
    assert d != 0
    assert abs(d) < 0.2


def test_gap_shrinks_with_dimension_for_rademacher():
    meds = []
    for p in (64, 256):
        cfg = SwapConfig(IIDRademacher(), p, 2 * p, 1j)
        gaps = [abs(resolvent_gap(cfg, derive_rng(3, p, t))) for t in range(5)]
        meds.append(float(np.median(gaps)))
    assert meds[1] < meds[0]


def test_gap_identity_offset_matches_shifted_z():
    # B = beta I only shifts the spectrum: the gap at (B, z) must equal the
    # gap at (no offset, z - beta) for the same stream, up to eigensolver
    # roundoff.
    beta, z = 0.5, 0.3 + 1j
    base = dict(model=IIDRademacher(), p=24, n=48)
    with_b = SwapConfig(**base, z=z, b_spec=ScaledIdentity(beta))
    without = SwapConfig(**base, z=z - beta)
    d1 = resolvent_gap(with_b, derive_rng(4))
    d2 = resolvent_gap(without, derive_rng(4))
    assert abs(d1 - d2) < 1e-10


def test_gap_reproducible_and_column_offset_changes_it():
    cfg = SwapConfig(IIDGaussian(), 16, 32, 1j)
    assert resolvent_gap(cfg, derive_rng(5)) == resolvent_gap(cfg, derive_rng(5))
    shifted = SwapConfig(IIDGaussian(), 16, 32, 1j, c_spec=ConstantColumns(1.0))
    assert resolvent_gap(shifted, derive_rng(5)) != resolvent_gap(cfg, derive_rng(5))


# ---------------------------------------------------------------------------
# heterogeneous columns


def test_hetero_identity_matches_homogeneous_gap_bitwise():
    p, n = 16, 32
    homo = SwapConfig(IIDGaussian(), p, n, 1j)
    het = SwapConfig(IIDGaussian(), p, n, 1j, hetero=(Identity(),) * n)
    d_homo = resolvent_gap(homo, derive_rng(6))
    out = resolvent_gap_hetero(het, derive_rng(6))
    assert isinstance(out, HeteroGapResult)
    assert out.delta == d_homo
    assert out.avg_spread == pytest.approx(1.0 / p, rel=1e-15)


def test_hetero_avg_spread_hand_formula():
    p, n = 8, 6
    phi = 0.5
    specs = tuple(Identity() if k % 2 == 0 else Toeplitz(phi) for k in range(n))
    cfg = SwapConfig(IIDGaussian(), p, n, 1j, hetero=specs)
    out = resolvent_gap_hetero(cfg, derive_rng(7))
    # tr(I^2) = p; tr(Toeplitz^2) = p + 2 sum_{h=1}^{p-1} (p - h) phi^{2h}.
    tr_toep = p + 2 * sum((p - h) * phi ** (2 * h) for h in range(1, p))
    expected = (3 * p + 3 * tr_toep) / (n * p * p)
    assert out.avg_spread == pytest.approx(expected, rel=1e-12)
    assert abs(out.delta) <= 2.0 + 1e-12


def test_hetero_gap_bound_holds_for_spiked_columns():
    p, n = 16, 8
    cfg = SwapConfig(
        IIDRademacher(), p, n, 0.5 + 0.5j, hetero=(Spiked(1, 4.0),) * n
    )
    out = resolvent_gap_hetero(cfg, derive_rng(8))
    assert abs(out.delta) <= 2.0 / 0.5 + 1e-12
