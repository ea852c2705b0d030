"""Tests for empirical spectral distributions and distance-to-law machinery."""

from __future__ import annotations

import numpy as np
import pytest

from mplab.ensembles import IIDGaussian, derive_rng, sample_data_matrix
from mplab.matcore import DomainError, InvalidInputError, coordinate_frame, haar_frame
from mplab.mp_law import MPLaw
from mplab.spectra import (
    ESD,
    empirical_stieltjes,
    esd,
    ks_distance,
    projected_covariance,
    read_esd_csv,
    sample_covariance,
    write_esd_csv,
)


def law_quantiles(law: MPLaw, p: int) -> np.ndarray:
    """Eigenvalue list sitting at the law's (k - 1/2)/p quantiles, by bisection.

    An ESD built this way has empirical cdf within 1/(2p) of the law at every
    point, so its Kolmogorov distance to the law is exactly 1/(2p) up to the
    bisection tolerance.  Serves as an independent check of ks_distance.
    """
    lo0, hi0 = 0.0, law.support()[1] + 1.0
    out = np.empty(p)
    for k in range(p):
        target = (k + 0.5) / p
        lo, hi = lo0, hi0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if law.cdf(mid) < target:
                lo = mid
            else:
                hi = mid
        out[k] = 0.5 * (lo + hi)
    return out


# ---------------------------------------------------------------------------
# sample covariance


def test_sample_covariance_hand_example():
    x = np.array([[1.0, 2.0], [3.0, -1.0]])
    s = sample_covariance(x)
    # S = X X^T / n with n = 2 columns, worked by hand.
    assert np.allclose(s, [[2.5, 0.5], [0.5, 5.0]])
    assert np.array_equal(s, s.T)


def test_sample_covariance_single_column_is_outer_product():
    v = np.array([[2.0], [1.0], [-1.0]])
    assert np.allclose(sample_covariance(v), np.outer(v[:, 0], v[:, 0]))


def test_sample_covariance_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        sample_covariance(np.ones(4))
    with pytest.raises(DomainError):
        sample_covariance(np.ones((3, 0)))
    with pytest.raises(InvalidInputError):
        sample_covariance(np.array([[np.nan, 1.0], [0.0, 1.0]]))


# ---------------------------------------------------------------------------
# esd


def test_esd_sorted_ascending_known_matrix():
    e = esd(np.array([[2.0, 1.0], [1.0, 2.0]]))
    assert np.allclose(e.eigenvalues, [1.0, 3.0])
    assert e.p == 2


def test_esd_psd_clamps_roundoff():
    m = np.eye(3)
    m[0, 0] = -1e-14
    e = esd(m, psd=True)
    assert e.eigenvalues[0] == 0.0
    with pytest.raises(InvalidInputError):
        esd(np.diag([-1.0, 1.0, 1.0]), psd=True)


def test_esd_of_sample_covariance_is_nonnegative():
    x = sample_data_matrix(IIDGaussian(), 30, 20, derive_rng(0))
    e = esd(sample_covariance(x), psd=True)
    assert np.all(e.eigenvalues >= 0)
    # p > n: rank deficiency forces at least p - n (near-)zero eigenvalues.
    assert np.count_nonzero(e.eigenvalues < 1e-12) >= 10


# ---------------------------------------------------------------------------
# ks distance


def test_ks_distance_point_mass_vs_law():
    law = MPLaw(0.5)
    # All eigenvalues at one interior point t: sup gap is max(F(t), 1 - F(t)).
    t = 1.0
    e = ESD(eigenvalues=np.full(7, t))
    expected = max(law.cdf(t), 1.0 - law.cdf(t))
    assert ks_distance(e, law) == pytest.approx(expected, abs=1e-12)


def test_ks_distance_two_atoms_hand_value():
    law = MPLaw(0.5)
    e = ESD(eigenvalues=np.array([0.5, 2.0]))
    f1, f2 = law.cdf(0.5), law.cdf(2.0)
    expected = max(abs(0.5 - f1), f1, abs(f2 - 0.5), 1.0 - f2)
    assert ks_distance(e, law) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("rho", [0.25, 0.5, 1.0, 2.0])
def test_ks_distance_of_quantile_spectrum_is_half_over_p(rho):
    law = MPLaw(rho)
    p = 40
    lam = law_quantiles(law, p)
    if law.atom0 > 0:
        # Replace the below-atom quantile points with exact zeros, as a
        # rank-deficient sample covariance would have.
        n_zero = int(round(law.atom0 * p))
        lam = np.sort(np.concatenate([np.zeros(n_zero), lam[n_zero:]]))
    d = ks_distance(ESD(eigenvalues=lam), law)
    assert d == pytest.approx(1.0 / (2 * p), abs=1e-6)


def test_ks_distance_empty_rejected():
    with pytest.raises(DomainError):
        ks_distance(ESD(eigenvalues=np.array([])), MPLaw(0.5))


def test_ks_distance_shrinks_with_dimension():
    law = MPLaw(0.5)
    dists = []
    for p in (64, 256):
        x = sample_data_matrix(IIDGaussian(), p, 2 * p, derive_rng(11, p))
        dists.append(ks_distance(esd(sample_covariance(x), psd=True), law))
    assert dists[1] < dists[0]
    assert dists[1] < 0.06


# ---------------------------------------------------------------------------
# empirical stieltjes transform


def test_empirical_stieltjes_matches_direct_sum():
    lam = np.array([0.5, 1.0, 2.5])
    z = 0.3 + 0.7j
    expected = np.mean(1.0 / (lam - z))
    got = empirical_stieltjes(ESD(eigenvalues=lam), z)
    assert got == pytest.approx(expected, abs=1e-15)
    assert got.imag > 0


def test_empirical_stieltjes_requires_upper_half():
    with pytest.raises(DomainError):
        empirical_stieltjes(ESD(eigenvalues=np.ones(3)), 1.0 - 0.1j)


def test_empirical_stieltjes_near_law_for_large_p():
    law = MPLaw(0.5)
    p = 512
    x = sample_data_matrix(IIDGaussian(), p, 2 * p, derive_rng(12))
    e = esd(sample_covariance(x), psd=True)
    z = 1.0 + 1.0j
    assert abs(empirical_stieltjes(e, z) - law.stieltjes(z)) < 0.02


# ---------------------------------------------------------------------------
# projections


def test_projected_covariance_coordinate_block():
    m = np.arange(16, dtype=np.float64).reshape(4, 4)
    m = (m + m.T) / 2
    c = coordinate_frame(2, 4)
    assert np.array_equal(projected_covariance(c, m), m[:2, :2])


def test_projected_covariance_haar_preserves_trace_on_average():
    rng = derive_rng(13)
    p, q, reps = 24, 6, 4000
    m = np.diag(np.linspace(0.5, 2.0, p))
    acc = 0.0
    for _ in range(reps):
        c = haar_frame(q, p, rng)
        acc += np.trace(projected_covariance(c, m))
    # E tr(C M C^T) = (q/p) tr M for a Haar frame.
    expected = q / p * np.trace(m)
    assert abs(acc / reps - expected) < 0.05 * expected


def test_projected_covariance_dimension_mismatch():
    with pytest.raises(DomainError):
        projected_covariance(coordinate_frame(2, 5), np.eye(4))


# ---------------------------------------------------------------------------
# csv round trip


def test_esd_csv_round_trip(tmp_path):
    vals = np.sort(derive_rng(14).uniform(0, 3, size=17))
    path = tmp_path / "esd.csv"
    write_esd_csv(path, ESD(eigenvalues=vals))
    back = read_esd_csv(path)
    assert np.array_equal(back.eigenvalues, vals)


def test_esd_csv_rejects_unsorted(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("eigenvalue\n2.0\n1.0\n")
    with pytest.raises(InvalidInputError):
        read_esd_csv(path)


def test_esd_csv_rejects_wrong_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("lambda\n1.0\n")
    with pytest.raises(InvalidInputError):
        read_esd_csv(path)
