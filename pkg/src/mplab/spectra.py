"""Empirical spectral distributions and their comparison with the limit law.

A data matrix X (p rows, n columns) is summarized by the normalized sample
covariance S = X X^T / n; its sorted eigenvalue list is the empirical
spectral distribution (ESD).  This module computes ESDs, the Kolmogorov
sup-distance between an ESD and a limit law, empirical Cauchy-Stieltjes
transforms, and compressions C S C^T along row-orthonormal frames.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import matcore
from .matcore import DomainError, InvalidInputError
from .mp_law import MPLaw


@dataclass(frozen=True, eq=False)
class ESD:
    """Empirical spectral distribution: eigenvalues in ascending order."""

    eigenvalues: np.ndarray

    @property
    def p(self) -> int:
        return self.eigenvalues.size


def sample_covariance(x) -> np.ndarray:
    """Normalized second-moment matrix X X^T / n of a p-by-n data matrix."""
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 2:
        raise InvalidInputError(f"data matrix must be 2-d, got shape {a.shape}")
    if a.shape[1] < 1:
        raise DomainError("need at least one column")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("data matrix has non-finite entries")
    s = a @ a.T / a.shape[1]
    # BLAS output is only symmetric up to rounding; make it exact.
    return matcore.as_symmetric(s)


def esd(m, psd: bool = False) -> ESD:
    """Eigenvalue distribution of a symmetric matrix.

    With ``psd=True`` tiny negative eigenvalues (roundoff from a Gram-type
    construction) are clamped to zero; genuine negativity raises.
    """
    spec = matcore.eigh(m, want_vectors=False)
    vals = spec.eigenvalues
    if psd:
        vals = matcore.clamp_psd_eigenvalues(vals)
    return ESD(eigenvalues=vals)


def ks_distance(e: ESD, law: MPLaw) -> float:
    """Kolmogorov sup-distance between the ESD and the law's distribution.

    Compares the law's cdf against the empirical cdf from both sides at every
    eigenvalue.  Tied eigenvalues are handled via their block boundaries, and
    the lower comparison uses the law's left limit, which differs from the cdf
    only at the origin (the law's sole possible atom).  With both corrections
    the maximum over sample points is the exact supremum over the whole line,
    since both cdfs are flat between eigenvalues.
    """
    lam = e.eigenvalues
    p = lam.size
    if p == 0:
        raise DomainError("empty spectrum")
    fvals = np.array([law.cdf(x) for x in lam])
    fleft = np.where(lam == 0.0, fvals - law.atom0, fvals)
    below = np.searchsorted(lam, lam, side="left").astype(np.float64)
    at_or_below = np.searchsorted(lam, lam, side="right").astype(np.float64)
    upper = np.abs(at_or_below / p - fvals)
    lower = np.abs(below / p - fleft)
    return float(max(np.max(upper), np.max(lower)))


def empirical_stieltjes(e: ESD, z: complex) -> complex:
    """Empirical transform (1/p) sum_k 1 / (lambda_k - z), im(z) > 0."""
    z = matcore.require_upper_half(z)
    return complex(np.mean(1.0 / (e.eigenvalues - z)))


def projected_covariance(frame, m) -> np.ndarray:
    """Compression C m C^T of a symmetric matrix along a row-orthonormal frame."""
    c = matcore.as_frame(frame)
    a = matcore.as_symmetric(m)
    if c.shape[1] != a.shape[0]:
        raise DomainError(f"frame width {c.shape[1]} != matrix dimension {a.shape[0]}")
    return matcore.as_symmetric(c @ a @ c.T)


def write_esd_csv(path, e: ESD) -> None:
    """Serialize an ESD as a one-column CSV of ascending eigenvalues."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["eigenvalue"])
        for v in e.eigenvalues:
            writer.writerow([f"{float(v):.17g}"])


def read_esd_csv(path) -> ESD:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["eigenvalue"]:
            raise InvalidInputError(f"unexpected ESD header {header!r}")
        vals = np.array([float(row[0]) for row in reader])
    if np.any(np.diff(vals) < 0):
        raise InvalidInputError("ESD file is not sorted ascending")
    return ESD(eigenvalues=vals)
