"""Concentration diagnostics for random-vector models.

The spectral behavior of sample covariances is governed by a handful of
scalar statistics of the column distribution.  This module estimates them by
Monte Carlo:

* the truncated-second-moment (small-tail) statistic
  (1/p) sum_k E X_k^2 1{|X_k| > eps sqrt(p)}, whose vanishing is the
  iid-entry dividing line;
* centered quadratic forms (x^T A x - tr(Sigma A)) / p over families of test
  matrices with a uniform operator-norm bound;
* the covariance-spread statistic tr(Sigma^2) / p^2 and the Chebyshev-type
  exceedance bound 2 ||A||^2 tr(Sigma^2) / (eps p)^2 it implies for Gaussian
  columns;
* the squared-norm drift (x^T x - p) / p for isotropic models;
* single trials of the projected-spectrum experiment: compress a sample
  covariance along a frame and measure the Kolmogorov distance to the limit
  law of the compressed aspect ratio.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matcore, spectra
from .ensembles import (
    GaussianCov,
    ParseError,
    VectorModel,
    covariance_matrix,
    model_spec_string,
    population_covariance,
    sample_data_matrix,
    sample_vector,
)
from .matcore import DomainError, InvalidInputError
from .mp_law import MPLaw


@dataclass(frozen=True)
class MonteCarloEstimate:
    """A Monte Carlo mean with its standard error."""

    value: float
    se: float
    trials: int


@dataclass(frozen=True)
class QuadformStat:
    """One centered quadratic-form observation and its context."""

    value: float
    p: int
    model: str
    family: str


@dataclass(frozen=True)
class ChebyshevCheck:
    """Observed exceedance frequency against its a-priori bound."""

    observed: float
    bound: float
    se: float
    trials: int


# ---------------------------------------------------------------------------
# test-matrix families


@dataclass(frozen=True)
class IdentityFamily:
    """A = I_p (deterministic)."""


@dataclass(frozen=True)
class HaarProjectorFamily:
    """Orthogonal projector onto a uniformly random q-dimensional subspace."""

    q: int


@dataclass(frozen=True)
class FixedHalfProjectorFamily:
    """Deterministic projector onto the first floor(p/2) coordinates."""


@dataclass(frozen=True)
class RandomPSDFamily:
    """Wishart-type PSD matrix rescaled to unit operator norm."""


@dataclass(frozen=True)
class SquaredResolventFamily:
    """Real part of (C - z I)^{-2} for a random PSD C; norm bound 1/im(z)^2."""

    z: complex

    def __post_init__(self):
        matcore.require_upper_half(self.z)


MatrixFamily = (
    IdentityFamily
    | HaarProjectorFamily
    | FixedHalfProjectorFamily
    | RandomPSDFamily
    | SquaredResolventFamily
)


def family_is_random(family: MatrixFamily) -> bool:
    return isinstance(family, (HaarProjectorFamily, RandomPSDFamily, SquaredResolventFamily))


def family_norm_bound(family: MatrixFamily) -> float:
    """Uniform operator-norm bound every draw of the family satisfies."""
    if isinstance(family, SquaredResolventFamily):
        return 1.0 / complex(family.z).imag ** 2
    return 1.0


def draw_family_matrix(family: MatrixFamily, p: int, rng: np.random.Generator) -> np.ndarray:
    """One dense symmetric draw of the family in dimension p."""
    if isinstance(family, IdentityFamily):
        return np.eye(p)
    if isinstance(family, FixedHalfProjectorFamily):
        d = np.zeros(p)
        d[: p // 2] = 1.0
        return np.diag(d)
    if isinstance(family, HaarProjectorFamily):
        if not (1 <= family.q <= p):
            raise DomainError(f"projector rank {family.q} out of range for p={p}")
        c = matcore.haar_frame(family.q, p, rng)
        return matcore.as_symmetric(c.T @ c)
    if isinstance(family, RandomPSDFamily):
        g = rng.standard_normal((p, p))
        w = matcore.as_symmetric(g @ g.T)
        return w / matcore.spectral_norm(w)
    if isinstance(family, SquaredResolventFamily):
        g = rng.standard_normal((p, p))
        base = matcore.eigh(g @ g.T / p)
        z = complex(family.z)
        diag = np.real(1.0 / (base.eigenvalues - z) ** 2)
        return matcore.as_symmetric((base.eigenvectors * diag) @ base.eigenvectors.T)
    raise InvalidInputError(f"unknown matrix family {family!r}")


def family_spec_string(family: MatrixFamily) -> str:
    if isinstance(family, IdentityFamily):
        return "identity"
    if isinstance(family, HaarProjectorFamily):
        return f"haar-proj:{family.q}"
    if isinstance(family, FixedHalfProjectorFamily):
        return "fixed-half"
    if isinstance(family, RandomPSDFamily):
        return "random-psd"
    if isinstance(family, SquaredResolventFamily):
        z = complex(family.z)
        return f"sq-resolvent:{z.real:g},{z.imag:g}"
    raise InvalidInputError(f"unknown matrix family {family!r}")


def parse_family_spec(text: str):
    """Parse 'identity' | 'haar-proj:q' | 'fixed-half' | 'random-psd' | 'sq-resolvent:re,im'."""
    head, _, rest = text.strip().partition(":")
    try:
        if head == "identity" and not rest:
            return IdentityFamily()
        if head == "fixed-half" and not rest:
            return FixedHalfProjectorFamily()
        if head == "random-psd" and not rest:
            return RandomPSDFamily()
        if head == "haar-proj":
            return HaarProjectorFamily(int(rest))
        if head == "sq-resolvent":
            re_s, im_s = rest.split(",")
            return SquaredResolventFamily(complex(float(re_s), float(im_s)))
    except (ValueError, DomainError) as exc:
        raise ParseError(f"bad matrix-family arguments {rest!r}") from exc
    raise ParseError(f"unknown matrix family {head!r}")


# ---------------------------------------------------------------------------
# scalar statistics


def lindeberg_stat(
    model: VectorModel, p: int, eps: float, trials: int, rng: np.random.Generator
) -> MonteCarloEstimate:
    """Monte Carlo estimate of (1/p) sum_k E X_k^2 1{|X_k| > eps sqrt(p)}."""
    _check_positive(eps, "eps")
    _check_trials(trials)
    cut = eps * np.sqrt(float(p))
    vals = np.empty(trials)
    for t in range(trials):
        x = sample_vector(model, p, rng)
        x2 = x * x
        vals[t] = float(np.sum(x2[np.abs(x) > cut])) / p
    return _mc(vals)


def quadform_stat(model: VectorModel, a, rng: np.random.Generator) -> QuadformStat:
    """One draw of the centered quadratic form (x^T A x - tr(Sigma A)) / p."""
    a = matcore.as_symmetric(a)
    p = a.shape[0]
    sigma = population_covariance(model, p)
    centering = float(np.tensordot(sigma, a))
    x = sample_vector(model, p, rng)
    value = (float(x @ a @ x) - centering) / p
    return QuadformStat(value=value, p=p, model=model_spec_string(model), family="explicit")


def concentration_probe(
    model: VectorModel,
    family: MatrixFamily,
    p: int,
    eps: float,
    trials: int,
    rng: np.random.Generator,
) -> MonteCarloEstimate:
    """Exceedance frequency P(|x^T A x - tr(Sigma A)| / p > eps) over the family.

    Deterministic families are drawn once; random families are redrawn every
    trial (matrix first, then the vector, from the same stream).
    """
    _check_positive(eps, "eps")
    _check_trials(trials)
    sigma = None if getattr(model, "isotropic", False) else population_covariance(model, p)
    redraw = family_is_random(family)
    a = None if redraw else draw_family_matrix(family, p, rng)
    hits = np.empty(trials)
    for t in range(trials):
        if redraw:
            a = draw_family_matrix(family, p, rng)
        x = sample_vector(model, p, rng)
        centering = float(np.trace(a)) if sigma is None else float(np.tensordot(sigma, a))
        value = (float(x @ (a @ x)) - centering) / p
        hits[t] = 1.0 if abs(value) > eps else 0.0
    return _mc(hits)


def cov_spread_stat(sigma) -> float:
    """Covariance-spread statistic tr(Sigma^2) / p^2."""
    s = matcore.as_symmetric(sigma)
    p = s.shape[0]
    return float(np.sum(s * s)) / (p * p)


def chebyshev_bound_check(
    cov, a, p: int, eps: float, trials: int, rng: np.random.Generator
) -> ChebyshevCheck:
    """Compare Gaussian quadratic-form exceedance with its variance bound.

    For x Gaussian with covariance Sigma and symmetric A,
    Var(x^T A x) <= 2 ||A||^2 tr(Sigma^2), so
    P(|x^T A x - tr(Sigma A)| > eps p) <= 2 ||A||^2 tr(Sigma^2) / (eps p)^2.
    """
    _check_positive(eps, "eps")
    _check_trials(trials)
    model = GaussianCov(cov)
    a = matcore.as_symmetric(a)
    if a.shape[0] != p:
        raise DomainError(f"test matrix dimension {a.shape[0]} != p={p}")
    sigma = covariance_matrix(cov, p)
    norm_a = matcore.spectral_norm(a)
    bound = 2.0 * norm_a**2 * float(np.sum(sigma * sigma)) / (eps * p) ** 2
    centering = float(np.tensordot(sigma, a))
    hits = np.empty(trials)
    for t in range(trials):
        x = sample_vector(model, p, rng)
        value = float(x @ (a @ x)) - centering
        hits[t] = 1.0 if abs(value) > eps * p else 0.0
    est = _mc(hits)
    return ChebyshevCheck(observed=est.value, bound=min(bound, 1e300), se=est.se, trials=trials)


def norm_drift_stat(model: VectorModel, p: int, rng: np.random.Generator) -> float:
    """Squared-norm drift (x^T x - p) / p; defined for isotropic models."""
    if not getattr(model, "isotropic", False):
        raise DomainError("squared-norm drift is defined for isotropic models only")
    x = sample_vector(model, p, rng)
    return (float(x @ x) - p) / p


def mp_property_trial(
    model: VectorModel,
    p: int,
    n: int,
    q: int,
    rng: np.random.Generator,
    frame_mode: str = "haar",
) -> float:
    """One projected-spectrum trial: KS distance of the compressed ESD.

    Draws a p-by-n data matrix, compresses its sample covariance along a
    q-by-p frame (Haar-random or the fixed first-q-coordinates frame), and
    returns the Kolmogorov distance to the limit law with ratio q/n.
    """
    if not (1 <= q <= p):
        raise DomainError(f"need 1 <= q <= p, got q={q}, p={p}")
    if frame_mode == "haar":
        frame = matcore.haar_frame(q, p, rng)
    elif frame_mode == "fixed-half":
        frame = matcore.coordinate_frame(q, p)
    else:
        raise DomainError(f"unknown frame mode {frame_mode!r}")
    x = sample_data_matrix(model, p, n, rng)
    s = spectra.sample_covariance(x)
    compressed = spectra.projected_covariance(frame, s)
    e = spectra.esd(compressed, psd=True)
    return spectra.ks_distance(e, MPLaw(q / n))


# ---------------------------------------------------------------------------
# helpers


def _mc(vals: np.ndarray) -> MonteCarloEstimate:
    n = vals.size
    mean = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / np.sqrt(n)) if n > 1 else float("inf")
    return MonteCarloEstimate(value=mean, se=se, trials=n)


def _check_positive(v: float, name: str) -> None:
    if not (v > 0 and np.isfinite(v)):
        raise DomainError(f"{name} must be positive and finite, got {v}")


def _check_trials(trials: int) -> None:
    if not isinstance(trials, (int, np.integer)) or isinstance(trials, bool) or trials < 1:
        raise DomainError(f"trials must be a positive integer, got {trials!r}")
