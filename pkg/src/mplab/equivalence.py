"""Gaussian-swap experiments on resolvent traces.

The central object is the gap

    Delta = (1/p) [ tr(Xh Xh^T / n + B - z I)^{-1}
                    - tr(Zh Zh^T / n + B - z I)^{-1} ],

where Xh = X + C for a data matrix X drawn from a model, Zh = Z + C for an
independent Gaussian matrix Z whose columns carry the model's population
covariance, B is a fixed symmetric offset and C a fixed column offset.  When
the model's quadratic forms concentrate and its covariance spread vanishes,
Delta tends to zero as p grows; models violating those conditions keep a
visible gap.  Whatever the model, |Delta| <= 2 / im(z) deterministically.

A heterogeneous variant assigns each column its own covariance and reports
the averaged covariance-spread statistic (1/(n p^2)) sum_k tr(Sigma_k^2)
alongside the gap, since that quantity controls whether the swap is valid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matcore
from .conditions import RandomPSDFamily, draw_family_matrix
from .ensembles import (
    BandToeplitz,
    CovSpec,
    GaussianCov,
    Identity,
    ParseError,
    VectorModel,
    WeakDependent,
    covariance_matrix,
    derive_rng,
    sample_data_matrix,
    cov_sqrt,
    sample_vector,
)
from .matcore import DomainError, InvalidInputError


# ---------------------------------------------------------------------------
# offsets


@dataclass(frozen=True)
class ScaledIdentity:
    """B = beta I."""

    beta: float


@dataclass(frozen=True)
class RandomPSDUnitNorm:
    """A fixed unit-norm PSD offset, generated deterministically from a seed."""

    seed: int


BSpec = None | ScaledIdentity | RandomPSDUnitNorm


@dataclass(frozen=True)
class ConstantColumns:
    """Every column of C equals gamma * ones(p) / sqrt(p), so ||C C^T / n|| = gamma^2."""

    gamma: float


CSpec = None | ConstantColumns


@dataclass(frozen=True)
class SwapConfig:
    """Configuration of one Gaussian-swap comparison."""

    model: VectorModel
    p: int
    n: int
    z: complex
    b_spec: BSpec = None
    c_spec: CSpec = None
    hetero: tuple[CovSpec, ...] | None = None

    def __post_init__(self):
        if self.p < 1 or self.n < 1:
            raise DomainError(f"need positive dimensions, got p={self.p}, n={self.n}")
        matcore.require_upper_half(self.z)
        if self.hetero is not None and len(self.hetero) != self.n:
            raise DomainError(
                f"per-column covariance list has length {len(self.hetero)}, need n={self.n}"
            )


@dataclass(frozen=True)
class HeteroGapResult:
    """Gap plus the averaged covariance-spread statistic of the column list."""

    delta: complex
    avg_spread: float


def paired_gaussian(model: VectorModel, p: int) -> GaussianCov:
    """The Gaussian model with the same population covariance.

    Isotropic models pair with the standard Gaussian; a Gaussian model pairs
    with itself; the moving average pairs with the banded-Toeplitz Gaussian
    built from its autocovariances.
    """
    if p < 1:
        raise DomainError(f"dimension must be positive, got {p}")
    if isinstance(model, GaussianCov):
        return model
    if isinstance(model, WeakDependent):
        return GaussianCov(BandToeplitz(model.autocovariances()))
    if getattr(model, "isotropic", False):
        return GaussianCov(Identity())
    raise InvalidInputError(f"no Gaussian twin known for {model!r}")


def offset_matrix(b_spec: BSpec, p: int) -> np.ndarray | None:
    if b_spec is None:
        return None
    if isinstance(b_spec, ScaledIdentity):
        return b_spec.beta * np.eye(p)
    if isinstance(b_spec, RandomPSDUnitNorm):
        return draw_family_matrix(RandomPSDFamily(), p, derive_rng(b_spec.seed, 0))
    raise InvalidInputError(f"unknown offset spec {b_spec!r}")


def column_offset(c_spec: CSpec, p: int, n: int) -> np.ndarray | None:
    if c_spec is None:
        return None
    if isinstance(c_spec, ConstantColumns):
        col = c_spec.gamma * np.ones(p) / np.sqrt(float(p))
        return np.tile(col[:, None], (1, n))
    raise InvalidInputError(f"unknown column-offset spec {c_spec!r}")


def parse_offset_spec(text: str) -> BSpec:
    """Grammar for additive offsets: ``id:<beta>`` or ``psd:<seed>``."""
    head, _, rest = text.strip().partition(":")
    try:
        if head == "id":
            return ScaledIdentity(float(rest))
        if head == "psd":
            return RandomPSDUnitNorm(int(rest))
    except ValueError as exc:
        raise ParseError(f"bad offset parameter in {text!r}: {exc}") from None
    raise ParseError(f"unknown offset spec {text!r}")


def offset_spec_string(spec: BSpec) -> str:
    if isinstance(spec, ScaledIdentity):
        return f"id:{spec.beta!r}"
    if isinstance(spec, RandomPSDUnitNorm):
        return f"psd:{spec.seed}"
    raise InvalidInputError(f"unknown offset spec {spec!r}")


def parse_column_spec(text: str) -> CSpec:
    """Grammar for column offsets: ``const:<gamma>``."""
    head, _, rest = text.strip().partition(":")
    if head == "const":
        try:
            return ConstantColumns(float(rest))
        except ValueError as exc:
            raise ParseError(f"bad column-offset parameter in {text!r}: {exc}") from None
    raise ParseError(f"unknown column-offset spec {text!r}")


def column_spec_string(spec: CSpec) -> str:
    if isinstance(spec, ConstantColumns):
        return f"const:{spec.gamma!r}"
    raise InvalidInputError(f"unknown column-offset spec {spec!r}")


def _gap_from_matrices(x: np.ndarray, zmat: np.ndarray, cfg: SwapConfig) -> complex:
    z = complex(cfg.z)
    b = offset_matrix(cfg.b_spec, cfg.p)
    c = column_offset(cfg.c_spec, cfg.p, cfg.n)
    traces = []
    for data in (x, zmat):
        shifted = data if c is None else data + c
        s = shifted @ shifted.T / cfg.n
        if b is not None:
            s = s + b
        spec = matcore.eigh(matcore.as_symmetric(s), want_vectors=False)
        traces.append(matcore.resolvent_trace(spec, z))
    return traces[0] - traces[1]


def resolvent_gap(cfg: SwapConfig, rng: np.random.Generator) -> complex:
    """One draw of the swap gap Delta for a homogeneous column model.

    X is drawn from cfg.model and Z from its Gaussian twin, sequentially from
    the given stream; |Delta| <= 2 / im(z) always holds.
    """
    if cfg.hetero is not None:
        raise DomainError("config carries per-column covariances; use resolvent_gap_hetero")
    x = sample_data_matrix(cfg.model, cfg.p, cfg.n, rng)
    twin = paired_gaussian(cfg.model, cfg.p)
    zmat = sample_data_matrix(twin, cfg.p, cfg.n, rng)
    return _gap_from_matrices(x, zmat, cfg)


def resolvent_gap_hetero(cfg: SwapConfig, rng: np.random.Generator) -> HeteroGapResult:
    """Swap gap with one covariance spec per column.

    Column k of X is Sigma_k^{1/2} u_k for an isotropic base draw u_k of
    cfg.model; column k of Z is Sigma_k^{1/2} g_k for standard Gaussian g_k.
    Both sides then share the per-column population covariances exactly.
    With all columns Identity this consumes the stream exactly like
    ``resolvent_gap`` on the same config.
    """
    if cfg.hetero is None:
        raise DomainError("config has no per-column covariances; use resolvent_gap")
    if not getattr(cfg.model, "isotropic", False):
        raise DomainError("per-column covariances require an isotropic base model")
    x = np.empty((cfg.p, cfg.n))
    for k in range(cfg.n):
        x[:, k] = sample_vector(cfg.model, cfg.p, rng)
    zmat = rng_standard_matrix(cfg.p, cfg.n, rng)
    for k, spec in enumerate(cfg.hetero):
        root = cov_sqrt(spec, cfg.p)
        if root is None:
            continue
        if root.ndim == 1:
            x[:, k] *= root
            zmat[:, k] *= root
        else:
            x[:, k] = root @ x[:, k]
            zmat[:, k] = root @ zmat[:, k]
    delta = _gap_from_matrices(x, zmat, cfg)
    spread = sum(_cov_square_trace(spec, cfg.p) for spec in cfg.hetero)
    avg_spread = spread / (cfg.n * cfg.p * cfg.p)
    return HeteroGapResult(delta=delta, avg_spread=avg_spread)


_SQ_TRACE_CACHE: dict[tuple[CovSpec, int], float] = {}


def _cov_square_trace(spec: CovSpec, p: int) -> float:
    key = (spec, p)
    if key not in _SQ_TRACE_CACHE:
        sig = covariance_matrix(spec, p)
        _SQ_TRACE_CACHE[key] = float(np.sum(sig * sig))
    return _SQ_TRACE_CACHE[key]


def rng_standard_matrix(p: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Column-by-column standard normal draws, matching the data-matrix order."""
    out = np.empty((p, n))
    for k in range(n):
        out[:, k] = rng.standard_normal(p)
    return out
