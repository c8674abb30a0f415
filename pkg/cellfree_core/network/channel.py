"""Large-scale gains (three-slope path loss, correlated log-normal shadowing)
and block Rayleigh fading."""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Union

import numpy as np
from scipy.linalg import LinAlgError, cholesky

from .deployment import NetworkGeometry, pairwise_wrap_distance

logger = logging.getLogger(__name__)

JITTER_START = 1e-10
JITTER_MAX = 1e-6


@dataclass(frozen=True)
class LargeScaleParams:
    """Path loss and shadowing parameters. Defaults are conventions of the
    usual cell-free model family, not measured values."""

    carrier_freq_mhz: float = 1900.0
    ap_height_m: float = 15.0
    ms_height_m: float = 1.65
    d0_m: float = 10.0
    d1_m: float = 50.0
    shadow_sigma_db: float = 8.0
    shadow_delta: float = 0.5
    decorr_dist_m: float = 100.0

    def __post_init__(self) -> None:
        if not 0 < self.d0_m < self.d1_m:
            raise ValueError(f"Require 0 < d0_m < d1_m, got {self.d0_m}, {self.d1_m}")
        if self.shadow_sigma_db < 0:
            raise ValueError("shadow_sigma_db must be non-negative")
        if not 0.0 <= self.shadow_delta <= 1.0:
            raise ValueError("shadow_delta must be in [0, 1]")
        if self.decorr_dist_m <= 0:
            raise ValueError("decorr_dist_m must be positive")
        if self.carrier_freq_mhz <= 0 or self.ap_height_m <= 0 or self.ms_height_m <= 0:
            raise ValueError("carrier frequency and antenna heights must be positive")

    @classmethod
    def from_dict(cls, config: Dict[str, Any]) -> "LargeScaleParams":
        """Pick the large-scale keys out of a flat configuration mapping"""
        defaults = cls()
        return cls(
            **{
                name: float(config.get(name, getattr(defaults, name)))
                for name in cls.__dataclass_fields__
            }
        )

    @property
    def hata_constant_db(self) -> float:
        """Hata-COST231 constant L (dB)."""
        f = np.log10(self.carrier_freq_mhz)
        return float(
            46.3
            + 33.9 * f
            - 13.82 * np.log10(self.ap_height_m)
            - (1.1 * f - 0.7) * self.ms_height_m
            + (1.56 * f - 0.8)
        )


@dataclass(frozen=True)
class LargeScaleState:
    """zeta (path loss), chi (shadowing) and beta = zeta * chi, all linear."""

    zeta: np.ndarray
    chi: np.ndarray

    def __post_init__(self) -> None:
        if self.zeta.shape != self.chi.shape:
            raise ValueError("zeta and chi must have the same shape")
        if np.any(self.zeta <= 0) or np.any(self.chi <= 0):
            raise ValueError("large-scale gains must be strictly positive")

    @property
    def beta(self) -> np.ndarray:
        return self.zeta * self.chi

    @property
    def beta_db(self) -> np.ndarray:
        return 10.0 * np.log10(self.beta)


@dataclass(frozen=True)
class ChannelRealization:
    """Small-scale coefficients h and the composite channel g = sqrt(beta) h."""

    h: np.ndarray
    g: np.ndarray

    @classmethod
    def from_small_scale(cls, beta: np.ndarray, h: np.ndarray) -> "ChannelRealization":
        h = np.asarray(h, dtype=complex)
        return cls(h=h, g=np.sqrt(beta) * h)


def path_loss_db(distance_m: np.ndarray, params: LargeScaleParams) -> np.ndarray:
    """Three-slope path loss in dB (negative numbers)."""
    d_km = np.asarray(distance_m, dtype=float) / 1000.0
    d0_km = params.d0_m / 1000.0
    d1_km = params.d1_m / 1000.0
    loss = params.hata_constant_db

    far = -loss - 35.0 * np.log10(np.maximum(d_km, d1_km))
    mid = -loss - 15.0 * np.log10(d1_km) - 20.0 * np.log10(np.maximum(d_km, d0_km))
    near = -loss - 15.0 * np.log10(d1_km) - 20.0 * np.log10(d0_km)
    return np.where(d_km > d1_km, far, np.where(d_km > d0_km, mid, near))


def compute_path_loss(geometry: NetworkGeometry, params: LargeScaleParams) -> np.ndarray:
    """M x K linear path-loss gains zeta."""
    return 10.0 ** (path_loss_db(geometry.ap_ms_distances(), params) / 10.0)


def _correlated_field(
    positions: np.ndarray,
    side_length_m: float,
    decorr_dist_m: float,
    rng: np.random.Generator,
) -> np.ndarray:
    distance = pairwise_wrap_distance(positions, positions, side_length_m)
    covariance = 2.0 ** (-distance / decorr_dist_m)

    jitter = 0.0
    while True:
        try:
            factor = cholesky(
                covariance + jitter * np.eye(len(positions)), lower=True
            )
            break
        except LinAlgError:
            jitter = JITTER_START if jitter == 0.0 else jitter * 10.0
            if jitter > JITTER_MAX:
                raise
            logger.warning(f"Shadowing covariance not PSD, adding jitter {jitter:g}")
    return factor @ rng.standard_normal(len(positions))


def generate_shadowing(
    geometry: NetworkGeometry, params: LargeScaleParams, seed: int
) -> np.ndarray:
    """M x K log-normal shadowing gains chi with AP-side and MS-side correlation.

    chi_mk = 10^((sqrt(delta) a_m + sqrt(1 - delta) b_k) sigma / 10), where a
    and b are unit-variance Gaussian fields with covariance 2^(-d / d_decorr).
    """
    rng = np.random.default_rng(seed)
    a = _correlated_field(
        geometry.ap_positions, geometry.side_length_m, params.decorr_dist_m, rng
    )
    b = _correlated_field(
        geometry.ms_positions, geometry.side_length_m, params.decorr_dist_m, rng
    )
    z = np.sqrt(params.shadow_delta) * a[:, np.newaxis] + np.sqrt(
        1.0 - params.shadow_delta
    ) * b[np.newaxis, :]
    return 10.0 ** (z * params.shadow_sigma_db / 10.0)


def compute_large_scale(
    geometry: NetworkGeometry, params: LargeScaleParams, seed: int
) -> LargeScaleState:
    """Path loss plus shadowing for one throw."""
    return LargeScaleState(
        zeta=compute_path_loss(geometry, params),
        chi=generate_shadowing(geometry, params, seed),
    )


def draw_small_scale(rng: np.random.Generator, shape) -> np.ndarray:
    """i.i.d. CN(0, 1) samples."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def realize_channel(
    beta: Union[LargeScaleState, np.ndarray], seed: Union[int, np.random.Generator]
) -> ChannelRealization:
    """One coherence block of g = sqrt(beta) h with h ~ CN(0, 1)."""
    if isinstance(beta, LargeScaleState):
        beta = beta.beta
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return ChannelRealization.from_small_scale(beta, draw_small_scale(rng, beta.shape))
