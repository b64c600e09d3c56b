"""Multi-access stage: block-fading channels, AWGN reception and pilot-based estimation.

SNR convention: the per-AP SNR is the average received power of the strongest
MT at that AP over the noise variance, ``E|h s|^2 / sigma^2`` with unit-energy
symbols. With a 3 dB path-loss offset the weaker MT arrives 3 dB below that.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation


@dataclass(frozen=True)
class NoiseModel:
    sigma2: float

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ContractViolation(f"noise variance must be positive, got {self.sigma2}")


@dataclass(frozen=True)
class ChannelRealization:
    h: np.ndarray = field(repr=False)  # (n_aps, n_mts)
    path_loss_db: np.ndarray = field(repr=False)
    block_len: int = 100

    @property
    def n_aps(self) -> int:
        return self.h.shape[0]


def complex_normal(rng: np.random.Generator, shape, variance: float | np.ndarray = 1.0) -> np.ndarray:
    scale = np.sqrt(np.asarray(variance) / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def draw_channel(
    rng: np.random.Generator, path_loss_db, n_aps: int, n_mts: int, block_len: int = 100
) -> ChannelRealization:
    pl = np.asarray(path_loss_db, dtype=float)
    if pl.shape != (n_aps, n_mts):
        raise ContractViolation(f"path loss table has shape {pl.shape}, expected {(n_aps, n_mts)}")
    gain = 10.0 ** (-pl / 10.0)
    return ChannelRealization(complex_normal(rng, (n_aps, n_mts), gain), pl, block_len)


def sigma2_for_snr(snr_db: float, path_loss_db=0.0) -> float:
    """Noise variance that puts the strongest MT at ``snr_db``."""
    strongest = 10.0 ** (-np.min(np.asarray(path_loss_db, dtype=float)) / 10.0)
    return float(strongest / 10.0 ** (snr_db / 10.0))


def transmit(symbols, h_row, noise: NoiseModel | None, rng: np.random.Generator | None) -> np.ndarray:
    """``r = sum_i h_i s_i + z`` for every sample; ``symbols`` is (samples, MTs)."""
    s = np.atleast_2d(np.asarray(symbols, dtype=complex))
    h_row = np.asarray(h_row, dtype=complex).ravel()
    if s.shape[1] != h_row.size:
        raise ContractViolation(f"{s.shape[1]} symbol streams for {h_row.size} channel taps")
    r = s @ h_row
    if noise is not None:
        if rng is None:
            raise ContractViolation("noisy transmission needs an rng")
        r = r + complex_normal(rng, r.shape, noise.sigma2)
    return r


def estimate_channel(pilot_len: int, h_true, noise: NoiseModel | None, rng: np.random.Generator | None) -> np.ndarray:
    """Least-squares estimate from time-orthogonal unit pilots.

    Each MT sends ``pilot_len`` pilots of value 1 in its own slot, so every
    coefficient is estimated independently with error variance
    ``sigma^2 / pilot_len``. Works for a single channel row or a full matrix.
    """
    if pilot_len < 1:
        raise ContractViolation("pilot length must be at least 1")
    h = np.asarray(h_true, dtype=complex)
    if noise is None:
        return h.copy()
    pilots = np.ones(pilot_len)
    received = h[..., None] * pilots + complex_normal(rng, h.shape + (pilot_len,), noise.sigma2)
    return (received @ pilots.conj()) / (pilots @ pilots.conj())
