"""Clustered multipath channel for a single mmWave link.

Geometry: one transmit ULA, one receive ULA, frequency response evaluated
per OFDM subcarrier. Paths come in clusters; rays of a cluster share one
delay and scatter around the cluster mean angle with a Laplace profile.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .arrays import ArrayGeometry, steering_vector

HALF_PI = math.pi / 2


@dataclass(frozen=True)
class ChannelParams:
    n_clusters: int = 2
    n_rays: int = 3
    gain_var: float = 1.0
    delay_max: float = 200e-9
    ray_angle_std: float = math.radians(2.0)
    angle_range: tuple = (-HALF_PI, HALF_PI)

    def __post_init__(self):
        if self.n_clusters < 1 or self.n_rays < 1:
            raise ValueError("need at least one cluster and one ray")
        if self.gain_var <= 0 or self.delay_max < 0 or self.ray_angle_std < 0:
            raise ValueError("gain_var must be positive, delays and spreads non-negative")


@dataclass(frozen=True)
class PathComponent:
    gain: complex
    delay: float
    aod: float
    aoa: float
    cluster: int
    ray: int


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    paths: list
    gain_scale: float  # sqrt(n_rx*n_tx / n_paths), fixes E||H||_F^2 = n_rx*n_tx
    tx_geometry: ArrayGeometry
    rx_geometry: ArrayGeometry

    @property
    def gains(self) -> np.ndarray:
        return np.array([p.gain for p in self.paths])

    @property
    def delays(self) -> np.ndarray:
        return np.array([p.delay for p in self.paths])

    @property
    def aods(self) -> np.ndarray:
        return np.array([p.aod for p in self.paths])

    @property
    def aoas(self) -> np.ndarray:
        return np.array([p.aoa for p in self.paths])


def sample_channel(params: ChannelParams, tx_geometry: ArrayGeometry,
                   rx_geometry: ArrayGeometry, rng: np.random.Generator) -> ChannelRealization:
    """Draw one realization.

    Per cluster: mean AoD/AoA uniform over angle_range, one shared delay
    uniform on [0, delay_max]. Per ray: Laplace angle offsets with the
    requested standard deviation (scale = std/sqrt(2)) and a complex
    normal gain of variance gain_var. Angles clip to the array's field of
    view rather than wrapping.
    """
    lo, hi = params.angle_range
    scale = params.ray_angle_std / math.sqrt(2.0)
    sigma = math.sqrt(params.gain_var / 2.0)
    paths = []
    for c in range(params.n_clusters):
        mean_aod = rng.uniform(lo, hi)
        mean_aoa = rng.uniform(lo, hi)
        delay = rng.uniform(0.0, params.delay_max)
        for r in range(params.n_rays):
            aod = float(np.clip(mean_aod + rng.laplace(0.0, scale), lo, hi))
            aoa = float(np.clip(mean_aoa + rng.laplace(0.0, scale), lo, hi))
            gain = complex(rng.normal(0.0, sigma), rng.normal(0.0, sigma))
            paths.append(PathComponent(gain, delay, aod, aoa, c, r))
    n_paths = params.n_clusters * params.n_rays
    gain_scale = math.sqrt(rx_geometry.n_ant * tx_geometry.n_ant / n_paths)
    return ChannelRealization(paths, gain_scale, tx_geometry, rx_geometry)


def freq_channel(ch: ChannelRealization, subcarrier: int, sample_rate: float,
                 n_fft: int) -> np.ndarray:
    """(n_rx, n_tx) response at one subcarrier, as the sum over paths."""
    n_rx = ch.rx_geometry.n_ant
    n_tx = ch.tx_geometry.n_ant
    h = np.zeros((n_rx, n_tx), dtype=complex)
    for p in ch.paths:
        phase = np.exp(-2j * np.pi * sample_rate * p.delay * subcarrier / n_fft)
        a_rx = steering_vector(ch.rx_geometry, p.aoa)
        a_tx = steering_vector(ch.tx_geometry, p.aod)
        h += p.gain * phase * np.outer(a_rx, a_tx.conj())
    return ch.gain_scale * h


def factorized_channel(ch: ChannelRealization, subcarrier: int, sample_rate: float,
                       n_fft: int):
    """Same response split as (A_rx, H_d, A_tx) with H_d diagonal.

    A_rx @ H_d @ A_tx^H equals freq_channel; columns of the A factors are
    the per-path steering vectors, H_d holds scaled gains with the delay
    phase of this subcarrier.
    """
    a_rx = np.stack([steering_vector(ch.rx_geometry, p.aoa) for p in ch.paths], axis=1)
    a_tx = np.stack([steering_vector(ch.tx_geometry, p.aod) for p in ch.paths], axis=1)
    phases = np.exp(-2j * np.pi * sample_rate * ch.delays * subcarrier / n_fft)
    h_d = np.diag(ch.gain_scale * ch.gains * phases)
    return a_rx, h_d, a_tx
