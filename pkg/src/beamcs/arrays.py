"""Uniform linear arrays and sin-domain grid dictionaries."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ArrayGeometry:
    """Half-wavelength ULA. `spacing` is the element pitch in wavelengths."""

    n_ant: int
    spacing: float = 0.5

    def __post_init__(self):
        if self.n_ant < 1:
            raise ValueError("n_ant must be positive")
        if self.spacing != 0.5:
            raise ValueError("only half-wavelength spacing is supported")


def steering_vector(geometry: ArrayGeometry, angle: float) -> np.ndarray:
    """Unit-norm array response at broadside angle `angle` (radians)."""
    if np.isnan(angle):
        raise ValueError("angle must not be NaN")
    n = np.arange(geometry.n_ant)
    return np.exp(1j * np.pi * n * np.sin(angle)) / np.sqrt(geometry.n_ant)


@dataclass(frozen=True, eq=False)
class GridDictionary:
    """Array responses sampled on a uniform sin-domain grid, DFT bin order."""

    geometry: ArrayGeometry
    multiplier: int
    n_bins: int
    sin_grid: np.ndarray
    atoms: np.ndarray  # (n_ant, n_bins), unit-norm columns


def build_grid(geometry: ArrayGeometry, multiplier: int) -> GridDictionary:
    """Dictionary with n_ant * multiplier bins.

    Bin i sits at sin value 2i/G for i < G/2 and 2i/G - 2 above, so
    multiplier 1 reproduces the DFT codebook order exactly.
    """
    if multiplier < 1:
        raise ValueError("multiplier must be positive")
    g = geometry.n_ant * multiplier
    i = np.arange(g)
    sin_grid = np.where(i < g / 2, 2.0 * i / g, 2.0 * i / g - 2.0)
    n = np.arange(geometry.n_ant)[:, None]
    atoms = np.exp(1j * np.pi * n * sin_grid[None, :]) / np.sqrt(geometry.n_ant)
    return GridDictionary(geometry, multiplier, g, sin_grid, atoms)
