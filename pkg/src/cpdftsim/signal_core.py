"""Deterministic signal constructions.

DFT and circulant-permuted DFT (CP-DFT) matrices, per-block precoders,
ULA array response and Doppler shift vectors, and the quantized probe
codebooks used by the receiver-side search. Everything here is a pure
function of its arguments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


def dft_matrix(n: int) -> np.ndarray:
    """Unitary n x n DFT matrix with entry (a, b) = exp(-j2pi*a*b/n)/sqrt(n)."""
    if n < 1:
        raise ValueError(f"matrix dimension must be a positive integer, got {n}")
    idx = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(idx, idx) / n) / np.sqrt(n)


def circulant_index(row: int, col: int, size: int) -> int:
    """Entry (row, col) of the size x size circulant whose first column is 1..size.

    Indices are 1-based, matching the column-permutation bookkeeping of
    :func:`build_cp_dft`.
    """
    if not (1 <= row <= size and 1 <= col <= size):
        raise ValueError(f"indices must lie in [1, {size}], got ({row}, {col})")
    return (row + col - 2) % size + 1


def build_cp_dft(n: int, shift: int) -> np.ndarray:
    """The shift-th CP-DFT matrix: DFT columns reordered by the circulant map.

    Column i holds DFT column circulant_index(i, shift, n). shift=1 is the
    plain DFT matrix. Every shift is unitary; for two distinct shifts the
    cross-product U_a @ U_b^H is diagonal with a zero diagonal sum.
    """
    if not 1 <= shift <= n:
        raise ValueError(f"shift must lie in [1, {n}], got {shift}")
    u = dft_matrix(n)
    cols = [circulant_index(i, shift, n) - 1 for i in range(1, n + 1)]
    return u[:, cols]


def cp_dft_stack(n: int) -> np.ndarray:
    """All n CP-DFT matrices stacked as shape (n, n, n); entry [s] is shift s+1."""
    return np.stack([build_cp_dft(n, shift) for shift in range(1, n + 1)])


def build_precoder(n: int, block: int) -> np.ndarray:
    """Per-block precoding matrix: column m is column `block` of the m-th CP-DFT matrix."""
    if not 1 <= block <= n:
        raise ValueError(f"block must lie in [1, {n}], got {block}")
    return np.column_stack(
        [build_cp_dft(n, shift)[:, block - 1] for shift in range(1, n + 1)]
    )


def precoder_stack(n: int) -> np.ndarray:
    """All n per-block precoders stacked as shape (n, n, n); entry [b] is block b+1."""
    return np.stack([build_precoder(n, block) for block in range(1, n + 1)])


def array_response(angle: float, wavenumber: float, n: int, spacing: float) -> np.ndarray:
    """ULA phase profile toward `angle`: entry i = exp(-j*nu*d*i*sin(angle)), i=0..n-1.

    Entries are unit modulus and the first entry is exactly 1.
    """
    if n < 1:
        raise ValueError(f"array size must be positive, got {n}")
    return np.exp(-1j * wavenumber * spacing * np.arange(n) * np.sin(angle))


def doppler_vector(
    wavenumber: float,
    block_duration: float,
    speed: float,
    heading: float,
    probe_angle: float,
    n: int,
) -> np.ndarray:
    """Per-block Doppler progression exp(j*nu*i*T_b*v*cos(heading - probe)), i=0..n-1."""
    phase = wavenumber * block_duration * speed * np.cos(heading - probe_angle)
    return np.exp(1j * phase * np.arange(n))


def codebook_angles(resolution: int) -> np.ndarray:
    """Quantized angle grid -pi/2 + (q-1)*pi/Q for q = 1..Q."""
    if resolution < 1:
        raise ValueError(f"codebook resolution must be positive, got {resolution}")
    return -np.pi / 2 + np.arange(resolution) * np.pi / resolution


@dataclass(frozen=True)
class Codebooks:
    """Angle grid plus matching steering and Doppler probe vectors.

    steering/doppler have shape (subcarriers, resolution, array size).
    """

    resolution: int
    angles: np.ndarray
    steering: np.ndarray
    doppler: np.ndarray


def steering_codebook(
    angles: np.ndarray, wavenumbers: np.ndarray, n: int, spacing: float
) -> np.ndarray:
    """Array responses for every (subcarrier, grid angle): shape (L, Q, n)."""
    wn = np.atleast_1d(np.asarray(wavenumbers, dtype=float))
    phase = -wn[:, None, None] * spacing * np.sin(angles)[None, :, None] * np.arange(n)
    return np.exp(1j * phase)


def doppler_codebook(
    angles: np.ndarray,
    wavenumbers: np.ndarray,
    n: int,
    block_duration: float,
    speed: float,
    heading: float,
) -> np.ndarray:
    """Doppler probes for every (subcarrier, grid angle): shape (L, Q, n).

    The probe reuses the receiver's own known speed and heading; only the
    angle is swept.
    """
    wn = np.atleast_1d(np.asarray(wavenumbers, dtype=float))
    rate = wn[:, None, None] * block_duration * speed * np.cos(heading - angles)[None, :, None]
    return np.exp(1j * rate * np.arange(n))


def build_codebooks(
    resolution: int,
    wavenumbers: np.ndarray,
    n: int,
    spacing: float,
    block_duration: float,
    speed: float,
    heading: float,
) -> Codebooks:
    """Construct matched steering and Doppler codebooks on the quantized grid."""
    angles = codebook_angles(resolution)
    return Codebooks(
        resolution=resolution,
        angles=angles,
        steering=steering_codebook(angles, wavenumbers, n, spacing),
        doppler=doppler_codebook(angles, wavenumbers, n, block_duration, speed, heading),
    )


def subcarrier_frequencies(carrier_hz: float, bandwidth_hz: float, subcarriers: int) -> np.ndarray:
    """Centered subcarrier grid f_l = f_c + (l - 1 - L/2) * B / L for l = 1..L."""
    offsets = np.arange(subcarriers) - subcarriers / 2
    return carrier_hz + offsets * bandwidth_hz / subcarriers


def subcarrier_wavenumbers(
    carrier_hz: float,
    bandwidth_hz: float,
    subcarriers: int,
    carrier_only: bool = False,
) -> np.ndarray:
    """Per-subcarrier wavenumbers 2*pi*f_l/c, or the carrier value repeated."""
    if carrier_only:
        return np.full(subcarriers, 2 * np.pi * carrier_hz / SPEED_OF_LIGHT)
    freqs = subcarrier_frequencies(carrier_hz, bandwidth_hz, subcarriers)
    return 2 * np.pi * freqs / SPEED_OF_LIGHT
