"""User geometry sampling, Rician frequency-domain channels, Doppler
evolution across data blocks, and AWGN generation.

All randomness flows through an explicit numpy Generator so that trials
are reproducible and can be parallelized via independent substreams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import SystemConfig
from .signal_core import array_response


@dataclass(frozen=True)
class UserGeometry:
    """Angle of departure, heading, speed, and distance of one user."""

    aod: float
    heading: float
    speed: float
    distance: float


@dataclass
class ChannelRealization:
    """Per-user, per-subcarrier channel pieces for one coherence window.

    Shapes: gains (K, L); phases (K, L); los/nlos/composite (K, L, N).
    The composite channel is sqrt(kappa/(kappa+1))*los + sqrt(1/(kappa+1))*nlos
    and stays constant across the N blocks apart from the common Doppler
    rotation applied by :func:`evolve_block`.
    """

    gains: np.ndarray
    phases: np.ndarray
    los: np.ndarray
    nlos: np.ndarray
    composite: np.ndarray


def rician_weights(kappa: float) -> tuple[float, float]:
    """LoS/NLoS amplitude weights; kappa = inf selects the pure LoS channel."""
    if math.isinf(kappa):
        return 1.0, 0.0
    return math.sqrt(kappa / (kappa + 1.0)), math.sqrt(1.0 / (kappa + 1.0))


def sample_geometry(rng: np.random.Generator, cfg: SystemConfig) -> list[UserGeometry]:
    """Draw per-user distance, AoD, and heading.

    Distances are uniform over the cell annulus, AoDs uniform over the
    front half-plane [-pi/2, pi/2). With `worst_case_heading` each user
    moves straight along its own AoD, maximizing the Doppler shift;
    otherwise headings are uniform over [0, 2pi).
    """
    lo, hi = cfg.cell_range_m
    distances = rng.uniform(lo, hi, cfg.users)
    aods = rng.uniform(-np.pi / 2, np.pi / 2, cfg.users)
    if cfg.worst_case_heading:
        headings = aods.copy()
    else:
        headings = rng.uniform(0.0, 2 * np.pi, cfg.users)
    return [
        UserGeometry(aod=float(aods[k]), heading=float(headings[k]),
                     speed=cfg.speed_mps, distance=float(distances[k]))
        for k in range(cfg.users)
    ]


def realize_channel(
    rng: np.random.Generator,
    geometries: list[UserGeometry],
    cfg: SystemConfig,
    wavenumbers: np.ndarray,
) -> ChannelRealization:
    """Draw one Rician realization for every (user, subcarrier).

    The LoS part is g * a(theta) with |g| = 1/distance and a uniform
    small-scale phase; NLoS entries are i.i.d. circularly-symmetric complex
    Gaussian with per-entry variance 1/distance^2, so the average channel
    power N/distance^2 is independent of kappa.
    """
    n_users = cfg.users
    n_sub = cfg.subcarriers
    n_ant = cfg.antennas
    distances = np.array([g.distance for g in geometries])

    phases = rng.uniform(0.0, 2 * np.pi, (n_users, n_sub))
    gains = np.exp(1j * phases) / distances[:, None]

    los = np.empty((n_users, n_sub, n_ant), dtype=complex)
    for k, geo in enumerate(geometries):
        for li in range(n_sub):
            los[k, li] = gains[k, li] * array_response(
                geo.aod, wavenumbers[li], n_ant, cfg.antenna_spacing_m
            )

    scale = 1.0 / (distances * np.sqrt(2.0))
    nlos = (
        rng.standard_normal((n_users, n_sub, n_ant))
        + 1j * rng.standard_normal((n_users, n_sub, n_ant))
    ) * scale[:, None, None]

    w_los, w_nlos = rician_weights(cfg.kappa)
    composite = w_los * los + w_nlos * nlos
    return ChannelRealization(gains=gains, phases=phases, los=los, nlos=nlos,
                              composite=composite)


def doppler_rotations(
    geometries: list[UserGeometry],
    cfg: SystemConfig,
    wavenumbers: np.ndarray,
) -> np.ndarray:
    """Common per-block phase rotation exp(j*nu_l*(n-1)*T_b*v*cos(heading-aod)).

    Shape (K, L, N); block n=1 is all ones.
    """
    rates = np.array(
        [g.speed * np.cos(g.heading - g.aod) for g in geometries]
    )  # (K,)
    blocks = np.arange(cfg.antennas)
    phase = (
        rates[:, None, None]
        * np.asarray(wavenumbers)[None, :, None]
        * cfg.block_duration_s
        * blocks[None, None, :]
    )
    return np.exp(1j * phase)


def evolve_block(
    realization: ChannelRealization,
    block: int,
    geometries: list[UserGeometry],
    cfg: SystemConfig,
    wavenumbers: np.ndarray,
) -> np.ndarray:
    """Channel at data block `block` (1-based): the composite realization
    rotated by the common Doppler phase. block=1 returns it unchanged."""
    if not 1 <= block <= cfg.antennas:
        raise ValueError(f"block must lie in [1, {cfg.antennas}], got {block}")
    rot = doppler_rotations(geometries, cfg, wavenumbers)[:, :, block - 1]
    return realization.composite * rot[:, :, None]


def draw_noise(rng: np.random.Generator, noise_power: float, shape) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples with total variance
    `noise_power` (half per real dimension). noise_power=0 gives exact zeros."""
    if noise_power < 0:
        raise ValueError(f"noise power must be nonnegative, got {noise_power}")
    scale = np.sqrt(noise_power / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
