"""Frame assembly (K data slots + 2 pilots per subcarrier) and per-block
CP-DFT precoding with power allocation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ConfigError, SystemConfig
from .signal_core import build_precoder

QPSK_POINTS = np.array([1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j]) / np.sqrt(2.0)
PILOT_VALUE = 1.0 + 0.0j


@dataclass
class Frame:
    """Per-subcarrier symbol vectors, shape (L, N).

    Slots 1..N-2 (0-based 0..N-3) carry unit-power QPSK data, slot k holding
    user k's symbol; the last two slots carry the known pilots.
    """

    symbols: np.ndarray
    constellation: str
    pilots: np.ndarray


def assemble_frame(rng: np.random.Generator, cfg: SystemConfig) -> Frame:
    """Draw one frame: random QPSK in the data slots, fixed pilots at the end.

    When users < antennas - 2 the spare data slots are filled with padding
    QPSK symbols so that every slot stays unit power.
    """
    n = cfg.antennas
    if cfg.users > n - 2:
        raise ConfigError(
            f"field 'users': cannot serve {cfg.users} users with {n} antennas "
            f"(two slots are pilots)"
        )
    symbols = np.empty((cfg.subcarriers, n), dtype=complex)
    idx = rng.integers(0, 4, (cfg.subcarriers, n - 2))
    symbols[:, : n - 2] = QPSK_POINTS[idx]
    symbols[:, n - 2] = PILOT_VALUE
    symbols[:, n - 1] = PILOT_VALUE
    return Frame(symbols=symbols, constellation="qpsk",
                 pilots=np.array([PILOT_VALUE, PILOT_VALUE]))


def precode_block(symbols: np.ndarray, slot_powers: np.ndarray, block: int) -> np.ndarray:
    """Transmit vector for one subcarrier and block:
    x = (1/sqrt(N)) * F_block @ diag(sqrt(p)) @ s."""
    symbols = np.asarray(symbols)
    slot_powers = np.asarray(slot_powers, dtype=float)
    n = symbols.shape[-1]
    if slot_powers.shape != (n,):
        raise ValueError(
            f"power vector shape {slot_powers.shape} does not match symbol length {n}"
        )
    f = build_precoder(n, block)
    return (f @ (np.sqrt(slot_powers) * symbols)) / np.sqrt(n)


def precode_frame(
    symbols: np.ndarray, slot_powers: np.ndarray, precoders: np.ndarray
) -> np.ndarray:
    """All transmit vectors at once: (L, N) symbols -> (L, blocks, antennas).

    `precoders` is the stack from :func:`cpdftsim.signal_core.precoder_stack`.
    """
    n = precoders.shape[0]
    weighted = symbols * np.sqrt(np.asarray(slot_powers, dtype=float))
    return np.einsum("bij,lj->lbi", precoders, weighted) / np.sqrt(n)
