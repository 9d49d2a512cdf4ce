"""CSIT-based reference schemes (zero-forcing, maximum ratio transmission)
and their SINR accounting.

Both precoders assume perfect transmitter-side channel knowledge of the
block-1 channel; the common per-block Doppler rotation does not change the
resulting SINR magnitudes. Beams are normalized per user and scaled so the
total radiated power per subcarrier matches the unitary scheme's per-block
average (or, optionally, gives each user that full budget).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CONDITION_LIMIT = 1e6
PINV_RCOND = 1e-10


@dataclass
class BaselineResult:
    """Per-user SINRs and spectral efficiencies for one CSIT scheme."""

    method: str
    sinr: np.ndarray
    per_user_se: np.ndarray
    sum_se: float
    degenerate: bool


def zf_precoder(channel_matrix: np.ndarray) -> tuple[np.ndarray, bool]:
    """Zero-forcing beams for one subcarrier.

    `channel_matrix` is (K, N) with row k the channel vector of user k (the
    received sample is h_k^T x). Returns (N, K) unit-norm columns and a flag
    marking an ill-conditioned channel (condition number above 1e6), in which
    case the tolerance-limited pseudo-inverse is used as-is.
    """
    h = np.asarray(channel_matrix)
    degenerate = bool(np.linalg.cond(h) > CONDITION_LIMIT)
    w = np.linalg.pinv(h, rcond=PINV_RCOND)
    norms = np.linalg.norm(w, axis=0)
    norms = np.where(norms == 0, 1.0, norms)
    return w / norms, degenerate


def mrt_precoder(channel_matrix: np.ndarray) -> tuple[np.ndarray, bool]:
    """Matched-filter beams: column k is h_k^* / ||h_k||; zero channels are flagged."""
    h = np.asarray(channel_matrix)
    w = np.conj(h).T
    norms = np.linalg.norm(w, axis=0)
    degenerate = bool(np.any(norms == 0))
    norms = np.where(norms == 0, 1.0, norms)
    return w / norms, degenerate


def baseline_sinr(beams: np.ndarray, channel_matrix: np.ndarray, noise_power: float) -> np.ndarray:
    """Per-user SINR |h_k^T w_k|^2 / (sum_{j != k} |h_k^T w_j|^2 + sigma^2)."""
    cross = channel_matrix @ beams  # (K, K): entry (k, j) = h_k^T w_j
    signal = np.abs(np.diag(cross)) ** 2
    interference = np.sum(np.abs(cross) ** 2, axis=1) - signal
    return signal / (interference + noise_power)


def per_user_beam_power(total_power: float, n_users: int, split: str) -> float:
    """Power carried by each user's beam under the configured convention."""
    if split == "equal_total":
        return total_power / n_users
    if split == "per_user":
        return total_power
    raise ValueError(f"unknown baseline power split '{split}'")


def evaluate_csit_baseline(
    method: str,
    channels: np.ndarray,
    noise_power: float,
    total_power: float,
    split: str = "equal_total",
) -> BaselineResult:
    """Run ZF or MRT over every subcarrier of one trial.

    `channels` is (K, L, N); the per-subcarrier channel matrix is its slice
    transposed to (K, N). SINRs are averaged into per-user spectral
    efficiencies over subcarriers.
    """
    if method not in ("ZF", "MRT"):
        raise ValueError(f"unknown CSIT baseline '{method}'")
    n_users, n_sub, _ = channels.shape
    beam_power = per_user_beam_power(total_power, n_users, split)
    sinr = np.empty((n_users, n_sub))
    degenerate = False
    for li in range(n_sub):
        h = channels[:, li, :]
        if method == "ZF":
            w, flag = zf_precoder(h)
        else:
            w, flag = mrt_precoder(h)
        degenerate = degenerate or flag
        sinr[:, li] = baseline_sinr(w * np.sqrt(beam_power), h, noise_power)
    per_user_se = np.mean(np.log2(1.0 + sinr), axis=1)
    return BaselineResult(
        method=method,
        sinr=sinr,
        per_user_se=per_user_se,
        sum_se=float(np.sum(per_user_se)),
        degenerate=degenerate,
    )
