import numpy as np

from cpdftsim.signal_core import (
    array_response,
    doppler_vector,
    precoder_stack,
)

# Carrier-frequency constants used across tests (28 GHz system, 6.25 MHz band,
# 64+16 sample blocks, half-wavelength spacing).
CARRIER_HZ = 28e9
BANDWIDTH_HZ = 6.25e6
BLOCK_DURATION_S = (64 + 16) / BANDWIDTH_HZ
WAVENUMBER = 2 * np.pi * CARRIER_HZ / 299_792_458.0
SPACING_M = 299_792_458.0 / CARRIER_HZ / 2


def single_user_observation(
    n,
    aod,
    gain,
    symbols,
    powers,
    noise_vec,
    speed=0.0,
    heading=0.0,
    wavenumber=WAVENUMBER,
    spacing=SPACING_M,
    block_duration=BLOCK_DURATION_S,
):
    """One subcarrier's stacked block observations for a pure LoS channel.

    Returns (y, steering, doppler, channel): y_m = d_m * h^T x_m + z_m with
    x_m the CP-DFT precoded transmit vector of block m.
    """
    a = array_response(aod, wavenumber, n, spacing)
    d = doppler_vector(wavenumber, block_duration, speed, heading, aod, n)
    h = gain * a
    precoders = precoder_stack(n)
    x = np.einsum("bij,j->bi", precoders, np.sqrt(np.asarray(powers, float)) * symbols)
    x = x / np.sqrt(n)
    y = d * (x @ h) + noise_vec
    return y, a, d, h
