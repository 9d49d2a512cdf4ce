import numpy as np
import pytest

from cpdftsim.signal_core import (
    array_response,
    build_codebooks,
    build_cp_dft,
    build_precoder,
    circulant_index,
    codebook_angles,
    dft_matrix,
    doppler_vector,
    subcarrier_frequencies,
    subcarrier_wavenumbers,
)
from conftest import BANDWIDTH_HZ, BLOCK_DURATION_S, CARRIER_HZ, WAVENUMBER


def max_abs(x):
    return np.max(np.abs(x))


class TestDftMatrix:
    def test_identity_case(self):
        assert dft_matrix(1) == pytest.approx(np.array([[1.0]]))

    def test_hand_n2(self):
        expected = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
        assert max_abs(dft_matrix(2) - expected) < 1e-12

    def test_unitary_n8(self):
        u = dft_matrix(8)
        assert max_abs(u @ u.conj().T - np.eye(8)) <= 1e-12

    def test_invalid_dimension(self):
        with pytest.raises(ValueError):
            dft_matrix(0)


class TestCirculantIndex:
    def test_first_column_is_identity(self):
        assert circulant_index(3, 1, 5) == 3

    def test_wraparound(self):
        assert circulant_index(5, 2, 5) == 1

    def test_hand_case(self):
        assert circulant_index(1, 4, 4) == 4

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            circulant_index(0, 1, 4)
        with pytest.raises(ValueError):
            circulant_index(1, 5, 4)

    @pytest.mark.parametrize("n", [3, 5, 8, 13])
    def test_bijection_per_column(self, n):
        for col in range(1, n + 1):
            image = {circulant_index(row, col, n) for row in range(1, n + 1)}
            assert image == set(range(1, n + 1))


class TestCpDft:
    def test_shift_one_is_dft(self):
        assert max_abs(build_cp_dft(6, 1) - dft_matrix(6)) == 0

    def test_n2_cross_product(self):
        m = build_cp_dft(2, 1) @ build_cp_dft(2, 2).conj().T
        assert max_abs(m - np.diag([1.0, -1.0])) < 1e-12
        assert abs(np.trace(m)) < 1e-12

    def test_n10_pair(self):
        m = build_cp_dft(10, 7) @ build_cp_dft(10, 3).conj().T
        off = m - np.diag(np.diag(m))
        assert max_abs(off) <= 1e-12
        assert abs(np.sum(np.diag(m))) <= 1e-9

    def test_invalid_shift(self):
        with pytest.raises(ValueError):
            build_cp_dft(4, 0)
        with pytest.raises(ValueError):
            build_cp_dft(4, 5)


class TestPrecoder:
    def test_n2_assembly(self):
        expected = np.column_stack(
            [build_cp_dft(2, 1)[:, 0], build_cp_dft(2, 2)[:, 0]]
        )
        assert max_abs(build_precoder(2, 1) - expected) == 0
        assert max_abs(expected - np.array([[1, 1], [1, -1]]) / np.sqrt(2)) < 1e-12

    @pytest.mark.parametrize("n", range(2, 17))
    def test_unitary(self, n):
        for block in range(1, n + 1):
            f = build_precoder(n, block)
            assert max_abs(f @ f.conj().T - np.eye(n)) <= 1e-12

    def test_scaled_column_energy(self):
        f = build_precoder(4, 1)
        x = f[:, 0] / np.sqrt(4)
        assert np.linalg.norm(x) ** 2 == pytest.approx(1 / 4, rel=1e-12)

    def test_invalid_block(self):
        with pytest.raises(ValueError):
            build_precoder(4, 5)


class TestArrayResponse:
    def test_broadside_all_ones(self):
        assert max_abs(array_response(0.0, WAVENUMBER, 6, 0.005) - 1.0) == 0

    def test_endfire_hand_case(self):
        # nu * d = pi and theta = pi/2 alternates the sign across elements
        a = array_response(np.pi / 2, np.pi, 3, 1.0)
        assert max_abs(a - np.array([1, -1, 1])) < 1e-12

    def test_unit_modulus_and_norm(self):
        a = array_response(0.7, WAVENUMBER, 9, 0.005)
        assert max_abs(np.abs(a) - 1.0) <= 1e-12
        assert a[0] == 1.0
        assert np.linalg.norm(a) ** 2 == pytest.approx(9.0, rel=1e-12)


class TestDopplerVector:
    def test_zero_speed(self):
        d = doppler_vector(WAVENUMBER, BLOCK_DURATION_S, 0.0, 0.3, 0.1, 8)
        assert max_abs(d - 1.0) == 0

    def test_orthogonal_motion(self):
        d = doppler_vector(WAVENUMBER, BLOCK_DURATION_S, 39.0, np.pi / 2, 0.0, 8)
        assert max_abs(d - 1.0) <= 1e-12

    def test_phase_formula(self):
        d = doppler_vector(WAVENUMBER, BLOCK_DURATION_S, 39.0, 0.4, 0.4, 4)
        expected = WAVENUMBER * BLOCK_DURATION_S * 39.0
        assert np.angle(d[1]) == pytest.approx(expected, rel=1e-12)
        assert np.angle(d[3]) == pytest.approx(3 * expected, rel=1e-9)
        assert d[0] == 1.0


class TestCodebooks:
    def test_two_angles(self):
        angles = codebook_angles(2)
        assert angles[0] == -np.pi / 2
        assert angles[1] == -np.pi / 2 + np.pi / 2

    def test_full_resolution_span(self):
        angles = codebook_angles(256)
        assert len(angles) == 256
        assert angles[0] == -np.pi / 2
        assert angles[-1] < np.pi / 2
        assert np.allclose(np.diff(angles), np.pi / 256)

    def test_grid_expression(self):
        q = 7
        angles = codebook_angles(q)
        for i in range(q):
            assert angles[i] == -np.pi / 2 + i * np.pi / q

    def test_steering_at_broadside(self):
        wn = subcarrier_wavenumbers(CARRIER_HZ, BANDWIDTH_HZ, 4)
        cb = build_codebooks(2, wn, 5, 0.005, BLOCK_DURATION_S, 39.0, 0.0)
        # second grid angle is exactly zero
        assert np.allclose(cb.steering[:, 1, :], 1.0)
        assert cb.steering.shape == (4, 2, 5)
        assert cb.doppler.shape == (4, 2, 5)

    def test_unit_modulus(self):
        wn = subcarrier_wavenumbers(CARRIER_HZ, BANDWIDTH_HZ, 3)
        cb = build_codebooks(16, wn, 6, 0.005, BLOCK_DURATION_S, 39.0, 0.7)
        assert max_abs(np.abs(cb.steering) - 1.0) <= 1e-12
        assert max_abs(np.abs(cb.doppler) - 1.0) <= 1e-12

    def test_invalid_resolution(self):
        with pytest.raises(ValueError):
            codebook_angles(0)


class TestSubcarrierGrid:
    def test_centered_frequencies(self):
        f = subcarrier_frequencies(CARRIER_HZ, BANDWIDTH_HZ, 64)
        assert f[0] == CARRIER_HZ - BANDWIDTH_HZ / 2
        assert f[-1] == pytest.approx(
            CARRIER_HZ + BANDWIDTH_HZ / 2 - BANDWIDTH_HZ / 64, rel=1e-15
        )

    def test_carrier_only_switch(self):
        wn = subcarrier_wavenumbers(CARRIER_HZ, BANDWIDTH_HZ, 8, carrier_only=True)
        assert np.all(wn == wn[0])
        assert wn[0] == pytest.approx(WAVENUMBER, rel=1e-15)

    def test_per_subcarrier_values(self):
        wn = subcarrier_wavenumbers(CARRIER_HZ, BANDWIDTH_HZ, 8)
        assert np.all(np.diff(wn) > 0)
        assert wn[0] < WAVENUMBER < wn[-1]
