import math

import numpy as np
import pytest

from blockade_lab import model
from blockade_lab.errors import InvalidArgumentError
from blockade_lab.model import (
    SystemParams,
    build_altdrive_hamiltonian,
    build_full_hamiltonian,
    build_nonhermitian,
    build_reduced_hamiltonian,
    build_undriven,
    collapse_ops,
    drive_amplitude_from_power,
    full_spec,
    gauge_parameterization,
    kerr_strength,
    power_from_drive_amplitude,
    reduced_spec,
    to_kappa2_units,
    to_mhz_units,
)
from blockade_lab.tensor_core import annihilation, dagger, embed, number_operator

from conftest import random_symmetric_params


def fig2_params(delta=0.0):
    return SystemParams(
        delta1=delta, delta2=delta, omega_m=500.0, lambda1=0.95, lambda2=0.9688,
        g=21.0, E=0.02, kappa1=1.0, kappa2=1.0, gamma_m=5e-4,
    )


class TestKerrStrength:
    def test_zero_coupling(self):
        assert kerr_strength(fig2_params().updated(g=0.0)) == 0.0

    def test_weak_regime_value(self):
        # g/omega_m = 0.042 at omega_m = 500 gives chi = 0.882
        assert kerr_strength(fig2_params()) == pytest.approx(0.882)

    def test_strong_regime_value(self):
        assert kerr_strength(fig2_params().updated(g=100.0)) == pytest.approx(20.0)

    def test_zero_omega_m_rejected(self):
        with pytest.raises(InvalidArgumentError):
            kerr_strength(fig2_params().updated(omega_m=0.0))


class TestDriveAmplitude:
    OMEGA_L = 2 * math.pi * 200e12  # optical frequency, rad/s
    KAPPA2 = 2 * math.pi * 0.15e6  # rad/s

    def test_square_root_power_law(self):
        e1 = drive_amplitude_from_power(1e-12, self.OMEGA_L, self.KAPPA2)
        e4 = drive_amplitude_from_power(4e-12, self.OMEGA_L, self.KAPPA2)
        assert e4 == pytest.approx(2 * e1, rel=1e-12)

    def test_round_trip(self):
        power = 3.7e-12
        amp = drive_amplitude_from_power(power, self.OMEGA_L, self.KAPPA2)
        assert power_from_drive_amplitude(amp, self.OMEGA_L, self.KAPPA2) == pytest.approx(
            power, rel=1e-12
        )

    def test_vanishing_power_limit(self):
        assert drive_amplitude_from_power(1e-300, self.OMEGA_L, self.KAPPA2) < 1e-130

    def test_nonpositive_inputs_rejected(self):
        with pytest.raises(InvalidArgumentError):
            drive_amplitude_from_power(0.0, self.OMEGA_L, self.KAPPA2)
        with pytest.raises(InvalidArgumentError):
            drive_amplitude_from_power(1e-12, -1.0, self.KAPPA2)


class TestGauge:
    def test_h_zero_is_reciprocal(self):
        assert gauge_parameterization(0.96, 0.0) == (0.96, 0.96)

    def test_product_independent_of_h(self):
        for h in (0.01, 0.3, 2.0):
            l1, l2 = gauge_parameterization(0.96, h)
            assert l1 * l2 == pytest.approx(0.96 ** 2, rel=1e-12)

    def test_large_h_suppresses_backward_hopping(self):
        _, l2 = gauge_parameterization(0.96, 40.0)
        assert l2 < 1e-15


class TestSystemParams:
    def test_negative_rates_rejected(self):
        with pytest.raises(InvalidArgumentError):
            fig2_params().updated(kappa1=-1.0)
        with pytest.raises(InvalidArgumentError):
            fig2_params().updated(n_th=-0.5)
        with pytest.raises(InvalidArgumentError):
            fig2_params().updated(E=-0.1)

    def test_negative_lambda_accepted(self):
        params = fig2_params().updated(lambda2=-1.27)
        assert params.lambda2 == -1.27

    def test_non_finite_rejected(self):
        with pytest.raises(InvalidArgumentError):
            fig2_params().updated(delta1=float("inf"))

    def test_unknown_units_rejected(self):
        with pytest.raises(InvalidArgumentError):
            fig2_params().updated(units="Hz")


class TestUnitConversion:
    def test_power_of_two_round_trip_is_exact(self):
        params = fig2_params().updated(kappa1=2.0, kappa2=2.0, units=model.UNITS_MHZ)
        back = to_mhz_units(to_kappa2_units(params), params.kappa2)
        for name in ("delta1", "delta2", "omega_m", "lambda1", "lambda2", "g", "E", "gamma_m"):
            assert getattr(back, name) == getattr(params, name)

    def test_general_round_trip_within_ulps(self):
        kappa2 = 2 * math.pi * 0.15
        params = fig2_params().updated(
            delta1=0.5446 * kappa2, delta2=0.5446 * kappa2, omega_m=500 * kappa2,
            lambda1=0.95 * kappa2, lambda2=0.9688 * kappa2, g=21 * kappa2,
            E=0.02 * kappa2, kappa1=kappa2, kappa2=kappa2, gamma_m=5e-4 * kappa2,
            units=model.UNITS_MHZ,
        )
        converted = to_kappa2_units(params)
        assert converted.kappa2 == 1.0
        assert converted.omega_m == pytest.approx(500.0, rel=1e-15)
        back = to_mhz_units(converted, kappa2)
        for name in ("delta1", "omega_m", "lambda1", "lambda2", "g", "E", "gamma_m"):
            assert getattr(back, name) == pytest.approx(getattr(params, name), rel=4e-16)

    def test_tags_update(self):
        params = fig2_params()
        assert to_kappa2_units(params) is params
        mhz = to_mhz_units(params, 0.9424777960769379)
        assert mhz.units == model.UNITS_MHZ


def basis_index_full(spec, n1, n2, nb):
    c1, c2, cb = spec.cutoffs
    return (n1 * c2 + n2) * cb + nb


class TestFullHamiltonian:
    def test_decoupled_is_diagonal(self):
        spec = full_spec(3, 3, 3)
        params = fig2_params().updated(lambda1=0.0, lambda2=0.0, g=0.0, E=0.0,
                                       delta1=0.3, delta2=0.7)
        h = build_full_hamiltonian(params, spec)
        assert np.count_nonzero(h - np.diag(np.diag(h))) == 0
        idx = basis_index_full(spec, 1, 2, 1)
        assert h[idx, idx] == pytest.approx(0.3 + 2 * 0.7 + 500.0)

    def test_reciprocal_coupling_is_hermitian(self):
        params = fig2_params().updated(lambda2=0.95)
        h = build_full_hamiltonian(params, full_spec())
        assert np.max(np.abs(h - dagger(h))) < 1e-14

    def test_nonreciprocal_matrix_elements(self):
        spec = full_spec(3, 3, 3)
        params = fig2_params().updated(lambda1=0.6, lambda2=1.4)
        h = build_full_hamiltonian(params, spec)
        one_zero = basis_index_full(spec, 1, 0, 0)
        zero_one = basis_index_full(spec, 0, 1, 0)
        assert h[one_zero, zero_one] == pytest.approx(0.6)   # lambda1 a1+ a2
        assert h[zero_one, one_zero] == pytest.approx(1.4)   # lambda2 a1 a2+

    def test_g_zero_matches_elementwise_composition(self, rng):
        spec = full_spec(3, 3, 3)
        params = random_symmetric_params(rng).updated(g=0.0)
        h = build_full_hamiltonian(params, spec)
        a1 = embed(annihilation(3), "a1", spec)
        a2 = embed(annihilation(3), "a2", spec)
        b = embed(annihilation(3), "b", spec)
        composed = (
            params.delta1 * embed(number_operator(3), "a1", spec)
            + params.delta2 * embed(number_operator(3), "a2", spec)
            + params.omega_m * embed(number_operator(3), "b", spec)
            + params.lambda1 * dagger(a1) @ a2
            + params.lambda2 * a1 @ dagger(a2)
            + params.E * (dagger(a2) + a2)
        )
        assert np.max(np.abs(h - composed)) < 1e-11

    def test_wrong_mode_count(self):
        with pytest.raises(InvalidArgumentError):
            build_full_hamiltonian(fig2_params(), reduced_spec())


class TestReducedHamiltonian:
    def test_bare_harmonic_diagonal(self):
        params = fig2_params().updated(g=0.0, lambda1=0.0, lambda2=0.0, E=0.0,
                                       delta1=1.1, delta2=1.1)
        h = build_reduced_hamiltonian(params, reduced_spec(3, 3))
        assert np.allclose(h, np.diag([0, 1.1, 2.2, 1.1, 2.2, 3.3, 2.2, 3.3, 4.4]))

    def test_kerr_diagonal(self):
        params = fig2_params().updated(delta1=0.4, delta2=0.4)
        chi = kerr_strength(params)
        h = build_reduced_hamiltonian(params, reduced_spec(4, 2))
        for n1 in range(4):
            idx = n1 * 2
            assert h[idx, idx] == pytest.approx(0.4 * n1 - chi * n1 ** 2)

    def test_two_photon_diagonal_matches_amplitude_equation(self):
        # the |2,0> diagonal entry 2*delta1 - 4*chi is the c20 coefficient
        params = fig2_params().updated(delta1=0.4, delta2=0.4)
        chi = kerr_strength(params)
        h = build_reduced_hamiltonian(params, reduced_spec(3, 3))
        two_zero = 2 * 3 + 0
        assert h[two_zero, two_zero] == pytest.approx(2 * 0.4 - 4 * chi)

    def test_hermiticity_iff_reciprocal(self, rng):
        for _ in range(10):
            params = random_symmetric_params(rng)
            h = build_reduced_hamiltonian(params, reduced_spec())
            deviation = np.max(np.abs(h - dagger(h)))
            # asymmetry shows up only through the hopping terms
            assert deviation > 0.1 * abs(params.lambda1 - params.lambda2)
            sym = build_reduced_hamiltonian(params.updated(lambda2=params.lambda1), reduced_spec())
            assert np.max(np.abs(sym - dagger(sym))) < 1e-14


class TestNonHermitian:
    def test_no_decay_equals_reduced(self):
        params = fig2_params().updated(kappa1=0.0, kappa2=0.0)
        assert np.array_equal(
            build_nonhermitian(params, reduced_spec()),
            build_reduced_hamiltonian(params, reduced_spec()),
        )

    def test_single_photon_imaginary_parts(self):
        params = fig2_params().updated(kappa1=0.8, kappa2=1.2)
        h = build_nonhermitian(params, reduced_spec(3, 3))
        assert h[3, 3].imag == pytest.approx(-0.4)  # |1,0>
        assert h[1, 1].imag == pytest.approx(-0.6)  # |0,1>

    def test_decay_part_diagonal_negative_imaginary(self, rng):
        for _ in range(5):
            params = random_symmetric_params(rng)
            diff = build_nonhermitian(params, reduced_spec()) - build_reduced_hamiltonian(
                params, reduced_spec()
            )
            off_diag = diff - np.diag(np.diag(diff))
            assert np.max(np.abs(off_diag)) == 0.0
            assert np.max(np.abs(np.diag(diff).real)) == 0.0
            assert np.all(np.diag(diff).imag <= 0.0)


class TestUndrivenAndAltdrive:
    def test_undriven_equals_reduced_without_drive(self):
        params = fig2_params()
        assert np.array_equal(
            build_undriven(params, reduced_spec()),
            build_reduced_hamiltonian(params.updated(E=0.0), reduced_spec()),
        )

    def test_block_diagonal_in_total_excitation(self):
        params = fig2_params().updated(delta1=0.3, delta2=0.3)
        spec = reduced_spec(4, 4)
        h = build_undriven(params, spec)
        totals = np.add.outer(np.arange(4), np.arange(4)).ravel()
        for i in range(spec.dim):
            for j in range(spec.dim):
                if totals[i] != totals[j]:
                    assert h[i, j] == 0.0

    def test_altdrive_zero_drive_is_undriven(self):
        params = fig2_params().updated(E=0.0)
        assert np.array_equal(
            build_altdrive_hamiltonian(params, reduced_spec()),
            build_undriven(params, reduced_spec()),
        )

    def test_altdrive_couples_vacuum_to_cavity_one(self):
        spec = reduced_spec(3, 3)
        h = build_altdrive_hamiltonian(fig2_params(), spec)
        one_zero = 1 * 3 + 0
        assert h[one_zero, 0] == pytest.approx(0.02)
        assert h[1, 0] == 0.0  # |0,1> not driven in this variant


class TestCollapseOps:
    def test_reduced_channels(self):
        ops = collapse_ops(fig2_params(), reduced_spec(), include_mechanics=False)
        assert [rate for rate, _ in ops] == [1.0, 1.0]

    def test_zero_temperature_omits_heating(self):
        ops = collapse_ops(fig2_params(), full_spec(), include_mechanics=True)
        assert len(ops) == 3
        assert [rate for rate, _ in ops] == pytest.approx([1.0, 1.0, 5e-4])

    def test_thermal_heating_channel(self):
        params = fig2_params().updated(n_th=0.5)
        ops = collapse_ops(params, full_spec(), include_mechanics=True)
        assert len(ops) == 4
        assert ops[2][0] == pytest.approx(5e-4 * 1.5)
        assert ops[3][0] == pytest.approx(5e-4 * 0.5)
        b = embed(annihilation(8), "b", full_spec())
        assert np.array_equal(ops[3][1], dagger(b))

    def test_caption_rates(self):
        # kappa1 = kappa2 = 1, gamma_m = omega_m / 1e6 = 5e-4 in kappa2 units
        params = fig2_params()
        assert params.gamma_m == pytest.approx(params.omega_m / 1e6)
        rates = [rate for rate, _ in collapse_ops(params, full_spec(), True)]
        assert rates == pytest.approx([1.0, 1.0, 5e-4])

    def test_spec_flag_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            collapse_ops(fig2_params(), reduced_spec(), include_mechanics=True)
