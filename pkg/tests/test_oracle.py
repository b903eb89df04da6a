import numpy as np
import pytest

from driventb import (DCDrive, HarmonicDrive, LatticeState, OracleConfig,
                      WindowLeakError, bessel_j, gaussian_state, integrate,
                      integrate_series, monodromy_spectrum, quasienergy_band,
                      single_site)
from driventb.floquet import houston_state
from driventb.oracle import _march, apply_hamiltonian


class TestIntegrate:
    def test_zero_hamiltonian_is_identity(self):
        s = gaussian_state(0, 2.0, 0.4, (-24, 24))
        out = integrate(s, DCDrive(0.0, 0.0), 3.0)
        assert np.max(np.abs(out.amplitudes - s.amplitudes)) < 1e-12

    def test_bloch_period_revival(self):
        s = single_site(0, (-16, 16))
        out = integrate(s, DCDrive(1.0, 1.0), 2 * np.pi)
        assert abs(out.overlap(s)) > 1.0 - 1e-7

    def test_field_free_populations(self):
        s = single_site(0, (-24, 24))
        out = integrate(s, DCDrive(0.0, 1.0), 1.0)
        expected = np.array([bessel_j(n, 2.0) ** 2 for n in out.sites])
        assert np.max(np.abs(out.probabilities - expected)) < 1e-7

    def test_norm_conserved(self):
        s = gaussian_state(0, 2.0, 1.2, (-32, 32))
        out = integrate(s, HarmonicDrive(1.0, 1.0, 1.0, 0.5), 7.0)
        assert abs(out.norm() - 1.0) < 1e-9

    def test_series_checkpoints_are_consistent(self):
        s = gaussian_state(0, 2.0, 0.3, (-32, 32))
        proto = DCDrive(1.0, 0.8)
        states = integrate_series(s, proto, [1.0, 2.0, 3.5])
        direct = integrate(s, proto, 3.5)
        assert np.max(np.abs(states[-1].amplitudes - direct.amplitudes)) < 2e-9

    def test_self_convergence_halving(self):
        # one more halving beyond the accepted step moves amplitudes < 1e-9
        s = gaussian_state(0, 2.0, 0.5, (-16, 16))
        proto = DCDrive(1.0, 1.0)
        sites = s.sites.astype(float)
        dt = 1e-3
        a, _ = _march(s.amplitudes.astype(complex), 0.0, 1.0, proto, sites,
                      False, None, dt)
        b, _ = _march(s.amplitudes.astype(complex), 0.0, 1.0, proto, sites,
                      False, None, dt / 2)
        assert np.max(np.abs(a - b)) < 1e-9

    def test_leak_raises_on_small_window(self):
        s = single_site(0, (-5, 5))
        with pytest.raises(WindowLeakError):
            integrate(s, DCDrive(0.0, 1.0), 3.0)

    def test_time_validation(self):
        s = single_site(0, (-4, 4))
        with pytest.raises(ValueError):
            integrate_series(s, DCDrive(1.0, 1.0), [1.0, 0.5])
        with pytest.raises(ValueError):
            integrate(s, DCDrive(1.0, 1.0), -1.0)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            OracleConfig(boundary="absorbing")
        with pytest.raises(ValueError):
            OracleConfig(dt=-0.1)


class TestRing:
    def test_bloch_wave_follows_houston_closed_form(self):
        # the seam-twisted ring must reproduce the infinite-lattice motion
        # of a Bloch wave at arbitrary (incommensurate) times
        L = 16
        proto = HarmonicDrive(1.0, 0.8, 1.0, 0.4)
        kappa = 2 * np.pi * 3 / L
        psi0 = houston_state(kappa, proto, 0.0, (0, L - 1), ring=True)
        t = 2.153
        num = integrate(psi0, proto, t, config=OracleConfig(boundary="ring"))
        ref = houston_state(kappa, proto, t, (0, L - 1), ring=True)
        assert np.max(np.abs(num.amplitudes - ref.amplitudes)) < 1e-7

    def test_ring_norm_exact_under_wrap(self):
        L = 12
        s = LatticeState(0, np.ones(L, dtype=complex) / np.sqrt(L), ring=True)
        out = integrate(s, DCDrive(1.0, 1.0), 3.0,
                        config=OracleConfig(boundary="ring"))
        assert abs(out.norm() - 1.0) < 1e-9

    def test_apply_hamiltonian_matches_dense(self):
        s = gaussian_state(0, 1.5, 0.3, (-12, 12))
        proto = DCDrive(0.7, 0.4)
        out = apply_hamiltonian(s, proto, 0.0)
        c = s.amplitudes
        expected = 0.7 * s.sites * c
        expected = expected + 0.4 * (np.concatenate([c[1:], [0.0]])
                                     + np.concatenate([[0.0], c[:-1]]))
        assert np.max(np.abs(out.amplitudes - expected)) < 1e-14


class TestMonodromy:
    def test_flat_band_when_ac_is_off(self):
        proto = HarmonicDrive(1.0, 0.0, 1.0, 0.5)
        _, eps = monodromy_spectrum(proto, 16)
        assert np.max(np.abs(eps)) < 1e-6

    def test_matches_closed_form_band(self):
        proto = HarmonicDrive(1.0, 1.0, 1.0, 0.25)
        kappa, eps = monodromy_spectrum(proto, 16)
        band = quasienergy_band(proto)
        assert np.max(np.abs(eps - band.epsilon(kappa))) < 1e-4

    def test_requires_resonance(self):
        with pytest.raises(ValueError):
            monodromy_spectrum(HarmonicDrive(1.0, 1.0, 0.7, 0.5), 16)

    def test_requires_enough_sites(self):
        with pytest.raises(ValueError):
            monodromy_spectrum(HarmonicDrive(1.0, 1.0, 1.0, 0.5), 4)
