import math
import warnings

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from deepstrong.device import CavityOscillatorTable, paper_device
from deepstrong.dynamics import (DivergenceError, DrivePulse, PulseTruncationError, StepSizeError,
                                 SweepError, amplitude_spectrum, calibrate_kappa, energy_channels,
                                 far_field, fft_length, integrate_eom, spectral_peaks, switch_off,
                                 sweep_cyclotron, synthesize_pulse)
from deepstrong.hopfield import ModeSystem, single_pair, solve


def cavity_only(nu=1.0):
    return ModeSystem(np.array([nu]), np.zeros(0), np.zeros((1, 0)))


def test_pulse_shape_and_spectrum():
    p = DrivePulse(t0=2.0, sigma=0.2)
    t, e = synthesize_pulse(p, 0.005, 20.0)
    assert e[np.argmin(abs(t - 2.0))] == pytest.approx(0.0, abs=1e-12)
    assert e.sum() * 0.005 == pytest.approx(0.0, abs=1e-9)
    spec = amplitude_spectrum(e, 0.005)
    assert spec.nu[np.argmax(spec.amplitude)] == pytest.approx(p.peak_frequency, abs=2 * spec.bin_width)
    with pytest.raises(PulseTruncationError):
        synthesize_pulse(DrivePulse(t0=0.3, sigma=0.1), 0.01, 10.0)
    with pytest.raises(ValueError):
        DrivePulse(sigma=0.0)


def test_fft_length():
    assert fft_length(1000) == 4096
    assert fft_length(1024) == 4096
    assert fft_length(1025) == 8192


def test_no_drive_stays_at_rest():
    tr = integrate_eom(single_pair(0.5), pulse=None, dt=0.01, t_end=5.0)
    assert np.all(tr.alpha == 0) and np.all(tr.beta == 0)


def test_damped_cavity_rings_at_its_frequency():
    tr = integrate_eom(cavity_only(1.3), pulse=DrivePulse(), dt=0.005, t_end=210.0,
                       cavity_damping=0.05, gamma_mp=0.0)
    spec = amplitude_spectrum(tr.emitted, tr.dt)
    peak = spec.nu[np.argmax(np.where(spec.nu > 0.2, spec.amplitude, 0))]
    assert abs(peak - 1.3) <= spec.bin_width


def test_against_adaptive_reference():
    sys_ = ModeSystem(np.array([0.9, 1.6]), np.array([0.7, 1.2]),
                      np.array([[0.2, 0.1], [0.05, 0.3]]), cross_diamagnetic=True)
    pulse = DrivePulse(t0=1.0, sigma=0.15)
    kap = np.array([1.0, 0.5 * np.exp(0.4j)])
    gc, gm = np.array([0.1, 0.2]), np.array([0.05, 0.07])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        tr = integrate_eom(sys_, pulse=pulse, dt=0.001, t_end=15.0, cavity_damping=gc,
                           drive_coupling=kap, gamma_mp=gm)
    # complex Heisenberg-picture mean-field equations written out independently
    wc, wm = 2 * np.pi * sys_.cavity_freqs, 2 * np.pi * sys_.matter_freqs
    g, dia = 2 * np.pi * sys_.coupling, 2 * np.pi * sys_.diamagnetic_matrix

    def rhs(t, y):
        a, b = y[:2], y[2:]
        xa, xb = a + a.conj(), b + b.conj()
        da = -1j * (wc * a + g @ xb + 2 * dia @ xa) - gc * a + kap * pulse(t)
        db = -1j * (wm * b + g.T @ xa) - gm * b
        return np.concatenate([da, db])

    ref = solve_ivp(rhs, (0, 15.0), np.zeros(4, complex), method="DOP853", t_eval=tr.t[::100],
                    rtol=1e-11, atol=1e-13)
    got = np.hstack([tr.alpha, tr.beta])[::100]
    scale = np.max(abs(ref.y))
    assert np.max(abs(got - ref.y.T)) / scale < 1e-6


def test_step_size_guard():
    with pytest.raises(StepSizeError, match="1/\\(50 nu_max\\)"):
        integrate_eom(single_pair(0.5, nu_cavity=2.0), pulse=None, dt=0.02, t_end=1.0)


def test_divergence_reported():
    with pytest.raises(DivergenceError, match="t = "):
        integrate_eom(cavity_only(10.0), pulse=DrivePulse(), dt=0.1, t_end=5000.0,
                      check_dt=False)


def test_truncation_warning():
    with pytest.warns(RuntimeWarning, match="damping"):
        integrate_eom(cavity_only(1.0), pulse=DrivePulse(), dt=0.005, t_end=5.0,
                      cavity_damping=0.1)


def test_energy_channels_and_conservation():
    sys_ = single_pair(0.6)
    tr = integrate_eom(sys_, pulse=DrivePulse(), dt=0.0005, t_end=8.0,
                       cavity_damping=0.0, gamma_mp=0.0)
    ch = energy_channels(tr)
    before = tr.t < 0.3
    assert np.allclose(ch["total"][before], 0, atol=1e-12)
    after = tr.t > 2.0
    tot = ch["total"][after]
    assert np.ptp(tot) / tot.mean() < 1e-6
    parts = ch["cavity"].sum(1) + ch["matter"].sum(1) + ch["interaction"]
    assert np.allclose(parts, ch["total"])


def test_rabi_doublet_in_spectrum():
    sys_ = single_pair(0.2)
    tr = integrate_eom(sys_, pulse=DrivePulse(), dt=0.004, t_end=210.0,
                       cavity_damping=0.05, gamma_mp=0.05)
    peaks = spectral_peaks(amplitude_spectrum(tr.emitted, tr.dt), rel_height=0.1, nu_min=0.2)
    spec_bin = amplitude_spectrum(tr.emitted, tr.dt).bin_width
    expect = solve(sys_).frequencies
    assert len(peaks) == 2
    assert np.all(abs(np.sort(peaks) - expect) <= 1.5 * spec_bin)


def test_switch_off_decouples_matter():
    sys_ = ModeSystem(np.array([1.0, 2.0]), np.array([1.5]), np.array([[0.2], [0.3]]),
                      cavity_labels=(1, 2))
    tr = switch_off(sys_, [], pulse=DrivePulse(), dt=0.002, t_end=5.0)
    assert np.all(tr.beta == 0) and np.all(tr.alpha == 0)
    one = switch_off(sys_, [1], pulse=DrivePulse(), dt=0.002, t_end=5.0)
    assert np.all(one.alpha[:, 1] == 0) and np.any(one.beta != 0)
    with pytest.raises(KeyError):
        switch_off(sys_, [7], dt=0.002, t_end=1.0)


def test_far_field_without_coupling_is_transparent():
    tr = integrate_eom(cavity_only(1.0), pulse=DrivePulse(), dt=0.005, t_end=25.0,
                       drive_coupling=0.0, cavity_damping=0.5)
    ff = far_field(tr, kappa_rad=1.0)
    ok = ~np.isnan(ff.transmission)
    assert ok.sum() > 100
    assert np.allclose(ff.transmission[ok], 1.0)
    assert len(ff.gaps) > 0


def test_bare_resonator_dip():
    osc = CavityOscillatorTable()
    pulse = DrivePulse()
    dt, t_end = 0.002, 150.0
    kappa = calibrate_kappa(osc, pulse, dt, t_end, target=0.3)
    bare = ModeSystem(np.array(osc.nu), np.zeros(0), np.zeros((5, 0)), osc.j)
    ff = far_field(integrate_eom(bare, osc, pulse=pulse, dt=dt, t_end=t_end), kappa)
    k = np.argmin(abs(ff.nu - 0.52))
    assert ff.transmission[k] == pytest.approx(0.3, abs=1e-6)
    window = (ff.nu > 0.3) & (ff.nu < 0.8)
    nu_min = ff.nu[window][np.nanargmin(ff.transmission[window])]
    assert abs(nu_min - 0.52) < 0.02


def small_device(**kw):
    osc = CavityOscillatorTable(j=(1, 2), nu=(0.52, 1.95), gamma=(0.3, 0.8),
                                amplitude=(2.8, 44.5), phase=(0.0, -0.44))
    return paper_device(6, alpha_cut=3, oscillators=osc, cross_diamagnetic=True,
                        global_scale=0.3, **kw)


def test_sweep_shape_and_overlays():
    dev = small_device()
    grid = np.linspace(0.1, 3.0, 40)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        tm = sweep_cyclotron(dev, [0.2, 0.6], grid, t_end=40.0, gamma_mp=0.3, threads=2)
    assert tm.transmission.shape == (2, 40)
    assert [o["nu_c"] for o in tm.overlays] == [0.2, 0.6]
    labels = {m["label"] for m in tm.overlays[0]["modes"]}
    assert {"LP", "UP"} <= labels
    assert tm.kappa_rad > 0


def test_sweep_names_failing_column():
    with pytest.raises(SweepError, match="nu_c = 0"):
        sweep_cyclotron(small_device(), [0.0, 0.5], [1.0, 2.0], t_end=20.0)
    with pytest.raises(ValueError):
        sweep_cyclotron(small_device(), [0.5, 0.2], [1.0, 2.0])


def test_lp_ridge_approaches_cavity_frequency():
    dev = small_device()
    grid = np.linspace(0.1, 3.0, 10)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        tm = sweep_cyclotron(dev, [0.5, 2.0, 8.0], grid, t_end=20.0, gamma_mp=0.3)
    lp1 = [next(m["nu"] for m in col["modes"] if m["label"] == "LP" and m["j"] == 1)
           for col in tm.overlays]
    assert np.all(np.diff(lp1) > 0) and lp1[-1] < 0.52
    assert abs(lp1[-1] - 0.52) / 0.52 < 0.1


def test_single_pair_energy_exchange_beats():
    sys_ = single_pair(0.15)
    tr = integrate_eom(sys_, pulse=DrivePulse(), dt=0.002, t_end=120.0,
                       cavity_damping=0.0, gamma_mp=0.0)
    cav = energy_channels(tr)["cavity"][:, 0]
    post = tr.t > 2.0
    spec = amplitude_spectrum(cav[post] - cav[post].mean(), tr.dt)
    lo = spec.nu < 1.0
    beat = spec.nu[lo][np.argmax(spec.amplitude[lo])]
    lp, up = solve(sys_).frequencies
    assert abs(beat - (up - lp)) <= spec.bin_width
