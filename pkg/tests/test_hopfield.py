import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from scipy.linalg import sqrtm

from deepstrong.device import paper_device
from deepstrong.hopfield import (InstabilityError, ModeSystem, SingularDiamagneticError,
                                 build_dynamical_matrix, classify_polaritons, equivalent_eta,
                                 ground_state_populations, ground_state_report,
                                 quadrature_covariance, single_mode_photon_number, single_pair,
                                 solve)


def quadratic_form_oracle(system: ModeSystem):
    """Ground state of H = 1/2 p^T W p + 1/2 x^T K x by direct matrix square roots.

    Returns normal-mode frequencies and the <x x^T>, <p p^T> moment matrices;
    independent of any Bogoliubov eigenvector bookkeeping.
    """
    J = system.n_cavity
    W = np.concatenate([system.cavity_freqs, system.matter_freqs])
    K = np.diag(W).astype(float)
    K[:J, :J] += 4 * system.diamagnetic_matrix
    K[:J, J:] += 2 * system.coupling
    K[J:, :J] += 2 * system.coupling.T
    sw = np.sqrt(W)
    S = sw[:, None] * K * sw[None, :]
    lam = np.linalg.eigvalsh(S)
    if lam.min() <= 0:
        return None
    Om = np.real(sqrtm(S))
    xx = 0.5 * sw[:, None] * np.linalg.inv(Om) * sw[None, :]
    pp = 0.5 * Om / sw[:, None] / sw[None, :]
    return np.sqrt(lam), xx, pp


@st.composite
def systems(draw, cross=None):
    J = draw(st.integers(1, 3))
    M = draw(st.integers(1, 25))
    cf = draw(st.lists(st.floats(0.2, 5.0), min_size=J, max_size=J))
    mf = draw(st.lists(st.floats(0.2, 5.0), min_size=M, max_size=M))
    g = draw(st.lists(st.floats(0.0, 1.5), min_size=J * M, max_size=J * M))
    cross = draw(st.booleans()) if cross is None else cross
    return ModeSystem(np.array(cf), np.array(mf), np.array(g).reshape(J, M),
                      cross_diamagnetic=cross)


@settings(max_examples=60, deadline=None)
@given(systems())
def test_matches_quadratic_form_oracle(sys_):
    ref = quadratic_form_oracle(sys_)
    assume(ref is not None and ref[0].min() > 1e-3)
    freqs, xx, pp = ref
    sol = solve(sys_)
    assert np.allclose(np.sort(sol.frequencies), np.sort(freqs), rtol=1e-7, atol=1e-9)
    N, M = ground_state_populations(sol)
    J = sys_.n_cavity
    n_ref = (np.diag(xx) + np.diag(pp) - 1) / 2
    assert np.allclose(N, n_ref[:J], atol=1e-7)
    assert np.allclose(M, n_ref[J:], atol=1e-7)
    for j in range(J):
        c = quadrature_covariance(sol, j)
        assert c.var_x == pytest.approx(xx[j, j], abs=1e-7)
        assert c.var_p == pytest.approx(pp[j, j], abs=1e-7)
        assert c.cov_xp == pytest.approx(0.0, abs=1e-7)


@settings(max_examples=40, deadline=None)
@given(systems(cross=True))
def test_symplectic_normalisation(sys_):
    assume(quadratic_form_oracle(sys_) is not None)
    sol = solve(sys_)
    assert np.allclose(sol.symplectic_norms, 1.0, atol=1e-8)
    T = sol.transform()
    n = len(sol.frequencies)
    sig = np.diag(np.concatenate([np.ones(n), -np.ones(n)]))
    assert np.allclose(T @ sig @ T.conj().T, sig, atol=1e-7)
    assert np.allclose(sol.inverse_transform() @ T, np.eye(2 * n), atol=1e-7)


def test_resonant_pair_closed_form():
    for eta in (0.1, 0.5, 1.0, 2.3):
        sol = solve(single_pair(eta, nu_cavity=1.7))
        expect = 1.7 * np.array([math.sqrt(1 + eta**2) - eta, math.sqrt(1 + eta**2) + eta])
        assert np.allclose(sol.frequencies, expect, rtol=1e-10)


def test_dynamical_matrix_layout():
    m = build_dynamical_matrix(single_pair(0.5))
    assert m.shape == (4, 4)
    assert np.allclose(m[:2, :2], -m[2:, 2:])
    assert np.allclose(m[:2, 2:], -m[2:, :2])


def test_uncoupled_system_has_vacuum():
    sys_ = ModeSystem(np.array([1.0, 2.0]), np.array([0.5, 0.0, 3.0]), np.zeros((2, 3)))
    sol = solve(sys_)
    N, M = ground_state_populations(sol)
    assert np.allclose(N, 0) and np.allclose(M, 0)
    assert sol.frequencies == pytest.approx([0.0, 0.5, 1.0, 2.0, 3.0], abs=1e-12)
    cl = classify_polaritons(sol)
    assert cl.counts(1)[1] == 1


def test_zero_frequency_coupled_matter_rejected():
    with pytest.raises(SingularDiamagneticError):
        ModeSystem(np.array([1.0]), np.array([0.0]), np.array([[0.1]]))


def test_instability_detected():
    # diagonal-only diamagnetism with two strongly coupled cavities is unstable
    sys_ = ModeSystem(np.array([1.0, 1.0]), np.array([1.0]), np.array([[2.0], [2.0]]))
    assert quadratic_form_oracle(sys_) is None
    with pytest.raises(InstabilityError):
        solve(sys_)
    assert solve(ModeSystem(sys_.cavity_freqs, sys_.matter_freqs, sys_.coupling,
                            cross_diamagnetic=True)).frequencies.min() > 0


def test_permutation_invariance():
    rng = np.random.default_rng(3)
    mf = rng.uniform(0.3, 3, 6)
    g = rng.uniform(0, 0.6, (2, 6))
    base = ModeSystem(np.array([0.8, 1.9]), mf, g, cross_diamagnetic=True)
    perm = rng.permutation(6)
    other = ModeSystem(np.array([0.8, 1.9]), mf[perm], g[:, perm], cross_diamagnetic=True)
    a, b = solve(base), solve(other)
    assert np.allclose(a.frequencies, b.frequencies)
    Na, Ma = ground_state_populations(a)
    Nb, Mb = ground_state_populations(b)
    assert np.allclose(Na, Nb) and np.allclose(Ma[perm], Mb)


def test_device_dimension_and_counts():
    dev = paper_device(48, cross_diamagnetic=True, global_scale=0.23864)
    sys_ = dev.mode_system(0.52)
    assert build_dynamical_matrix(sys_).shape == (46, 46)
    sol = solve(sys_)
    cl = classify_polaritons(sol)
    assert len(cl.dark) == 10
    assert sum(1 for lab in cl.labels if lab[0] == "LP") == 2
    assert len(cl.dark) + len(cl.lp) + sum(len(v) for v in cl.up.values()) == 23


def test_single_mode_n_monotone_and_inverse():
    etas = np.linspace(0, 3, 31)
    ns = [single_mode_photon_number(e) for e in etas]
    assert ns[0] == 0 and np.all(np.diff(ns) > 0)
    for e in (0.3, 1.43, 2.83):
        assert equivalent_eta(single_mode_photon_number(e)) == pytest.approx(e, rel=1e-6)
    with pytest.raises(ValueError):
        single_mode_photon_number(-1)


def test_ground_state_report_dict():
    rep = ground_state_report(solve(single_pair(1.43)))
    d = rep.to_dict()
    assert d["N_total"] == pytest.approx(0.3725, abs=5e-4)
    assert d["eta_total"] == pytest.approx(1.43, rel=1e-6)
    cm = d["cavity_modes"][0]
    assert cm["var_X"] * cm["var_P"] >= 0.25


def test_vacuum_squeezes_x_quadrature():
    c = quadrature_covariance(solve(single_pair(1.0)), 0)
    assert c.var_x < 0.5 < c.var_p
    assert c.photon_number == pytest.approx(ground_state_populations(solve(single_pair(1.0)))[0][0])
