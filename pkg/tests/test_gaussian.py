import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from deepstrong.gaussian import (GaussianModeState, UnphysicalCovarianceError, fock_probabilities,
                                 wigner_grid)
from deepstrong.hopfield import quadrature_covariance, single_pair, solve
from deepstrong.oracle import from_mode_system, ground_state, observables


def squeezed(r):
    return GaussianModeState(0.5 * math.exp(-2 * r), 0.5 * math.exp(2 * r))


def test_vacuum_wigner_peak():
    x, p, W = wigner_grid(GaussianModeState(0.5, 0.5), resolution=101)
    assert W[50, 50] == pytest.approx(1 / math.pi, rel=1e-12)
    assert x[0] == -5 and p[-1] == 5


@settings(max_examples=30, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(0.2, 3.0), st.floats(-0.5, 0.5))
def test_wigner_normalised_and_positive(vx, vp, c):
    c = c * math.sqrt(vx * vp)
    try:
        s = GaussianModeState(vx, vp, c)
    except UnphysicalCovarianceError:
        return
    half = 8 * math.sqrt(max(vx, vp))
    x, p, W = wigner_grid(s, (-half, half), (-half, half), 301)
    integral = W.sum() * (x[1] - x[0]) * (p[1] - p[0])
    assert integral == pytest.approx(1.0, abs=1e-3)
    assert np.all(W >= 0)


def test_wigner_axis_order():
    s = GaussianModeState(0.2, 2.0)
    x, p, W = wigner_grid(s, (-1, 1), (-1, 1), (3, 5))
    assert W.shape == (3, 5)
    # wider along p: moving one unit along p costs less than along x
    assert W[1, 4] > W[2, 2]


def test_unphysical_rejected():
    with pytest.raises(UnphysicalCovarianceError):
        GaussianModeState(0.3, 0.3)
    with pytest.raises(UnphysicalCovarianceError):
        GaussianModeState(-1.0, 1.0)


@pytest.mark.parametrize("r", [0.1, 0.5, 1.0])
def test_squeezed_vacuum_closed_form(r):
    probs = fock_probabilities(squeezed(r), n_max=40).probabilities
    for n in range(10):
        expect = math.factorial(2 * n) / (2**n * math.factorial(n)) ** 2 \
            * math.tanh(r) ** (2 * n) / math.cosh(r)
        assert probs[2 * n] == pytest.approx(expect, abs=1e-10)
        assert probs[2 * n + 1] == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("nbar", [0.0, 0.3, 2.0])
def test_thermal_geometric(nbar):
    probs = fock_probabilities(GaussianModeState(nbar + 0.5, nbar + 0.5), n_max=60).probabilities
    n = np.arange(15)
    assert np.allclose(probs[:15], nbar**n / (nbar + 1) ** (n + 1), atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.3, 1.5), st.floats(1.0, 1.4), st.floats(-1.5, 1.5))
def test_fock_mean_matches_covariance(vx, scale, theta):
    # rotate a squeezed thermal covariance into a general orientation
    vp = scale**2 / (4 * vx)
    R = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    V = R @ np.diag([vx, vp]) @ R.T
    s = GaussianModeState(V[0, 0], V[1, 1], V[0, 1])
    dist = fock_probabilities(s)
    assert dist.total == pytest.approx(1.0, abs=1e-6)
    assert dist.mean == pytest.approx(s.mean_photon_number, abs=1e-4)


@pytest.mark.parametrize("eta", [0.5, 1.0, 3.0])
def test_fock_matches_exact_oracle(eta):
    gs = GaussianModeState.from_covariance(quadrature_covariance(solve(single_pair(eta)), 0))
    probs = fock_probabilities(gs, n_max=40).probabilities
    obs = observables(ground_state(from_mode_system(single_pair(eta), n_max=60)))
    assert np.allclose(probs[:12], obs["fock"][0][:12], atol=1e-8)


def test_strong_coupling_anisotropy():
    gs = GaussianModeState.from_covariance(quadrature_covariance(solve(single_pair(3.0)), 0))
    x, p, W = wigner_grid(gs, (-4, 4), (-4, 4), 201)
    # compare 1/e widths of the two cuts through the origin
    wx = np.ptp(x[W[:, 100] > W[100, 100] / math.e])
    wp = np.ptp(p[W[100, :] > W[100, 100] / math.e])
    assert wp / wx > 1.5
    nbar, r, _ = gs.squeezing()
    assert r > 0.4 and nbar > 0.1
