import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from deepstrong.coupling import (CouplingMatrix, WeightFileError, WeightProfile, aggregate_coupling,
                                 load_weights, synthetic_profile, synthetic_weight)
from deepstrong.device import paper_device
from deepstrong.hopfield import ground_state_populations, solve
from deepstrong.plasmons import q_of_alpha


def test_synthetic_weight_examples():
    assert synthetic_weight(1, 2, 0.0, 30, {1: 0.7}) == pytest.approx(0.7)
    q = abs(q_of_alpha(3, 30))
    assert synthetic_weight(1, 3, math.log(2) / q, 30) == pytest.approx(0.5)
    assert synthetic_weight(1, -3, 0.0, 30) == 0.0
    assert synthetic_weight(2, 4, 0.1, 30, {(2, 4): 2.0, 2: 9.0}) == pytest.approx(
        2.0 * math.exp(-q_of_alpha(4, 30) * 0.1))
    with pytest.raises(ValueError):
        synthetic_weight(1, 1, -0.1, 30)


def test_aggregate_examples():
    one = WeightProfile({(1, 0, 0): 0.4})
    assert aggregate_coupling(one, 2.0).omega_R[0, 0] == pytest.approx(0.8)
    pair = WeightProfile({(1, 1, 0): 3.0, (1, 1, 1): 4.0})
    assert aggregate_coupling(pair, 0.5).omega_R[0, 0] == pytest.approx(2.5)
    with pytest.raises(ValueError, match="empty"):
        aggregate_coupling(WeightProfile({}), 1.0)


@given(st.integers(1, 60), st.floats(0.01, 3.0))
def test_identical_wells_scale_as_sqrt_n(n, a):
    prof = WeightProfile({(1, 2, w): a for w in range(n)})
    assert aggregate_coupling(prof, 1.0).omega_R[0, 0] == pytest.approx(a * math.sqrt(n), rel=1e-12)


def test_profile_validation():
    with pytest.raises(ValueError, match="negative"):
        WeightProfile({(1, 1, 0): -0.1})
    with pytest.raises(ValueError, match="dark"):
        WeightProfile({(1, -1, 0): 0.1})
    with pytest.raises(ValueError):
        CouplingMatrix(np.array([[0.1]]), (1,), (-1,))


def test_coupling_matrix_read_only_and_scaled():
    cm = aggregate_coupling(WeightProfile({(1, 1, 0): 1.0, (2, 0, 0): 2.0}), 0.3)
    with pytest.raises(ValueError):
        cm.omega_R[0, 0] = 5
    assert np.allclose(cm.scaled(2.0).omega_R, 2 * cm.omega_R)


def test_depth_offset_suppression():
    def om(offset):
        depths = [offset + 0.05 * i for i in range(5)]
        return aggregate_coupling(synthetic_profile([1], 5, depths, 30), 1.0).row(1)

    a, b = om(0.1), om(0.5)
    alphas = list(range(-5, 6))
    for c, al in enumerate(alphas):
        if al > 0:
            assert b[c] < a[c]
        elif al == 0:
            assert b[c] == pytest.approx(a[c])


def test_saturation_with_depth_decay():
    ratios = [paper_device(n, coupled_modes=(1,)).coupling().row(1) / math.sqrt(n)
              for n in (1, 3, 6, 12, 24, 48)]
    assert np.all(np.diff(np.array(ratios), axis=0) <= 1e-15)


def test_scale_monotone_in_population():
    dev = paper_device(6, coupled_modes=(1,))
    ns = [ground_state_populations(solve(dev.with_(global_scale=s).mode_system(0.52)))[0][0]
          for s in (0.05, 0.1, 0.2, 0.4)]
    assert np.all(np.diff(ns) > 0)


def test_load_weights_roundtrip(tmp_path):
    p = tmp_path / "w.csv"
    p.write_text("j,alpha,qw,amplitude\n1,2,0,0.75\n", encoding="utf-8")
    prof = load_weights(p)
    assert dict(prof.amplitudes) == {(1, 2, 0): 0.75}
    assert prof.source == "file"


@pytest.mark.parametrize("body,exc,needle", [
    ("1,2,0\n", WeightFileError, ":2:"),
    ("1,2,0,0.5\nx,1,0,0.2\n", WeightFileError, ":3:"),
    ("1,2,0,0.5\n1,2,0,0.6\n", WeightFileError, "duplicate"),
    ("1,2,0,-0.5\n", ValueError, "negative"),
    ("1,-2,0,0.5\n", ValueError, "dark"),
])
def test_load_weights_errors(tmp_path, body, exc, needle):
    p = tmp_path / "w.csv"
    p.write_text("j,alpha,qw,amplitude\n" + body, encoding="utf-8")
    with pytest.raises(exc, match=needle):
        load_weights(p)


def test_load_weights_header_and_empty(tmp_path):
    p = tmp_path / "w.csv"
    p.write_text("j,a,qw,amplitude\n", encoding="utf-8")
    with pytest.raises(WeightFileError, match="header"):
        load_weights(p)
    p.write_text("j,alpha,qw,amplitude\n", encoding="utf-8")
    prof = load_weights(p)
    assert len(prof) == 0
    with pytest.raises(ValueError, match="empty"):
        aggregate_coupling(prof, 1.0)


def test_load_weights_qw_range(tmp_path):
    p = tmp_path / "w.csv"
    p.write_text("j,alpha,qw,amplitude\n1,1,5,0.1\n", encoding="utf-8")
    with pytest.raises(WeightFileError, match="out of range"):
        load_weights(p, n_qw=3)
