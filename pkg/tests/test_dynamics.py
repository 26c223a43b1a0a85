import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from sshdefect.dynamics import (
    EVOLUTION_HEADER,
    NearDefectiveWarning,
    StepSizeError,
    delta_excitation,
    eigen_expansion,
    localization_score,
    propagate,
)
from sshdefect.lattice import LatticeSpec, build_hamiltonian

from conftest import asym, pt


def expm_fields(h, psi0, z_grid):
    return np.array([expm(-1j * h * z) @ psi0 for z in z_grid])


def test_identity_evolution():
    rec = propagate(np.zeros((1, 1)), [1.0], 5.0, 10)
    np.testing.assert_array_equal(rec.fields, np.ones((11, 1)))


def test_rabi_oscillation():
    rec = propagate([[0, 1], [1, 0]], [1, 0], math.pi, 2)
    p = np.abs(rec.fields[:, 0]) ** 2
    assert p[1] == pytest.approx(0, abs=1e-10)
    assert p[2] == pytest.approx(1, abs=1e-10)


def test_single_site_gain():
    rec = propagate([[0.3j]], [1.0], 1.0, 4)
    assert rec.total_intensity[-1] == pytest.approx(math.exp(0.6), rel=1e-10)
    np.testing.assert_array_equal(rec.normalized_intensities, 1.0)


def test_grid_and_normalization():
    rec = propagate(build_hamiltonian(pt(0.5, m=12)), delta_excitation(25, 25), 30.0, 600)
    assert rec.z_grid[0] == 0 and np.all(np.diff(rec.z_grid) > 0) and len(rec.z_grid) == 601
    np.testing.assert_allclose(rec.normalized_intensities.sum(axis=1), 1, atol=1e-12)


@pytest.mark.parametrize("spec", [LatticeSpec(25, 0.5, 1.0), asym(0.5), pt(0.5, m=12), pt(0.3)])
def test_rk4_matches_matrix_exponential_and_eigen_expansion(spec):
    h = build_hamiltonian(spec)
    psi0 = delta_excitation(25, 25)
    rec = propagate(h, psi0, 30.0, 60)
    ref = expm_fields(h, psi0, rec.z_grid)
    assert np.abs(rec.fields - ref).max() <= 1e-8
    assert np.abs(rec.fields - eigen_expansion(h, psi0, rec.z_grid)).max() <= 1e-8
    assert np.abs(propagate(h, psi0, 30.0, 60, method="eigen").fields - ref).max() <= 1e-8


def test_hermitian_norm_conservation():
    rec = propagate(build_hamiltonian(LatticeSpec(25, 0.5, 1.0)), delta_excitation(25, 13), 30.0, 600)
    assert np.abs(rec.total_intensity - 1).max() <= 1e-9


def test_time_reversal():
    h = build_hamiltonian(asym(0.0))
    psi0 = delta_excitation(25, 7)
    forward = propagate(h, psi0, 20.0, 100).fields[-1]
    back = propagate(-h, forward, 20.0, 100).fields[-1]
    assert np.abs(back - psi0).max() <= 1e-8


@settings(max_examples=20, deadline=None)
@given(a=st.complex_numbers(max_magnitude=3), b=st.complex_numbers(max_magnitude=3),
       s1=st.integers(1, 25), s2=st.integers(1, 25))
def test_linearity(a, b, s1, s2):
    h = build_hamiltonian(pt(0.4, m=3))
    p1, p2 = delta_excitation(25, s1), delta_excitation(25, s2)
    combo = a * p1 + b * p2
    if np.linalg.norm(combo) == 0:
        return
    f = propagate(h, combo, 10.0, 20).fields
    f1 = propagate(h, p1, 10.0, 20).fields
    f2 = propagate(h, p2, 10.0, 20).fields
    assert np.abs(f - (a * f1 + b * f2)).max() <= 1e-9 * max(1, abs(a) + abs(b))


def test_near_defective_falls_back_to_integration():
    h = np.array([[0, 1e-12], [1, 0]], dtype=complex)
    with pytest.warns(NearDefectiveWarning):
        rec = propagate(h, [0, 1], 1.0, 10, method="eigen")
    assert np.abs(rec.fields[-1] - expm(-1j * h) @ [0, 1]).max() < 1e-10


def test_step_size_error():
    with pytest.raises(StepSizeError):
        propagate([[0, 1], [1, 0]], [1, 0], 10.0, 5, max_step=3.0)


def test_bad_inputs():
    with pytest.raises(ValueError):
        propagate([[0]], [0], 1.0, 1)
    with pytest.raises(ValueError):
        propagate([[0]], [1], 0.0, 1)
    with pytest.raises(ValueError):
        propagate([[0]], [1], 1.0, 0)
    with pytest.raises(ValueError):
        propagate([[0]], [1], 1.0, 1, method="euler")


def test_delta_excitation():
    np.testing.assert_array_equal(delta_excitation(3, 1), [1, 0, 0])
    assert delta_excitation(25, 25)[24] == 1 and delta_excitation(25, 25).sum() == 1
    assert delta_excitation(25, 13)[12] == 1
    with pytest.raises(IndexError):
        delta_excitation(3, 4)
    with pytest.raises(IndexError):
        delta_excitation(3, 0)


def test_localization_score_uncoupled():
    rec = propagate(np.zeros((3, 3)), delta_excitation(3, 1), 10.0, 50)
    assert localization_score(rec, 1) == 1.0


def test_clean_edge_contrast():
    h = build_hamiltonian(LatticeSpec(25, 0.5, 1.0))
    left = localization_score(propagate(h, delta_excitation(25, 1), 30.0, 600), 1)
    right = localization_score(propagate(h, delta_excitation(25, 25), 30.0, 600), 25)
    assert left > 5 * right
    assert right < 0.01


def test_pt_right_edge_localizes():
    score = {}
    for gamma in (0.0, 1.0):
        rec = propagate(build_hamiltonian(pt(gamma, m=12)), delta_excitation(25, 25), 30.0, 600)
        score[gamma] = localization_score(rec, 25)
    assert score[1.0] > 3 * score[0.0]


def test_serializers():
    rec = propagate([[0, 1], [1, 0]], [1, 0], 1.0, 2)
    lines = rec.to_csv().splitlines()
    assert lines[0] == ",".join(EVOLUTION_HEADER)
    assert lines[1] == "0.0,1,1.0" and len(lines) == 1 + 3 * 2
    grid = rec.to_grid().splitlines()
    assert grid[0] == "# zsteps=2 nsites=2"
    assert len(grid) == 4 and grid[1] == "1.0 0.0"
