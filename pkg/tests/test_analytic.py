import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from sshdefect.analytic import (
    DefectMismatchError,
    RecursionBlowupError,
    clean_zero_mode,
    eigen_residual,
    pt_right_edge_mode_at_gamma_c,
    relocated_zero_mode_at_gc,
    verify_no_real_zero_at_gamma_c,
    zero_mode_oracle,
)
from sshdefect.lattice import InvalidSpecError, LatticeSpec
from sshdefect.profiles import ModeProfile
from sshdefect.spectral import classify_modes, spectrum_of, zero_mode_profile

from conftest import asym, pt


def proportional(a, b):
    ref = ModeProfile.from_amplitudes(b, "analytic").amplitudes
    return np.allclose(ModeProfile.from_amplitudes(a, "analytic").amplitudes, ref, rtol=0, atol=1e-14)


def test_clean_five_sites():
    p = clean_zero_mode(5, 0.5, 1.0)
    assert proportional(p.amplitudes, [1, 0, -0.5, 0, 0.25])
    assert p.source == "analytic"


def test_clean_three_sites():
    np.testing.assert_allclose(clean_zero_mode(3, 0.5, 1.0).intensities, [0.8, 0, 0.2], atol=1e-15)


def test_clean_ratio():
    p = clean_zero_mode(25, 0.5, 1.0)
    assert p.intensity(3) / p.intensity(1) == pytest.approx(0.25, abs=1e-15)


def test_relocated_m5():
    p = relocated_zero_mode_at_gc(25, 0.5, 1.0, 5)
    assert np.all(p.intensities[:10] == 0)
    assert p.argmax_site() == 11
    assert p.intensity(13) / p.intensity(11) == pytest.approx(0.25, abs=1e-15)


def test_relocated_m1():
    p = relocated_zero_mode_at_gc(7, 0.5, 1.0, 1)
    assert proportional(p.amplitudes, [0, 0, 1, 0, -0.5, 0, 0.25])


def test_relocated_last_dimer_is_delta():
    p = relocated_zero_mode_at_gc(25, 0.5, 1.0, 12)
    expected = np.zeros(25)
    expected[24] = 1
    np.testing.assert_array_equal(p.intensities, expected)


def test_relocated_rejects_bad_m():
    with pytest.raises(InvalidSpecError):
        relocated_zero_mode_at_gc(25, 0.5, 1.0, 13)


def test_oracle_dispatch():
    assert zero_mode_oracle(asym(1.0)).argmax_site() == 11
    assert zero_mode_oracle(pt(0.0)).argmax_site() == 1
    with pytest.raises(DefectMismatchError):
        zero_mode_oracle(asym(0.5))
    with pytest.raises(DefectMismatchError):
        zero_mode_oracle(pt(1.0))


oracle_specs = st.builds(
    lambda half, kf, c, mf, relocated: (
        LatticeSpec(2 * half + 1, kf * c, c, _defect(half, mf, c, relocated))),
    half=st.integers(1, 20),
    kf=st.floats(0.1, 0.9),
    c=st.floats(0.5, 2.0),
    mf=st.floats(0, 0.999),
    relocated=st.booleans(),
)


def _defect(half, mf, c, relocated):
    from sshdefect.lattice import DefectSpec
    return DefectSpec("asym", 1 + int(mf * half), c if relocated else 0.0)


@settings(max_examples=80, deadline=None)
@given(oracle_specs)
def test_chiral_oracles_solve_eigenproblem(spec):
    p = zero_mode_oracle(spec)
    assert eigen_residual(spec, p, 0.0) <= 1e-10


@settings(max_examples=40, deadline=None)
@given(oracle_specs)
def test_chiral_oracles_match_eigensolver(spec):
    # the block left of a g = c defect has an edge pair near +-k (k/c)^(m-1); keep it clear of E = 0
    assume(spec.defect.strength == 0 or (spec.k / spec.c) ** spec.defect.m > 1e-4)
    p = zero_mode_oracle(spec)
    numeric = zero_mode_profile(spec, spectrum_of(spec))
    assert numeric.distance(p) <= 1e-8


@settings(max_examples=50, deadline=None)
@given(half=st.integers(1, 30), kf=st.floats(0.05, 0.95))
def test_clean_geometric_sequence(half, kf):
    p = clean_zero_mode(2 * half + 1, kf, 1.0)
    odd = p.intensities[0::2]
    np.testing.assert_allclose(odd[1:] / odd[:-1], kf ** 2, rtol=1e-12)
    assert np.all(p.intensities[1::2] == 0)


def _pt_edge(n=25):
    spec = pt(1.0, m=(n - 1) // 2, n=n)
    s = spectrum_of(spec)
    z = classify_modes(spec, s).zero_mode_index
    return spec, complex(s.eigenvalues[z]), ModeProfile.from_amplitudes(s.vector(z), "numeric")


def test_pt_recursion_matches_eigensolver():
    spec, e_t, numeric = _pt_edge()
    p = pt_right_edge_mode_at_gamma_c(25, 0.5, 1.0, e_t)
    assert p.distance(numeric) <= 1e-8
    assert eigen_residual(spec, p, e_t) <= 1e-10
    assert p.argmax_site() == 25


def test_pt_recursion_phase_staircase():
    _, e_t, _ = _pt_edge()
    a = pt_right_edge_mode_at_gamma_c(25, 0.5, 1.0, e_t).amplitudes
    assert np.abs(a[0::2].imag).max() < 1e-10
    assert np.abs(a[1::2].real).max() < 1e-10


def test_pt_recursion_second_neighbour_ratio():
    _, e_t, _ = _pt_edge()
    a = pt_right_edge_mode_at_gamma_c(25, 0.5, 1.0, e_t).amplitudes
    assert abs(a[-3] / a[-1]) == pytest.approx(abs(e_t) ** 2 / 0.5, rel=1e-12)


@pytest.mark.parametrize("n", [3, 5, 9])
def test_pt_recursion_small_lattices(n):
    spec, e_t, numeric = _pt_edge(n)
    p = pt_right_edge_mode_at_gamma_c(n, 0.5, 1.0, e_t)
    assert eigen_residual(spec, p, e_t) <= 1e-10
    assert p.distance(numeric) <= 1e-8


def test_pt_recursion_blowup_for_wrong_energy():
    with pytest.raises(RecursionBlowupError):
        pt_right_edge_mode_at_gamma_c(101, 0.1, 1.0, 0.3j)


@pytest.mark.parametrize("n", [5, 25])
def test_elimination_forces_trivial_solution(n):
    r = verify_no_real_zero_at_gamma_c(n, 0.5, 1.0)
    assert r.applicable and r.trivial_solution_forced
    assert r.forced_zero_sites == tuple(range(1, n - 1, 2))
    assert r.relations[0] == "psi_%d = I*psi_N" % (n - 1)
    assert r.relations[1] == "psi_%d = 0" % (n - 2)
    assert r.numeric_min_abs_eigenvalue > 1e-4
    assert "trivial solution forced" in r.summary()


def test_elimination_control_without_gain_loss():
    r = verify_no_real_zero_at_gamma_c(25, 0.5, 1.0, gamma=0.0)
    assert not r.applicable
    assert not r.trivial_solution_forced
    assert r.numeric_min_abs_eigenvalue < 1e-10
