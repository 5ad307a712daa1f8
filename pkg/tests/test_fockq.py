import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from strongfield import fockq
from strongfield.errors import CrossCheckError, DivergentIntegralError, NoLambdaFoundError
from strongfield.fockq import (KahlerWeight, build_space, cn_closed_form, cn_quadrature,
                               commutator_diagonal, commutator_matrix, lowering_matrix,
                               moment_closed_form, raising_matrix, semiclassical_check,
                               sphere_coordinates, su2_report, toeplitz_matrix)


def test_weight_validation():
    with pytest.raises(ValueError):
        KahlerWeight("torus")
    with pytest.raises(ValueError):
        KahlerWeight.plane(0.0)
    with pytest.raises(ValueError):
        KahlerWeight.disc(-1.0)
    with pytest.raises(ValueError):
        KahlerWeight.monopole(1.0)
    assert KahlerWeight.monopole(4).k_max == 2
    assert KahlerWeight.monopole(4.5).k_max == 3
    assert KahlerWeight.plane().k_max is None


def test_cn_examples():
    assert cn_quadrature(KahlerWeight.plane(1.0), 3) == pytest.approx(6.0, rel=1e-12)
    assert cn_quadrature(KahlerWeight.plane(1.0), 0) == pytest.approx(1.0, rel=1e-12)
    w = KahlerWeight.monopole(4)
    assert [cn_quadrature(w, n) for n in range(3)] == pytest.approx([1 / 3, 1 / 6, 1 / 3],
                                                                   rel=1e-10)
    assert cn_closed_form(w, 1) == pytest.approx(1 / 6, rel=1e-15)
    assert cn_closed_form(KahlerWeight.disc(math.sqrt(700.0)), 2) == pytest.approx(2.0, abs=1e-12)
    assert cn_closed_form(KahlerWeight.disc(1.0), 0) == pytest.approx(1 - math.exp(-1), rel=1e-14)


@pytest.mark.parametrize("hbar", [1.0, 0.5, 0.1])
def test_plane_weight_convention(hbar):
    # c_n = n! hbar^(n+1), so c_{n+1}/c_n = (n+1) hbar
    w = KahlerWeight.plane(hbar)
    for n in range(8):
        assert cn_closed_form(w, n) == pytest.approx(math.factorial(n) * hbar ** (n + 1), rel=1e-14)


@pytest.mark.parametrize("hbar,r0", [(1.0, 1.0), (0.1, 1.0), (0.3, 2.0)])
def test_disc_weight_matches_scipy(hbar, r0):
    w = KahlerWeight.disc(r0, hbar)
    X = r0 ** 2 / hbar
    for n in range(12):
        expected = hbar ** (n + 1) * special.gammainc(n + 1, X) * special.gamma(n + 1)
        assert cn_closed_form(w, n) == pytest.approx(expected, rel=1e-12)


def test_divergence_is_detected_before_integrating():
    w = KahlerWeight.monopole(4)
    with pytest.raises(DivergentIntegralError):
        cn_quadrature(w, 3)
    with pytest.raises(DivergentIntegralError):
        cn_closed_form(w, 3)
    with pytest.raises(DivergentIntegralError):
        build_space(w, 3)
    # M = 2 still has c_0 but no excited state
    assert build_space(KahlerWeight.monopole(2)).dim == 1
    with pytest.raises(DivergentIntegralError):
        cn_quadrature(KahlerWeight.monopole(2), 1)


def test_build_space_examples():
    assert build_space(KahlerWeight.plane(1.0), 5).c.tolist() == [1, 1, 2, 6, 24, 120]
    assert build_space(KahlerWeight.monopole(4)).dim == 3
    assert build_space(KahlerWeight.monopole(3)).dim == 2
    assert build_space(KahlerWeight.plane()).K == fockq.DEFAULT_K


def test_cross_check_failure_lists_both_values(monkeypatch):
    monkeypatch.setattr(fockq, "cn_quadrature", lambda w, n: 1.5 * cn_closed_form(w, n))
    with pytest.raises(CrossCheckError, match="closed form .* quadrature"):
        build_space(KahlerWeight.plane(1.0), 3)


def test_raising_and_lowering():
    R = raising_matrix(build_space(KahlerWeight.plane(1.0), 4)).matrix
    assert np.allclose(np.diag(R, -1), np.sqrt([1, 2, 3, 4]))
    R = raising_matrix(build_space(KahlerWeight.monopole(4))).matrix
    assert np.allclose(np.diag(R, -1), [math.sqrt(0.5), math.sqrt(2)])
    assert np.all(raising_matrix(build_space(KahlerWeight.monopole(2))).matrix == 0)
    space = build_space(KahlerWeight.disc(1.0, 0.2), 6)
    assert np.array_equal(lowering_matrix(space).matrix, raising_matrix(space).matrix.conj().T)


@pytest.mark.parametrize("weight", [KahlerWeight.plane(0.5), KahlerWeight.disc(1.0, 0.3),
                                    KahlerWeight.monopole(9)])
def test_commutator_identity_away_from_truncation(weight):
    space = build_space(weight, 6)
    diag = np.real(np.diag(commutator_matrix(space).matrix))
    analytic = commutator_diagonal(space)
    assert np.allclose(diag[:space.K], analytic, atol=1e-12)
    assert np.allclose(commutator_matrix(space).matrix, np.diag(diag))


@pytest.mark.parametrize("hbar", [1.0, 0.5, 0.1])
def test_plane_commutator(hbar):
    space = build_space(KahlerWeight.plane(hbar), 31)
    assert np.allclose(commutator_diagonal(space), -hbar, rtol=0, atol=1e-10)
    assert len(commutator_diagonal(space, include_last=True)) == 32


def test_disc_commutator_correction():
    delta = {}
    for h in (0.2, 0.1, 0.05):
        delta[h] = commutator_diagonal(build_space(KahlerWeight.disc(1.0, h), 3))[0] + h
        X = 1.0 / h
        assert delta[h] == pytest.approx(h * X * math.exp(-X) / -math.expm1(-X), rel=1e-6)
    assert 0 < delta[0.1] < 1e-3
    assert delta[0.2] > delta[0.1] > delta[0.05]


def test_toeplitz_examples():
    space = build_space(KahlerWeight.plane(1.0), 6)
    assert np.allclose(toeplitz_matrix(space).matrix, np.eye(7), atol=1e-9)
    assert np.allclose(toeplitz_matrix(space, 1, 0).matrix, raising_matrix(space).matrix,
                       atol=1e-9)
    assert np.allclose(toeplitz_matrix(space, 0, 1).matrix, lowering_matrix(space).matrix,
                       atol=1e-9)
    assert np.allclose(np.diag(toeplitz_matrix(space, 1, 1).matrix), np.arange(1, 8), atol=1e-8)


def test_toeplitz_quadrature_matches_closed_form():
    space = build_space(KahlerWeight.monopole(7))
    for p, q, k in [(1, 0, 1), (0, 1, 1), (0, 0, 1), (1, 1, 2)]:
        a = toeplitz_matrix(space, p, q, k, "quadrature").matrix
        b = toeplitz_matrix(space, p, q, k, "closed_form").matrix
        assert np.allclose(a, b, atol=1e-10)
    with pytest.raises(ValueError):
        toeplitz_matrix(space, -1, 0)
    with pytest.raises(DivergentIntegralError):
        toeplitz_matrix(space, 1, 1)  # s = K + 1 = M - 1 diverges


def test_moment_closed_form_plane_with_extra_power_has_none():
    assert moment_closed_form(KahlerWeight.plane(), 1.0, 1) is None


def test_sphere_coordinates_are_hermitian():
    X, Y, Z = sphere_coordinates(build_space(KahlerWeight.monopole(6)))
    for T in (X, Y, Z):
        assert np.allclose(T, T.conj().T, atol=1e-12)


@pytest.mark.parametrize("M", [3, 4, 5, 8, 16])
def test_su2_report(M):
    rep = su2_report(build_space(KahlerWeight.monopole(M)))
    assert rep.dimension == M - 1
    assert rep.spin == (M - 2) / 2
    assert rep.lam_fit == pytest.approx(M - 1, rel=1e-12)
    assert rep.max_residual_fit < 1e-10
    assert rep.element_error_fit < 1e-10
    assert rep.dimension_law_holds
    # the prefactor lam = M does not close the algebra
    assert rep.residuals_nominal["ladder_commutator"] > 1e-3
    assert rep.ladder_ratio_nominal_error > 1e-3
    assert rep.identification_nominal == -1.0
    assert all(v >= 0 for v in rep.residuals_fit.values())


def test_su2_spin_one_elements():
    rep = su2_report(build_space(KahlerWeight.monopole(4)))
    assert rep.lam_fit == pytest.approx(3.0, rel=1e-14)
    assert rep.element_error_fit < 1e-12


def test_su2_spin_half():
    space = build_space(KahlerWeight.monopole(3))
    rep = su2_report(space)
    R = raising_matrix(space).matrix
    kinv = np.linalg.inv(np.eye(2) + R @ R.conj().T)
    Jp = rep.lam_fit * R.conj().T @ kinv
    assert np.allclose(Jp, [[0, 1], [0, 0]])


def test_su2_refusals():
    with pytest.raises(ValueError):
        su2_report(build_space(KahlerWeight.monopole(2)))
    with pytest.raises(ValueError):
        su2_report(build_space(KahlerWeight.plane(), 3))
    with pytest.raises(ValueError):
        su2_report(build_space(KahlerWeight.monopole(4.5)))
    with pytest.raises(NoLambdaFoundError):
        su2_report(build_space(KahlerWeight.monopole(8), perturb=1e-4))


def test_semiclassical_plane():
    rep = semiclassical_check(build_space(KahlerWeight.plane(0.5), 10))
    assert rep.passed
    assert rep.details["max_deviation"] < 1e-12
    assert rep.details["dirac_xy"] == pytest.approx(-1.0)


def test_semiclassical_monopole():
    rep = semiclassical_check(build_space(KahlerWeight.monopole(8)))
    assert rep.passed
    assert 0.3 <= rep.details["closure_ratio"] <= 0.7
    assert rep.details["low"]["constant_commutator"] < 1e-10
    assert rep.details["low"]["kappa"] == pytest.approx([-0.25] * 3, rel=1e-10)
    with pytest.raises(ValueError):
        semiclassical_check(build_space(KahlerWeight.disc(1.0), 3))


def test_table_rows():
    rows = build_space(KahlerWeight.monopole(4)).table_rows()
    assert [r[0] for r in rows] == [0, 1, 2]
    assert rows[0][3] == pytest.approx(-0.5)
    assert rows[2][3] is None  # c_3 diverges


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 40))
def test_monopole_dimension_law_and_positivity(M):
    space = build_space(KahlerWeight.monopole(M), check=False)
    assert space.dim == M - 1
    assert np.all(space.c > 0)
    R = raising_matrix(space).matrix
    assert np.all(np.real(np.diag(np.eye(space.dim) + R @ R.conj().T)) >= 1)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 3.0), st.floats(0.3, 3.0))
def test_disc_weights_below_plane(hbar, r0):
    # cutting the weight off can only shrink the moments
    d = build_space(KahlerWeight.disc(r0, hbar), 8, check=False).c
    p = build_space(KahlerWeight.plane(hbar), 8, check=False).c
    assert np.all(d > 0) and np.all(d <= p * (1 + 1e-12))
