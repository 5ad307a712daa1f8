import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from strongfield.errors import ChartBoundaryError, ChartError, ExcludedPointError, UnknownPresetError
from strongfield.geometry import (ChartPoint, DarbouxPotential, DiscPotential, MonopolePotential,
                                  PolynomialPotential, StackPotential, batch_ranks,
                                  evaluate_potential, field_strength, make_potential, null_space,
                                  orient, potential_jacobian, pseudo_inverse_theta, rank_f,
                                  zero_potential)


def _sph_to_cart(r, th, ph):
    return np.array([r * math.sin(th) * math.cos(ph), r * math.sin(th) * math.sin(ph),
                     r * math.cos(th)])


def test_chart_point_validation():
    with pytest.raises(ValueError):
        ChartPoint([1.0])
    with pytest.raises(ValueError):
        ChartPoint([1.0, float("nan")])
    p = ChartPoint([1, 2, 3, 4])
    assert p.dim == 4
    assert np.allclose(p.complex_view(), [1 + 2j, 3 + 4j])
    assert p.shifted([1, 0, 0, 0]).coords == (2.0, 2.0, 3.0, 4.0)


def test_disc_field_inside_and_outside():
    disc = DiscPotential()
    assert field_strength(disc, ChartPoint([0.3, 0.2])).entries[0, 1] == pytest.approx(1.0)
    assert np.all(field_strength(disc, ChartPoint([1.5, 0.2])).entries == 0)
    polar = field_strength(disc, ChartPoint([0.5, 1.0], "polar")).entries
    assert polar[0, 1] == pytest.approx(0.5)


def test_disc_power_four_profile():
    disc = DiscPotential(r0=2.0, power=4)
    r = 0.7
    F = field_strength(disc, ChartPoint([r, 0.0])).entries
    # rho = r^4/4, F_xy = rho'/r = r^2
    assert F[0, 1] == pytest.approx(r ** 2, rel=1e-14)
    Fp = field_strength(disc, ChartPoint([r, 0.3], "polar")).entries
    assert Fp[0, 1] == pytest.approx(r ** 3, rel=1e-14)


@pytest.mark.parametrize("bad", [dict(r0=0), dict(power=3), dict(power=0), dict(scale=0)])
def test_disc_rejects_bad_parameters(bad):
    with pytest.raises(ValueError):
        DiscPotential(**bad)


@pytest.mark.parametrize("N", [1, 2, 4, -3])
def test_monopole_spherical_component(N):
    mono = MonopolePotential(N)
    th = 0.9
    F = field_strength(mono, ChartPoint([1.3, th, 0.4], "spherical")).entries
    assert F[1, 2] == pytest.approx(0.5 * N * math.sin(th), rel=1e-14)
    assert F[0, 1] == 0 and F[0, 2] == 0


@pytest.mark.parametrize("chart", ["north", "south"])
def test_monopole_cartesian_field_is_radial(chart):
    mono = MonopolePotential(2)
    x = np.array([0.3, -0.4, 0.5 if chart == "north" else -0.5])
    F = field_strength(mono, ChartPoint(x, chart)).entries
    r = np.linalg.norm(x)
    b = np.array([F[1, 2], F[2, 0], F[0, 1]])
    assert np.allclose(b, x / r ** 3)  # (N/2) x / r^3 with N = 2


def test_monopole_charts_agree_on_overlap():
    mono = MonopolePotential(3)
    x = [0.2, 0.1, 0.4]
    Fn = field_strength(mono, ChartPoint(x, "north")).entries
    Fs = field_strength(mono, ChartPoint(x, "south")).entries
    assert np.allclose(Fn, Fs, atol=1e-14)
    An = evaluate_potential(mono, ChartPoint(x, "north"))
    As = evaluate_potential(mono, ChartPoint(x, "south"))
    # the two potentials differ by the gauge term N dphi
    dphi = np.array([-x[1], x[0], 0.0]) / (x[0] ** 2 + x[1] ** 2)
    assert np.allclose(An - As, 3 * dphi)


def test_monopole_excluded_sets():
    mono = MonopolePotential(1)
    with pytest.raises(ExcludedPointError):
        field_strength(mono, ChartPoint([0, 0, -1.0], "north"))
    with pytest.raises(ExcludedPointError):
        field_strength(mono, ChartPoint([0, 0, 1.0], "south"))
    with pytest.raises(ChartError):
        field_strength(mono, ChartPoint([0, 0, 0.0], "north"))
    with pytest.raises(ChartError):
        field_strength(mono, ChartPoint([1, 0, 0.0], "polar"))
    field_strength(mono, ChartPoint([0, 0, 1.0], "north"))


def test_finite_difference_stencil_leaving_chart():
    with pytest.raises(ChartBoundaryError):
        potential_jacobian(DiscPotential(), ChartPoint([1e-6, 0.0], "polar"), "finite_difference")
    with pytest.raises(ValueError):
        potential_jacobian(DiscPotential(), ChartPoint([0.5, 0.0]), "spline")


@pytest.mark.parametrize("spec,point", [
    (DiscPotential(power=4, r0=3.0), ChartPoint([0.4, -1.1])),
    (DiscPotential(power=6, scale=-2.0, r0=3.0), ChartPoint([0.8, 0.5, ], "polar")),
    (MonopolePotential(2), ChartPoint([0.3, 0.2, -0.7], "south")),
    (MonopolePotential(1), ChartPoint([1.2, 0.8, 2.0], "spherical")),
    (DarbouxPotential(2, 5), ChartPoint([0.1, 0.2, 0.3, 0.4, 0.5])),
])
def test_exact_jacobian_matches_richardson(spec, point):
    # Richardson extrapolation of central differences: O(h^4)
    h = 1e-3
    d1 = potential_jacobian(spec, point, "finite_difference", h)
    d2 = potential_jacobian(spec, point, "finite_difference", h / 2)
    rich = (4 * d2 - d1) / 3
    exact = potential_jacobian(spec, point, "exact")
    assert np.allclose(rich, exact, rtol=1e-9, atol=1e-10)


def test_darboux_and_stack():
    F = DarbouxPotential(2, 5).field_matrix()
    assert F[0, 1] == 1 and F[2, 3] == 1 and F[4].sum() == 0
    stack = StackPotential()
    assert np.allclose(evaluate_potential(stack, ChartPoint([2.0, 4.0, 7.0])), [-2.0, 1.0, 0.0])
    with pytest.raises(ValueError):
        DarbouxPotential(2, 3)


def test_rank_tolerance_rule():
    F = np.zeros((3, 3))
    F[0, 1], F[1, 0] = 1e-9, -1e-9
    assert rank_f(F) == 0
    assert rank_f(F, tol=1e-10) == 2
    F[0, 1], F[1, 0] = 1e3, -1e3
    F[1, 2], F[2, 1] = 1e-6, -1e-6
    # threshold scales with sigma_max: 1e-6 < 1e-8 * 1e3 is false, so rank stays 2
    assert rank_f(F) == 2


def test_null_space_is_oriented_and_deterministic():
    F = StackPotential().field_matrix()
    N = null_space(F)
    assert np.allclose(N, [[0, 0, 1]])
    # a rotated copy of the same matrix yields the rotated axis, last component positive
    q = np.linalg.qr(np.random.default_rng(1).normal(size=(3, 3)))[0]
    G = q @ F @ q.T
    N = null_space(G)
    assert np.allclose(np.abs(N[0]), np.abs(q[:, 2]))
    assert N[0][np.flatnonzero(np.abs(N[0]) > 1e-12)[-1]] > 0
    assert np.allclose(orient([0.0, -1.0, 0.0]), [0.0, 1.0, 0.0])


def test_stack_theta_is_pseudo_inverse():
    F = StackPotential().field_matrix()
    th = pseudo_inverse_theta(F)
    assert not th.degenerate and th.rank_used == 2
    assert np.allclose(th.entries @ F, np.diag([1.0, 1.0, 0.0]))
    assert th.entries[0, 1] == pytest.approx(-1.0)
    assert pseudo_inverse_theta(np.zeros((2, 2))).degenerate


def test_custom_potential_roundtrip(tmp_path):
    doc = {"dimension": 2, "components": [[], [{"exponents": [1, 0], "coeff": 1.0}]]}
    path = tmp_path / "p.json"
    path.write_text(json.dumps(doc))
    spec = make_potential("custom", file=str(path))
    assert spec.to_json() == doc
    F = field_strength(spec, ChartPoint([0.3, 0.4])).entries
    assert F[0, 1] == 1.0
    with pytest.raises(ValueError):
        PolynomialPotential.from_json({"dimension": 2, "components": [[], []], "extra": 1})
    with pytest.raises(ValueError):
        PolynomialPotential(2, [[{"exponents": [1], "coeff": 1.0}], []])
    assert rank_f(field_strength(zero_potential(3), ChartPoint([1, 2, 3]))) == 0


def test_unknown_preset():
    with pytest.raises(UnknownPresetError):
        make_potential("solenoid")


antisym = arrays(np.float64, (4, 4), elements=st.floats(-10, 10)).map(lambda a: a - a.T)


@settings(max_examples=200, deadline=None)
@given(antisym)
def test_rank_even_and_null_space_annihilated(F):
    r = rank_f(F)
    assert r % 2 == 0 and 0 <= r <= 4
    N = null_space(F)
    assert N.shape == (4 - r, 4)
    if len(N):
        assert np.allclose(N @ N.T, np.eye(len(N)), atol=1e-10)
        assert np.linalg.norm(F @ N.T) <= 1e-6 * max(1.0, np.linalg.norm(F, 2))


@settings(max_examples=200, deadline=None)
@given(antisym)
def test_theta_is_a_generalized_inverse(F):
    th = pseudo_inverse_theta(F).entries
    assert np.allclose(th, -th.T)
    r = rank_f(F)
    sv = np.linalg.svd(F, compute_uv=False)
    if r and sv[r - 1] > 1e-3:
        assert np.allclose(th @ F @ th, th, atol=1e-8 / sv[r - 1] ** 2)
        assert np.allclose(F @ th @ F, F, atol=1e-8 * max(1.0, sv[0]))


def test_batch_ranks_matches_pointwise():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(20, 3, 3))
    A = A - np.swapaxes(A, 1, 2)
    A[::3] = 0
    assert batch_ranks(A).tolist() == [rank_f(a) for a in A]


def test_vectorized_field_matches_pointwise():
    mono = MonopolePotential(2)
    rng = np.random.default_rng(3)
    pts = np.array([_sph_to_cart(r, t, p) for r, t, p in
                    zip(rng.uniform(.5, 2, 30), rng.uniform(.2, 1.4, 30), rng.uniform(0, 6, 30))])
    F = mono.field(pts, "north")
    for k in range(len(pts)):
        assert np.allclose(F[k], field_strength(mono, ChartPoint(pts[k], "north")).entries)
