import math

import numpy as np
import pytest

from degree_lab.errors import ConfigurationError, ResolutionError, SingularLocusError
from degree_lab.maps import (
    Bubble,
    Collapse,
    Compose,
    Constant,
    Identity,
    PowerMap,
    cap_measure,
    cap_measure_exact,
    check_resolution,
    differential,
    parse_map,
)
from degree_lab.mesh import build_mesh, cap_edges, graded_edges, sphere_mesh, torus_mesh

from oracles import FD_FAMILIES as FAMILIES, fd_frame_matrix, smooth_sample as _sample

# -- evaluation -------------------------------------------------------------------

@pytest.mark.parametrize("k", [2, 5, 64])
def test_bubble_cap_midpoint_hits_the_equator(k):
    y = Bubble(k).evaluate([[1 / (2 * k), 0.7]])[0]
    np.testing.assert_allclose(y, [math.pi / 2, 0.7])


@pytest.mark.parametrize("k", [2, 3, 10])
def test_bubble_outside_cap_is_the_south_pole(k):
    assert Bubble(k).evaluate([[0.9, 1.0]])[0, 0] == math.pi


def test_bubble_is_continuous_at_the_cap_boundary():
    k = 7
    y = Bubble(k).evaluate([[1 / k - 1e-9, 0.3]])[0]
    assert abs(y[0] - math.pi) < 1e-6


def test_power_one_is_the_identity():
    x = build_mesh("S2", (8, 16)).coords
    np.testing.assert_allclose(PowerMap(1).evaluate(x), x)


def test_power_map_wraps_longitude():
    y = PowerMap(3).evaluate([[1.0, 5.0]])[0]
    assert y[1] == pytest.approx(math.fmod(15.0, 2 * math.pi))


def test_collapse_center_and_complement():
    f = Collapse(0.25)
    y = f.evaluate([[0.5, 0.5 + 0.125], [0.1, 0.1], [0.5 + 0.2, 0.5]])
    np.testing.assert_allclose(y[0], [math.pi / 2, math.pi / 2])
    assert y[1, 0] == math.pi
    assert y[2, 0] == pytest.approx(0.8 * math.pi)


# -- construction ------------------------------------------------------------------

@pytest.mark.parametrize("make", [lambda: Bubble(0), lambda: Bubble(2.5), lambda: Bubble(3, n=4),
                                  lambda: Collapse(0.5), lambda: Collapse(0.0)])
def test_invalid_parameters(make):
    with pytest.raises(ConfigurationError):
        make()


def test_compose_checks_the_chain():
    with pytest.raises(TypeError):
        Compose(Collapse(), Bubble(4))
    with pytest.raises(TypeError):
        Bubble(4).evaluate([[0.1, 0.2, 0.3]])
    f = Compose(PowerMap(2), Compose(Bubble(8), Collapse()))
    assert f.factors() == [PowerMap(2), Bubble(8), Collapse()]
    assert (f.domain, f.target) == ("T2", "S2")


@pytest.mark.parametrize("text, expected", [
    ("bubble:k=16", Bubble(16)),
    ("bubble:k=4,n=3", Bubble(4, 3)),
    ("power:d=3", PowerMap(3)),
    ("collapse:rho=0.25", Collapse(0.25)),
    ("collapse", Collapse()),
    ("identity:s2", Identity("S2")),
    ("compose:power:d=2|bubble:k=8|collapse", Compose(PowerMap(2), Bubble(8), Collapse())),
])
def test_parse_map(text, expected):
    assert parse_map(text) == expected


@pytest.mark.parametrize("text", ["bubble", "bubble:k=x", "spiral:k=2", "power:d=1,e=2"])
def test_parse_map_rejects(text):
    with pytest.raises(ConfigurationError):
        parse_map(text)


# -- differentials -----------------------------------------------------------------

@pytest.mark.parametrize("k, n", [(3, 2), (16, 2), (5, 3)])
def test_bubble_singular_values(k, n):
    theta = np.linspace(0.01, 0.99, 9) / k
    x = np.column_stack([theta] + [np.full_like(theta, 0.4)] * (n - 1))
    d = differential(Bubble(k, n), x)
    s = np.sin(k * math.pi * theta) / np.sin(theta)
    expected = np.sort(np.column_stack([np.full_like(theta, k * math.pi)] + [np.abs(s)] * (n - 1)), axis=1)[:, ::-1]
    np.testing.assert_allclose(d.singular_values, expected, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(d.hs_norm ** 2, np.sum(d.singular_values ** 2, axis=1), rtol=1e-12)
    np.testing.assert_allclose(np.abs(d.jacobian), np.prod(d.singular_values, axis=1), rtol=1e-10)
    np.testing.assert_allclose(d.jacobian, k * math.pi * s ** (n - 1), rtol=1e-10)


def test_bubble_near_the_pole():
    k = 9
    d = differential(Bubble(k), [[1e-9, 0.0]])
    np.testing.assert_allclose(d.singular_values[0], [k * math.pi] * 2, rtol=1e-9)
    assert d.jacobian[0] == pytest.approx((k * math.pi) ** 2, rel=1e-9)


@pytest.mark.parametrize("k", [2, 8, 32])
def test_bubble_derivative_bound(k):
    edges = cap_edges(1 / k, 64, 16)
    mesh = sphere_mesh(2, theta_edges=edges, n_phi=8)
    hs = differential(Bubble(k), mesh.coords).hs_norm
    assert hs.max() <= math.sqrt(2) * k * math.pi
    # the differential vanishes off the cap
    assert np.all(hs[mesh.coords[:, 0] > 1 / k] == 0)


def test_power_map_jacobian_is_constant():
    x = build_mesh("S2", (8, 16)).coords
    d = differential(PowerMap(-2), x)
    np.testing.assert_array_equal(d.jacobian, -2.0)
    np.testing.assert_allclose(d.singular_values, [[2.0, 1.0]] * len(x))


def test_constant_map_has_zero_differential():
    d = differential(Constant(), build_mesh("S2", (8, 16)).coords)
    assert np.all(d.hs_norm == 0)


@pytest.mark.parametrize("f, x", [(Bubble(4), [[0.25, 1.0]]), (Collapse(0.25), [[0.75, 0.5]])])
def test_kink_locus_is_rejected(f, x):
    with pytest.raises(SingularLocusError):
        differential(f, x)


@pytest.mark.parametrize("name", [k for k, f in FAMILIES.items() if isinstance(f, Compose)])
def test_chain_rule_jacobians_multiply(name):
    f = FAMILIES[name]
    x = _sample(f, np.random.default_rng(1), 50)
    total = differential(f, x).jacobian
    product = np.ones(len(x))
    pts = x
    for g in reversed(f.factors()):
        product *= differential(g, pts).jacobian
        pts = g.evaluate(pts)
    np.testing.assert_allclose(np.abs(total), np.abs(product), rtol=1e-10)


@pytest.mark.parametrize("name", list(FAMILIES))
def test_finite_difference_cross_check(name):
    f = FAMILIES[name]
    rng = np.random.default_rng(2024)
    x = _sample(f, rng, 100)
    analytic = differential(f, x)
    for xi, m, hs, jac in zip(x, analytic.matrices, analytic.hs_norm, analytic.jacobian):
        fd = fd_frame_matrix(f, xi, h=1e-5)
        assert np.linalg.norm(fd - m) <= 1e-3 * hs
        assert abs(np.linalg.det(fd) - jac) <= 1e-3 * max(abs(jac), hs ** 2 / 2)


# -- cap measure and resolution ----------------------------------------------------

def test_cap_measure_closed_form():
    assert cap_measure_exact(1) == pytest.approx(2 * math.pi * (1 - math.cos(1)))
    assert cap_measure_exact(1) == pytest.approx(2.888, abs=5e-4)


@pytest.mark.parametrize("k", [2, 3, 8, 32, 128])
def test_cap_measure_scales_like_k_to_minus_n(k):
    ratio = cap_measure_exact(k) * k ** 2
    assert math.pi * 0.9 <= ratio <= math.pi * 1.05


@pytest.mark.parametrize("k, n", [(2, 2), (8, 2), (32, 2), (4, 3)])
def test_cap_measure_quadrature(k, n):
    assert cap_measure(k, n) == pytest.approx(cap_measure_exact(k, n), rel=1e-2)


def test_resolution_rule_on_uniform_spheres():
    check_resolution(Bubble(4), build_mesh("S2", (256, 8)))
    with pytest.raises(ResolutionError, match="N_theta >= 256"):
        check_resolution(Bubble(4), build_mesh("S2", (255, 8)))


def test_resolution_rule_through_the_collapse():
    k = 8
    f = Compose(PowerMap(2), Bubble(k), Collapse(0.25))
    with pytest.raises(ResolutionError):
        check_resolution(f, torus_mesh(512))
    edges = graded_edges(128, 0.5, 1.25 * 0.25 / (math.pi * k), 0.25 / (64 * k))
    check_resolution(f, torus_mesh(None, x_edges=edges, y_edges=edges))
