"""Half-form densities: eta, |Omega_s|^2, the wedge identity, and phi."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bksverify import groups, halfform

TORUS = groups.group_spec("torus", n=1)
SU2 = groups.group_spec("su2")
SU3 = groups.group_spec("su3")


def su2_direction_with_root_value(value):
    # alpha(Y) for Y along a Cartan direction, rescaled so alpha(Y) = value
    Y0 = np.zeros(3)
    Y0[SU2.cartan_indices[0]] = 1.0
    a0 = halfform.root_values(SU2, Y0)[0]
    return Y0 * (value / a0)


def test_eta_at_zero_is_one():
    for g in (TORUS, SU2, SU3):
        assert halfform.eta(g, np.zeros(g.dim)) == pytest.approx(1.0, rel=1e-14)


def test_eta_torus_identically_one():
    rng = np.random.default_rng(0)
    for _ in range(10):
        assert halfform.eta(TORUS, rng.standard_normal(1)) == 1.0


def test_eta_su2_closed_form():
    Y = su2_direction_with_root_value(1.0)
    assert halfform.eta(SU2, Y) == pytest.approx(math.sinh(1.0), rel=1e-12)
    # Ad-invariance: conjugating Y leaves eta unchanged
    rng = np.random.default_rng(1)
    Yr = rng.standard_normal(3)
    a = halfform.root_values(SU2, Yr)[0]
    assert halfform.eta(SU2, Yr) == pytest.approx(math.sinh(a) / a, rel=1e-10)


def test_eta_small_argument_series():
    # sinh(x)/x branch switch must be smooth through 1e-4
    Y = su2_direction_with_root_value(1e-5)
    assert halfform.eta(SU2, Y) == pytest.approx(1.0 + 1e-10 / 6.0, rel=1e-12)


def test_eta_is_at_least_one():
    rng = np.random.default_rng(2)
    for g in (SU2, SU3):
        for _ in range(20):
            assert halfform.eta(g, rng.standard_normal(g.dim)) >= 1.0


def test_omega_norm_sq_torus_and_origin():
    rng = np.random.default_rng(3)
    for s in (0.3, 1.0, 2.5):
        assert halfform.omega_norm_sq(TORUS, s, rng.standard_normal(1)) == pytest.approx(s, rel=1e-14)
        assert halfform.omega_norm_sq(SU2, s, np.zeros(3)) == pytest.approx(s ** 3, rel=1e-13)


def test_omega_norm_sq_su2_closed_form():
    # s^n eta(sY)^2 with alpha(Y) = 1: at s = 2 this is 8 (sinh 2 / 2)^2
    Y = su2_direction_with_root_value(1.0)
    want = 8.0 * (math.sinh(2.0) / 2.0) ** 2
    assert halfform.omega_norm_sq(SU2, 2.0, Y) == pytest.approx(want, rel=1e-12)


def test_omega_norm_sq_rejects_nonpositive_s():
    with pytest.raises(ValueError):
        halfform.omega_norm_sq(SU2, 0.0, np.zeros(3))
    with pytest.raises(ValueError):
        halfform.omega_norm_sq(SU2, -1.0, np.zeros(3))


def test_wedge_density_closed_forms():
    rng = np.random.default_rng(4)
    Y1 = rng.standard_normal(1)
    assert halfform.wedge_density(TORUS, 0.5, 2.0, Y1) == pytest.approx(1.25, rel=1e-14)
    Y3 = rng.standard_normal(3)
    assert halfform.wedge_density(SU2, 1.0, 1.0, Y3) == pytest.approx(
        halfform.omega_norm_sq(SU2, 1.0, Y3), rel=1e-13)
    # symmetric in (s, s')
    assert halfform.wedge_density(SU2, 0.7, 2.1, Y3) == pytest.approx(
        halfform.wedge_density(SU2, 2.1, 0.7, Y3), rel=1e-12)


def test_wedge_density_det_at_origin():
    for g, s, sp in ((SU2, 1.0, 2.0), (SU3, 0.5, 2.0)):
        val = halfform.wedge_density_det(g, s, sp, np.zeros(g.dim))
        assert val.imag == pytest.approx(0.0, abs=1e-12)
        assert val.real == pytest.approx(((s + sp) / 2.0) ** g.dim, rel=1e-11)


def test_wedge_identity_su2():
    rng = np.random.default_rng(5)
    for _ in range(10):
        Y = rng.standard_normal(3)
        det = halfform.wedge_density_det(SU2, 1.0, 2.0, Y)
        closed = halfform.wedge_density(SU2, 1.0, 2.0, Y)
        assert abs(det - closed) / closed < 1e-9


def test_wedge_identity_su3():
    rng = np.random.default_rng(6)
    for _ in range(5):
        Y = rng.standard_normal(8)
        det = halfform.wedge_density_det(SU3, 0.5, 2.0, Y)
        closed = halfform.wedge_density(SU3, 0.5, 2.0, Y)
        assert abs(det - closed) / closed < 1e-8


def test_wedge_identity_random_sweep():
    # the determinant route never sees the closed form; 100 joint samples
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(100):
        g = (SU2, SU3)[int(rng.integers(2))]
        s = float(rng.uniform(0.1, 4.0))
        sp = float(rng.uniform(0.1, 4.0))
        Y = rng.standard_normal(g.dim)
        Y *= min(1.0, 2.0 / np.linalg.norm(Y))
        det = halfform.wedge_density_det(g, s, sp, Y)
        closed = halfform.wedge_density(g, s, sp, Y)
        worst = max(worst, abs(det - closed) / closed)
    assert worst < 1e-8


def test_phi_trivial_values():
    rng = np.random.default_rng(8)
    Y = rng.standard_normal(3)
    assert halfform.phi(SU2, 1.3, 1.3, Y) == pytest.approx(1.0, rel=1e-12)
    assert halfform.phi(SU2, 1.0, 4.0, np.zeros(3)) == pytest.approx((5.0 / 4.0) ** 3, rel=1e-12)


def test_phi_torus_closed_form():
    rng = np.random.default_rng(9)
    Y = rng.standard_normal(1)
    for s, sp in ((0.5, 2.0), (1.0, 3.0), (0.25, 0.3)):
        want = (s + sp) / (2.0 * math.sqrt(s * sp))
        assert halfform.phi(TORUS, s, sp, Y) == pytest.approx(want, rel=1e-13)


def test_phi_rejects_nonpositive_parameters():
    with pytest.raises(ValueError):
        halfform.phi(SU2, 0.0, 1.0, np.zeros(3))
    with pytest.raises(ValueError):
        halfform.phi(SU2, 1.0, -0.5, np.zeros(3))


@given(st.floats(min_value=0.1, max_value=4.0), st.floats(min_value=0.1, max_value=4.0),
       st.integers(min_value=0, max_value=2 ** 31 - 1))
@settings(max_examples=40, deadline=None)
def test_phi_symmetric_and_normalized(s, sp, seed):
    Y = np.random.default_rng(seed).standard_normal(3)
    assert halfform.phi(SU2, s, sp, Y) == halfform.phi(SU2, sp, s, Y)
    assert halfform.phi(SU2, s, s, Y) == pytest.approx(1.0, rel=1e-12)
    assert halfform.phi(SU2, s, sp, Y) > 0.0


def test_phi_flatness_torus_quadratic_in_h():
    rng = np.random.default_rng(10)
    Y = rng.standard_normal(1)
    for h in (1e-2, 1e-3):
        r = halfform.phi_flatness_residual(TORUS, 1.7, Y, h)
        assert abs(r) <= h * h


def test_phi_flatness_su2_su3():
    rng = np.random.default_rng(11)
    assert abs(halfform.phi_flatness_residual(SU2, 1.0, np.zeros(3), 1e-4)) <= 1e-8
    for _ in range(20):
        Y = rng.standard_normal(8) * 0.7
        assert abs(halfform.phi_flatness_residual(SU3, 0.7, Y, 1e-4)) <= 1e-6


def test_phi_bounded_on_ball():
    # for fixed (s, s') the sampled sup over |Y| <= 10 stays well inside
    # the abelian upper bound is attained as alpha(Y) -> infinity; just check
    # finiteness and that large |Y| does not blow up
    rng = np.random.default_rng(12)
    vals = []
    for _ in range(200):
        Y = rng.standard_normal(3)
        Y *= rng.uniform(0.0, 10.0) / np.linalg.norm(Y)
        vals.append(halfform.phi(SU2, 1.0, 2.0, Y))
    assert np.all(np.isfinite(vals))
    assert max(vals) < 10.0
