import numpy as np
import pytest

from spectralflow.errors import (
    CoincidentPoints,
    ResidueFreePreconditionViolated,
    ThetaZeroDivision,
    UnsupportedCycle,
)
from spectralflow.forms import (
    BergmanLeg,
    DuForm,
    RationalDz,
    SumForm,
    ThirdKind,
    YdX,
)
from spectralflow.geometry import (
    Geometry,
    a_period,
    b_period,
    basis_form,
    canonical_period,
    decompose,
    fay_residual,
    line_integral,
    prepotential,
    riemann_bilinear_residual,
    _xi_series,
)
from spectralflow.quadrature import integrate_path


# -- kernels ------------------------------------------------------------------

def test_prime_form_genus0(joukowski):
    geo = Geometry(joukowski)
    assert geo.prime_form(2.0, 1.0) == 1.0
    with pytest.raises(CoincidentPoints):
        geo.prime_form(1.3, 1.3)


def test_prime_form_antisymmetry(torus, rng):
    geo = Geometry(torus)
    for _ in range(6):
        z1 = rng.uniform(0.05, 0.95) + 1j * rng.uniform(0.05, 0.95)
        z2 = rng.uniform(0.05, 0.95) + 1j * rng.uniform(0.05, 0.95)
        a, b = geo.prime_form(z1, z2), geo.prime_form(z2, z1)
        assert abs(a + b) < 1e-12 * abs(a)


def test_prime_form_short_distance(torus):
    # E = (u1 - u2) + O((u1-u2)^3): no quadratic term
    geo = Geometry(torus)
    u2 = 0.31 + 0.22j
    for h in (1e-2, 1e-3):
        val = geo.prime_form(u2 + h, u2)
        assert abs(val - h) < 2 * h ** 3


def test_prime_form_matches_theta1_quotient(torus):
    geo = Geometry(torus)
    th = torus.ell.theta
    z1, z2 = 0.41 + 0.13j, 0.18 + 0.67j
    target = th.theta1(z1 - z2) / th.theta1(0.0, 1)
    assert abs(geo.prime_form(z1, z2) - target) < 1e-14


def test_bergman_genus0(joukowski):
    geo = Geometry(joukowski)
    assert abs(geo.bergman(3.0, 1.0) - 0.25) < 1e-15


def test_bergman_symmetry(torus, rng):
    geo = Geometry(torus)
    for _ in range(5):
        z1 = rng.uniform(0.05, 0.95) + 1j * rng.uniform(0.05, 0.95)
        z2 = rng.uniform(0.05, 0.95) + 1j * rng.uniform(0.05, 0.95)
        a, b = geo.bergman(z1, z2), geo.bergman(z2, z1)
        assert abs(a - b) < 1e-12 * max(1.0, abs(a))


def test_bergman_periods(torus):
    # A-period of B(., z) vanishes; B-period equals 2 i pi du(z)
    z = 0.4 + 0.27j
    leg = BergmanLeg(torus, z)
    assert abs(a_period(torus, leg)) < 1e-10
    assert abs(b_period(torus, leg) - 2j * np.pi) < 1e-8


def test_du_normalization(torus):
    du = DuForm(torus)
    assert abs(a_period(torus, du) - 1.0) < 1e-12
    assert abs(b_period(torus, du) - torus.tau) < 1e-12


def test_third_kind_structure(torus, joukowski):
    z1, z2 = 0.62 + 0.41j, 0.21 + 0.77j
    ds = ThirdKind(torus, z1, z2)
    # residues via local series
    s1 = ds.local_series(z1, 8)
    s2 = ds.local_series(z2, 8)
    assert abs(s1.residue() - 1.0) < 1e-12
    assert abs(s2.residue() + 1.0) < 1e-12
    assert abs(a_period(torus, ds)) < 1e-10
    bp = b_period(torus, ds)
    target = 2j * np.pi * (z1 - z2)
    # quadrature line sits somewhere in the cell: defined modulo 2 i pi
    k = (bp - target) / (2j * np.pi)
    assert abs(k - round(k.real)) < 1e-8
    # canonical period is the in-cell value itself
    assert abs(canonical_period(torus, ds, "b") - target) < 1e-12
    # genus 0 closed form
    ds0 = ThirdKind(joukowski, 2.0, 3.0)
    assert abs(ds0.value(5.0) - (1 / 3.0 - 1 / 2.0)) < 1e-14


def test_antisymmetry_of_third_kind(torus):
    z1, z2, z = 0.62 + 0.41j, 0.21 + 0.77j, 0.5 + 0.1j
    a = ThirdKind(torus, z1, z2).value(z)
    b = ThirdKind(torus, z2, z1).value(z)
    assert abs(a + b) < 1e-12 * abs(a)


def test_third_kind_b_period_quadrature_vs_abel(torus):
    # dS B-period = 2 i pi (u1 - u2) checked against direct quadrature
    z1, z2 = 0.52 + 0.31j, 0.33 + 0.64j
    ds = ThirdKind(torus, z1, z2)
    bp = b_period(torus, ds)
    target = 2j * np.pi * (z1 - z2)
    k = (bp - target) / (2j * np.pi)
    assert abs(bp - target - 2j * np.pi * round(k.real)) < 1e-8


# -- decomposition ----------------------------------------------------------------

@pytest.mark.parametrize("which", ["airy", "joukowski", "torus"])
def test_decomposition_roundtrip(which, airy, joukowski, torus, rng):
    curve = {"airy": airy, "joukowski": joukowski, "torus": torus}[which]
    w = YdX(curve)
    _, _, recon = decompose(curve, w)
    for _ in range(20):
        if curve.genus == 0:
            z = rng.uniform(-2, 2) + 1j * rng.uniform(-2, 2)
            if min(abs(z), abs(z - 1), abs(z + 1)) < 0.3:
                continue
        else:
            z = rng.uniform(0.1, 0.9) + 1j * rng.uniform(0.1, 0.9)
        va, vb = w.value(z), recon.value(z)
        assert abs(va - vb) < 1e-8 * max(1.0, abs(va))


def test_basis_form_has_single_pole_no_residue(joukowski, torus):
    for curve in (joukowski, torus):
        for rec in curve.x_poles:
            bf = basis_form(curve, rec.location, 2)
            ser = bf.local_series(rec.location, curve.order)
            assert ser.k_min == -3
            assert abs(ser.residue()) < 1e-12


# -- prepotential -------------------------------------------------------------------

def test_homogeneity(joukowski, torus):
    for curve in (joukowski, torus):
        prep = prepotential(curve, YdX(curve))
        assert prep.homogeneity_residual() < 1e-8


def test_first_derivative_t_oracle(joukowski):
    """Central-difference oracle for dF0/dt_{p,j}, h-sweep."""
    w = YdX(joukowski)
    prep = prepotential(joukowski, w)
    bf = basis_form(joukowski, "inf", 2)
    fds = []
    for h in (1e-3, 1e-4):
        vp = prepotential(joukowski, SumForm([(1.0, w), (h, bf)])).value
        vm = prepotential(joukowski, SumForm([(1.0, w), (-h, bf)])).value
        fds.append((vp - vm) / (2 * h))
    target = prep.dF_dt("inf", 2)
    assert abs(fds[1] - target) < 1e-6 * max(1.0, abs(target))
    assert abs(fds[0] - fds[1]) < 1e-4


def test_first_derivative_eps_oracle(torus):
    w = YdX(torus)
    prep = prepotential(torus, w)
    du = DuForm(torus, 2j * np.pi)
    h = 1e-4
    vp = prepotential(torus, SumForm([(1.0, w), (h, du)])).value
    vm = prepotential(torus, SumForm([(1.0, w), (-h, du)])).value
    fd = (vp - vm) / (2 * h)
    assert abs(fd - prep.dF_deps()) < 1e-5 * max(1.0, abs(fd))


def test_third_kind_derivative_is_line_integral(joukowski, torus):
    for curve, (z1, z2) in ((joukowski, (1.7 + 0.6j, -0.9 + 1.4j)),
                            (torus, (0.31 + 0.52j, 0.72 + 0.13j))):
        w = YdX(curve)
        ds = ThirdKind(curve, z1, z2)
        h = 1e-4
        vp = prepotential(curve, SumForm([(1.0, w), (h, ds)])).value
        vm = prepotential(curve, SumForm([(1.0, w), (-h, ds)])).value
        fd = (vp - vm) / (2 * h)
        target = line_integral(curve, w, z2, z1)
        assert abs(fd - target) < 1e-6 * max(1.0, abs(target))


def test_second_derivative_prime_form(joukowski):
    """(d/dt_{p,0} - d/dt_{p',0})^2 F0 = -ln(E^2 dxi dxi) mod the
    pairing-order sign: the exponentials must agree exactly."""
    w = YdX(joukowski)
    z1, z2 = 1.7 + 0.6j, -0.9 + 1.4j
    ds = ThirdKind(joukowski, z1, z2)
    h = 1e-3
    prep0 = prepotential(joukowski, w).value
    vp = prepotential(joukowski, SumForm([(1.0, w), (h, ds)])).value
    vm = prepotential(joukowski, SumForm([(1.0, w), (-h, ds)])).value
    fd2 = (vp - 2 * prep0 + vm) / h ** 2
    geo = Geometry(joukowski)
    target = -np.log(geo.prime_form(z1, z2) ** 2
                     * joukowski.dx_value(z1) * joukowski.dx_value(z2))
    # e^{d2 F0} = -1/(E^2 dX dX): the ordered-pair regularization sign
    assert abs(np.exp(fd2) + np.exp(target)) < 1e-6 * abs(np.exp(target))


def test_quadratic_form_identity(joukowski):
    # F0 = (1/2) sum t_k t_l d2F/dt_k dt_l via homogeneity twice:
    # equivalent to the homogeneity residual vanishing for YdX and for
    # a rescaled form (degree-2 check)
    w = YdX(joukowski)
    p1 = prepotential(joukowski, w)
    p2 = prepotential(joukowski, SumForm([(2.0, w)]))
    assert abs(p2.value - 4.0 * p1.value) < 1e-8 * max(1.0, abs(p1.value))


def test_mu_basepoint_dependence_cancels(joukowski):
    # sum_p t_p0 mu_p enters F0; individual mu move with the basepoint
    # but F0 must not
    w = YdX(joukowski)
    v1 = prepotential(joukowski, w, basepoint=0.73 + 0.58j).value
    v2 = prepotential(joukowski, w, basepoint=-0.64 + 0.81j).value
    assert abs(v1 - v2) < 1e-9 * max(1.0, abs(v1))


# -- identity checkers ------------------------------------------------------------

def test_riemann_bilinear_genus0(joukowski):
    # no cycles: sum of residues of phi2 omega1 vanishes
    b1 = basis_form(joukowski, "inf", 1)
    b2 = basis_form(joukowski, "inf", 2)
    assert riemann_bilinear_residual(joukowski, b1, b2) < 1e-8


def test_riemann_bilinear_genus1(torus):
    # second-kind pole strictly inside the cell (edge/corner poles sit on
    # the fundamental polygon boundary, outside the checker's contract)
    du = DuForm(torus, 2j * np.pi)
    b1 = basis_form(torus, 0.41 + 0.33j, 1)
    assert riemann_bilinear_residual(torus, du, b1) < 1e-8


def test_riemann_bilinear_double_pole_pair(torus):
    b1 = basis_form(torus, 0.41 + 0.33j, 1)
    b2 = basis_form(torus, 0.63 + 0.57j, 2)
    assert riemann_bilinear_residual(torus, b1, b2) < 1e-8


def test_riemann_bilinear_rejects_residues(torus):
    ds = ThirdKind(torus, 0.3 + 0.4j, 0.7 + 0.6j)
    du = DuForm(torus)
    with pytest.raises(ResidueFreePreconditionViolated):
        riemann_bilinear_residual(torus, du, ds)


def test_fay_identity(torus, rng):
    count = 0
    while count < 20:
        pts = rng.uniform(0.08, 0.92, 4) + 1j * rng.uniform(0.08, 0.92, 4)
        w = rng.uniform(0.1, 0.6) + 1j * rng.uniform(0.1, 0.6)
        try:
            res = fay_residual(torus, *pts, w)
        except (ThetaZeroDivision, CoincidentPoints):
            continue
        assert res < 1e-10
        count += 1


def test_fay_degenerate_pair(torus):
    # z1 = z2 makes both sides collapse; the checker must reject the
    # coincident configuration rather than dividing by zero
    with pytest.raises(CoincidentPoints):
        fay_residual(torus, 0.3 + 0.3j, 0.3 + 0.3j, 0.6 + 0.2j,
                     0.2 + 0.6j, 0.4 + 0.1j)


def test_fay_theta_divisor_rejected(torus):
    with pytest.raises(ThetaZeroDivision):
        fay_residual(torus, 0.3 + 0.3j, 0.31 + 0.62j, 0.6 + 0.2j,
                     0.2 + 0.6j, 0.0)


def test_no_cycles_at_genus0(joukowski):
    with pytest.raises(UnsupportedCycle):
        a_period(joukowski, YdX(joukowski))


def test_quadrature_engine():
    val = integrate_path(lambda z: 1.0 / z,
                         [1.0, 1j, -1.0, -1j, 1.0])
    assert abs(val - 2j * np.pi) < 1e-12
