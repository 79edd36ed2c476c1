import math

import numpy as np
import pytest

from etaforge.asymptotics import ExpansionModel, RadiusLadder
from etaforge.errors import SingularFamilyError
from etaforge.eta import (
    PathFamily,
    additivity_defect,
    c_k,
    divisor_flow,
    eta_k,
    eta_suspension,
    eta_variation,
    formal_trace_matrix,
    linear_bridge_path,
    path_eta_rate,
    phase_unwinding_path,
    spectral_eta,
    winding,
)
from etaforge.forms import MatrixFamily, form_from_family, matrix_family, mc_form, mf_constant, mf_product, wedge
from etaforge.partrace import SpectralModel
from etaforge.quadrature import sphere_rule

MOEBIUS_MODEL = ExpansionModel.powers([-2, -4, -6, -8])
AFFINE_MODEL = ExpansionModel.powers([-4, -6, -8, -10])
CAPPED_MODEL = ExpansionModel.powers([-3, -4, -5, -6, -7])
LAD = RadiusLadder(4.0, 4096.0, 16)


def test_c_k_values():
    assert abs(c_k(1) - 1.0 / (2j * math.pi)) < 1e-16
    assert abs(c_k(2) - 1.0 / (24.0 * math.pi ** 2)) < 1e-18
    assert abs(-1.0 / c_k(2) + 24.0 * math.pi ** 2) < 1e-10
    with pytest.raises(ValueError):
        c_k(0)


def test_eta1_moebius_winding():
    # oracle: residue computation, int dx/(x^2+1) = pi, so eta = 2
    res = eta_k(matrix_family("moebius", s=1.0), 1, MOEBIUS_MODEL, LAD)
    assert abs(res.value - 2.0) < 1e-8
    assert res.route == "matrix-form"
    assert res.half_integer_deviation < 1e-8


def test_eta_constant_family_vanishes():
    fam = mf_constant(np.diag([2.0 + 0j, 1.0 + 1j]), 3)
    res = eta_k(fam, 2, ExpansionModel.make([], remainder=-8.0), LAD, sphere_rule(3, (8, 16)), 16)
    assert abs(res.value) < 1e-10


def test_eta2_affine_clifford_sign():
    for a in (1.0, -1.0):
        fam = matrix_family("affine_clifford", a=a, k=2)
        res = eta_k(fam, 2, AFFINE_MODEL, LAD, sphere_rule(3, (16, 32)), 24)
        assert abs(res.value + math.copysign(1.0, a)) < 1e-6


def test_eta_dimension_check():
    with pytest.raises(ValueError):
        eta_k(matrix_family("moebius", s=1.0), 2, MOEBIUS_MODEL)


def test_eta2_rotational_invariance(rng):
    fam = matrix_family("affine_clifford", a=1.0, k=2)
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1.0

    rot = MatrixFamily(3, 2, lambda x: fam.func(np.asarray(x, float) @ q.T), name="rotated")
    a = eta_k(fam, 2, AFFINE_MODEL, LAD, sphere_rule(3, (16, 32)), 24).value
    b = eta_k(rot, 2, AFFINE_MODEL, LAD, sphere_rule(3, (16, 32)), 24).value
    assert abs(a - b) < 1e-8 * abs(a)


def test_eta2_step_unitary_is_even_integer():
    fam = matrix_family("step_unitary", k=2)
    res = eta_k(fam, 2, ExpansionModel.make([], remainder=-8.0), LAD, sphere_rule(3, (16, 32)), 48)
    assert res.half_integer_deviation < 1e-6
    assert abs(abs(res.value) - 2.0) < 1e-6  # generator of the wound family


def test_winding_values():
    assert abs(winding(matrix_family("circle_phase"), 1, 512) - 1.0) < 1e-10
    w = winding(matrix_family("sphere_clifford", k=2), 2, (32, 32, 64))
    assert abs(w + 1.0) < 1e-8
    const = mf_constant(np.diag([1.0 + 0j, 3.0]), 4)
    assert abs(winding(const, 2, (16, 16, 32))) < 1e-12


def test_winding_integrality_corpus(rng):
    # products of wound families stay integral
    f = matrix_family("sphere_clifford", k=2)
    g = MatrixFamily(4, 2, lambda x: f.func(x) @ f.func(x), name="square")
    w = winding(g, 2, (32, 32, 64))
    assert abs(w - round(w.real)) < 1e-6


def test_variation_constant_path():
    path = PathFamily(lambda s: matrix_family("moebius", s=1.0))
    lhs, rhs = eta_variation(path, 1, 0.5, MOEBIUS_MODEL, ExpansionModel.powers([0, -1, -2, -3, -4]), ladder=LAD)
    assert abs(lhs) < 1e-8 and abs(rhs) < 1e-8


def test_variation_moebius_pole_path():
    path = PathFamily(lambda s: matrix_family("moebius", s=s))
    lhs, rhs = eta_variation(
        path, 1, 0.75, MOEBIUS_MODEL, ExpansionModel.powers([0, -1, -2, -3, -4]), ladder=LAD
    )
    assert abs(lhs) < 1e-6 and abs(rhs) < 1e-6


def test_variation_unwinding_rate():
    path = phase_unwinding_path(0.05)
    lhs, rhs = eta_variation(
        path,
        1,
        0.5,
        ExpansionModel.powers([-1, -2, -3]),
        ExpansionModel.powers([0, -1, -2]),
        s_step=5e-3,
        ladder=LAD,
        n_radial=96,
    )
    assert abs(rhs + 2.0) < 1e-6
    assert abs(lhs - rhs) < 1e-4


def test_variation_k2_path():
    path = PathFamily(lambda s: matrix_family("capped_clifford", a=1.0 + s, k=2))
    lhs, rhs = eta_variation(
        path,
        2,
        0.5,
        CAPPED_MODEL,
        ExpansionModel.powers([-2, -3, -4, -5, -6]),
        s_step=1e-2,
        ladder=LAD,
        sphere=sphere_rule(3, (12, 24)),
        n_radial=24,
    )
    assert abs(lhs - rhs) < 1e-4


def test_formal_trace_matrix_routes_agree():
    # the degree p-1 shape from the variation formula: A^{-1} (A^{-1} dA)^2,
    # whose formal trace is genuinely nonzero
    from etaforge.forms import mf_inverse

    A = matrix_family("capped_clifford", a=1.5, k=2)
    w = mc_form(A)
    form = wedge(wedge(form_from_family(mf_inverse(A)), w), w)
    cm = ExpansionModel.powers([-2, -3, -4, -5, -6])
    a = formal_trace_matrix(form, cm, "sphere", LAD, sphere_rule(3, (16, 32)), 24)
    b = formal_trace_matrix(form, cm, "regint-d", LAD, sphere_rule(3, (16, 32)), 24)
    assert abs(a) > 1e-3
    assert abs(a - b) < 1e-5


def test_additivity_k1_scalar_and_matrix(rng):
    m1 = ExpansionModel.powers([-2, -3, -4, -5, -6, -7])
    a1 = matrix_family("moebius", s=1.0)
    b1 = matrix_family("moebius", s=2.0)
    ea = eta_k(a1, 1, m1, LAD).value
    eb = eta_k(b1, 1, m1, LAD).value
    eab = eta_k(mf_product(a1, b1), 1, m1, LAD).value
    assert abs(eab - ea - eb) < 1e-7
    assert abs(ea - 2.0) < 1e-7 and abs(eab - 4.0) < 1e-7

    # noncommuting 2x2 pair: embed the scalars against constant conjugators
    q, _ = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))

    def a2f(x):
        m = np.zeros((len(x), 2, 2), complex)
        m[:, 0, 0] = a1.func(x)[:, 0, 0]
        m[:, 1, 1] = 1.0
        return m

    def b2f(x):
        m = np.zeros((len(x), 2, 2), complex)
        m[:, 0, 0] = 1.0
        m[:, 1, 1] = b1.func(x)[:, 0, 0]
        return q @ m @ q.conj().T

    a2 = MatrixFamily(1, 2, a2f, name="A2")
    b2 = MatrixFamily(1, 2, b2f, name="B2")
    ea2 = eta_k(a2, 1, m1, LAD).value
    eb2 = eta_k(b2, 1, m1, LAD).value
    eab2 = eta_k(mf_product(a2, b2), 1, m1, LAD).value
    assert abs(eab2 - ea2 - eb2) < 1e-6


def test_additivity_defect_trivial_factors():
    a = matrix_family("capped_clifford", a=1.0, k=2)
    bconst = mf_constant(np.diag([1.0 + 0j, 2.0]), 3)
    res = additivity_defect(a, bconst, CAPPED_MODEL, ladder=LAD, sphere=sphere_rule(3, (12, 24)), n_radial=24)
    assert abs(res.lhs) < 1e-4 and abs(res.rhs) < 1e-4
    aconst = mf_constant(np.diag([2.0 + 0j, 1.0]), 3)
    res2 = additivity_defect(aconst, a, CAPPED_MODEL, ladder=LAD, sphere=sphere_rule(3, (12, 24)), n_radial=24)
    assert abs(res2.lhs) < 1e-4 and abs(res2.rhs) < 1e-4


def test_spectral_eta_hurwitz():
    for a in (0.1, 0.25, 0.4):
        assert abs(spectral_eta(SpectralModel.circle(a)) - (1.0 - 2.0 * a)) < 1e-12
    assert abs(spectral_eta(SpectralModel.circle(0.5))) < 1e-14


def test_spectral_eta_regint_route():
    v = spectral_eta(SpectralModel.circle(0.25), method="regint", k=2)
    assert abs(v - 0.5) < 1e-3
    with pytest.raises(ValueError):
        spectral_eta(SpectralModel.circle(0.25), method="regint", k=1)


def test_spectral_eta_routes_agree():
    for a in (0.1, 0.4):
        h = spectral_eta(SpectralModel.circle(a))
        r = spectral_eta(SpectralModel.circle(a), method="regint", k=2)
        assert abs(h - r) < 1e-3


def test_eta_suspension_bridge():
    model = SpectralModel.circle(0.25)
    plus = eta_suspension(model, 2, +1)
    minus = eta_suspension(model, 2, -1)
    assert plus.route == "spectral-reduction"
    assert abs(plus.value + 0.5) < 5e-3
    assert abs(minus.value - 0.5) < 5e-3
    sym = eta_suspension(SpectralModel.circle(0.5), 2, +1)
    assert abs(sym.value) < 1e-6


def test_eta_suspension_k1():
    # k = 1 suspension: eta_1(D + c(mu)) = -eta(D) as well
    model = SpectralModel.circle(0.25)
    res = eta_suspension(model, 1, +1)
    assert abs(res.value + 0.5) < 5e-3


def test_divisor_flow_paths():
    rep = divisor_flow(phase_unwinding_path(0.05), linear_bridge_path(0.05))
    assert abs(rep["path_a"] + 2.0) < 1e-6
    assert abs(rep["path_b"]) < 1e-6
    assert abs(rep["difference"] + 2.0) < 1e-6


def test_divisor_flow_width_independence():
    a = divisor_flow(phase_unwinding_path(0.05), linear_bridge_path(0.05))["path_a"]
    b = divisor_flow(phase_unwinding_path(0.025), linear_bridge_path(0.05))["path_a"]
    assert abs(a - b) < 1e-6


def test_divisor_flow_constant_path():
    const = PathFamily(lambda s: matrix_family("moebius", s=1.0))
    assert abs(path_eta_rate(const, 0.5)) < 1e-10


def test_divisor_flow_rejects_vanishing_boundary():
    def family_at(s):
        def f(x):
            lam = np.asarray(x, float)[:, 0]
            return np.exp(-(lam ** 2)).astype(complex)[:, None, None]

        return MatrixFamily(1, 1, f, name="gaussian-tails")

    bad = PathFamily(family_at)
    with pytest.raises(SingularFamilyError):
        path_eta_rate(bad, 0.5)


def test_eta_k_dispatches_suspension():
    res = eta_k(SpectralModel.circle(0.25), 2)
    assert res.route == "spectral-reduction"
    assert abs(res.value + 0.5) < 5e-3


def test_homogeneity_bridge_matrix_vs_closed_form():
    # matrix-form route vs the per-slice closed form -12 a (a^2 + r^2)^{-2}
    from etaforge.asymptotics import regint_rp_radial

    a = 1.0
    fam = matrix_family("affine_clifford", a=a, k=2)
    via_matrix = eta_k(fam, 2, AFFINE_MODEL, LAD, sphere_rule(3, (16, 32)), 32).value

    def closed(r):
        return -12.0 * a * (a * a + r * r) ** (-2.0) + 0j

    reg = regint_rp_radial(closed, AFFINE_MODEL, 3, LAD, 32)
    via_closed = 2.0 * c_k(2) * reg.value
    assert abs(via_matrix - via_closed) < 1e-8 * abs(via_closed)
