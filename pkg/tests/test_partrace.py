import math

import numpy as np
import pytest

from etaforge.asymptotics import ExpansionModel, FitConfig, RadiusLadder
from etaforge.errors import OrderError, TruncationError
from etaforge.forms import MatrixFamily
from etaforge.partrace import (
    Kernel,
    KernelMonomial,
    SpectralFamily,
    SpectralModel,
    WindowConfig,
    extended_trace,
    family_from_json,
    formal_trace,
    formal_trace_via_regint,
    hurwitz_zeta,
    kernel,
    l2_trace,
    l2_trace_values,
    parse_kernel,
    tr_param,
    tr_param_values,
    trace_expansion_model,
)


# ---------------------------------------------------------------------------
# Oracles


def brute_force_two_sided(summand, n_max=2_000_000):
    """Plain partial sum with an integral tail bound, for oracle validation."""
    n = np.arange(-n_max, n_max + 1)
    return math.fsum(summand(n).tolist())


def test_tanh_identity_against_brute_force():
    # oracle validation: sum over Z of ((n+1/2)^2 + mu^2)^{-1} = pi tanh(pi mu)/mu
    mu = 1.0
    got = brute_force_two_sided(lambda n: 1.0 / ((n + 0.5) ** 2 + mu * mu))
    want = math.pi * math.tanh(math.pi * mu) / mu
    # partial-sum tail is ~ 2/n_max
    assert abs(got - want) < 2e-6


def test_hurwitz_zeta_against_brute_force():
    a = 0.25
    got = hurwitz_zeta(3.0, a)
    want = math.fsum(((np.arange(200000) + a) ** (-3.0)).tolist())
    assert abs(got - want) < 1e-9
    # exact continuation at s = 0
    assert hurwitz_zeta(0.0, a) == 0.5 - a
    assert abs(hurwitz_zeta(2.0, 1.0) - math.pi ** 2 / 6.0) < 1e-12


def test_hurwitz_zeta_rejects_pole_and_bad_offset():
    with pytest.raises(ValueError):
        hurwitz_zeta(1.0, 0.5)
    with pytest.raises(ValueError):
        hurwitz_zeta(2.0, -1.0)


def _eta_kernel_closed_form(a, x):
    # sum over Z of (n+a)((n+a)^2+x^2)^{-2}, from the standard lattice sum
    return (
        math.pi ** 2
        * math.sin(2 * math.pi * a)
        * math.sinh(2 * math.pi * x)
        / (x * (math.cosh(2 * math.pi * x) - math.cos(2 * math.pi * a)) ** 2)
    )


def test_eta_kernel_closed_form_against_brute_force():
    a, x = 0.25, 1.5
    got = brute_force_two_sided(lambda n: (n + a) / ((n + a) ** 2 + x * x) ** 2, n_max=300000)
    assert abs(got - _eta_kernel_closed_form(a, x)) < 1e-10


# ---------------------------------------------------------------------------
# Kernels


def test_kernel_eval_and_order():
    k = kernel("eta_kernel", 2)
    lam = np.array([1.0, -2.0, 3.0])
    t = np.array([4.0])
    got = k.eval(lam, t)
    want = lam / (lam ** 2 + 4.0) ** 2
    assert np.max(np.abs(got - want)) < 1e-15
    assert k.homogeneity == -3.0
    assert kernel("resolvent", 1).homogeneity == -2.0
    assert kernel("weighted_eta", 2).homogeneity == -1.0


def test_kernel_dt_matches_finite_difference():
    k = kernel("weighted_eta", 2)
    lam = np.array([1.3, -0.7])
    t, h = 2.0, 1e-6
    fd = (k.eval(lam, np.array([t + h])) - k.eval(lam, np.array([t - h]))) / (2 * h)
    got = k.dt().eval(lam, np.array([t]))
    assert np.max(np.abs(got - fd)) < 1e-8


def test_kernel_t_coefficients_match_series():
    k = kernel("resolvent", 2)
    lam = np.array([2.0, -3.0])
    t = 1e-3
    series = sum(k.t_coefficient(m)(lam) * t ** m for m in range(6))
    assert np.max(np.abs(series - k.eval(lam, np.array([t])))) < 1e-16


def test_kernel_product_and_parse():
    k1, o1 = parse_kernel("resolvent(1)")
    k2, o2 = parse_kernel("eta_kernel(2)")
    assert (o1, o2) == (-2.0, -3.0)
    prod = k1 * k2
    lam, t = np.array([1.7]), np.array([0.9])
    assert abs(prod.eval(lam, t) - k1.eval(lam, t) * k2.eval(lam, t)) < 1e-15
    with pytest.raises(ValueError):
        parse_kernel("not a kernel")


# ---------------------------------------------------------------------------
# Traces


def test_l2_trace_tanh():
    fam = SpectralFamily(SpectralModel.circle(0.5), kernel("resolvent", 1), -2.0, p=1)
    for mu in (0.5, 1.0, 5.0):
        tv = l2_trace(fam, [mu])
        want = math.pi * math.tanh(math.pi * mu) / mu
        assert abs(tv.value - want) < 1e-8 * want
        assert tv.ambiguity_degree == -1
        assert tv.truncation["tail_estimate"] < 1e-10


def test_l2_trace_zeta_values_at_zero_parameter():
    fam = SpectralFamily(SpectralModel.circle(0.25), kernel("eta_kernel", 2), -3.0, p=1)
    got = l2_trace(fam, [1e-30]).value  # continuous at 0; avoid the lattice point
    want = hurwitz_zeta(3.0, 0.25) - hurwitz_zeta(3.0, 0.75)
    assert abs(got - want) < 1e-10


def test_l2_trace_closed_form_at_moderate_mu():
    fam = SpectralFamily(SpectralModel.circle(0.25), kernel("eta_kernel", 2), -3.0, p=1)
    for x in (0.5, 2.0, 4.0):
        got = complex(l2_trace_values(fam, np.array([[x]]))[0])
        assert abs(got - _eta_kernel_closed_form(0.25, x)) < 1e-12


def test_l2_trace_zero_kernel():
    fam = SpectralFamily(SpectralModel.circle(0.25), Kernel(()), -5.0, p=1)
    assert l2_trace(fam, [1.0]).value == 0.0


def test_l2_trace_order_precondition():
    fam = SpectralFamily(SpectralModel.circle(0.25), kernel("resolvent", 1), 0.0, p=1)
    with pytest.raises(OrderError):
        l2_trace(fam, [1.0])


def test_l2_trace_clifford_factor():
    plain = SpectralFamily(SpectralModel.circle(0.5), kernel("resolvent", 1), -2.0, p=1)
    tens = SpectralFamily(SpectralModel.circle(0.5), kernel("resolvent", 1), -2.0, p=1, clifford_rank=2)
    assert abs(l2_trace(tens, [1.0]).value - 2.0 * l2_trace(plain, [1.0]).value) < 1e-14


def test_window_escalation_cap():
    fam = SpectralFamily(SpectralModel.circle(0.5), kernel("resolvent", 1), -2.0, p=1)
    with pytest.raises(TruncationError):
        l2_trace(fam, [1.0], WindowConfig(start=8, cap=8, rtol=1e-16, atol=0.0))


def test_tr_param_trace_class_reduces_to_l2():
    fam = SpectralFamily(SpectralModel.circle(0.25), kernel("eta_kernel", 2), -3.0, p=1)
    tv = tr_param(fam, [1.5])
    lv = l2_trace(fam, [1.5])
    assert tv.value == lv.value
    assert tv.ambiguity_degree == -1


def test_tr_param_rotational_reduction():
    fam1 = SpectralFamily(SpectralModel.circle(0.25), kernel("eta_kernel", 2), -3.0, p=1)
    fam3 = SpectralFamily(SpectralModel.circle(0.25), kernel("eta_kernel", 2), -3.0, p=3)
    pts = np.array([[0.6, -1.1, 2.0], [3.0, 0.0, 0.0]])
    v3 = tr_param_values(fam3, pts)
    v1 = tr_param_values(fam1, np.linalg.norm(pts, axis=1)[:, None])
    assert np.max(np.abs(v3 - v1)) < 1e-14


def test_tr_param_subtracted_order_zero_family():
    # mu^2 (lam^2 + mu^2)^{-1} has order 0, minimal Taylor order 2, and the
    # canonical representative is the plain (convergent) sum
    fam = SpectralFamily(SpectralModel.circle(0.25), Kernel((KernelMonomial(1.0, 0, 1, 1),)), 0.0, p=1)
    tv = tr_param(fam, [2.0])
    assert tv.ambiguity_degree == 1
    brute = brute_force_two_sided(lambda n: 4.0 / ((n + 0.25) ** 2 + 4.0), n_max=500000)
    assert abs(tv.value - brute) < 1e-4  # brute tail ~ 2 mu^2 / n_max


def test_tr_param_derivative_identity():
    # d^2/dmu^2 of the subtracted trace equals 2 lam^2 [(lam^2+mu^2)^{-2}
    # - 4 mu^2 (lam^2+mu^2)^{-3}] summed, a trace-class identity
    model = SpectralModel.circle(0.25)
    fam = SpectralFamily(model, Kernel((KernelMonomial(1.0, 0, 1, 1),)), 0.0, p=1)
    mu, h = 2.0, 1e-3

    def tr(x):
        return complex(tr_param_values(fam, np.array([[x]]))[0])

    d2 = (tr(mu + h) - 2 * tr(mu) + tr(mu - h)) / h ** 2
    d2b = (tr(mu + h / 2) - 2 * tr(mu) + tr(mu - h / 2)) / (h ** 2 / 4)
    d2r = (4 * d2b - d2) / 3
    oracle_fam = SpectralFamily(
        model, Kernel((KernelMonomial(2.0, 2, 0, 2), KernelMonomial(-8.0, 2, 1, 3))), -2.0, p=1
    )
    want = complex(l2_trace_values(oracle_fam, np.array([[mu]]))[0])
    assert abs(d2r - want) < 1e-6


def test_tr_param_requires_origin_star_point():
    fam = SpectralFamily(SpectralModel.circle(0.25), kernel("eta_kernel", 2), -3.0, p=1)
    with pytest.raises(NotImplementedError):
        tr_param(fam, [1.0], mu0=1.0)


def test_trace_expansion_model_ladder():
    m = trace_expansion_model(-2.0, 1, depth=4)
    assert m.degrees == (-1.0, -2.0, -3.0, -4.0)
    m2 = trace_expansion_model(0.0, 1, depth=3)
    assert m2.terms[0] == (1.0, 1)


def test_trace_degree_ladder_of_resolvent():
    # fitted degrees of the order -2 circle trace lie on {-1, -2, ...};
    # the closed form pi sinh/(x (cosh - cos)) has leading coefficient pi
    fam = SpectralFamily(SpectralModel.circle(0.25), kernel("resolvent", 1), -2.0, p=1)
    from etaforge.asymptotics import fit_expansion

    fitted = fit_expansion(
        lambda x: tr_param_values(fam, x),
        ExpansionModel.powers([-1, -2, -3]),
        p=1,
        radii=RadiusLadder(4.0, 4096.0, 16),
    )
    lead = fitted.coefficient(-1.0, 0)
    assert np.max(np.abs(lead - math.pi)) < 1e-9
    assert np.max(np.abs(fitted.coefficient(-2.0, 0))) < 1e-6


# ---------------------------------------------------------------------------
# Extended and formal traces


def test_extended_trace_weighted_symbol():
    # oracle: the spectral eta value 1 - 2a through the zeta route fixes
    # the full-line integral of the weighted trace to (pi/2)(1 - 2a)
    fam = SpectralFamily(SpectralModel.circle(0.25), kernel("weighted_eta", 2), -1.0, p=1)
    reg = extended_trace(
        fam,
        ExpansionModel.make([], remainder=-6.0),
        ladder=RadiusLadder(4.0, 256.0, 16),
    )
    assert reg.ambiguity_degree == -1
    assert abs(reg.value - math.pi / 4.0) < 1e-6


def test_extended_trace_zero_family():
    fam = SpectralFamily(SpectralModel.circle(0.25), Kernel(()), -5.0, p=1)
    reg = extended_trace(fam, ExpansionModel.make([], remainder=-6.0), ladder=RadiusLadder(4.0, 256.0, 16))
    assert abs(reg.value) < 1e-12


def test_extended_trace_radial_p3_matches_closed_value():
    # int over R^3 of the order -3 trace: 4 pi int r^2 S(r) dr = pi^2 eta(0),
    # with eta(0) = 1 - 2a = 1/2 from the zeta-route oracle
    fam = SpectralFamily(SpectralModel.circle(0.25), kernel("eta_kernel", 2), -3.0, p=3)
    reg = extended_trace(fam, ExpansionModel.make([], remainder=-8.0), ladder=RadiusLadder(4.0, 256.0, 16))
    want = math.pi ** 2 * 0.5
    assert abs(reg.value - want) < 1e-6


def test_formal_trace_of_compact_scalar_family():
    # A(mu) = chi(|mu|) sgn(mu) as a point family: the formal trace is the
    # boundary jump f(+inf) - f(-inf) = 2
    from etaforge.asymptotics import smooth_cutoff

    def op(x):
        t = np.asarray(x, float)[:, 0]
        return (smooth_cutoff(np.abs(t)) * np.sign(t)).astype(complex)[:, None, None]

    fam = SpectralFamily(
        SpectralModel.point_family(MatrixFamily(1, 1, op, name="step")), None, 0.0, p=1
    )
    model = ExpansionModel.make([(0, 0), (-1, 0), (-2, 0)])
    val = formal_trace(fam, 1, model)
    assert abs(val - 2.0) < 1e-10
    # cross-route: regularized integral of the mu-derivative family
    val2 = formal_trace_via_regint(fam, 1, model.derivative(), n_radial=96)
    assert abs(val2 - 2.0) < 1e-7


def test_formal_trace_vanishes_without_critical_degree():
    # order -2 trace has leading degree -1 < 0 = 1 - p, and no degree-0 term
    fam = SpectralFamily(SpectralModel.circle(0.25), kernel("resolvent", 1), -2.0, p=1)
    model = ExpansionModel.powers([0, -1, -2, -3])
    val = formal_trace(fam, 1, model)
    assert abs(val) < 1e-8


def test_formal_trace_via_regint_matches_sphere_route():
    fam = SpectralFamily(SpectralModel.circle(0.25), kernel("resolvent", 2), -4.0, p=1)
    model = ExpansionModel.powers([0, -1, -2, -3, -4, -5])
    a = formal_trace(fam, 1, model)
    b = formal_trace_via_regint(fam, 1, ExpansionModel.powers([-4, -5, -6]).derivative())
    assert abs(a - b) < 1e-6


def test_trace_property_commuting_pair():
    model = SpectralModel.circle(0.25)
    ab = SpectralFamily(model, kernel("resolvent", 1) * kernel("eta_kernel", 2), -5.0, p=1)
    ba = SpectralFamily(model, kernel("eta_kernel", 2) * kernel("resolvent", 1), -5.0, p=1)
    va = tr_param_values(ab, np.array([[1.5]]))
    vb = tr_param_values(ba, np.array([[1.5]]))
    assert va[0] == vb[0]


def test_mu_multiplication_defect_is_polynomial():
    model = SpectralModel.circle(0.25)
    base = SpectralFamily(model, Kernel((KernelMonomial(1.0, 0, 1, 1),)), 0.0, p=1)
    mu_base = SpectralFamily(
        model, Kernel((KernelMonomial(1.0, 0, 1, 1),)), 1.0, p=1, pref_index=0, pref_power=1
    )
    xs = np.linspace(2.0, 9.0, 12)
    diff = tr_param_values(mu_base, xs[:, None]) - xs * tr_param_values(base, xs[:, None])
    V = np.vander(xs, 3, increasing=True)
    coef, *_ = np.linalg.lstsq(V, diff, rcond=None)
    assert np.max(np.abs(V @ coef - diff)) < 1e-9


def test_family_json_spec():
    fam = family_from_json(
        '{"base": {"kind": "circle", "a": 0.25}, "F": "eta_kernel(2)", "order": -3, "clifford_k": 2, "p": 1}'
    )
    assert fam.base.a == 0.25
    assert fam.order == -3.0
    assert fam.clifford_rank == 2
    plain = SpectralFamily(SpectralModel.circle(0.25), kernel("eta_kernel", 2), -3.0, p=1)
    assert abs(l2_trace(fam, [1.0]).value - 2.0 * l2_trace(plain, [1.0]).value) < 1e-14


def test_point_spectrum_model():
    fam = SpectralFamily(
        SpectralModel.point_spectrum([1.0, -2.0, 3.0]), kernel("resolvent", 1), -2.0, p=1
    )
    got = l2_trace(fam, [1.0]).value
    want = sum(1.0 / (l * l + 1.0) for l in (1.0, -2.0, 3.0))
    assert abs(got - want) < 1e-14


def test_circle_model_rejects_integer_offset():
    with pytest.raises(ValueError):
        SpectralModel.circle(1.0)


def test_order_consistency_sampled():
    good = SpectralFamily(SpectralModel.circle(0.25), kernel("eta_kernel", 2), -3.0, p=1)
    assert good.order_consistent()
    lied = SpectralFamily(SpectralModel.circle(0.25), kernel("eta_kernel", 2), -6.0, p=1)
    assert not lied.order_consistent()
