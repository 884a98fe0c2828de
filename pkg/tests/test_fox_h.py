import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from egg_cascade import fox_h
from egg_cascade.channel import CascadeChannel, enumerate_terms, _cdf_params
from egg_cascade.fox_h import (
    ContourSpec,
    HConvergenceError,
    HOverflowError,
    HParams,
    PoleCollisionError,
    evaluate,
    leading_residues,
    residue_sum,
    validate,
)
from egg_cascade.metrics import Modulation, _ber_params, _capacity_params

from conftest import L1, L3, LA, LB, LC

EXP = HParams(1, 0, (), [(0.0, 1.0)])


def test_validate_examples():
    validate(EXP)
    validate(HParams(2, 0, (), [(1.0, 1.0), (1.0, 1.0)]))
    with pytest.raises(PoleCollisionError) as info:
        validate(HParams(1, 1, [(1.0, 1.0)], [(0.0, 1.0)]))
    assert info.value.left == (0, 0) and info.value.right == (0, 0)


@pytest.mark.parametrize(
    "bad",
    [dict(m=2, n=0, upper=(), lower=[(0.0, 1.0)]),
     dict(m=1, n=0, upper=(), lower=[(0.0, -1.0)]),
     dict(m=1, n=0, upper=(), lower=[(0.0, math.inf)])],
)
def test_params_rejected(bad):
    with pytest.raises(ValueError):
        HParams(**bad)


def test_exponential_value():
    assert evaluate(EXP, 1.0).value == pytest.approx(0.36787944117144233, rel=1e-9)


def test_power_exponential_value():
    v = evaluate(HParams(1, 0, (), [(1.5, 1.0)]), 2.0).value
    assert v == pytest.approx(2.0 ** 1.5 * math.exp(-2.0), rel=1e-10)


@pytest.mark.parametrize("z, ref", [(0.7, 0.23966079074129210764), (5.0, 0.066002100931556828975)])
def test_double_exponential_reference(z, ref):
    # mpmath: 2 z K0(2 sqrt z), the product of two unit exponentials
    assert evaluate(HParams(2, 0, (), [(1.0, 1.0), (1.0, 1.0)]), z).value == pytest.approx(ref, rel=1e-9)


def test_double_exponential_convolution():
    # density of X*Y for unit exponentials, times z: z * int e^{-t} e^{-z/t} dt / t
    z = 0.7
    conv, _ = integrate.quad(lambda t: math.exp(-t - z / t) / t, 0, np.inf, epsabs=0, epsrel=1e-12)
    assert evaluate(HParams(2, 0, (), [(1.0, 1.0), (1.0, 1.0)]), z).value == pytest.approx(z * conv, rel=1e-9)


def test_non_unit_beta_reference():
    # mpmath quadrature of the Mellin-Barnes integral
    v = evaluate(HParams(2, 0, (), [(0.5, 0.5), (1.0, 1.0)]), 1.3).value
    assert v == pytest.approx(0.31221610554847243366, rel=1e-9)


def test_cdf_form_reference():
    # H^{1,1}_{1,2}[z | (1,1); (b,1),(0,1)] is the lower incomplete gamma
    v = evaluate(HParams(1, 1, [(1.0, 1.0)], [(0.5, 1.0), (0.0, 1.0)]), 2.0).value
    assert v == pytest.approx(1.6918067329451983365, rel=1e-9)


@pytest.mark.parametrize("a", [0.3, 1.0, 2.7])
def test_reduction_identity(a):
    rng = np.random.default_rng(7)
    params = HParams(1, 0, (), [(a, 1.0)])
    worst = 0.0
    for z in rng.uniform(0.01, 20, 200):
        worst = max(worst, abs(evaluate(params, z).value / (z ** a * math.exp(-z)) - 1))
    assert worst <= 1e-8


@settings(max_examples=40, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(0.3, 6.0), st.floats(0.05, 50.0))
def test_generalized_gamma_kernel(a, c, x):
    # H^{1,0}_{0,1}[x | (a, 1/c)] = c x^{ac} exp(-x^c)
    ref = c * x ** (a * c) * math.exp(-(x ** c))
    if ref < 1e-250:
        return
    v = evaluate(HParams(1, 0, (), [(a, 1.0 / c)]), x).value
    assert v == pytest.approx(ref, rel=1e-7, abs=1e-300)


SCALING_SETS = [
    HParams(2, 0, (), [(1.0, 1.0), (0.7, 0.5)]),
    HParams(2, 1, [(1.0, 1.0)], [(1.0, 0.5), (1.4, 0.8), (0.0, 1.0)]),
    HParams(3, 0, (), [(0.3, 1.0), (1.2, 0.25), (2.0, 0.7)]),
]


@pytest.mark.parametrize("params", SCALING_SETS)
@pytest.mark.parametrize("z", [0.05, 0.8, 3.0])
def test_scaling_law(params, z):
    doubled = HParams(params.m, params.n, [(a, 2 * al) for a, al in params.upper],
                      [(b, 2 * be) for b, be in params.lower])
    lhs = evaluate(doubled, z).value
    rhs = 0.5 * evaluate(params, math.sqrt(z)).value
    assert lhs == pytest.approx(rhs, rel=1e-8)


@pytest.mark.parametrize("params", SCALING_SETS)
@pytest.mark.parametrize("z", [1e-3, 0.5, 10.0])
def test_contour_independence(params, z):
    ref = evaluate(params, z)
    lo, hi = params.max_left_pole, params.min_right_pole
    if not math.isfinite(hi):
        hi = lo + 2.0
    gap = hi - lo
    mid = 0.5 * (lo + hi)
    for c in (mid - 0.25 * gap, mid + 0.25 * gap):
        other = evaluate(params, z, ContourSpec(c=c))
        assert abs(other.value - ref.value) <= max(ref.error, other.error) + 1e-12 * abs(ref.value)


def test_error_estimate_is_honest():
    params = HParams(3, 0, (), [(0.3, 1.0), (1.2, 0.25), (2.0, 0.7)])
    loose = evaluate(params, 0.4, rtol=1e-4)
    tight = evaluate(params, 0.4, rtol=1e-12)
    assert abs(loose.value - tight.value) <= loose.error + 1e-14


def test_errors():
    with pytest.raises(HOverflowError):
        evaluate(EXP, 1e7)
    with pytest.raises(ValueError):
        evaluate(EXP, -1.0)
    with pytest.raises(HConvergenceError):
        evaluate(HParams(1, 0, [(0.5, 1.0)], [(0.0, 1.0)]), 0.5)
    with pytest.raises(fox_h.FoxHError):
        evaluate(EXP, 1.0, ContourSpec(c=-2.0))


def test_residue_exponential():
    terms = leading_residues(EXP, 3)
    assert [t.exponent for t in terms] == [0.0, 1.0, 2.0]
    assert [t.coefficient for t in terms] == pytest.approx([1.0, -1.0, 0.5])


def test_residue_double_pole_log_term():
    # both lower pairs (1, r): leading behaviour ~ z^{1/r} log z
    for r in (1, 2):
        terms = leading_residues(HParams(2, 0, (), [(1.0, r), (1.0, r)]), 2)
        assert terms[0].exponent == pytest.approx(1.0 / r)
        assert terms[0].log_power == 1 and terms[1].log_power == 0


def test_residue_two_simple_families():
    a1, c1, a2, c2 = 1.4, 1.7, 0.6, 2.3
    params = HParams(2, 0, (), [(a1, 1 / c1), (a2, 1 / c2)])
    terms = leading_residues(params, 2)
    assert sorted(t.exponent for t in terms) == pytest.approx(sorted([a1 * c1, a2 * c2]))
    assert all(t.log_power == 0 for t in terms)
    z = 1e-6
    assert residue_sum(leading_residues(params, 6), z) == pytest.approx(evaluate(params, z).value, rel=1e-6)


def test_residue_high_order_pole():
    # three unit exponentials: triple pole at s = -1, mpmath meijerg reference
    params = HParams(3, 0, (), [(1.0, 1.0)] * 3)
    assert residue_sum(leading_residues(params, 6), 1e-6) == pytest.approx(7.547716267915638e-05, rel=1e-10)


def _metric_params():
    mod = Modulation("BPSK", 1.0, 0.5, (1.0,))
    out = []
    for layers, r in (([L1, L3], 1), ([LA, LB], 2), ([LC, LA, L3], 1)):
        for term in enumerate_terms(CascadeChannel(layers, r, 1.0), "snr"):
            out += [term.params, _cdf_params(term.params), _ber_params(term, mod.p), _capacity_params(term, r)]
    return out


def test_residue_consistency_for_metric_params():
    for params in _metric_params():
        for z in (1e-5, 1e-7):
            exact = evaluate(params, z).value
            approx = residue_sum(leading_residues(params, 4), z)
            assert approx == pytest.approx(exact, rel=1e-3), params
