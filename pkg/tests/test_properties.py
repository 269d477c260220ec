"""Randomised invariants over the closed forms, events and field formulas."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from uplinkcomp.analytic import (a_complement, f_base, g_base, outage_aw_dis, outage_aw_sic,
                                 outage_dis, outage_marp)
from uplinkcomp.channel import LinkAttenuations, sample_fading
from uplinkcomp.events import LinkState, Scheme, effective_powers, ue1_decoded
from uplinkcomp.ppp import PppModel, outage_aw_ppp, outage_marp_ppp
from uplinkcomp.protocol import run_protocol_batch

atten = st.floats(1.0, 500.0)
power = st.floats(0.5, 1e4)
threshold = st.floats(1e-4, 100.0)
settings.register_profile("standing", deadline=None, max_examples=150)
settings.load_profile("standing")


def links(draw_fn):
    return LinkAttenuations(*(draw_fn(atten) for _ in range(4)))


@given(st.data(), power, threshold, threshold)
def test_scheme_ordering_in_expectation(data, P, t1, t2):
    la = links(data.draw)
    m = outage_marp(la, P, t1, t2).p
    tol = 1e-12
    assert outage_dis(la, P, t1, t2).p <= m + tol
    aw = outage_aw_sic(la, P, t1, t2).p
    assert aw <= m + tol
    assert outage_aw_dis(la, P, t1, t2).p <= aw + tol


@given(st.data(), power, threshold, threshold)
def test_probabilities_in_unit_interval(data, P, t1, t2):
    la = links(data.draw)
    for form in (outage_marp, outage_dis, outage_aw_sic, outage_aw_dis):
        p = form(la, P, t1, t2).p
        assert 0.0 <= p <= 1.0


@given(atten, atten, st.floats(0.01, 100.0), power)
def test_regime_boundary_continuity(a, b, c, P):
    hi, lo = (1 + 1e-8) / c, (1 - 1e-8) / c
    assert abs(f_base(a, b, c, hi, P) - g_base(a, b, c, lo, P)) < 1e-6


@given(atten, atten, st.floats(1e-3, 100.0), power)
def test_g_is_zero_at_zero_threshold(a, b, c, P):
    assert abs(g_base(a, b, c, 0.0, P)) <= 1e-12


@given(atten, atten, st.floats(1e-3, 100.0), power, st.floats(1e-4, 10.0), st.floats(1e-4, 10.0))
def test_failure_nondecreasing_in_threshold(a, b, c, P, x, dx):
    assert a_complement(a, b, c, x, P) <= a_complement(a, b, c, x + dx, P) + 1e-12


@settings(max_examples=40)
@given(st.data(), power, threshold, threshold, st.integers(0, 2 ** 32 - 1),
       st.floats(0.0, 0.1), st.floats(0.0, 0.1))
def test_path_wise_success_nesting(data, P, t1, t2, seed, i1, i2):
    la = links(data.draw)
    draw = sample_fading(la, np.random.default_rng(seed), 2000)
    pe = effective_powers(P, i1, i2)
    s = LinkState(draw.hsq, pe, (t1, t2))
    marp = ue1_decoded(Scheme.MARP, s)
    dis = ue1_decoded(Scheme.DIS, s)
    sic = ue1_decoded(Scheme.AW_SIC, s)
    awd = ue1_decoded(Scheme.AW_DIS, s)
    assert not np.any(marp & ~dis)
    assert not np.any(marp & ~sic)
    assert not np.any(sic & ~awd)


@settings(max_examples=30)
@given(st.data(), power, threshold, threshold, st.integers(0, 2 ** 32 - 1))
def test_controllers_stay_within_budget(data, P, t1, t2, seed):
    la = links(data.draw)
    draw = sample_fading(la, np.random.default_rng(seed), 500)
    s = LinkState(draw.hsq, P, (t1, t2))
    sic = run_protocol_batch(Scheme.AW_SIC, s)
    dis = run_protocol_batch(Scheme.AW_DIS, s)
    for run in (sic, dis):
        assert run.steps.max() <= 3 and run.bits.max() <= 5
        assert np.all(run.bits[run.steps == 1] == 2)
    assert not np.any(sic.ue1_decoded & ~dis.ue1_decoded)
    np.testing.assert_array_equal(sic.ue1_decoded, s.A[0, 0] | s.A[0, 1])


MODEL = PppModel(0.25)
TINY = PppModel(1e-8)


@settings(max_examples=25)
@given(st.floats(0.0, 500.0))
def test_joint_laplace_marginalises(s):
    assert np.isclose(MODEL.laplace_joint(s, 0.0), MODEL.laplace_I1(s), rtol=1e-9, atol=0)
    assert np.isclose(MODEL.laplace_joint(0.0, s), MODEL.laplace_I2(s), rtol=1e-9, atol=0)


@settings(max_examples=25)
@given(st.data(), st.floats(1.0, 1000.0), st.floats(1e-3, 30.0), st.floats(1e-3, 30.0))
def test_field_formulas_reduce_without_field(data, P, t1, t2):
    la = links(data.draw)
    assert abs(outage_marp_ppp(la, P, t1, t2, TINY).p - outage_marp(la, P, t1, t2).p) < 1e-6
    assert abs(outage_aw_ppp(la, P, t1, t2, TINY).p - outage_aw_sic(la, P, t1, t2).p) < 1e-6


@settings(max_examples=25)
@given(st.data(), st.floats(1.0, 1000.0), st.floats(1e-3, 30.0), st.floats(1e-3, 30.0))
def test_field_outages_are_probabilities(data, P, t1, t2):
    la = links(data.draw)
    m = outage_marp_ppp(la, P, t1, t2, MODEL).p
    aw = outage_aw_ppp(la, P, t1, t2, MODEL).p
    assert -1e-12 <= aw <= m + 1e-10 and m <= 1.0 + 1e-12
