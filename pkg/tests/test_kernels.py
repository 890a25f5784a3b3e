from __future__ import annotations

import json
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quniq import _pykernels as py

ck = pytest.importorskip("quniq._ckernels")

FAMILIES = [(py.POWER_EXP, 1.0, 0.5), (py.POWER_EXP, 0.25, 1.0), (py.END_POINT, 1.0, 1.0),
            (py.END_POINT, 0.5, 3.0)]


@pytest.mark.parametrize("code,p0,p1", FAMILIES)
def test_log_weight_exp_agrees(code, p0, p1):
    for s in np.linspace(-3, 40, 200):
        assert ck.log_weight_exp(code, p0, p1, s) == pytest.approx(py.log_weight_exp(code, p0, p1, s),
                                                                  rel=1e-14)


@pytest.mark.parametrize("code,p0,p1", FAMILIES)
def test_moment_logs_agree(code, p0, p1):
    v1, s1 = ck.moment_logs(code, p0, p1, 60)
    v2, s2 = py.moment_logs(code, p0, p1, 60)
    assert np.allclose(v1, v2, rtol=1e-12, atol=1e-12, equal_nan=True)
    assert np.allclose(s1, s2, rtol=1e-6, atol=1e-6, equal_nan=True)


def test_moment_logs_flag_unbounded_objective():
    # log W(t) = t**0.25 at alpha = 0 is constant in s: the objective grows forever
    v1, _ = ck.moment_logs(py.POWER_EXP, 1.0, 0.0, 3)
    v2, _ = py.moment_logs(py.POWER_EXP, 1.0, 0.0, 3)
    assert np.isnan(v1[1:]).all() and np.isnan(v2[1:]).all()


def sorted_disjoint(draw_values):
    pts = np.sort(np.unique(np.round(np.asarray(draw_values), 6)))
    if pts.size % 2:
        pts = pts[:-1]
    return pts[0::2], pts[1::2]


@settings(max_examples=80, deadline=None)
@given(vals=st.lists(st.floats(0, 100), min_size=2, max_size=40),
       length=st.floats(0.05, 10), lo=st.floats(0, 50), span=st.floats(0, 60))
def test_greedy_starts_agree(vals, length, lo, span):
    a, b = sorted_disjoint(vals)
    hi = lo + span
    assert np.array_equal(ck.greedy_starts(a, b, lo, hi, length, 1e-12),
                          py.greedy_starts(a, b, lo, hi, length, 1e-12))


@settings(max_examples=80, deadline=None)
@given(vals=st.lists(st.floats(0, 100), min_size=2, max_size=40),
       sep=st.floats(0.05, 10), lo=st.floats(0, 50), span=st.floats(0, 60))
def test_separated_points_agree(vals, sep, lo, span):
    a, b = sorted_disjoint(vals)
    assert np.array_equal(ck.separated_points(a, b, lo, lo + span, sep),
                          py.separated_points(a, b, lo, lo + span, sep))


def test_sinc_product_agrees_and_handles_zero():
    xi = np.concatenate(([0.0, 1e-300, -1e-12], np.linspace(-500, 500, 4001)))
    widths = np.concatenate((np.full(20, 0.01), 1.0 / np.arange(10, 200) ** 2))
    c, p = ck.sinc_product(xi, widths), py.sinc_product(xi, widths)
    # next to a zero of sin the factor is ill-conditioned in relative terms,
    # and np.sinc rounds its argument differently from sin(x)/x
    assert np.allclose(c, p, rtol=1e-10, atol=1e-300)
    assert c[0] == 1.0 and p[0] == 1.0


def _run_backend(env_value):
    code = (
        "import json, quniq; from quniq.weights import moment_sequence, PowerExp;"
        "m = moment_sequence(PowerExp(1, 0.5), 40);"
        "print(json.dumps({'backend': quniq.BACKEND, 'log_m': list(m.log_m)}))"
    )
    env = dict(os.environ)
    env["QUNIQ_PURE"] = env_value
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env,
                         check=True).stdout
    return json.loads(out)


def test_backend_selection_and_equivalence():
    fast, slow = _run_backend("0"), _run_backend("1")
    assert fast["backend"] == "cython" and slow["backend"] == "python"
    assert np.allclose(fast["log_m"], slow["log_m"], rtol=1e-12, atol=1e-12)
