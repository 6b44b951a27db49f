import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from foldent.maps import (AffineBranch, ConvergenceError, CosineBranch, DomainGapError,
                          PiecewiseMap, PolynomialBranch, PowerBranch, derivative, eval_map,
                          identity, logistic, map_from_dict, nfold, orbit, parse_map, preimages,
                          skewed_tent, sublevel_set)


def test_doubling_eval_and_preimages():
    f = nfold(2)
    assert eval_map(f, 0.3) == pytest.approx(0.6)
    pre = sorted(x for x, _ in preimages(f, 0.3))
    assert pre == pytest.approx([0.15, 0.65], abs=1e-12)


def test_tent_examples():
    f = skewed_tent(3)
    assert f(0.8) == pytest.approx(0.3)
    assert sorted(x for x, _ in preimages(f, 0.3)) == pytest.approx([0.1, 0.8], abs=1e-12)
    assert derivative(f, 0.9) == pytest.approx(-1.5)
    assert orbit(f, 0.2, 3) == pytest.approx([0.2, 0.6, 0.6])


def test_logistic_sublevel():
    (lo, hi), = sublevel_set(logistic(4.0), 0.4)
    assert lo == pytest.approx(0.45, abs=1e-10)
    assert hi == pytest.approx(0.55, abs=1e-10)


# y = 0 is excluded: its second preimage is 1, outside [0, 1)
@given(st.floats(1e-6, 0.999999))
def test_logistic_preimages_match_formula(y):
    got = sorted(x for x, _ in preimages(logistic(4.0), y))
    s = math.sqrt(1 - y)
    assert got == pytest.approx([0.5 - 0.5 * s, 0.5 + 0.5 * s], abs=1e-9)


@settings(max_examples=60)
@given(st.integers(2, 7), st.floats(0.0, 0.999999))
def test_nfold_has_N_preimages(N, y):
    f = nfold(N)
    pre = preimages(f, y)
    assert len(pre) == N
    for x, _ in pre:
        assert f(x) == pytest.approx(y, abs=1e-9)


@given(st.floats(1.2, 8.0), st.floats(0.0, 0.999))
def test_tent_preimages_solve(p, y):
    f = skewed_tent(p)
    for x, _ in preimages(f, y):
        assert f(x) == pytest.approx(y, abs=1e-9)


def test_identity_and_errors():
    f = identity()
    assert f(0.37) == pytest.approx(0.37)
    with pytest.raises(ValueError):
        nfold(0)
    with pytest.raises(ValueError):
        skewed_tent(1.0)
    with pytest.raises(ValueError):
        logistic(5)
    with pytest.raises(DomainGapError):
        PiecewiseMap([AffineBranch(0.0, 0.4, 1.0, 0.0), AffineBranch(0.5, 1.0, 1.0, 0.0)])


def test_out_of_domain_point_rejected():
    with pytest.raises(ValueError):
        nfold(2)(1.5)


def test_parse_map_forms(tmp_path):
    assert parse_map("nfold:3").params == {"N": 3}
    assert parse_map("skewed_tent:5").params == {"p": 5.0}
    assert parse_map("logistic:4").name == "logistic"
    f = skewed_tent(3)
    path = tmp_path / "m.json"
    path.write_text(f.to_json())
    g = parse_map(str(path))
    xs = np.linspace(0, 0.999, 50)
    assert np.allclose(f(xs), g(xs))
    with pytest.raises(ValueError):
        parse_map("nope")


def test_custom_branches_round_trip():
    brs = [PowerBranch(0.0, 0.5, 0.0, 0.0, 1.0, 3.0), PolynomialBranch(0.5, 1.0, [1.0, -1.0], origin=0.5, scale=0.5)]
    f = PiecewiseMap(brs, name="custom")
    g = map_from_dict(json.loads(f.to_json()))
    xs = np.linspace(0, 0.999, 101)
    assert np.allclose(f(xs), g(xs))


def test_power_branch_inverse_is_exact():
    br = PowerBranch(0.0, 0.25, 0.0, 0.0, 0.5, 7.0)
    f = PiecewiseMap([br, AffineBranch(0.25, 1.0, 4 / 3 * 0.5, 0.5 - 0.25 * 4 / 3 * 0.5)])
    ys = np.array([1e-9, 0.01, 0.3, 0.49])
    (pc,) = [p for p in f.pieces if p.branch == 0]
    xs = f.invert_piece(pc, ys)
    assert np.allclose(br.eval(xs), ys, rtol=1e-12)


def test_critical_points_of_logistic():
    assert logistic(4.0).critical_points() == pytest.approx([0.5])


def test_cosine_branch_resolution_and_sublevel():
    # 20 laps over [0, 1): resolvable
    br = CosineBranch(0.0, 1.0, math.log(0.25), math.log(20 * math.pi), 0.0, 0.25)
    assert br.resolved and br.laps == pytest.approx(20)
    sub = br.sublevel(1.0)
    xs = np.linspace(0, 1, 20001)
    inside = np.zeros_like(xs, dtype=bool)
    for lo, hi in sub:
        inside |= (xs >= lo) & (xs <= hi)
    small = np.abs(br.deriv(xs)) < 1.0
    assert np.all(inside[small])
    # astronomically many laps collapse to one bulk piece
    huge = CosineBranch(0.0, 1.0, -800.0, 900.0, 0.0, 0.25)
    assert not huge.resolved
    assert [p.kind for p in huge.pieces(0)] == ["bulk"]
    assert huge.range_on(0.0, 1.0)[0] == 0.25


def test_newton_fallback_reports_residual():
    # a polynomial branch without closed-form inverse goes through bisection
    f = PiecewiseMap([PolynomialBranch(0.0, 1.0, [0.0, 0.5, 0.0, 0.5])])
    pre = preimages(f, 0.3)
    assert len(pre) == 1 and f(pre[0][0]) == pytest.approx(0.3, abs=1e-10)
    assert issubclass(ConvergenceError, RuntimeError)
