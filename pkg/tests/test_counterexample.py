import json
import math

import numpy as np
import pytest

from foldent.coding import LapHorseshoe, coding_from_map
from foldent.counterexample import (BudgetExceededError, ConstraintError, CounterexampleParams,
                                    base_horseshoe, block_brin_katok, block_mean_log_slope,
                                    build_counterexample, check_block_cover, entropy_formula,
                                    find_covering_times, find_return_times, horseshoe_measure,
                                    nu_measure, semicontinuity_probe)
from foldent.maps import map_from_dict, nfold
from foldent.measures import w1_distance


@pytest.fixture(scope="module")
def default():
    p = CounterexampleParams()
    fmap, base = build_counterexample(p)
    return p, fmap, base


@pytest.fixture(scope="module")
def small():
    # lam = 8 keeps the first block at about 184 laps, so it can be resolved in floats
    p = CounterexampleParams(lam=8.0, K_blocks=2, n_base=4, growth=1.0)
    fmap, base = build_counterexample(p)
    return p, fmap, base


def test_fixed_points_and_full_branches(default):
    p, f, base = default
    a = p.a
    assert f(a) == pytest.approx(a, abs=1e-15)
    assert f(5 * a) == pytest.approx(a, abs=1e-15)
    for lo, hi in ((a, 2 * a), (4 * a, 5 * a)):
        ylo, yhi = sorted((f(lo), f(hi)))
        assert ylo <= a + 1e-15 and yhi >= 5 * a


def test_map_is_c1_and_stays_in_unit_interval(default):
    _, f, _ = default
    xs = np.linspace(0, 1, 200001)[:-1]
    ys = f(xs)
    assert ys.min() >= 0 and ys.max() <= 1
    for left, right in zip(f.branches[:-1], f.branches[1:]):
        x = right.a
        assert float(left.eval(x)) == pytest.approx(float(right.eval(x)), abs=1e-12)
        scale = max(1.0, abs(float(right.deriv(x))))
        assert float(left.deriv(x)) == pytest.approx(float(right.deriv(x)), abs=1e-9 * scale)


def test_block_geometry(default):
    p, f, base = default
    blocks = base.blocks
    for b in blocks:
        assert b.length == pytest.approx(p.gamma0 / b.k**2, rel=1e-12)
        assert math.exp(math.log(2 * math.pi) + b.log_M - b.log_omega) == pytest.approx(b.length, rel=1e-9)
        # A^r omega = L A^{r - 1}
        assert b.log_sup_slope == pytest.approx(math.log(p.L_big) + (p.r - 1) * b.log_A, abs=1e-12)
        assert base.z0 <= b.lo < b.hi <= base.z0 + 2 * p.a
        lo, hi = f.image_of_interval(b.lo, b.hi)
        assert lo <= base.x0 <= hi
    # blocks are disjoint and approach z0 as k grows
    los = [b.lo for b in blocks]
    assert all(x > y for x, y in zip(los, los[1:]))
    assert all(blocks[i + 1].hi <= blocks[i].lo for i in range(len(blocks) - 1))
    assert sum(b.length for b in blocks) < p.a


def test_block_horseshoe_condition(default):
    _, f, base = default
    for b in base.blocks:
        c = check_block_cover(f, base, b)
        assert c["linear_orbit"] and c["reversing"] and c["covers_block"] and c["return_in_window"]
        assert c["log_lengths_ok"]
        assert c["image_after_return"][1] - c["image_after_return"][0] == pytest.approx(base.delta0)


def test_resolved_block_slope_bound(small):
    p, f, base = small
    b = base.blocks[0]
    assert b.resolved
    xs = np.linspace(b.lo, b.hi, 2_000_001)
    sup = np.abs(f.derivative(xs)).max()
    assert sup == pytest.approx(p.L_big * math.exp((p.r - 1) * b.log_A), rel=1e-6)


def test_block_mean_log_slope_against_quadrature(small):
    _, f, base = small
    b = base.blocks[0]
    laps = int(math.floor(math.exp(b.log_laps)))
    # whole laps only, so the closed form is exact
    hi = b.phase - math.pi * math.exp(-b.log_omega) + laps * math.pi * math.exp(-b.log_omega)
    xs = b.lo + (np.arange(4_000_000) + 0.5) / 4_000_000 * (hi - b.lo)
    numeric = float(np.mean(np.log(np.abs(f.derivative(xs)))))
    assert numeric == pytest.approx(block_mean_log_slope(b), abs=2e-3)


def test_covering_times(default):
    p, f, base = default
    assert base.N1 == 3
    n_wide, _ = find_covering_times(f, base.x0, 2 * base.delta1, p.a, base.z0)
    assert n_wide <= base.N1
    rng = np.random.default_rng(0)
    for x in base.x0 + base.eta * rng.uniform(-1, 1, 10):
        lo, hi = x - base.delta1, x
        for _ in range(base.N1):
            lo, hi = f.image_of_interval(lo, hi)
        assert lo <= base.z0 and hi >= base.z0 + 2 * p.a
    with pytest.raises(BudgetExceededError):
        find_covering_times(nfold(2), 0.3, 1e-3, 0.01, 0.06, budget=2)


def test_return_times_of_fixed_point():
    assert find_return_times(nfold(2), 0.0, 1e-6, 5) == [1, 2, 3, 4, 5]


def test_return_frequency_matches_cylinder_mass():
    f = nfold(2)
    sys = coding_from_map(f)
    rng = np.random.default_rng(3)
    symbols = rng.integers(0, 2, 400000)
    symbols[:6] = [0, 1, 1, 0, 1, 0]
    x0 = sys.decode_windows(symbols, 1)[0]
    # returns within 2^-8 of x0 happen at rate close to 2^-8
    ret = find_return_times(f, x0, 2.0**-9, 1000, system=sys, symbols=symbols)
    rate = len(ret) / ret[-1]
    assert rate == pytest.approx(2.0**-8, rel=0.15)
    assert all(a < b for a, b in zip(ret, ret[1:]))
    with pytest.raises(BudgetExceededError):
        find_return_times(f, x0, 1e-15, 10, system=sys, symbols=symbols[:1000])


def test_selected_returns_by_brute_force(default):
    p, f, base = default
    sys = base.system
    depth = sys.depth_for()
    sign = 1
    expected, k = [], 1
    for j in range(1, base.n[-1] + 1):
        sign *= -1 if base.symbols[j - 1] == 1 else 1
        x = sys.decode(base.symbols[j:j + depth])
        target = max(round(p.n_base * p.growth ** (k - 1)), (expected[-1] + 1) if expected else 0)
        if j >= target and sign < 0 and abs(x - base.x0) <= base.eta:
            expected.append(j)
            k += 1
            if k > p.K_blocks:
                break
    assert expected == base.n


def test_horseshoe_measures():
    p = CounterexampleParams()
    lam_sys = base_horseshoe(p)
    assert horseshoe_measure(lam_sys, [0.5, 0.5]).entropy() == pytest.approx(math.log(2))
    assert horseshoe_measure(lam_sys, [0.3, 0.7]).entropy() == pytest.approx(0.6108643020548935)
    laps = LapHorseshoe(math.log(2) + 100.0, 60)
    assert horseshoe_measure(laps, "uniform").uniform_entropy() == pytest.approx((math.log(2) + 100) / 60)
    with pytest.raises(ValueError):
        horseshoe_measure(lam_sys, [0.2, 0.3, 0.5])


def test_default_entropy_parameter():
    p = CounterexampleParams()
    assert p.c == pytest.approx(0.5 * math.log(2))
    q0, q1 = p.probabilities()
    assert -(q0 * math.log(q0) + q1 * math.log(q1)) == pytest.approx(p.c, abs=1e-12)


@pytest.mark.parametrize("kw,name", [({"c": 1.04}, "entropy_bound"), ({"gamma0": 0.01}, "block_budget"),
                                     ({"L_big": 10.0}, "L_bound"), ({"lam": 4.0}, "lambda_large"),
                                     ({"lam": 80.0}, "hump_height"), ({"r": 1.0}, "smoothness")])
def test_parameter_constraints(kw, name):
    with pytest.raises(ConstraintError) as err:
        build_counterexample(CounterexampleParams(**kw))
    assert err.value.name == name


def test_params_from_dict():
    p = CounterexampleParams.from_dict({"lambda": 32.0, "K_blocks": 3})
    assert p.lam == 32.0 and p.L_big == 32.0
    with pytest.raises(ValueError):
        CounterexampleParams.from_dict({"bogus": 1})


def test_nu_measure_structure(default):
    p, f, base = default
    b = base.blocks[3]
    nu = nu_measure(base, b, p.lam, samples=16)
    T = b.n_k + base.N1 + 1
    assert nu.weights.sum() == pytest.approx(1.0)
    in_block = (nu.points >= b.lo) & (nu.points <= b.hi)
    assert nu.weights[in_block].sum() == pytest.approx(1 / T)
    assert w1_distance(nu, horseshoe_measure(base.system, list(base.probabilities))) < 0.01


def test_block_brin_katok_cross_check(small):
    _, _, base = small
    b = base.blocks[0]
    bk = block_brin_katok(base, b, 8.0)
    assert bk == pytest.approx(entropy_formula(b, base.N1), rel=0.05)


def test_probe_report(small):
    p, f, base = small
    rep = semicontinuity_probe(p, built=(f, base))
    assert rep.rows[0]["bk_status"] == "computed"
    assert rep.rows[1]["bk_status"] == "skipped:laps"
    header, rows = rep.csv_table()
    assert header[0] == "k" and len(rows) == 2
    assert json.loads(rep.to_json())["flags"]["entropy_gap"] is True
    with pytest.raises(ValueError):
        semicontinuity_probe(p, K=5, built=(f, base))


def test_map_json_round_trip(default):
    _, f, _ = default
    g = map_from_dict(json.loads(f.to_json()))
    xs = np.linspace(0, 0.999, 4001)
    assert np.array_equal(f(xs), g(xs))
