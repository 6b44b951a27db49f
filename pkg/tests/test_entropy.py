import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from foldent.entropy import (conditional_entropy, degenerate_rate, delta_decomposition,
                             entropy_production, folding_entropy_branch, folding_entropy_partition,
                             local_dimension, lyapunov, metric_entropy_brin_katok,
                             metric_entropy_partition, phi, pullback_conditional_entropy)
from foldent.maps import identity, logistic, nfold, skewed_tent
from foldent.measures import (arcsine, atomic, bernoulli, density_from_function, lebesgue)
from foldent.partitions import estimate_holder


def H(p):
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(-(p * np.log(p)).sum())


def test_phi_values():
    assert phi(0.0) == 0.0
    assert phi(1.0) == 0.0
    assert phi(math.exp(-1)) == pytest.approx(math.exp(-1))


@settings(max_examples=200)
@given(st.lists(st.floats(0.01, 1.0), min_size=2, max_size=8), st.data())
def test_phi_concavity(ws, data):
    p = np.array(ws) / sum(ws)
    x = np.array(data.draw(st.lists(st.floats(0, 1), min_size=len(p), max_size=len(p))))
    assert np.dot(p, phi(x)) <= phi(np.dot(p, x)) + 1e-12
    assert np.sum(phi(p)) <= math.log(len(p)) + 1e-12


def test_conditional_entropy_small_example():
    mu = lebesgue(2**10)
    xi = [[(0.0, 0.25)], [(0.25, 0.5)], [(0.5, 1.0)]]
    zeta = [[(0.0, 0.5)], [(0.5, 1.0)]]
    # inside [0, 1/2) the two quarters split evenly; [1/2, 1) is a single element
    assert conditional_entropy(mu, xi, zeta) == pytest.approx(0.5 * math.log(2), abs=1e-12)
    assert conditional_entropy(mu, zeta, [[(0.0, 1.0)]]) == pytest.approx(math.log(2), abs=1e-12)


def test_folding_bernoulli_is_shannon_entropy():
    f = nfold(2)
    mu = bernoulli(f, (0.3, 0.7))
    assert folding_entropy_branch(f, mu).value == pytest.approx(H([0.3, 0.7]), abs=1e-12)


def test_folding_logistic_lebesgue_is_log2():
    # symmetric preimages with equal slopes and equal density carry equal weights
    assert folding_entropy_branch(logistic(4.0), lebesgue()).value == pytest.approx(math.log(2), abs=1e-6)


def test_folding_nonuniform_density_against_quadrature():
    f = nfold(2)
    mu = density_from_function(lambda x: 2 * x)

    def integrand(y):
        w = y / (2 * y + 1)
        return (y + 0.5) * H([w, 1 - w])

    oracle = quad(integrand, 0, 1)[0]
    assert folding_entropy_branch(f, mu).value == pytest.approx(oracle, abs=1e-6)
    assert folding_entropy_partition(f, mu, k_max=12).value == pytest.approx(oracle, abs=5e-3)


def test_folding_partition_rejects_mass_on_critical_set():
    with pytest.raises(ValueError):
        folding_entropy_partition(logistic(4.0), atomic([0.5, 0.2]))


def test_folding_discrete_fibres():
    # the two atoms share the image 0.2 and split its mass 1:3
    f = nfold(2)
    mu = atomic([0.1, 0.6], [0.25, 0.75])
    assert folding_entropy_branch(f, mu).value == pytest.approx(H([0.25, 0.75]))


@settings(max_examples=15, deadline=None)
@given(st.floats(0.5, 30.0))
def test_delta_identity_and_dual_route(eps0):
    f = logistic(4.0)
    hp = estimate_holder(f, 2.0, eps0=eps0)
    rep = delta_decomposition(f, lebesgue(2**12), range(1, 9), hp=hp)
    d = rep.diagnostics
    assert max(d["identity_gap"]) < 1e-9
    for k, lv in rep.levels.items():
        if k in d["k"]:
            i = d["k"].index(k)
            assert pullback_conditional_entropy(lv.part, lv.masses) == pytest.approx(
                d["delta1"][i] + d["delta2"][i], abs=1e-12)


def test_refinement_sums_do_not_increase():
    f = logistic(4.0)
    rep = delta_decomposition(f, lebesgue(), range(1, 11), hp=estimate_holder(f, 2.0, eps0=3.0))
    for j in range(1, 11):
        for k in range(j, 10):
            assert rep.I_table[k + 1][j] <= rep.I_table[k][j] + 1e-9
            assert rep.Ip_table[k + 1][j] <= rep.Ip_table[k][j] + 1e-9


def test_metric_entropy_partition_values():
    f = nfold(2)
    assert metric_entropy_partition(f, bernoulli(f, (0.3, 0.7))).value == pytest.approx(H([0.3, 0.7]), abs=1e-9)
    assert metric_entropy_partition(identity(), lebesgue()).value == 0.0
    rep = metric_entropy_partition(f, density_from_function(lambda x: 2 * x))
    assert rep.resolution_warning and "not invariant" in rep.resolution_warning


def test_lyapunov_values():
    assert lyapunov(nfold(3), lebesgue()) == pytest.approx(math.log(3), abs=1e-12)
    # int_0^1 log|4 - 8x| dx = log 4 - 1
    assert lyapunov(logistic(4.0), lebesgue()) == pytest.approx(math.log(4) - 1, abs=1e-4)
    assert lyapunov(logistic(4.0), arcsine()) == pytest.approx(math.log(2), abs=1e-4)


def test_entropy_production_vanishes_for_smooth_invariant_measures():
    assert entropy_production(nfold(2), lebesgue()) == pytest.approx(0.0, abs=1e-12)
    assert entropy_production(skewed_tent(3), lebesgue()) == pytest.approx(0.0, abs=1e-9)
    assert entropy_production(logistic(4.0), arcsine()) == pytest.approx(0.0, abs=1e-4)
    with pytest.raises(ValueError):
        entropy_production(nfold(2), lebesgue(), folding_estimator="magic")


def test_degenerate_rate_logistic_closed_form():
    prof = degenerate_rate(logistic(4.0), lebesgue(), m_max=8)
    for m, eta in zip(prof.ms, prof.etas):
        d = 2.0**-m
        assert eta == pytest.approx(abs(2 * d * (math.log(8 * d) - 1)), abs=2e-5)
    assert degenerate_rate(nfold(2), lebesgue()).etas == [0.0] * 10
    sub = degenerate_rate(logistic(4.0), lebesgue(), m_max=4, scheme="sublevel")
    assert all(e > 0 for e in sub.etas)
    with pytest.raises(ValueError):
        degenerate_rate(logistic(4.0), lebesgue(), scheme="other")


def test_brin_katok_periodic_orbit_has_zero_entropy():
    assert metric_entropy_brin_katok(nfold(2), atomic([1 / 3, 2 / 3])).value == 0.0


def test_brin_katok_markov_sample():
    f = nfold(2)
    mu = bernoulli(f, (0.3, 0.7)).sample_path(300000, seed=2)
    rep = metric_entropy_brin_katok(f, mu, sample_x=100, seed=2)
    assert rep.value == pytest.approx(H([0.3, 0.7]), abs=0.06)


def test_local_dimension_of_lebesgue_and_atoms():
    assert local_dimension(lebesgue()).value == pytest.approx(1.0, abs=0.02)
    assert local_dimension(atomic([0.3])).value == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        local_dimension(lebesgue(), deltas=[0.1, 0.05])
