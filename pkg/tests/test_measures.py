import math

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from foldent.maps import logistic, nfold, skewed_tent
from foldent.measures import (Atomic, BallSpec, CodedMarkov, Density, Empirical, arcsine, atomic,
                              ball_mass, bernoulli, birkhoff_measure, bowen_ball_masses, integrate,
                              lebesgue, measure_from_dict, parse_measure, pushforward, w1_distance)


def test_bernoulli_cdf_values():
    mu = bernoulli(nfold(2), (0.3, 0.7))
    assert mu.cdf(np.array([0.25, 0.5, 0.75])) == pytest.approx([0.09, 0.3, 0.51], abs=1e-12)
    assert mu.entropy() == pytest.approx(-(0.3 * math.log(0.3) + 0.7 * math.log(0.7)))


def test_bernoulli_dimension_mismatch():
    with pytest.raises(ValueError):
        bernoulli(nfold(2), (0.2, 0.3, 0.5))


def test_w1_examples():
    assert w1_distance(atomic([0.0]), atomic([1.0])) == pytest.approx(1.0)
    assert w1_distance(lebesgue(), atomic([0.5])) == pytest.approx(0.25, abs=1e-9)
    assert w1_distance(pushforward(lebesgue(), skewed_tent(3)), lebesgue()) < 1e-9


@settings(max_examples=50)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=30), st.lists(st.floats(0, 1), min_size=1, max_size=30))
def test_w1_matches_scipy(a, b):
    # independent oracle: scipy's one-dimensional Wasserstein distance
    got = w1_distance(Empirical(a), Empirical(b))
    assert got == pytest.approx(scipy.stats.wasserstein_distance(a, b), abs=1e-12)


@settings(max_examples=40)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=12), st.lists(st.floats(0, 1), min_size=1, max_size=12),
       st.lists(st.floats(0, 1), min_size=1, max_size=12))
def test_w1_is_a_metric(a, b, c):
    A, B, C = Empirical(a), Empirical(b), Empirical(c)
    assert w1_distance(A, B) == pytest.approx(w1_distance(B, A), abs=1e-12)
    assert w1_distance(A, C) <= w1_distance(A, B) + w1_distance(B, C) + 1e-12


def test_ball_masses():
    assert ball_mass(lebesgue(), BallSpec(0.5, 0.1)) == pytest.approx(0.2, abs=1e-9)
    m, c = bowen_ball_masses(lebesgue(), nfold(2), [0.3], 0.01, 3)
    assert m[0] == pytest.approx([0.02, 0.01, 0.005], rel=1e-3)


def test_arcsine_is_logistic_invariant():
    # the transferred density is singular at the fold, so the error decays like sqrt(cell width)
    errs = [w1_distance(pushforward(mu, logistic(4.0)), mu) for mu in (arcsine(2**12), arcsine(2**16))]
    assert errs[1] < 1e-3
    assert errs[1] < errs[0] / 3


def test_integrate_polynomial_exactly():
    assert integrate(lebesgue(), lambda x: x) == pytest.approx(0.5, abs=1e-12)
    assert integrate(lebesgue(2**10), lambda x: x**2) == pytest.approx(1 / 3, abs=1e-6)


def test_density_validation():
    with pytest.raises(ValueError):
        Density(np.array([1.0, -1.0]))


def test_birkhoff_doubling_equidistributes():
    mu = birkhoff_measure(nfold(2), 0.1234567, n=200000, seed=1)
    assert w1_distance(mu, lebesgue()) < 3e-3
    # float iteration of the doubling map would collapse to 0 after ~53 steps
    assert mu.points.max() > 0.99


def test_birkhoff_seed_determinism():
    a = birkhoff_measure(nfold(3), 0.2, n=5000, seed=4)
    b = birkhoff_measure(nfold(3), 0.2, n=5000, seed=4)
    assert np.array_equal(a.points, b.points)


def test_markov_cdf_is_monotone_and_matches_atoms():
    mu = bernoulli(nfold(3), (0.2, 0.5, 0.3))
    t = np.linspace(0, 1, 1001)
    F = mu.cdf(t)
    assert np.all(np.diff(F) >= -1e-15)
    atoms = mu.cylinder_atoms(6)
    assert np.max(np.abs(atoms.cdf(t) - F)) <= 0.5**6 + 1e-12  # heaviest depth-6 cylinder


def test_markov_matrix_stationary():
    P = np.array([[0.9, 0.1], [0.4, 0.6]])
    mu = CodedMarkov(bernoulli(nfold(2), (0.5, 0.5)).system, P)
    assert mu.pi == pytest.approx([0.8, 0.2])
    h = -(0.8 * (0.9 * math.log(0.9) + 0.1 * math.log(0.1)) + 0.2 * (0.4 * math.log(0.4) + 0.6 * math.log(0.6)))
    assert mu.entropy() == pytest.approx(h)


def test_parse_measure_forms():
    f = nfold(2)
    assert isinstance(parse_measure("atomic:0.2@1,0.4@3"), Atomic)
    a = parse_measure("atomic:0.2@1,0.4@3")
    assert a.weights == pytest.approx([0.25, 0.75])
    assert isinstance(parse_measure("bernoulli:0.5,0.5", f), CodedMarkov)
    mu = measure_from_dict(bernoulli(f, (0.3, 0.7)).to_dict())
    assert mu.cdf(0.5) == pytest.approx(0.3)
    with pytest.raises(ValueError):
        parse_measure("gaussian")
    with pytest.raises(ValueError):
        Atomic([1.5])
