import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from foldent.coding import HorseshoeSystem, LapHorseshoe, coding_from_map, markov_chain, symbolic_orbit
from foldent.maps import logistic, nfold, skewed_tent


def tent_system():
    return coding_from_map(skewed_tent(3))


def test_coding_requires_full_affine_branches():
    with pytest.raises(ValueError):
        coding_from_map(logistic(4.0))


def test_horseshoe_condition():
    assert tent_system().check_horseshoe()
    shrunk = HorseshoeSystem([(0.0, 0.2), (0.5, 0.6)], [2.0, 2.0], [0.0, -1.0])
    assert not shrunk.check_horseshoe()


def test_expanding_and_ordered():
    with pytest.raises(ValueError):
        HorseshoeSystem([(0.0, 0.5)], [0.5], [0.0])
    with pytest.raises(ValueError):
        HorseshoeSystem([(0.5, 1.0), (0.0, 0.5)], [2.0, 2.0], [-1.0, 0.0])


@given(st.lists(st.integers(0, 1), min_size=1, max_size=20))
def test_decode_lands_in_cylinder_and_encodes_back(word):
    sys = tent_system()
    x = sys.decode(word)
    lo, hi = sys.cylinder(word)
    assert lo - 1e-12 <= x <= hi + 1e-12
    if hi - lo > 1e-9:
        assert sys.encode(x, len(word)) == list(word)


def test_cylinders_shrink_geometrically():
    sys = coding_from_map(nfold(2))
    widths = [np.subtract(*sys.cylinder([0] * n)[::-1]) for n in range(1, 8)]
    assert np.allclose(np.array(widths[1:]) / widths[:-1], 0.5)


def test_symbolic_orbit_follows_the_map():
    f = skewed_tent(3)
    pts, syms = symbolic_orbit(tent_system(), 0.2345, 30, seed=0)
    # the first iterates are determined by the float seed
    direct = f.orbit(0.2345, 12)
    assert np.allclose(pts[:12], direct, atol=1e-9)
    assert np.all(f(pts[:-1]) == pytest.approx(pts[1:], abs=1e-9))


def test_markov_chain_frequencies():
    rng = np.random.default_rng(0)
    s = markov_chain(np.tile([0.3, 0.7], (2, 1)), [0.3, 0.7], 200000, rng)
    assert np.mean(s == 0) == pytest.approx(0.3, abs=0.005)


def test_lap_horseshoe_entropy():
    assert LapHorseshoe(np.log(12.0), 3).uniform_entropy() == pytest.approx(np.log(12.0) / 3)
