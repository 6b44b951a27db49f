import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from foldent.maps import logistic, nfold, skewed_tent
from foldent.partitions import (ClassificationGapError, HolderParams, LevelOverflowError, ancestors,
                                build_dyadic, build_pullback, default_eps0, estimate_holder,
                                omega_members, refine_classes)


def test_dyadic_levels():
    assert build_dyadic(3).n_cells == 8
    with pytest.raises(LevelOverflowError):
        build_dyadic(0)
    with pytest.raises(LevelOverflowError):
        build_dyadic(25)


def test_holder_parameters():
    hp = HolderParams.make(1.0, 12.0)
    assert hp.beta == pytest.approx(1 / 3)
    assert hp.eps0 == pytest.approx((2 * 48.0) ** (1 / 3))
    assert hp.eps(3) == pytest.approx(hp.eps0 / 2)
    # f' of the logistic map is 4 - 8x: Lipschitz constant 8, inflated by 1.5
    est = estimate_holder(logistic(4.0), 2.0)
    assert est.K_holder == pytest.approx(12.0, rel=1e-9)
    assert est.eps0 == pytest.approx(default_eps0(1.0, 12.0))
    with pytest.raises(ValueError):
        HolderParams(1.0, 1.0, 0.5, 1.0)
    with pytest.raises(ValueError):
        estimate_holder(logistic(4.0), 1.0)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 10), st.sampled_from([2, 3, 5]))
def test_regular_components_map_into_one_cell(k, N):
    f = nfold(N)
    part = build_pullback(f, k, estimate_holder(f, 2.0))
    n = 2**k
    assert part.n_regular == N * n
    for lo, hi, cell, _ in part.regular:
        ys = f(np.linspace(lo, hi, 7)[:-1])
        assert np.all((ys >= cell / n - 1e-12) & (ys < (cell + 1) / n + 1e-12))


def test_components_tile_the_interval():
    f = logistic(4.0)
    part = build_pullback(f, 6, estimate_holder(f, 2.0))
    assert part.lo[0] == 0.0 and part.hi[-1] == 1.0
    assert np.allclose(part.hi[:-1], part.lo[1:])


def test_degenerate_element_contains_low_slope_region():
    f = logistic(4.0)
    hp = estimate_holder(f, 2.0)
    for k in (3, 6, 9):
        part = build_pullback(f, k, hp)
        (u_lo, u_hi), = f.sublevel_set(hp.eps(k))
        assert any(lo <= u_lo and u_hi <= hi for lo, hi in part.degenerate)
        # and stays inside the larger low-slope region
        (s_lo, s_hi), = f.sublevel_set(hp.inclusion_constant * 2 ** (-k * hp.beta))
        assert all(s_lo - 1e-12 <= lo and hi <= s_hi + 1e-12 for lo, hi in part.degenerate)


def test_nested_levels_and_refinement():
    f = logistic(4.0)
    hp = estimate_holder(f, 2.0)
    p4, p5, p6 = (build_pullback(f, k, hp) for k in (4, 5, 6))
    idx = ancestors(p5, p6)
    assert np.all(p6.lo >= p5.lo[idx] - 1e-12)
    ref = refine_classes(p5, p6, prev=p4)
    total = len(ref.W) + len(ref.in_degenerate)
    assert total == p6.n_regular
    assert set(ref.Omega_prime) <= set(ref.W)
    assert len(omega_members(p4, p5)) >= 0
    with pytest.raises(ValueError):
        refine_classes(p6, p5)


def test_straddling_component_is_reported():
    f = nfold(2)
    hp = estimate_holder(f, 2.0)
    coarse = build_pullback(f, 3, hp)
    fine = build_pullback(f, 4, hp)
    fine.lo = fine.lo + 0.5 / 32  # shift by half a component
    fine.hi = fine.hi + 0.5 / 32
    with pytest.raises(ClassificationGapError):
        ancestors(coarse, fine)


def test_csv_rows_and_masses():
    from foldent.measures import lebesgue

    f = skewed_tent(3)
    part = build_pullback(f, 4, estimate_holder(f, 2.0, eps0=1.0))
    assert part.masses(lebesgue()).sum() == pytest.approx(1.0)
    rows = list(part.csv_rows())
    assert rows[0][2] in ("regular", "degenerate")
    assert math.isclose(sum(r[1] - r[0] for r in rows), 1.0)
