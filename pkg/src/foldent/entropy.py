"""Entropy-type invariants of interval maps.

Everything is in nats.  Two independent routes are provided for both the
folding entropy (pullback partitions vs. direct disintegration along
preimage fibres) and the metric entropy (refined generating partitions vs.
Bowen-ball decay), so that each can be checked against the other.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .maps import PiecewiseMap
from .measures import (CodedMarkov, Density, DiscreteMeasure, Empirical, Measure,
                       bowen_ball_masses, pushforward, transfer_density, w1_distance)
from .partitions import (HolderParams, PullbackPartition, ancestors, build_pullback,
                         estimate_holder)

log = logging.getLogger(__name__)

MAX_CELLS = 10**7
DEGENERATE_SLOPE = 1e-9


class CombinatorialBlowupError(RuntimeError):
    pass


def phi(x):
    """``-x log x`` with ``phi(0) = 0``."""
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > 1)):
        raise ValueError("phi is defined on [0, 1]")
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(x > 0, -x * np.log(np.where(x > 0, x, 1.0)), 0.0)
    return float(out) if out.ndim == 0 else out


def _cond_terms(m, denom):
    """``-m log(m / denom)`` elementwise, zero where ``m == 0``."""
    m = np.asarray(m, dtype=float)
    denom = np.asarray(denom, dtype=float)
    ok = (m > 0) & (denom > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(ok, m / np.where(ok, denom, 1.0), 1.0)
        return np.where(ok, -m * np.log(r), 0.0)


@dataclass
class EntropyReport:
    value: float
    estimator: str
    parameters: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    resolution_warning: str | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["diagnostics"] = {k: np.asarray(v).tolist() for k, v in self.diagnostics.items()}
        return d

    def csv_table(self):
        """Header and rows of the per-level diagnostics."""
        cols = [k for k, v in self.diagnostics.items() if np.ndim(v) == 1]
        if not cols:
            return ["value"], [[self.value]]
        n = max(len(self.diagnostics[c]) for c in cols)
        cols = [c for c in cols if len(self.diagnostics[c]) == n]
        rows = [[self.diagnostics[c][i] for c in cols] for i in range(n)]
        return cols, rows


@dataclass
class DegenerateRateProfile:
    ms: list
    neighborhoods: list
    etas: list
    scheme: str

    def to_dict(self):
        return {"ms": list(self.ms), "neighborhoods": [[list(iv) for iv in v] for v in self.neighborhoods],
                "etas": list(self.etas), "scheme": self.scheme}

    def csv_table(self):
        rows = [[m, sum(b - a for a, b in v), e] for m, v, e in zip(self.ms, self.neighborhoods, self.etas)]
        return ["m", "length_V_m", "eta_m"], rows


# -- conditional entropy -------------------------------------------------
def _element_labels(partition, points):
    labels = np.full(len(points), -1, dtype=np.int64)
    for i, element in enumerate(partition):
        for lo, hi in element:
            labels[(points >= lo) & (points < hi)] = i
    return labels


def conditional_entropy(mu: Measure, xi, zeta) -> float:
    """``H_mu(xi | zeta)`` for finite partitions given as lists of interval unions."""
    edges = {0.0, 1.0}
    for part in (xi, zeta):
        for element in part:
            for lo, hi in element:
                edges.update((float(lo), float(hi)))
    e = np.array(sorted(x for x in edges if 0 <= x <= 1))
    lo, hi = e[:-1], e[1:]
    mid = 0.5 * (lo + hi)
    m = mu.interval_mass(lo, hi)
    a = _element_labels(xi, mid)
    c = _element_labels(zeta, mid)
    if np.any(a < 0) or np.any(c < 0):
        raise ValueError("partitions must cover [0, 1)")
    n_c = c.max() + 1
    joint = np.bincount(a * n_c + c, weights=m, minlength=(a.max() + 1) * n_c)
    joint = joint.reshape(-1, n_c)
    mc = joint.sum(axis=0)
    return float(_cond_terms(joint, mc[None, :]).sum())


# -- folding entropy, partition route ------------------------------------
def _check_critical_mass(fmap, mu):
    sub = fmap.sublevel_set(1e-9)
    if not sub:
        return 0.0
    lo = np.array([a for a, _ in sub])
    hi = np.array([b for _, b in sub])
    return float(np.sum(mu.interval_mass(lo, np.maximum(hi, lo + 1e-15))))


@dataclass
class LevelData:
    part: PullbackPartition
    masses: np.ndarray
    fiber: np.ndarray  # mu(f^{-1} P) per component, looked up by its cell
    terms: np.ndarray  # -mu(Q) log(mu(Q) / mu(f^{-1}P)) for regular Q, 0 on B pieces
    delta1: float
    delta2: float


def level_data(fmap, mu, k, hp) -> LevelData:
    part = build_pullback(fmap, k, hp)
    m = part.masses(mu)
    fib = np.bincount(part.cell, weights=m, minlength=2**k)
    fiber = fib[part.cell]
    terms = np.where(part.degenerate_mask, 0.0, _cond_terms(m, fiber))
    deg = part.degenerate_mask
    b_cells = np.bincount(part.cell[deg], weights=m[deg], minlength=2**k)
    delta1 = float(_cond_terms(b_cells, fib).sum())
    return LevelData(part, m, fiber, terms, delta1, float(terms.sum()))


def _default_hp(fmap, hp, r=2.0):
    return hp if hp is not None else estimate_holder(fmap, r)


def folding_entropy_partition(fmap: PiecewiseMap, mu: Measure, k_max: int = 12,
                              hp: HolderParams | None = None, k0: int | None = None) -> EntropyReport:
    hp = _default_hp(fmap, hp)
    crit_mass = _check_critical_mass(fmap, mu)
    if crit_mass >= 1e-6:
        raise ValueError(f"measure gives mass {crit_mass:.3g} to the critical set")
    table = delta_decomposition(fmap, mu, range(1, k_max + 1), k0, hp)
    d = table.diagnostics
    value = d["delta1"][-1] + d["delta2"][-1]
    warning = None
    if d["mass_B"][-1] > 0.05:
        warning = f"degenerate component still carries mass {d['mass_B'][-1]:.3g} at level {k_max}"
    return EntropyReport(value, "partition", {"k_max": k_max, "k0": table.parameters["k0"],
                                              **hp.to_dict()}, d, warning)


def delta_decomposition(fmap: PiecewiseMap, mu: Measure, k_range, k0: int | None = None,
                        hp: HolderParams | None = None) -> EntropyReport:
    """Per-level split of ``H(pullback | f^{-1} dyadic)`` into the pieces used
    to control folding entropy, with the anchored refinement sums.

    Diagnostics columns: ``k, delta1, delta2, delta21, delta22, I_k_k0,
    mass_B, H_join, identity_gap``.  ``I_table[k][j]`` and ``Ip_table[k][j]``
    hold the full triangular arrays of refinement sums.
    """
    hp = _default_hp(fmap, hp)
    ks = sorted(set(int(k) for k in k_range))
    kmax = ks[-1]
    levels = {k: level_data(fmap, mu, k, hp) for k in range(1, kmax + 1)}
    if k0 is None:
        k0 = next((k for k in range(1, kmax + 1) if levels[k].masses[levels[k].part.degenerate_mask].sum() < 0.01),
                  kmax)
    I_table, Ip_table = {}, {}
    rows = {c: [] for c in ("k", "delta1", "delta2", "delta21", "delta22", "I_k_k0",
                            "mass_B", "H_join", "identity_gap")}
    for k in ks:
        lv = levels[k]
        reg = lv.part.regular_index
        # ancestor of each regular level-k component at every level j <= k
        anc_reg = {}
        for j in range(1, k + 1):
            idx = ancestors(levels[j].part, lv.part)[reg] if j < k else reg
            anc_reg[j] = ~levels[j].part.degenerate_mask[idx]
        I_row, Ip_row = {}, {}
        t = lv.terms[reg]
        for j in range(1, k + 1):
            I_row[j] = float(t[anc_reg[j]].sum())
            if j >= 2:
                fresh = anc_reg[j] & ~anc_reg[j - 1]
            else:
                fresh = np.zeros(len(reg), dtype=bool)
            Ip_row[j] = float(t[fresh].sum())
        I_table[k], Ip_table[k] = I_row, Ip_row
        kk0 = min(k0, k)
        identity = I_row[kk0] + sum(Ip_row[j] for j in range(kk0 + 1, k + 1))
        d21 = I_row[k - 1] if k >= 2 else I_row[k]
        d22 = Ip_row[k] if k >= 2 else 0.0
        h_join = pullback_conditional_entropy(lv.part, lv.masses)
        rows["k"].append(k)
        rows["delta1"].append(lv.delta1)
        rows["delta2"].append(lv.delta2)
        rows["delta21"].append(d21)
        rows["delta22"].append(d22)
        rows["I_k_k0"].append(I_row[kk0])
        rows["mass_B"].append(float(lv.masses[lv.part.degenerate_mask].sum()))
        rows["H_join"].append(h_join)
        rows["identity_gap"].append(abs(lv.delta2 - identity))
    rep = EntropyReport(rows["delta1"][-1] + rows["delta2"][-1], "delta-decomposition",
                        {"k0": k0, **hp.to_dict()}, rows)
    rep.I_table = I_table
    rep.Ip_table = Ip_table
    rep.levels = levels
    return rep


def pullback_conditional_entropy(part: PullbackPartition, masses) -> float:
    """``H(pullback | f^{-1} dyadic)`` computed from scratch on the join.

    Elements of the join are the regular components and the slices
    ``B_k ∩ f^{-1} P``; this is the independent route to ``delta1 + delta2``.
    """
    n = 2**part.k
    label = np.where(part.degenerate_mask, part.cell, n + np.arange(len(part.lo)))
    _, inv = np.unique(label, return_inverse=True)
    elem_mass = np.bincount(inv, weights=masses)
    elem_cell = np.zeros(len(elem_mass), dtype=np.int64)
    elem_cell[inv] = part.cell
    fiber = np.bincount(elem_cell, weights=elem_mass, minlength=n)
    return float(_cond_terms(elem_mass, fiber[elem_cell]).sum())


# -- folding entropy, disintegration route -------------------------------
def folding_entropy_branch(fmap: PiecewiseMap, mu: Measure) -> EntropyReport:
    """Integral over ``f mu`` of the entropy of the conditional weights on each fibre.

    For a density ``rho`` the weight of the preimage ``x_i`` of ``y`` is
    ``rho(x_i) / |f'(x_i)| / (L rho)(y)``.  For a Markov measure on a coded
    horseshoe the weights are the conditional symbol probabilities.
    """
    if isinstance(mu, CodedMarkov):
        q = mu.conditional_symbol_weights()
        # column j: distribution of the current symbol given the next one is j
        per_fibre = np.array([float(np.sum(phi(q[:, j]))) for j in range(q.shape[1])])
        value = float(mu.pi @ per_fibre) / mu.system.return_time
        return EntropyReport(value, "branch", {"measure": "markov"},
                             {"fibre_entropy": per_fibre.tolist()})
    if isinstance(mu, DiscreteMeasure):
        # atoms sharing an image split that image's mass
        img = np.round(np.asarray(fmap(mu.points), dtype=float), 12)
        _, inv = np.unique(img, return_inverse=True)
        fibre_mass = np.bincount(inv, weights=mu.weights)
        value = float(np.sum(mu.weights * -np.log(mu.weights / fibre_mass[inv])))
        return EntropyReport(value, "branch", {"measure": "discrete"}, {"fibres": [len(fibre_mass)]})
    if not isinstance(mu, Density):
        raise TypeError("the branch estimator needs a density, discrete or coded Markov measure")
    y = mu.centers
    contrib = []
    flagged = 0
    for pc in fmap.pieces:
        if pc.kind not in ("inc", "dec"):
            continue
        lo, hi = fmap.piece_image(pc)
        sel = np.flatnonzero((y >= lo) & (y < hi))
        if not len(sel):
            continue
        x = fmap.invert_piece(pc, y[sel])
        d = np.abs(fmap.branches[pc.branch].deriv(x))
        small = d < DEGENERATE_SLOPE
        flagged += int(np.count_nonzero(small))
        contrib.append((sel, mu.density_at(x) / np.maximum(d, DEGENERATE_SLOPE)))
    total = np.zeros_like(y)
    for sel, c in contrib:
        total[sel] += c
    ent = np.zeros_like(y)
    for sel, c in contrib:
        with np.errstate(divide="ignore", invalid="ignore"):
            p = np.where(total[sel] > 0, c / total[sel], 0.0)
        ent[sel] += phi(np.clip(p, 0.0, 1.0))
    weight = total / total.sum()
    value = float(np.dot(weight, ent))
    warning = f"{flagged} preimages with |f'| < {DEGENERATE_SLOPE:g} were clamped" if flagged else None
    return EntropyReport(value, "branch", {"grid_n": mu.grid_n},
                         {"degenerate_preimages": [flagged]}, warning)


# -- Lyapunov exponent and entropy production ----------------------------
def _branch_breaks(fmap):
    return np.array([br.a for br in fmap.branches[1:]])


def log_abs_derivative(fmap):
    def f(x):
        with np.errstate(divide="ignore"):
            return np.log(np.abs(fmap.derivative(x)))
    return f


def lyapunov(fmap: PiecewiseMap, mu: Measure, report=None) -> float:
    g = log_abs_derivative(fmap)
    if isinstance(mu, Density):
        return mu.integrate(g, report, breaks=_branch_breaks(fmap))
    return mu.integrate(g, report)


def entropy_production(fmap: PiecewiseMap, mu: Measure, folding_estimator: str = "branch",
                       hp: HolderParams | None = None, k_max: int = 12) -> float:
    if folding_estimator == "branch":
        F = folding_entropy_branch(fmap, mu).value
    elif folding_estimator == "partition":
        F = folding_entropy_partition(fmap, mu, k_max, hp).value
    else:
        raise ValueError(f"unknown folding estimator {folding_estimator!r}")
    return F - lyapunov(fmap, mu)


# -- metric entropy, partition route -------------------------------------
def monotone_partition(fmap: PiecewiseMap):
    """Partition into the monotone pieces of the map (a generator for expanding maps)."""
    return [[(pc.lo, pc.hi)] for pc in fmap.pieces]


def _intervals_of(partition):
    items = sorted((lo, hi, i) for i, el in enumerate(partition) for lo, hi in el)
    lo = np.array([a for a, _, _ in items])
    hi = np.array([b for _, b, _ in items])
    lab = np.array([c for _, _, c in items], dtype=np.int64)
    return lo, hi, lab


def _preimage_intervals(fmap, edges):
    """Components of ``f^{-1}`` of the interval partition with breakpoints ``edges``.

    Returns ``(lo, hi, parent)`` where ``parent`` is the index of the image
    interval, sorted by ``lo``.
    """
    los, his, par = [], [], []
    for pc in fmap.pieces:
        br = fmap.branches[pc.branch]
        if pc.kind in ("inc", "dec"):
            ylo, yhi = fmap.piece_image(pc)
            inner = edges[(edges > ylo) & (edges < yhi)]
            xs = np.sort(fmap.invert_piece(pc, inner)) if len(inner) else np.empty(0)
            b = np.concatenate([[pc.lo], np.clip(xs, pc.lo, pc.hi), [pc.hi]])
            lo, hi = b[:-1], b[1:]
        else:
            lo, hi = np.array([pc.lo]), np.array([pc.hi])
        mid = 0.5 * (lo + hi)
        y = np.clip(br.raw_eval(mid), 0.0, 1.0)
        p = np.clip(np.searchsorted(edges, y, side="right") - 1, 0, len(edges) - 2)
        los.append(lo)
        his.append(hi)
        par.append(p)
    lo, hi, par = np.concatenate(los), np.concatenate(his), np.concatenate(par)
    keep = hi > lo
    order = np.argsort(lo[keep], kind="stable")
    return lo[keep][order], hi[keep][order], par[keep][order]


def metric_entropy_partition(fmap: PiecewiseMap, mu: Measure, xi=None, n_max: int = 8,
                             invariance_tol: float = 0.01) -> EntropyReport:
    """``H_mu(xi | f^{-1} R_n)`` with ``R_n = xi v f^{-1} xi v ... v f^{-(n-1)} xi``.

    Elements of the refinements are tracked by label, so unions of intervals
    (preimages spread over several branches) are handled exactly.
    """
    xi = monotone_partition(fmap) if xi is None else xi
    warning = None
    try:
        gap = w1_distance(pushforward(mu, fmap), mu)
        if gap > invariance_tol:
            warning = f"measure is not invariant (W1 to its image {gap:.3g})"
    except (TypeError, ValueError):
        gap = float("nan")
    xlo, xhi, xlab = _intervals_of(xi)
    # R_1 = xi: intervals with element labels
    r_lo, r_hi, r_lab = xlo, xhi, xlab
    seq = []
    for n in range(1, n_max + 1):
        edges = np.concatenate([r_lo, [1.0]])
        if np.any(np.abs(r_hi[:-1] - r_lo[1:]) > 1e-12):
            raise ValueError("refined partition has gaps")
        p_lo, p_hi, parent = _preimage_intervals(fmap, edges)
        plab = r_lab[parent]
        # join with xi
        cuts = np.unique(np.concatenate([p_lo, p_hi, xlo, xhi]))
        c_lo, c_hi = cuts[:-1], cuts[1:]
        mid = 0.5 * (c_lo + c_hi)
        a = xlab[np.clip(np.searchsorted(xlo, mid, side="right") - 1, 0, len(xlo) - 1)]
        b = plab[np.clip(np.searchsorted(p_lo, mid, side="right") - 1, 0, len(p_lo) - 1)]
        if len(c_lo) > MAX_CELLS:
            raise CombinatorialBlowupError(f"refinement has {len(c_lo)} cells at n={n}")
        m = mu.interval_mass(c_lo, c_hi)
        nb = int(b.max()) + 1
        joint_key = a.astype(np.int64) * nb + b
        keys, inv = np.unique(joint_key, return_inverse=True)
        joint = np.bincount(inv, weights=m)
        cond = np.bincount(b, weights=m, minlength=nb)
        seq.append(float(_cond_terms(joint, cond[keys % nb]).sum()))
        # R_{n+1} = xi v f^{-1} R_n, labels are the joint elements
        r_lo, r_hi, r_lab = c_lo, c_hi, inv
    return EntropyReport(seq[-1], "partition", {"n_max": n_max, "xi_size": len(xi)},
                         {"n": list(range(1, n_max + 1)), "h_n": seq,
                          "invariance_w1": [gap]}, warning)


# -- metric entropy, Bowen-ball route ------------------------------------
def _sample_centers(mu: Measure, n: int, seed: int):
    rng = np.random.default_rng(seed)
    pts, w = mu.support()
    idx = rng.choice(len(pts), size=n, p=w / w.sum())
    return pts[np.sort(idx)]


def _fit_slope(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 2:
        return float("nan")
    xm = x - x.mean()
    denom = float(np.dot(xm, xm))
    return float(np.dot(xm, y - y.mean()) / denom) if denom > 0 else float("nan")


def metric_entropy_brin_katok(fmap: PiecewiseMap, mu: Measure, sample_x: int = 200,
                              deltas=None, n_range=(1, 20), seed: int = 0, min_count: int = 30,
                              radius_fn=None) -> EntropyReport:
    """Decay rate of Bowen-ball masses.

    For each sampled center and radius, ``-log mu(B_n(x, delta))`` is fit
    linearly in ``n`` over the window where the ball still holds at least
    ``min_count`` support points (or all of them, if it never held more).
    The reported value is the mean slope at the smallest radius for which
    at least 80% of the centers give a usable fit.
    """
    if isinstance(mu, Empirical) and len(mu.points) < 10**4 and len(mu.points) > 64:
        log.warning("Brin-Katok estimator expects at least 1e4 support points")
    deltas = [2.0**-j for j in range(3, 7)] if deltas is None else list(deltas)
    n_lo, n_hi = n_range
    centers = _sample_centers(mu, sample_x, seed)
    slopes = np.full((len(deltas), len(centers)), np.nan)
    low_stats = 0
    for di, delta in enumerate(deltas):
        masses, counts = bowen_ball_masses(mu, fmap, centers, delta, n_hi, radius_fn)
        for ci in range(len(centers)):
            c = counts[ci]
            thresh = min(min_count, c[0])
            if c[0] < min_count:
                low_stats += 1
            ns = np.arange(1, n_hi + 1)
            ok = (ns >= n_lo) & (c >= max(thresh, 1))
            if np.count_nonzero(ok) >= 3:
                slopes[di, ci] = _fit_slope(ns[ok], -np.log(masses[ci, ok]))
    valid = np.mean(np.isfinite(slopes), axis=1)
    stable = [i for i in range(len(deltas)) if valid[i] >= 0.8]
    pick = min(stable, key=lambda i: deltas[i]) if stable else int(np.argmax(valid))
    value = float(np.nanmean(slopes[pick])) if np.isfinite(slopes[pick]).any() else float("nan")
    warning = None
    if low_stats:
        warning = f"{low_stats} balls held fewer than {min_count} support points"
    return EntropyReport(value, "brin-katok",
                         {"sample_x": len(centers), "deltas": deltas, "n_range": list(n_range),
                          "delta_used": deltas[pick], "seed": seed},
                         {"delta": deltas, "mean_slope": np.nanmean(np.where(np.isfinite(slopes), slopes, np.nan), axis=1).tolist(),
                          "valid_fraction": valid.tolist()}, warning)


# -- local dimension ------------------------------------------------------
def local_dimension(mu: Measure, sample_x: int = 200, deltas=None, seed: int = 0) -> EntropyReport:
    deltas = np.array([2.0**-j for j in range(5, 13)] if deltas is None else deltas, dtype=float)
    if len(deltas) < 2 or deltas.max() / deltas.min() < 10:
        raise ValueError("need at least two radii spanning a decade")
    centers = _sample_centers(mu, sample_x, seed)
    per_point = []
    low = 0
    for x in centers:
        m = mu.open_ball_mass(np.full(len(deltas), x), deltas)
        ok = m > 0
        if isinstance(mu, DiscreteMeasure):
            cnt = m / mu.weights.min()
            low += int(np.any(cnt[ok] < 30))
        if np.count_nonzero(ok) < 2:
            continue
        per_point.append(_fit_slope(np.log(deltas[ok]), np.log(m[ok])))
    per_point = np.array(per_point)
    warning = f"{low} centers with fewer than 30 points in the smallest ball" if low else None
    value = float(np.mean(per_point)) if len(per_point) else float("nan")
    return EntropyReport(value, "local-dimension",
                         {"sample_x": len(centers), "deltas": deltas.tolist(), "seed": seed},
                         {"slope": per_point.tolist(),
                          "spread": [float(per_point.min()), float(per_point.max())] if len(per_point) else []},
                         warning)


# -- degenerate rate ------------------------------------------------------
def _distance_neighborhood(fmap, radius):
    ivs = [(max(0.0, c.lo - radius), min(1.0, c.hi + radius)) for c in fmap.critical_set]
    out = []
    for lo, hi in sorted(ivs):
        if out and lo <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return out


def neighborhood_integral(fmap, mu, intervals, report=None) -> float:
    """``int_V log|f'| dmu`` over a finite union of intervals ``V``."""
    if not intervals:
        return 0.0
    lo = np.array([a for a, _ in intervals])
    hi = np.array([b for _, b in intervals])
    g = log_abs_derivative(fmap)

    def masked(x):
        idx = np.searchsorted(lo, x, side="right") - 1
        inside = (idx >= 0) & (x < hi[np.clip(idx, 0, None)])
        out = np.zeros_like(x)
        if inside.any():
            out[inside] = g(x[inside])
        return out

    if isinstance(mu, Density):
        breaks = np.concatenate([lo, hi, _branch_breaks(fmap)])
        return mu.integrate(masked, report, breaks=breaks)
    return mu.integrate(masked, report)


def degenerate_rate(fmap: PiecewiseMap, mu: Measure, m_max: int = 10,
                    scheme: str = "distance", m_min: int = 1) -> DegenerateRateProfile:
    if scheme not in ("distance", "sublevel"):
        raise ValueError("scheme must be 'distance' or 'sublevel'")
    ms, nbhds, etas = [], [], []
    for m in range(m_min, m_max + 1):
        if scheme == "distance":
            V = _distance_neighborhood(fmap, 2.0**-m)
        else:
            V = fmap.sublevel_set(2.0**-m)
        eta = abs(neighborhood_integral(fmap, mu, V)) if V else 0.0
        ms.append(m)
        nbhds.append(V)
        etas.append(eta)
    return DegenerateRateProfile(ms, nbhds, etas, scheme)
