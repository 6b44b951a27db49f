"""Dyadic partitions of [0, 1] and their pullbacks under an interval map.

The pullback of the level-k dyadic partition splits every monotone piece of
the map into the preimages of the dyadic cells.  Components that meet the
low-derivative set ``{|f'| < eps_k}`` are lumped together into a single
degenerate element ``B_k``; the rest are "regular" and each of them maps
diffeomorphically into exactly one dyadic cell.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .maps import PiecewiseMap, ResolutionError

log = logging.getLogger(__name__)

MAX_LEVEL = 24
SLIVER = 1e-12


class LevelOverflowError(ValueError):
    pass


class ClassificationGapError(RuntimeError):
    pass


@dataclass(frozen=True)
class HolderParams:
    alpha: float
    K_holder: float
    beta: float
    eps0: float

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")
        if self.beta != self.alpha / (2 + self.alpha):
            raise ValueError("beta must equal alpha / (2 + alpha)")
        if not self.eps0 > 0:
            raise ValueError("eps0 must be positive")

    @classmethod
    def make(cls, alpha, K_holder, eps0=None):
        beta = alpha / (2 + alpha)
        if eps0 is None:
            eps0 = default_eps0(alpha, K_holder)
        return cls(alpha, K_holder, beta, eps0)

    def with_eps0(self, eps0):
        return HolderParams(self.alpha, self.K_holder, self.beta, float(eps0))

    def eps(self, k: int) -> float:
        return self.eps0 * 2.0 ** (-k * self.beta)

    def radius(self, eps: float) -> float:
        """Distance over which |f'| can grow by at most ``eps**2 / 4``."""
        return (eps**2 / (4 * self.K_holder)) ** (1 / self.alpha)

    @property
    def inclusion_constant(self) -> float:
        # eps_k + K r_{eps_k}^alpha = eps_k (1 + eps_k / 4) <= eps0 (1 + eps0 / 4) 2^{-k beta}
        return self.eps0 * (1 + self.eps0 / 4)

    def to_dict(self):
        return {"alpha": self.alpha, "K_holder": self.K_holder, "beta": self.beta,
                "eps0": self.eps0}


def default_eps0(alpha: float, K: float, dim: int = 1) -> float:
    return (2 * (4 * K) ** (1 / alpha) * math.sqrt(dim)) ** (alpha / (2 + alpha))


def estimate_holder(fmap: PiecewiseMap, r: float, eps0: float | None = None,
                    probe: int = 2**14, floor: float = 1e-6) -> HolderParams:
    """Holder exponent ``min(r - 1, 1)`` and an inflated constant for ``f'``.

    The constant is the largest difference quotient ``|f'(x) - f'(y)| / |x - y|^alpha``
    over probe-grid pairs at dyadic separations, times 1.5.
    """
    if not r > 1:
        raise ValueError("r must exceed 1")
    alpha = min(r - 1.0, 1.0)
    xs = np.linspace(0.0, 1.0, probe + 1)
    crit = fmap.critical_points()
    xs = np.unique(np.concatenate([xs, crit[(crit >= 0) & (crit <= 1)]]))
    xs = xs[xs < 1.0]
    d = fmap.derivative(xs)
    K = 0.0
    step = 1
    while step < len(xs):
        dx = xs[step:] - xs[:-step]
        q = np.abs(d[step:] - d[:-step]) / dx**alpha
        K = max(K, float(q.max()))
        step *= 2
    K = max(1.5 * K, floor)
    return HolderParams.make(alpha, K, eps0)


@dataclass(frozen=True)
class DyadicPartition:
    k: int

    def __post_init__(self):
        if not 1 <= self.k <= MAX_LEVEL:
            raise LevelOverflowError(f"level {self.k} outside 1..{MAX_LEVEL}")

    @property
    def n_cells(self) -> int:
        return 2**self.k

    @property
    def edges(self) -> np.ndarray:
        return np.arange(self.n_cells + 1) / self.n_cells

    @property
    def cells(self):
        e = self.edges
        return list(zip(e[:-1], e[1:]))


def build_dyadic(k: int) -> DyadicPartition:
    return DyadicPartition(k)


@dataclass
class PullbackPartition:
    """Regular components plus the degenerate element ``B_k``.

    Components are stored as parallel arrays sorted by left endpoint.  The
    pieces making up ``B_k`` keep their image-cell tags so that the split of
    ``B_k`` along ``f^{-1}`` of the dyadic cells stays available.
    """

    k: int
    eps_k: float
    lo: np.ndarray
    hi: np.ndarray
    cell: np.ndarray
    branch: np.ndarray
    degenerate_mask: np.ndarray
    params: dict = field(default_factory=dict)
    n_slivers: int = 0

    @property
    def regular_index(self) -> np.ndarray:
        return np.flatnonzero(~self.degenerate_mask)

    @property
    def regular(self):
        i = self.regular_index
        return list(zip(self.lo[i], self.hi[i], self.cell[i], self.branch[i]))

    @property
    def degenerate(self):
        """``B_k`` as a merged list of intervals."""
        i = np.flatnonzero(self.degenerate_mask)
        out = []
        for lo, hi in zip(self.lo[i], self.hi[i]):
            if out and lo <= out[-1][1] + 1e-15:
                out[-1][1] = max(out[-1][1], hi)
            else:
                out.append([lo, hi])
        return [(float(a), float(b)) for a, b in out]

    @property
    def n_regular(self) -> int:
        return int(np.count_nonzero(~self.degenerate_mask))

    def locate(self, x):
        """Index of the component containing each ``x``."""
        idx = np.searchsorted(self.lo, x, side="right") - 1
        return np.clip(idx, 0, len(self.lo) - 1)

    def masses(self, mu) -> np.ndarray:
        return mu.interval_mass(self.lo, self.hi)

    def csv_rows(self):
        for lo, hi, c, b, d in zip(self.lo, self.hi, self.cell, self.branch, self.degenerate_mask):
            yield (float(lo), float(hi), "degenerate" if d else "regular", int(c), int(b))


def _components_of_piece(fmap: PiecewiseMap, pc, k: int):
    n = 2**k
    br = fmap.branches[pc.branch]
    if pc.kind in ("flat", "bulk"):
        ylo, yhi = fmap.piece_image(pc)
        c0 = min(int(math.floor(ylo * n)), n - 1)
        c1 = min(int(math.floor(yhi * n)), n - 1)
        if c0 != c1:
            raise ResolutionError(
                f"unresolved piece [{pc.lo:.6g}, {pc.hi:.6g}) spans dyadic cells {c0}..{c1} at level {k}")
        return [pc.lo], [pc.hi], [c0]
    ylo, yhi = fmap.piece_image(pc)
    q0 = int(math.floor(ylo * n)) + 1
    q1 = int(math.ceil(yhi * n)) - 1
    inner = np.arange(q0, q1 + 1) / n if q1 >= q0 else np.empty(0)
    xs = fmap.invert_piece(pc, inner) if len(inner) else np.empty(0)
    xs = np.sort(np.clip(xs, pc.lo, pc.hi))
    bounds = np.concatenate([[pc.lo], xs, [pc.hi]])
    lo, hi = bounds[:-1], bounds[1:]
    mid = 0.5 * (lo + hi)
    cells = np.clip(np.floor(br.raw_eval(mid) * n).astype(np.int64), 0, n - 1)
    return lo, hi, cells


def build_pullback(fmap: PiecewiseMap, k: int, hp: HolderParams) -> PullbackPartition:
    DyadicPartition(k)
    eps = hp.eps(k)
    sub = fmap.sublevel_set(eps)
    u_lo = np.array([a for a, _ in sub])
    u_hi = np.array([b for _, b in sub])
    los, his, cells, brs = [], [], [], []
    for pc in fmap.pieces:
        if pc.kind == "bulk" and fmap.branches[pc.branch].sup_abs_deriv() >= eps:
            raise ResolutionError(f"oscillating block at [{pc.lo:.6g}, {pc.hi:.6g}) is not "
                                  f"resolvable at level {k}")
        lo, hi, c = _components_of_piece(fmap, pc, k)
        los.append(np.asarray(lo, dtype=float))
        his.append(np.asarray(hi, dtype=float))
        cells.append(np.asarray(c, dtype=np.int64))
        brs.append(np.full(len(lo), pc.branch, dtype=np.int64))
    lo = np.concatenate(los)
    hi = np.concatenate(his)
    cell = np.concatenate(cells)
    branch = np.concatenate(brs)
    keep = hi > lo
    lo, hi, cell, branch = lo[keep], hi[keep], cell[keep], branch[keep]
    order = np.argsort(lo, kind="stable")
    lo, hi, cell, branch = lo[order], hi[order], cell[order], branch[order]

    if len(u_lo):
        j = np.searchsorted(u_hi, lo, side="right")
        jj = np.clip(j, 0, len(u_lo) - 1)
        degenerate = (j < len(u_lo)) & (u_lo[jj] < hi)
    else:
        degenerate = np.zeros(len(lo), dtype=bool)
    slivers = (hi - lo < SLIVER) & ~degenerate
    n_slivers = int(np.count_nonzero(slivers))
    if n_slivers:
        log.warning("level %d: %d components shorter than %g absorbed into B_k", k, n_slivers, SLIVER)
        degenerate = degenerate | slivers
    params = hp.to_dict() | {"dim": 1, "n_cells": 2**k, "inclusion_constant": hp.inclusion_constant}
    return PullbackPartition(k, eps, lo, hi, cell, branch, degenerate, params, n_slivers)


@dataclass
class Refinement:
    """Classification of the regular level-k components against level j."""

    W: np.ndarray  # indices into fine.lo of components inside a regular level-j component
    Omega_prime: np.ndarray  # indices of components inside a member of Omega_j
    in_degenerate: np.ndarray  # indices of components inside B_j


def ancestors(coarse: PullbackPartition, fine: PullbackPartition, tol: float = 1e-9):
    """For every fine component, the coarse component containing its midpoint."""
    mid = 0.5 * (fine.lo + fine.hi)
    idx = coarse.locate(mid)
    bad = (fine.lo < coarse.lo[idx] - tol) | (fine.hi > coarse.hi[idx] + tol)
    # components inside B_j may straddle two adjacent degenerate pieces
    bad &= ~coarse.degenerate_mask[idx]
    bad &= ~fine.degenerate_mask
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise ClassificationGapError(
            f"level-{fine.k} component [{fine.lo[i]:.12g}, {fine.hi[i]:.12g}) straddles level-"
            f"{coarse.k} component [{coarse.lo[idx[i]]:.12g}, {coarse.hi[idx[i]]:.12g})")
    return idx


def omega_members(prev: PullbackPartition, cur: PullbackPartition) -> np.ndarray:
    """Regular level-j components lying inside ``B_{j-1}`` (new emergences)."""
    reg = cur.regular_index
    if prev is None:
        return np.empty(0, dtype=np.int64)
    idx = ancestors(prev, cur)
    return reg[prev.degenerate_mask[idx[reg]]]


def refine_classes(coarse: PullbackPartition, fine: PullbackPartition,
                   prev: PullbackPartition | None = None) -> Refinement:
    if coarse.k > fine.k:
        raise ValueError("the coarse level must not exceed the fine level")
    reg = fine.regular_index
    idx = ancestors(coarse, fine)[reg]
    in_reg = ~coarse.degenerate_mask[idx]
    W = reg[in_reg]
    omega = omega_members(prev, coarse) if prev is not None else np.empty(0, dtype=np.int64)
    is_omega = np.zeros(len(coarse.lo), dtype=bool)
    is_omega[omega] = True
    Omega_prime = reg[is_omega[idx]]
    return Refinement(W, Omega_prime, reg[~in_reg])


def pullback_ladder(fmap: PiecewiseMap, levels, hp: HolderParams) -> dict[int, PullbackPartition]:
    return {k: build_pullback(fmap, k, hp) for k in levels}
