"""Symbolic coding of horseshoes and full-branch maps.

A horseshoe is a family of disjoint closed intervals ``I_0, ..., I_{l-1}``
together with expanding return branches ``g_i : I_i -> hull``.  Points are
decoded from symbol words by composing the contracting inverses, so orbit
points never accumulate floating-point drift.
"""

from __future__ import annotations

import math

import numpy as np


class HorseshoeSystem:
    """Coded interval family with affine return branches ``g_i(x) = s_i x + b_i``.

    ``slopes`` and ``intercepts`` describe the return map (``return_time``
    iterates of the underlying map) on each coded interval.  Decreasing
    branches are allowed.
    """

    def __init__(self, intervals, slopes, intercepts, return_time=1, name="horseshoe"):
        self.intervals = np.asarray(intervals, dtype=float).reshape(-1, 2)
        self.slopes = np.asarray(slopes, dtype=float)
        self.intercepts = np.asarray(intercepts, dtype=float)
        if not len(self.intervals) == len(self.slopes) == len(self.intercepts):
            raise ValueError("intervals, slopes and intercepts must have equal length")
        if np.any(np.abs(self.slopes) <= 1):
            raise ValueError("return branches must be expanding")
        order = np.argsort(self.intervals[:, 0])
        if np.any(order != np.arange(len(order))):
            raise ValueError("coded intervals must be listed left to right")
        if np.any(self.intervals[1:, 0] < self.intervals[:-1, 1]):
            raise ValueError("coded intervals overlap")
        self.return_time = int(return_time)
        self.name = name
        self.hull = (float(self.intervals[0, 0]), float(self.intervals[-1, 1]))

    @property
    def n_symbols(self) -> int:
        return len(self.intervals)

    @property
    def orientation(self) -> np.ndarray:
        return np.sign(self.slopes).astype(int)

    @property
    def contraction(self) -> float:
        return float(1.0 / np.min(np.abs(self.slopes)))

    def lebesgue_weights(self) -> np.ndarray:
        w = 1.0 / np.abs(self.slopes)
        return w / w.sum()

    def forward(self, x, sym):
        return self.slopes[sym] * x + self.intercepts[sym]

    def inverse(self, y, sym):
        return (y - self.intercepts[sym]) / self.slopes[sym]

    def symbol_of(self, x):
        """Index of the coded interval containing ``x`` (-1 when in a gap)."""
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.intervals[:, 0], x, side="right") - 1
        idx = np.clip(idx, 0, self.n_symbols - 1)
        inside = (x >= self.intervals[idx, 0]) & (x <= self.intervals[idx, 1])
        return np.where(inside, idx, -1)

    def check_horseshoe(self) -> bool:
        """Each return branch maps its interval over the whole hull."""
        lo, hi = self.hull
        for (a, b), s, c in zip(self.intervals, self.slopes, self.intercepts):
            ya, yb = s * a + c, s * b + c
            if min(ya, yb) > lo + 1e-12 or max(ya, yb) < hi - 1e-12:
                return False
        return True

    def depth_for(self, resolution: float = 1e-16) -> int:
        width = self.hull[1] - self.hull[0]
        return max(1, math.ceil(math.log(width / resolution) / math.log(1 / self.contraction)))

    def decode(self, word, ref=None) -> float:
        """Point of the cylinder ``[word]`` obtained from the reference point."""
        x = 0.5 * (self.hull[0] + self.hull[1]) if ref is None else ref
        for s in reversed(list(word)):
            x = self.inverse(x, s)
        return float(x)

    def decode_windows(self, symbols, n: int, depth: int | None = None) -> np.ndarray:
        """Points ``x_j`` coded by ``symbols[j : j + depth]`` for ``j < n``."""
        symbols = np.asarray(symbols, dtype=np.int64)
        depth = self.depth_for() if depth is None else depth
        if len(symbols) < n + depth - 1:
            raise ValueError("symbol sequence too short for the requested windows")
        x = np.full(n, 0.5 * (self.hull[0] + self.hull[1]))
        for d in range(depth - 1, -1, -1):
            sym = symbols[d:d + n]
            x = (x - self.intercepts[sym]) / self.slopes[sym]
        return x

    def encode(self, x: float, length: int) -> list[int]:
        """Leading symbols of ``x`` by forward iteration (float accurate prefix)."""
        out = []
        for _ in range(length):
            s = int(self.symbol_of(x))
            if s < 0:
                raise ValueError(f"point {x!r} left the coded set")
            out.append(s)
            x = float(self.forward(x, s))
            x = min(max(x, self.hull[0]), self.hull[1])
        return out

    def cylinder(self, word) -> tuple[float, float]:
        lo, hi = self.hull
        for s in reversed(list(word)):
            a, b = self.inverse(lo, s), self.inverse(hi, s)
            lo, hi = min(a, b), max(a, b)
        return float(lo), float(hi)

    def to_dict(self) -> dict:
        return {"intervals": self.intervals.tolist(), "slopes": self.slopes.tolist(),
                "intercepts": self.intercepts.tolist(), "return_time": self.return_time,
                "name": self.name}

    def __repr__(self):
        return f"HorseshoeSystem({self.name}, {self.n_symbols} symbols, T={self.return_time})"


class LapHorseshoe:
    """A horseshoe with too many laps to enumerate, kept in log form.

    Only the quantities needed for the uniform Markov measure are stored:
    the log of the number of symbols and the return time.
    """

    def __init__(self, log_symbols: float, return_time: int, name="laps"):
        self.log_symbols = float(log_symbols)
        self.return_time = int(return_time)
        self.name = name

    def uniform_entropy(self) -> float:
        # -sum p log p with p = 1/l equals log l; normalized per iterate
        return self.log_symbols / self.return_time

    def __repr__(self):
        return f"LapHorseshoe({self.name}, log l={self.log_symbols:.6g}, T={self.return_time})"


def coding_from_map(fmap) -> HorseshoeSystem:
    """Exact coding of a map whose branches are affine and full."""
    if not fmap.is_full_branch_affine():
        raise ValueError(f"{fmap!r} is not a full-branch affine map")
    intervals = [(br.a, br.b) for br in fmap.branches]
    return HorseshoeSystem(intervals, [br.slope for br in fmap.branches],
                           [br.intercept for br in fmap.branches], 1, name=fmap.name)


def markov_chain(P, pi, n: int, rng: np.random.Generator, first=None) -> np.ndarray:
    """Sample ``n`` symbols of a stationary Markov chain."""
    P = np.asarray(P, dtype=float)
    k = len(pi)
    out = np.empty(n, dtype=np.int64)
    if n == 0:
        return out
    u = rng.random(n)
    if np.allclose(P, P[0]):
        cum = np.cumsum(P[0])
        out[:] = np.minimum(np.searchsorted(cum, u * cum[-1], side="right"), k - 1)
        if first is not None:
            out[0] = first
        return out
    cums = np.cumsum(P, axis=1)
    s = first if first is not None else int(np.searchsorted(np.cumsum(pi), u[0], side="right"))
    out[0] = min(s, k - 1)
    for i in range(1, n):
        out[i] = min(int(np.searchsorted(cums[out[i - 1]], u[i], side="right")), k - 1)
    return out


def symbolic_orbit(system: HorseshoeSystem, x0: float, n: int, seed: int = 0,
                   weights=None, burn_in: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Orbit of ``x0`` computed on the coding.

    The symbols readable from the float ``x0`` are kept; beyond them the
    expansion of ``x0`` is continued with i.i.d. symbols drawn with
    ``weights`` (Lebesgue weights by default), which is what a generic real
    number with that float prefix looks like.  Returns ``(points, symbols)``.
    """
    depth = system.depth_for()
    prefix_len = max(1, int(45 * math.log(2) / math.log(1 / system.contraction)))
    prefix = system.encode(x0, prefix_len)
    total = burn_in + n + depth
    rng = np.random.default_rng(seed)
    w = system.lebesgue_weights() if weights is None else np.asarray(weights, dtype=float)
    tail = markov_chain(np.tile(w, (len(w), 1)), w, max(0, total - len(prefix)), rng)
    symbols = np.concatenate([np.asarray(prefix, dtype=np.int64), tail])[:total]
    points = system.decode_windows(symbols[burn_in:], n, depth)
    return points, symbols[burn_in:burn_in + n]
