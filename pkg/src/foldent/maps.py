"""Piecewise-smooth interval self-maps of [0, 1].

A map is an ordered list of branches on half-open domains ``[a, b)`` that
tile ``[0, 1)``.  Every branch knows its value, derivative, critical points
and how to split itself into monotone pieces, which is all the downstream
code (preimages, pullback partitions, transfer operators) needs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
from numpy.polynomial import polynomial as P

PROBE_POINTS = 2**14
LAP_CAP = 2**14
SNAP = 1e-15


class DomainGapError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


class ResolutionError(RuntimeError):
    """A branch oscillates faster than the requested operation can resolve."""


@dataclass(frozen=True)
class Piece:
    """A monotone (or flat / unresolved) sub-piece of one branch."""

    lo: float
    hi: float
    kind: str  # "inc", "dec", "flat" or "bulk"
    branch: int


@dataclass(frozen=True)
class CriticalItem:
    lo: float
    hi: float
    numerical: bool = False

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi


def _merge_intervals(intervals, gap=0.0):
    out = []
    for lo, hi in sorted(intervals):
        if out and lo <= out[-1][1] + gap:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return [(lo, hi) for lo, hi in out]


class Branch:
    kind = "abstract"
    monotonicity = "non-monotone"

    def __init__(self, a: float, b: float, r: float = 2.0):
        if not a < b:
            raise ValueError(f"empty branch domain [{a}, {b})")
        self.a = float(a)
        self.b = float(b)
        self.smoothness_r = float(r)

    def eval(self, x):
        raise NotImplementedError

    def raw_eval(self, x):
        """Value of the smooth extension to the closed domain (no wrapping)."""
        return self.eval(x)

    def invert(self, lo, hi, kind, ys):
        """Closed-form inverse on a monotone piece, or None if unavailable."""
        return None

    def deriv(self, x):
        raise NotImplementedError

    def critical_points(self) -> np.ndarray:
        return np.empty(0)

    def sup_abs_deriv(self) -> float:
        xs = np.linspace(self.a, self.b, 2049)
        pts = np.concatenate([xs, self.critical_points()])
        return float(np.max(np.abs(self.deriv(pts))))

    def pieces(self, index: int) -> list[Piece]:
        cuts = [c for c in self.critical_points() if self.a < c < self.b]
        edges = [self.a, *sorted(cuts), self.b]
        out = []
        for lo, hi in zip(edges[:-1], edges[1:]):
            if hi - lo <= 0:
                continue
            d = float(self.deriv(0.5 * (lo + hi)))
            kind = "inc" if d > 0 else "dec" if d < 0 else "flat"
            out.append(Piece(lo, hi, kind, index))
        return out

    def range_on(self, lo: float, hi: float) -> tuple[float, float]:
        pts = [lo, hi] + [c for c in self.critical_points() if lo < c < hi]
        vals = self.eval(np.asarray(pts, dtype=float))
        return float(np.min(vals)), float(np.max(vals))

    def sublevel(self, eps: float) -> list[tuple[float, float]]:
        xs = np.linspace(self.a, self.b, PROBE_POINTS + 1)
        crit = self.critical_points()
        xs = np.unique(np.concatenate([xs, crit]))
        g = np.abs(self.deriv(xs)) - eps
        below = g < 0
        if not below.any():
            return []
        out = []
        i = 0
        n = len(xs)
        while i < n:
            if not below[i]:
                i += 1
                continue
            j = i
            while j + 1 < n and below[j + 1]:
                j += 1
            lo = self.a if i == 0 else self._edge(xs[i - 1], xs[i], eps)
            hi = self.b if j == n - 1 else self._edge(xs[j + 1], xs[j], eps)
            out.append((lo, hi))
            i = j + 1
        return out

    def _edge(self, outside: float, inside: float, eps: float) -> float:
        # bisection on |f'| - eps between a point above and a point below eps
        for _ in range(80):
            mid = 0.5 * (outside + inside)
            if mid in (outside, inside):
                break
            if abs(float(self.deriv(mid))) < eps:
                inside = mid
            else:
                outside = mid
        # conservative: report the outer end of the bracket
        return outside

    def descriptor(self) -> dict:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}([{self.a:.6g}, {self.b:.6g}))"


class AffineBranch(Branch):
    kind = "affine"

    def __init__(self, a, b, slope, intercept, wrap=False, r=2.0):
        super().__init__(a, b, r)
        self.slope = float(slope)
        self.intercept = float(intercept)
        self.wrap = bool(wrap)
        if self.slope > 0:
            self.monotonicity = "strictly-increasing"
        elif self.slope < 0:
            self.monotonicity = "strictly-decreasing"

    def eval(self, x):
        y = self.slope * np.asarray(x, dtype=float) + self.intercept
        if self.wrap:
            y = y - np.floor(y)
            y = np.where(1.0 - y < SNAP, 0.0, y)
        return y

    def raw_eval(self, x):
        return self.slope * np.asarray(x, dtype=float) + self.intercept

    def invert(self, lo, hi, kind, ys):
        return np.clip((np.asarray(ys, dtype=float) - self.intercept) / self.slope, lo, hi)

    def deriv(self, x):
        return np.full(np.shape(x), self.slope, dtype=float) if np.ndim(x) else self.slope

    def sup_abs_deriv(self):
        return abs(self.slope)

    def pieces(self, index):
        kind = "inc" if self.slope > 0 else "dec" if self.slope < 0 else "flat"
        return [Piece(self.a, self.b, kind, index)]

    def range_on(self, lo, hi):
        v = self.raw_eval(np.array([lo, hi]))
        return float(v.min()), float(v.max())

    def sublevel(self, eps):
        return [(self.a, self.b)] if abs(self.slope) < eps else []

    def descriptor(self):
        return {"type": "affine", "domain": [self.a, self.b], "slope": self.slope,
                "intercept": self.intercept, "wrap": self.wrap, "r": self.smoothness_r}


class ConstantBranch(Branch):
    kind = "constant"

    def __init__(self, a, b, value, r=2.0):
        super().__init__(a, b, r)
        self.value = float(value)

    def eval(self, x):
        return np.full(np.shape(x), self.value) if np.ndim(x) else self.value

    def deriv(self, x):
        return np.zeros(np.shape(x)) if np.ndim(x) else 0.0

    def sup_abs_deriv(self):
        return 0.0

    def pieces(self, index):
        return [Piece(self.a, self.b, "flat", index)]

    def range_on(self, lo, hi):
        return self.value, self.value

    def sublevel(self, eps):
        return [(self.a, self.b)]

    def descriptor(self):
        return {"type": "constant", "domain": [self.a, self.b], "value": self.value,
                "r": self.smoothness_r}


class PolynomialBranch(Branch):
    """Polynomial in the local variable ``t = (x - origin) / scale``."""

    kind = "polynomial"

    def __init__(self, a, b, coeffs, origin=0.0, scale=1.0, r=2.0):
        super().__init__(a, b, r)
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.origin = float(origin)
        self.scale = float(scale)
        self._dcoeffs = P.polyder(self.coeffs) / self.scale
        crit = self.critical_points()
        inner = [c for c in crit if self.a < c < self.b]
        if not inner:
            d = float(self.deriv(0.5 * (self.a + self.b)))
            if d > 0:
                self.monotonicity = "strictly-increasing"
            elif d < 0:
                self.monotonicity = "strictly-decreasing"

    def _t(self, x):
        return (np.asarray(x, dtype=float) - self.origin) / self.scale

    def eval(self, x):
        return P.polyval(self._t(x), self.coeffs)

    def deriv(self, x):
        return P.polyval(self._t(x), self._dcoeffs)

    @cached_property
    def _critical(self):
        if len(self._dcoeffs) == 0 or not np.any(self._dcoeffs):
            return np.empty(0)
        roots = P.polyroots(self._dcoeffs)
        real = roots[np.abs(roots.imag) < 1e-6].real * self.scale + self.origin
        tol = 1e-12 * max(1.0, self.b - self.a)
        keep = [x for x in real if self.a - tol <= x <= self.b + tol]
        return np.unique(np.clip(keep, self.a, self.b))

    def critical_points(self):
        return self._critical

    def descriptor(self):
        return {"type": "polynomial", "domain": [self.a, self.b],
                "coeffs": self.coeffs.tolist(), "origin": self.origin,
                "scale": self.scale, "r": self.smoothness_r}


class PowerBranch(Branch):
    """``f(x) = y0 + amp * (|x - anchor| / width) ** p``; anchor is a domain end."""

    kind = "power"

    def __init__(self, a, b, anchor, y0, amp, p, r=2.0):
        super().__init__(a, b, r)
        if anchor not in (a, b):
            raise ValueError("power branch anchor must be a domain endpoint")
        if p < 1:
            raise ValueError("power exponent must be >= 1")
        self.anchor = float(anchor)
        self.y0 = float(y0)
        self.amp = float(amp)
        self.p = float(p)
        self.width = self.b - self.a
        rising = (self.anchor == self.a) == (self.amp > 0)
        self.monotonicity = "strictly-increasing" if rising else "strictly-decreasing"

    def eval(self, x):
        u = np.abs(np.asarray(x, dtype=float) - self.anchor) / self.width
        return self.y0 + self.amp * u**self.p

    def invert(self, lo, hi, kind, ys):
        u = np.clip((np.asarray(ys, dtype=float) - self.y0) / self.amp, 0.0, None)
        off = self.width * u ** (1.0 / self.p)
        x = self.anchor + off if self.anchor == self.a else self.anchor - off
        return np.clip(x, lo, hi)

    def deriv(self, x):
        x = np.asarray(x, dtype=float)
        u = np.abs(x - self.anchor) / self.width
        sign = 1.0 if self.anchor == self.a else -1.0
        return sign * self.amp * self.p / self.width * u ** (self.p - 1)

    def critical_points(self):
        return np.array([self.anchor]) if self.p > 1 else np.empty(0)

    def sup_abs_deriv(self):
        return abs(self.amp) * self.p / self.width

    def pieces(self, index):
        kind = "inc" if self.monotonicity == "strictly-increasing" else "dec"
        return [Piece(self.a, self.b, kind, index)]

    def range_on(self, lo, hi):
        v = self.eval(np.array([lo, hi]))
        return float(v.min()), float(v.max())

    def sublevel(self, eps):
        top = abs(self.amp) * self.p / self.width
        if top < eps:
            return [(self.a, self.b)]
        if self.p == 1:
            return []
        reach = self.width * (eps / top) ** (1.0 / (self.p - 1))
        if self.anchor == self.a:
            return [(self.a, min(self.b, self.a + reach))]
        return [(max(self.a, self.b - reach), self.b)]

    def descriptor(self):
        return {"type": "power", "domain": [self.a, self.b], "anchor": self.anchor,
                "y0": self.y0, "amp": self.amp, "p": self.p, "r": self.smoothness_r}


class CosineBranch(Branch):
    """``f(x) = A cos(w (x - c)) + base + A`` with ``A = exp(log_amp)``.

    Amplitude and frequency are carried as logarithms because the blocks of
    the oscillating counterexample reach amplitudes far below double
    precision relative to ``base``.
    """

    kind = "cosine"

    def __init__(self, a, b, log_amp, log_omega, phase, base, r=2.0):
        super().__init__(a, b, r)
        self.log_amp = float(log_amp)
        self.log_omega = float(log_omega)
        self.phase = float(phase)
        self.base = float(base)
        self.amp = math.exp(self.log_amp) if self.log_amp > -745 else 0.0
        self.omega = math.exp(self.log_omega) if self.log_omega < 709 else math.inf
        self.log_slope = self.log_amp + self.log_omega

    @property
    def laps(self) -> float:
        """Number of monotone laps (half periods) across the domain."""
        if self.log_omega + math.log(self.b - self.a) - math.log(math.pi) > 700:
            return math.inf
        return self.omega * (self.b - self.a) / math.pi

    @property
    def resolved(self) -> bool:
        return self.laps <= LAP_CAP

    def eval(self, x):
        x = np.asarray(x, dtype=float)
        if not math.isfinite(self.omega):
            return np.full(x.shape, self.base + self.amp) if x.ndim else self.base + self.amp
        return self.amp * np.cos(self.omega * (x - self.phase)) + self.base + self.amp

    def deriv(self, x):
        x = np.asarray(x, dtype=float)
        slope = math.exp(self.log_slope) if self.log_slope > -745 else 0.0
        if not math.isfinite(self.omega):
            return np.zeros(x.shape) if x.ndim else 0.0
        return -slope * np.sin(self.omega * (x - self.phase))

    def sup_abs_deriv(self):
        return math.exp(self.log_slope) if self.log_slope > -745 else 0.0

    def _extrema(self, lo, hi):
        m0 = math.ceil(self.omega * (lo - self.phase) / math.pi)
        m1 = math.floor(self.omega * (hi - self.phase) / math.pi)
        return self.phase + np.arange(m0, m1 + 1) * math.pi / self.omega

    def critical_points(self):
        if not self.resolved:
            return np.empty(0)
        return self._extrema(self.a, self.b)

    def pieces(self, index):
        if not self.resolved:
            return [Piece(self.a, self.b, "bulk", index)]
        return super().pieces(index)

    def range_on(self, lo, hi):
        top = self.base + 2 * self.amp
        if not self.resolved or self.omega * (hi - lo) >= 2 * math.pi:
            return self.base, top
        return super().range_on(lo, hi)

    def sublevel(self, eps):
        if self.log_slope < math.log(eps):
            return [(self.a, self.b)]
        if not self.resolved:
            raise ResolutionError(
                f"cosine block on [{self.a:.6g}, {self.b:.6g}) has {self.laps:.3g} laps "
                f"and slope above {eps:.3g}")
        s = math.asin(eps / math.exp(self.log_slope))
        th_a = self.omega * (self.a - self.phase)
        th_b = self.omega * (self.b - self.phase)
        m0 = math.ceil((th_a - s) / math.pi)
        m1 = math.floor((th_b + s) / math.pi)
        out = []
        for m in range(m0, m1 + 1):
            lo = self.phase + (m * math.pi - s) / self.omega
            hi = self.phase + (m * math.pi + s) / self.omega
            lo, hi = max(lo, self.a), min(hi, self.b)
            if lo < hi:
                out.append((lo, hi))
        return out

    def descriptor(self):
        return {"type": "cosine", "domain": [self.a, self.b], "log_amp": self.log_amp,
                "log_omega": self.log_omega, "phase": self.phase, "base": self.base,
                "r": self.smoothness_r}


_BRANCH_TYPES = {
    "affine": lambda d: AffineBranch(*d["domain"], d["slope"], d["intercept"],
                                     d.get("wrap", False), d.get("r", 2.0)),
    "constant": lambda d: ConstantBranch(*d["domain"], d["value"], d.get("r", 2.0)),
    "polynomial": lambda d: PolynomialBranch(*d["domain"], d["coeffs"], d.get("origin", 0.0),
                                             d.get("scale", 1.0), d.get("r", 2.0)),
    "power": lambda d: PowerBranch(*d["domain"], d["anchor"], d["y0"], d["amp"], d["p"],
                                   d.get("r", 2.0)),
    "cosine": lambda d: CosineBranch(*d["domain"], d["log_amp"], d["log_omega"], d["phase"],
                                     d["base"], d.get("r", 2.0)),
}


def branch_from_descriptor(d: dict) -> Branch:
    try:
        return _BRANCH_TYPES[d["type"]](d)
    except KeyError as exc:
        raise ValueError(f"unknown branch descriptor {d!r}") from exc


class PiecewiseMap:
    """An interval self-map given by ordered branches tiling ``[0, 1)``."""

    def __init__(self, branches, critical_set=None, lipschitz_L=None, name="custom",
                 params=None):
        branches = list(branches)
        if not branches:
            raise ValueError("a map needs at least one branch")
        if abs(branches[0].a) > 1e-15 or abs(branches[-1].b - 1.0) > 1e-15:
            raise DomainGapError("branch domains must start at 0 and end at 1")
        for left, right in zip(branches[:-1], branches[1:]):
            if abs(left.b - right.a) > 1e-15:
                raise DomainGapError(f"gap or overlap between {left} and {right}")
        self.branches = branches
        self.name = name
        self.params = dict(params or {})
        self._lefts = np.array([br.a for br in branches])
        if critical_set is None:
            critical_set = [CriticalItem(float(c), float(c), True) for br in branches
                            for c in br.critical_points()]
            critical_set += [CriticalItem(br.a, br.b, True) for br in branches
                             if br.kind == "constant"
                             or (br.kind == "cosine" and not br.resolved)]
        self.critical_set = sorted(critical_set, key=lambda c: (c.lo, c.hi))
        sup = max(br.sup_abs_deriv() for br in branches)
        self.lipschitz_L = float(lipschitz_L) if lipschitz_L is not None else sup
        if self.lipschitz_L < sup * (1 - 1e-12):
            raise ValueError(f"lipschitz_L={self.lipschitz_L} below sup|f'|={sup}")
        self._sublevel_cache = {}

    # -- evaluation -----------------------------------------------------
    def locate(self, x):
        x = np.asarray(x, dtype=float)
        if np.any((x < 0) | (x > 1)) or np.any(np.isnan(x)):
            raise DomainGapError("point outside [0, 1]")
        idx = np.searchsorted(self._lefts, x, side="right") - 1
        return np.clip(idx, 0, len(self.branches) - 1)

    def _apply(self, x, method):
        x = np.asarray(x, dtype=float)
        idx = self.locate(x)
        if x.ndim == 0:
            return float(getattr(self.branches[int(idx)], method)(x))
        out = np.empty(x.shape)
        for i in np.unique(idx):
            sel = idx == i
            out[sel] = getattr(self.branches[i], method)(x[sel])
        return out

    def __call__(self, x):
        return self._apply(x, "eval")

    def derivative(self, x):
        return self._apply(x, "deriv")

    # -- structure ------------------------------------------------------
    @cached_property
    def pieces(self) -> list[Piece]:
        return [pc for i, br in enumerate(self.branches) for pc in br.pieces(i)]

    def critical_points(self) -> np.ndarray:
        return np.array([c.lo for c in self.critical_set if c.is_point])

    def distance_to_critical(self, x):
        x = np.asarray(x, dtype=float)
        d = np.full(x.shape, np.inf)
        for c in self.critical_set:
            d = np.minimum(d, np.maximum(0.0, np.maximum(c.lo - x, x - c.hi)))
        return d

    def piece_image(self, pc: Piece) -> tuple[float, float]:
        br = self.branches[pc.branch]
        return br.range_on(pc.lo, pc.hi)

    def image_of_interval(self, lo: float, hi: float) -> tuple[float, float]:
        """Hull of ``f([lo, hi])``; exact for continuous maps."""
        lo, hi = max(0.0, lo), min(1.0, hi)
        vmin, vmax = math.inf, -math.inf
        for br in self.branches:
            l, h = max(lo, br.a), min(hi, br.b)
            if l > h or (l == h and l != lo):
                continue
            a, b = br.range_on(l, h)
            vmin, vmax = min(vmin, a), max(vmax, b)
        return vmin, vmax

    # -- inversion ------------------------------------------------------
    def invert_piece(self, pc: Piece, ys, tol: float = 1e-10):
        """Solve ``f(x) = y`` on a monotone piece for every ``y`` in ``ys``."""
        if pc.kind not in ("inc", "dec"):
            raise ValueError(f"cannot invert a {pc.kind} piece")
        br = self.branches[pc.branch]
        ys = np.atleast_1d(np.asarray(ys, dtype=float))
        exact = br.invert(pc.lo, pc.hi, pc.kind, ys)
        if exact is not None:
            res = np.abs(br.raw_eval(exact) - ys)
            if np.all(res <= tol):
                return exact
        lo = np.full(ys.shape, pc.lo)
        hi = np.full(ys.shape, pc.hi)
        inc = pc.kind == "inc"
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            fm = br.raw_eval(mid)
            right = fm < ys if inc else fm > ys
            lo = np.where(right, mid, lo)
            hi = np.where(right, hi, mid)
            if np.all(hi - lo <= 1e-12):
                break
        x = 0.5 * (lo + hi)
        res = br.raw_eval(x) - ys
        d = br.deriv(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            xn = x - res / d
        ok = np.isfinite(xn) & (xn >= pc.lo) & (xn <= pc.hi)
        xn = np.where(ok, xn, x)
        better = np.abs(br.raw_eval(xn) - ys) < np.abs(res)
        x = np.where(better, xn, x)
        # bisection may stall on a one-float bracket; finish there
        for _ in range(100):
            res = br.raw_eval(x) - ys
            bad = np.abs(res) > tol
            if not bad.any():
                break
            mid = 0.5 * (lo + hi)
            fm = br.raw_eval(mid)
            right = fm < ys if inc else fm > ys
            lo = np.where(bad & right, mid, lo)
            hi = np.where(bad & ~right, mid, hi)
            x = np.where(bad, 0.5 * (lo + hi), x)
            if np.all(hi[bad] - lo[bad] <= np.spacing(np.maximum(np.abs(lo[bad]), 1e-300)) * 4):
                break
        res = np.abs(br.raw_eval(x) - ys)
        if np.any(res > tol):
            worst = float(np.max(res))
            raise ConvergenceError(f"preimage residual {worst:.3g} exceeds tol {tol:.3g}")
        return x

    def preimages(self, y: float, tol: float = 1e-10) -> list[tuple[float, int]]:
        if tol <= 0:
            raise ValueError("tol must be positive")
        out = []
        for pc in self.pieces:
            if pc.kind not in ("inc", "dec"):
                continue
            br = self.branches[pc.branch]
            f_lo, f_hi = float(br.raw_eval(pc.lo)), float(br.raw_eval(pc.hi))
            # half-open domain [lo, hi): the value at hi belongs to the next piece
            if pc.kind == "inc":
                hit = f_lo <= y < f_hi
            else:
                hit = f_hi < y <= f_lo
            if hit:
                out.append((float(self.invert_piece(pc, [y], tol)[0]), pc.branch))
        return sorted(out)

    # -- degeneracy -----------------------------------------------------
    def sublevel_set(self, eps: float) -> list[tuple[float, float]]:
        if eps <= 0:
            raise ValueError("eps must be positive")
        if eps not in self._sublevel_cache:
            raw = [iv for br in self.branches for iv in br.sublevel(eps)]
            self._sublevel_cache[eps] = _merge_intervals(raw)
        return list(self._sublevel_cache[eps])

    # -- dynamics -------------------------------------------------------
    def orbit(self, x0: float, n: int) -> np.ndarray:
        if n < 1:
            raise ValueError("orbit length must be >= 1")
        out = np.empty(n)
        x = float(x0)
        for i in range(n):
            out[i] = x
            x = self(x)
        return out

    def is_full_branch_affine(self) -> bool:
        for br in self.branches:
            if br.kind != "affine" or br.slope == 0:
                return False
            lo, hi = br.range_on(br.a, br.b - 1e-15 * abs(br.b))
            if abs(min(lo, hi)) > 1e-9 or abs(max(lo, hi) - 1.0) > 1e-9 * abs(br.slope):
                return False
        return True

    # -- serialization --------------------------------------------------
    def to_dict(self) -> dict:
        d = {"kind": self.name if self.name in MAP_KINDS else "custom",
             "params": self.params,
             "branches": [br.descriptor() for br in self.branches]}
        return d

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2)
        if path is not None:
            Path(path).write_text(text)
        return text

    def __repr__(self):
        return f"PiecewiseMap({self.name}, {len(self.branches)} branches)"


# -- operation-style entry points ---------------------------------------
def eval_map(fmap: PiecewiseMap, x: float) -> float:
    if not 0 <= x <= 1:
        raise DomainGapError(f"{x} outside [0, 1)")
    return fmap(x)


def preimages(fmap: PiecewiseMap, y: float, tol: float = 1e-10):
    return fmap.preimages(y, tol)


def derivative(fmap: PiecewiseMap, x: float) -> float:
    if not 0 <= x <= 1:
        raise DomainGapError(f"{x} outside [0, 1)")
    return fmap.derivative(x)


def sublevel_set(fmap: PiecewiseMap, eps: float):
    return fmap.sublevel_set(eps)


def orbit(fmap: PiecewiseMap, x0: float, n: int) -> np.ndarray:
    return fmap.orbit(x0, n)


# -- built-in maps ------------------------------------------------------
def nfold(N: int) -> PiecewiseMap:
    """``x -> N x mod 1``."""
    N = int(N)
    if N < 1:
        raise ValueError("N must be a positive integer")
    brs = [AffineBranch(i / N, (i + 1) / N, N, -i, wrap=True) for i in range(N)]
    return PiecewiseMap(brs, critical_set=[], lipschitz_L=N, name="nfold", params={"N": N})


def skewed_tent(p: float) -> PiecewiseMap:
    """``p x`` on ``[0, 1/p)`` and ``p/(p-1) (1 - x)`` on ``[1/p, 1)``."""
    p = float(p)
    if not p > 1:
        raise ValueError("skewed tent needs p > 1")
    q = p / (p - 1)
    brs = [AffineBranch(0.0, 1 / p, p, 0.0), AffineBranch(1 / p, 1.0, -q, q)]
    return PiecewiseMap(brs, critical_set=[], lipschitz_L=max(p, q), name="skewed_tent",
                        params={"p": p})


def logistic(c: float = 4.0) -> PiecewiseMap:
    c = float(c)
    if not 0 < c <= 4:
        raise ValueError("logistic parameter must lie in (0, 4]")
    br = PolynomialBranch(0.0, 1.0, [0.0, c, -c])
    return PiecewiseMap([br], critical_set=[CriticalItem(0.5, 0.5)], lipschitz_L=c,
                        name="logistic", params={"c": c})


def identity() -> PiecewiseMap:
    return PiecewiseMap([AffineBranch(0.0, 1.0, 1.0, 0.0)], critical_set=[], lipschitz_L=1.0,
                        name="identity", params={})


MAP_KINDS = {"nfold", "skewed_tent", "logistic", "identity", "counterexample", "custom"}


def map_from_dict(d: dict) -> PiecewiseMap:
    kind = d.get("kind")
    params = d.get("params", {}) or {}
    if kind == "nfold":
        return nfold(params["N"])
    if kind == "skewed_tent":
        return skewed_tent(params["p"])
    if kind == "logistic":
        return logistic(params.get("c", 4.0))
    if kind == "identity":
        return identity()
    if kind == "counterexample":
        from .counterexample import CounterexampleParams, build_counterexample

        fmap, _ = build_counterexample(CounterexampleParams.from_dict(params))
        return fmap
    if kind == "custom":
        brs = [branch_from_descriptor(b) for b in d["branches"]]
        return PiecewiseMap(brs, name="custom", params=params)
    raise ValueError(f"unknown map kind {kind!r}")


def parse_map(spec) -> PiecewiseMap:
    """Build a map from ``"nfold:2"``-style shorthand, a JSON file path, or a dict."""
    if isinstance(spec, PiecewiseMap):
        return spec
    if isinstance(spec, dict):
        return map_from_dict(spec)
    text = str(spec).strip()
    if text.startswith("{"):
        return map_from_dict(json.loads(text))
    if text.endswith(".json"):
        return map_from_dict(json.loads(Path(text).read_text()))
    name, _, arg = text.partition(":")
    if name == "nfold":
        return nfold(int(arg or 2))
    if name in ("skewed_tent", "tent"):
        return skewed_tent(float(arg or 3))
    if name == "logistic":
        return logistic(float(arg or 4))
    if name == "identity":
        return identity()
    if name == "counterexample":
        return map_from_dict({"kind": "counterexample", "params": {}})
    raise ValueError(f"cannot parse map spec {spec!r}")
