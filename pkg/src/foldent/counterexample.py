"""An interval map whose entropy is not upper semi-continuous.

Two expanding linear branches on ``I1 = [a, 2a]`` and ``I2 = [4a, 5a]``
carry a full two-symbol horseshoe with a low-entropy Bernoulli measure
``mu``.  Near ``z0 = 6a`` sit oscillating blocks ``J_k`` of tiny amplitude;
each one, together with a long return of the orbit of a ``mu``-generic
point ``x0``, creates a horseshoe with many laps whose measure of maximal
entropy ``nu_k`` converges to ``mu`` while its entropy stays well above
``h(mu)``.

Amplitudes and frequencies of the blocks are astronomically small or large,
so they are carried in log space; everything that is reported about the
blocks (entropy, log-derivative integrals) is computed from the closed
forms, and the float map is only used where it is faithful.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq

from .coding import HorseshoeSystem, LapHorseshoe, markov_chain
from .entropy import phi
from .maps import (LAP_CAP, AffineBranch, ConstantBranch, CosineBranch, CriticalItem,
                   PiecewiseMap, PolynomialBranch, PowerBranch)
from .measures import CodedMarkov, Empirical, bowen_ball_masses, w1_distance


class ConstraintError(ValueError):
    """A parameter invariant of the construction fails; ``name`` identifies it."""

    def __init__(self, name, message):
        super().__init__(f"{name}: {message}")
        self.name = name


class BudgetExceededError(RuntimeError):
    pass


def binary_entropy(p: float) -> float:
    return float(phi(p) + phi(1 - p))


@dataclass
class CounterexampleParams:
    r: float = 2.0
    lam: float = 64.0
    a: float = 0.01
    gamma0: float | None = None  # default a / 4
    K_blocks: int = 8
    c: float | None = None  # default half of min(log 2, log(lam) / r)
    p_vec: tuple | None = None  # overrides c when given
    seed_x0: int = 0
    L_big: float | None = None  # default lam
    n_base: int = 16
    growth: float = 2.0

    def __post_init__(self):
        if self.gamma0 is None:
            self.gamma0 = self.a / 4
        if self.L_big is None:
            self.L_big = self.lam
        if self.p_vec is not None:
            self.p_vec = tuple(float(p) for p in self.p_vec)
            self.c = -sum(p * math.log(p) for p in self.p_vec if p > 0)
        elif self.c is None:
            self.c = 0.5 * self.entropy_ceiling

    @property
    def entropy_ceiling(self) -> float:
        return min(math.log(2), math.log(self.lam) / self.r)

    @property
    def delta0(self) -> float:
        return self.a / (2 * self.lam)

    def validate(self):
        if not self.r > 1:
            raise ConstraintError("smoothness", f"r={self.r} must exceed 1")
        if not 0 < self.c < self.entropy_ceiling:
            raise ConstraintError("entropy_bound", f"c={self.c:.6g} must lie in (0, "
                                  f"min(log 2, log(lam)/r)={self.entropy_ceiling:.6g})")
        if 5 * self.a > self.a + self.a * self.lam / 2:
            raise ConstraintError("lambda_large", "I1 and I2 must lie in [x*, x* + a lam / 2]")
        if self.gamma0 * (math.pi**2 / 6 + 1.2020569031595942) >= self.a:
            raise ConstraintError("block_budget", "gamma0 (zeta(2) + zeta(3)) must be below a")
        if self.L_big < self.lam:
            raise ConstraintError("L_bound", "L must be at least lam")
        if self.a * (1.25 + 1.5 * self.lam) > 1:
            raise ConstraintError("hump_height", "a (1.25 + 1.5 lam) must not exceed 1")
        if 8 * self.a + self.gamma0 >= 1:
            raise ConstraintError("block_room", "blocks must fit below 1")
        if self.K_blocks < 1:
            raise ConstraintError("K_blocks", "at least one block is needed")
        if self.p_vec is not None and (len(self.p_vec) != 2 or abs(sum(self.p_vec) - 1) > 1e-12):
            raise ConstraintError("p_vec", "p_vec must be a probability pair")

    def probabilities(self) -> tuple[float, float]:
        """Bernoulli weights of the two symbols; the majority weight goes to ``I1``."""
        if self.p_vec is not None:
            return self.p_vec
        q = brentq(lambda p: binary_entropy(p) - self.c, 1e-15, 0.5, xtol=1e-15)
        return (1 - q, q)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict):
        d = dict(d or {})
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown counterexample parameters {sorted(unknown)}")
        return cls(**d)


@dataclass
class BlockSpec:
    k: int
    n_k: int
    log_A: float
    log_omega: float
    log_M: float
    lo: float
    hi: float
    phase: float
    r: float

    @property
    def log_amp(self) -> float:
        """log of ``A_k^r``, the half-height of the oscillation."""
        return self.r * self.log_A

    @property
    def log_sup_slope(self) -> float:
        """log of ``A_k^r omega_k = L A_k^{r-1}``."""
        return self.log_amp + self.log_omega

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def log_laps(self) -> float:
        return math.log(2) + self.log_M

    @property
    def resolved(self) -> bool:
        return self.log_laps <= math.log(LAP_CAP)

    def to_dict(self):
        d = asdict(self)
        d["log_amp"] = self.log_amp
        d["log_laps"] = self.log_laps
        return d


@dataclass
class BaseData:
    x0: float
    z0: float
    delta0: float
    delta1: float
    eta: float
    N1: int
    N2: int
    n: list
    symbols: np.ndarray
    orbit: np.ndarray  # f^j(x0) for j = 0 .. len(orbit) - 1, decoded from the coding
    probabilities: tuple
    system: HorseshoeSystem
    blocks: list = field(default_factory=list)
    x_star: float = 0.0
    x_star_prime: float = 0.0

    def summary(self) -> dict:
        return {"x0": self.x0, "z0": self.z0, "delta0": self.delta0, "delta1": self.delta1,
                "eta": self.eta, "N1": self.N1, "N2": self.N2, "n_k": list(self.n),
                "probabilities": list(self.probabilities)}


# -- skeleton -------------------------------------------------------------
def _skeleton_branches(p: CounterexampleParams, x0: float):
    a, lam = p.a, p.lam
    d0 = p.delta0
    h = a - d0
    top = a * (1.25 + 1.5 * lam)
    y_min = a / 4
    w1 = (a / 4) * 2 / lam
    x_m = 5 * a + d0 + w1
    z0 = 6 * a
    brs = [
        PowerBranch(0.0, a - d0, 0.0, 0.0, a / 2, 2 * lam - 1, r=p.r),
        AffineBranch(a - d0, 2 * a + d0, lam, a - lam * a, r=p.r),
        PolynomialBranch(2 * a + d0, 4 * a - d0, [top, 0.0, -lam / (2 * h)], origin=3 * a, r=p.r),
        AffineBranch(4 * a - d0, 5 * a + d0, -lam, a + 5 * a * lam, r=p.r),
        PowerBranch(5 * a + d0, x_m, x_m, y_min, a / 4, 2.0, r=p.r),
        PolynomialBranch(x_m, z0, (x0 - y_min) * np.array([0, 0, 0, 10.0, -15.0, 6.0])
                         + np.array([y_min, 0, 0, 0, 0, 0]), origin=x_m, scale=z0 - x_m, r=p.r),
    ]
    crit = [CriticalItem(0.0, 0.0), CriticalItem(3 * a, 3 * a), CriticalItem(x_m, x_m),
            CriticalItem(z0, z0)]
    return brs, crit


def _hermite(x0, x1, y0, y1, s0, s1, r):
    """C^1 cubic on [x0, x1] with the given end values and slopes."""
    L = x1 - x0
    m0, m1 = s0 * L, s1 * L
    coeffs = [y0, m0, -3 * y0 - 2 * m0 + 3 * y1 - m1, 2 * y0 + m0 - 2 * y1 + m1]
    return PolynomialBranch(x0, x1, coeffs, origin=x0, scale=L, r=r)


def block_specs(p: CounterexampleParams, n_list, z0: float):
    """Closed-form data of the blocks, placed left-packed from ``z0`` with
    ``J_K`` nearest to ``z0`` and a gap of ``gamma0 / k^3`` before each block."""
    K = len(n_list)
    L, lam, d0, r, g0 = p.L_big, p.lam, p.delta0, p.r, p.gamma0
    specs = {}
    x = z0
    for k in range(K, 0, -1):
        n_k = n_list[k - 1]
        log_A = (math.log(d0 / 2) - n_k * math.log(lam)) / r
        log_omega = math.log(L) - log_A
        log_M = math.log(L * g0 / (2 * math.pi * k**2)) + (math.log(2 / d0) + n_k * math.log(lam)) / r
        x += g0 / k**3
        lo = x
        hi = lo + g0 / k**2
        # start at a trough so the block joins the flat level x0 with zero slope
        phase = lo + math.pi * math.exp(-log_omega)
        specs[k] = BlockSpec(k, n_k, log_A, log_omega, log_M, lo, hi, phase, r)
        x = hi
    return [specs[k] for k in range(1, K + 1)]


def assemble_map(p: CounterexampleParams, x0: float, blocks) -> PiecewiseMap:
    brs, crit = _skeleton_branches(p, x0)
    z0 = 6 * p.a
    ordered = sorted(blocks, key=lambda b: b.lo)
    if ordered:
        brs.append(ConstantBranch(z0, ordered[0].lo, x0, r=p.r))
        crit.append(CriticalItem(z0, ordered[0].lo))
    prev_end = z0 if not ordered else None
    prev_val, prev_slope = x0, 0.0
    for i, b in enumerate(ordered):
        if prev_end is not None and b.lo > prev_end:
            brs.append(_hermite(prev_end, b.lo, prev_val, x0, prev_slope, 0.0, p.r))
            crit.extend(CriticalItem(float(c), float(c)) for c in brs[-1].critical_points())
        cos = CosineBranch(b.lo, b.hi, b.log_amp, b.log_omega, b.phase, x0, r=p.r)
        brs.append(cos)
        if cos.resolved:
            crit.extend(CriticalItem(float(c), float(c)) for c in cos.critical_points())
        else:
            crit.append(CriticalItem(b.lo, b.hi))
        prev_end = b.hi
        prev_val = float(cos.eval(b.hi))
        prev_slope = float(cos.deriv(b.hi))
    brs.append(_hermite(prev_end, 1.0, prev_val, 1.0, prev_slope, 1.0, p.r))
    crit.extend(CriticalItem(float(c), float(c)) for c in brs[-1].critical_points())
    crit = sorted(set(crit), key=lambda c: (c.lo, c.hi))
    return PiecewiseMap(brs, critical_set=crit, lipschitz_L=max(p.L_big, max(b.sup_abs_deriv() for b in brs)),
                        name="counterexample", params=p.to_dict())


def base_horseshoe(p: CounterexampleParams) -> HorseshoeSystem:
    a, lam = p.a, p.lam
    return HorseshoeSystem([(a, 2 * a), (4 * a, 5 * a)], [lam, -lam],
                           [a - lam * a, a + 5 * a * lam], 1, name="base")


# -- return and covering times -------------------------------------------
def find_covering_times(fmap: PiecewiseMap, x0: float, delta1: float, a: float, z0: float,
                        budget: int = 10**4) -> tuple[int, int]:
    """Smallest N with ``f^N`` of ``[x0 - delta1, x0]`` (resp. ``[x0, x0 + delta1]``)
    covering ``[z0 - a, z0 + 3a]``, by iterating interval hulls."""
    target = (z0 - a, z0 + 3 * a)

    def first_cover(lo, hi):
        for n in range(1, budget + 1):
            lo, hi = fmap.image_of_interval(lo, hi)
            if lo <= target[0] and hi >= target[1]:
                return n
        raise BudgetExceededError(f"no cover within {budget} iterates")

    return first_cover(x0 - delta1, x0), first_cover(x0, x0 + delta1)


def find_return_times(fmap: PiecewiseMap, x0: float, eta: float, K: int, system=None,
                      symbols=None, budget: int = 10**7, start: int = 1):
    """First ``K`` times ``n >= start`` with ``f^n(x0)`` within ``eta`` of ``x0``.

    With a coding (``system`` and the symbol sequence of ``x0``) the orbit is
    decoded from symbol windows; otherwise the float orbit is used.
    """
    out = []
    if system is not None and symbols is not None:
        depth = system.depth_for()
        symbols = np.asarray(symbols)
        avail = min(len(symbols) - depth, budget + 1)
        chunk = 1 << 16
        for s in range(0, avail, chunk):
            m = min(chunk, avail - s)
            pts = system.decode_windows(symbols[s:], m, depth)
            hits = np.flatnonzero(np.abs(pts - x0) <= eta) + s
            out.extend(int(h) for h in hits if h >= start)
            if len(out) >= K:
                return out[:K]
        raise BudgetExceededError(f"found {len(out)} of {K} returns within the symbol budget")
    x = float(x0)
    for n in range(1, budget + 1):
        x = fmap(x)
        if n >= start and abs(x - x0) <= eta:
            out.append(n)
            if len(out) == K:
                return out
    raise BudgetExceededError(f"found {len(out)} of {K} returns within {budget} iterates")


def _forced_prefix(p: CounterexampleParams) -> list[int]:
    """Leading symbols of ``x0``: ``m`` zeros followed by a one, which places
    ``x0 - x*`` in ``lam^-m [3a, 4a]``; ``m`` is the least with ``4a lam^-m <= delta0 / 2``.
    The closing one keeps ``x0`` a resolvable distance away from the fixed point."""
    m = max(2, math.ceil(math.log(16 * p.lam) / math.log(p.lam) - 1e-12))
    return [0] * m + [1]


def _select_returns(system, symbols, orbit, x0, eta, p, K, budget):
    """Reversing returns ``n_k`` (odd number of ``I2`` visits) grown geometrically."""
    sign = np.cumprod(np.where(symbols == 1, -1, 1))  # sign[j] = orientation of f^{j+1}
    hits = np.flatnonzero(np.abs(orbit - x0) <= eta)
    hits = hits[hits >= 1]
    out = []
    last = 0
    for k in range(1, K + 1):
        target = max(int(round(p.n_base * p.growth ** (k - 1))), last + 1)
        cand = hits[(hits >= target) & (sign[hits - 1] < 0)]
        if not len(cand):
            raise BudgetExceededError(f"no reversing return beyond {target} for block {k}")
        last = int(cand[0])
        out.append(last)
    return out


def build_counterexample(params: CounterexampleParams | None = None, budget: int = 10**7):
    """Two-phase construction: the linear skeleton and its coding fix ``x0``,
    ``N1`` and the return times; the blocks are then placed using them."""
    p = params or CounterexampleParams()
    p.validate()
    a, lam = p.a, p.lam
    system = base_horseshoe(p)
    probs = p.probabilities()
    rng = np.random.default_rng(p.seed_x0)
    m = _forced_prefix(p)
    depth = system.depth_for()
    need = int(p.n_base * p.growth ** (p.K_blocks - 1)) * 4 + 1000
    symbols = np.concatenate([np.asarray(m, dtype=np.int64),
                              markov_chain(np.tile(probs, (2, 1)), probs, need, rng)])
    x0 = float(system.decode_windows(symbols, 1, depth)[0])
    if not a <= x0 <= a + p.delta0 / 2:
        raise ConstraintError("seed", "x0 is not within delta0 / 2 of x*")
    delta1 = x0 - a
    z0 = 6 * a
    skeleton = assemble_map(p, x0, [])
    N1, N2 = find_covering_times(skeleton, x0, delta1, a, z0)
    eta = min(5 * a * lam ** -N1, delta1 - 7 * a * lam ** -N1)
    if eta <= 0:
        raise ConstraintError("covering_margin", "no room for the return window")
    while True:
        orbit = system.decode_windows(symbols, len(symbols) - depth + 1, depth)
        try:
            n_list = _select_returns(system, symbols[:len(orbit)], orbit, x0, eta, p,
                                     p.K_blocks, budget)
            break
        except BudgetExceededError:
            if len(symbols) > budget:
                raise
            more = markov_chain(np.tile(probs, (2, 1)), probs, len(symbols), rng)
            symbols = np.concatenate([symbols, more])
    blocks = block_specs(p, n_list, z0)
    fmap = assemble_map(p, x0, blocks)
    base = BaseData(x0, z0, p.delta0, delta1, eta, N1, N2, n_list, symbols, orbit, probs, system,
                    blocks, x_star=a, x_star_prime=5 * a)
    return fmap, base


# -- horseshoes on the blocks ---------------------------------------------
def horseshoe_measure(system, prob):
    """Markov measure on a coded horseshoe (uniform over laps for a lap horseshoe)."""
    if isinstance(system, LapHorseshoe):
        if prob not in (None, "uniform"):
            raise ValueError("lap horseshoes carry only the uniform measure")
        return system
    return CodedMarkov(system, prob)


def block_horseshoe(block: BlockSpec, N1: int) -> LapHorseshoe:
    return LapHorseshoe(block.log_laps, block.n_k + N1 + 1, name=f"block{block.k}")


def entropy_formula(block: BlockSpec, N1: int) -> float:
    """``log(2 M_k) / (n_k + N1 + 1)`` evaluated from the closed-form pieces."""
    p_log2M = math.log(2) + block.log_M
    return p_log2M / (block.n_k + N1 + 1)


def block_mean_log_slope(block: BlockSpec) -> float:
    """Mean of ``log|f'|`` over ``J_k`` under the uniform distribution.

    ``|f'| = A^r omega |sin(theta)|`` with ``theta`` uniform over whole half
    periods, and the mean of ``log|sin|`` over a period is ``-log 2``.
    """
    return block.log_sup_slope - math.log(2)


def check_block_cover(fmap: PiecewiseMap, base: BaseData, block: BlockSpec) -> dict:
    """Horseshoe condition for the block ``J_k`` under ``f^{n_k + N1 + 1}``.

    ``f(J_k) = [x0, x0 + 2 A^r]``; while the orbit of ``x0`` stays in the
    linear region the next ``n_k`` images are affine copies of length
    ``lam^i 2 A^r``, ending at ``[x - delta0, x]`` for a reversing return;
    ``N1`` more steps are checked by interval iteration in floats.
    """
    a, lam = base.x_star, fmap.params["lam"]
    d0 = base.delta0
    n = block.n_k
    js = np.arange(n + 1)
    centers = base.orbit[: n + 1]
    radius = np.exp(np.log(d0) + (js - n) * math.log(lam))
    lin1 = (centers - radius >= a - d0) & (centers + radius <= 2 * a + d0)
    lin2 = (centers - radius >= 4 * a - d0) & (centers + radius <= 5 * a + d0)
    in_linear = bool(np.all(lin1 | lin2))
    sign = np.prod(np.where(base.symbols[:n] == 1, -1, 1))
    x = float(base.orbit[n])
    lo, hi = (x - d0, x) if sign < 0 else (x, x + d0)
    lo2, hi2 = x - base.delta1, x
    for _ in range(base.N1):
        lo2, hi2 = fmap.image_of_interval(lo2, hi2)
    return {"k": block.k, "linear_orbit": in_linear, "reversing": bool(sign < 0),
            "image_after_return": (lo, hi), "covers_block": bool(lo2 <= block.lo and hi2 >= block.hi),
            "return_in_window": bool(abs(x - base.x0) <= base.eta),
            "log_lengths_ok": bool(abs((math.log(2) + block.log_amp + n * math.log(lam)) - math.log(d0)) < 1e-9)}


def nu_measure(base: BaseData, block: BlockSpec, lam: float, samples: int = 32) -> Empirical:
    """Discretization of the maximal-entropy measure on the block horseshoe.

    The return ``f^{n_k + N1 + 1}`` is affine away from the first step, so
    the measure is uniform on ``J_k`` and on each of its affine images along
    the orbit: near ``f^j(x0)`` at offset ``-+ lam^{j - n_k} (x - w)`` for
    ``j < n_k``, and on ``a + (J_k - a) lam^{i - N1}`` for ``i < N1``.
    """
    a = base.x_star
    n, N1 = block.n_k, base.N1
    T = n + N1 + 1
    t = block.lo + (np.arange(samples) + 0.5) / samples * block.length
    w = a + (t - a) * lam ** -N1
    x = float(base.orbit[n])
    sig = np.concatenate([[1], np.cumprod(np.where(base.symbols[:n] == 1, -1, 1))])
    sig_n = sig[n]
    pts = [t]
    js = np.arange(n)
    scale = sig[:n] * sig_n * np.exp((js - n) * math.log(lam))
    pts.append((base.orbit[:n, None] + scale[:, None] * (w - x)[None, :]).ravel())
    for i in range(N1):
        pts.append(a + (t - a) * lam ** (i - N1))
    pts = np.clip(np.concatenate(pts), 0.0, 1.0)
    assert len(pts) == T * samples
    return Empirical(pts)


def eta_integral(fmap: PiecewiseMap, nu: Empirical, block: BlockSpec, m: int) -> float:
    """``int_{V_m} log|f'| dnu`` with the block part taken from its closed form."""
    from .entropy import _distance_neighborhood

    V = _distance_neighborhood(fmap, 2.0**-m)
    lo = np.array([v[0] for v in V])
    hi = np.array([v[1] for v in V])
    pts, w = nu.points, nu.weights
    idx = np.searchsorted(lo, pts, side="right") - 1
    inV = (idx >= 0) & (pts < hi[np.clip(idx, 0, None)])
    in_block = (pts >= block.lo) & (pts <= block.hi)
    total = float(w[in_block & inV].sum()) * block_mean_log_slope(block)
    rest = inV & ~in_block
    if rest.any():
        with np.errstate(divide="ignore"):
            vals = np.log(np.abs(fmap.derivative(pts[rest])))
        total += float(np.dot(w[rest], np.maximum(vals, -1e3)))
    return total


def blocks_inside(fmap, blocks, m):
    from .entropy import _distance_neighborhood

    V = _distance_neighborhood(fmap, 2.0**-m)
    return all(any(lo <= b.lo and b.hi <= hi for lo, hi in V) for b in blocks)


class InducedReturn:
    """The return map ``f^{n_k + N1 + 1}`` on ``J_k`` in closed form.

    ``R(y) = a + lam^N1 (x - a - (delta0 / 2)(1 + cos(omega (y - c))))``;
    each half period of the cosine is one lap and has an explicit inverse.
    Only meaningful for blocks with few laps.
    """

    def __init__(self, base: BaseData, block: BlockSpec, lam: float):
        self.a = base.x_star
        self.x = float(base.orbit[block.n_k])
        self.d0 = base.delta0
        self.gain = lam ** base.N1
        self.omega = math.exp(block.log_omega)
        self.phase = block.phase
        self.lo, self.hi = block.lo, block.hi
        self.n_laps = int(math.floor(math.exp(block.log_laps) + 1e-9))

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        c = np.cos(self.omega * (y - self.phase))
        return self.a + self.gain * (self.x - self.a - 0.5 * self.d0 * (1 + c))

    def inverse(self, z, lap):
        cosv = 2 * ((self.x - self.a) - (np.asarray(z) - self.a) / self.gain) / self.d0 - 1
        th = np.arccos(np.clip(cosv, -1.0, 1.0))  # in [0, pi]
        # lap j covers omega (y - phase) in [-pi + j pi, j pi]
        base_angle = -math.pi + np.asarray(lap) * math.pi
        ang = np.where(np.asarray(lap) % 2 == 0, base_angle + (math.pi - th), base_angle + th)
        return self.phase + ang / self.omega


def block_brin_katok(base: BaseData, block: BlockSpec, lam: float, n_points: int = 10**6,
                     seed: int = 0, depth: int = 6) -> float:
    """Brin-Katok estimate of ``h(nu_k)`` from the induced return map on ``J_k``."""
    R = InducedReturn(base, block, lam)
    rng = np.random.default_rng(seed)
    syms = rng.integers(0, R.n_laps, size=n_points + depth)
    z = np.full(n_points, 0.5 * (block.lo + block.hi))
    for d in range(depth - 1, -1, -1):
        z = R.inverse(z, syms[d:d + n_points])
    mu = Empirical(np.clip(z, 0.0, 1.0))
    centers = mu.points[rng.choice(len(mu.points), 50)]
    # balls must be narrower than one lap for the lap count to show up
    delta = block.length / (4 * R.n_laps)
    masses, counts = bowen_ball_masses(mu, R, centers, delta, 4)
    slopes = []
    for mrow, crow in zip(masses, counts):
        ok = crow >= 30
        if np.count_nonzero(ok) >= 2:
            ns = np.arange(1, 5)[ok]
            y = -np.log(mrow[ok])
            slopes.append(np.polyfit(ns, y, 1)[0])
    per_return = float(np.mean(slopes)) if slopes else float("nan")
    return per_return / (block.n_k + base.N1 + 1)


# -- probe -----------------------------------------------------------------
@dataclass
class ProbeReport:
    params: dict
    base: dict
    rows: list
    flags: dict
    m: int
    notes: list = field(default_factory=list)

    COLUMNS = ("k", "n_k", "T_k", "log_M_k", "h_formula", "h_coded", "h_brin_katok",
               "bk_status", "w1_to_mu", "eta_integral")

    def csv_table(self):
        return list(self.COLUMNS), [[row[c] for c in self.COLUMNS] for row in self.rows]

    def to_dict(self):
        return {"params": self.params, "base": self.base, "rows": self.rows, "flags": self.flags,
                "m": self.m, "notes": self.notes}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def choose_m(fmap: PiecewiseMap, base: BaseData) -> int:
    """Largest scale ``2^-m`` whose critical neighbourhood contains every block but
    misses the base horseshoe and the affine images carried by the measures."""
    from .entropy import _distance_neighborhood

    a = base.x_star
    probes = np.concatenate([base.system.intervals.ravel(),
                             [a + 5 * a * fmap.params["lam"] ** -1, a + 9 * a * fmap.params["lam"] ** -1]])
    for m in range(1, 40):
        V = _distance_neighborhood(fmap, 2.0**-m)
        hit = any(lo < x < hi for x in np.concatenate([probes, base.orbit[:64]]) for lo, hi in V)
        if not hit and blocks_inside(fmap, base.blocks, m):
            return m
    raise ConstraintError("neighbourhood", "no scale separates the blocks from the horseshoe")


def semicontinuity_probe(params: CounterexampleParams | None = None, K: int | None = None,
                         samples: int = 32, bk_lap_limit: int = 10**6, built=None) -> ProbeReport:
    p = params or CounterexampleParams()
    fmap, base = built if built is not None else build_counterexample(p)
    K = p.K_blocks if K is None else K
    if K > p.K_blocks:
        raise ValueError("K exceeds the number of realized blocks")
    lam, r = p.lam, p.r
    mu = CodedMarkov(base.system, list(base.probabilities))
    h_mu = mu.entropy()
    m = choose_m(fmap, base)
    rows = []
    notes = ["the L bound is enforced for the first derivative only"]
    for block in base.blocks[:K]:
        hs = block_horseshoe(block, base.N1)
        nu = nu_measure(base, block, lam, samples)
        laps = math.exp(block.log_laps) if block.log_laps < 700 else math.inf
        if laps <= bk_lap_limit and block.resolved:
            h_bk = block_brin_katok(base, block, lam)
            status = "computed"
        else:
            h_bk = float("nan")
            status = "skipped:laps"
        rows.append({
            "k": block.k, "n_k": block.n_k, "T_k": block.n_k + base.N1 + 1,
            "log_M_k": block.log_M,
            "h_formula": entropy_formula(block, base.N1),
            "h_coded": hs.uniform_entropy(),
            "h_brin_katok": h_bk, "bk_status": status,
            "w1_to_mu": w1_distance(nu, mu),
            "eta_integral": abs(eta_integral(fmap, nu, block, m)),
        })
    hs_ = [row["h_formula"] for row in rows]
    w1 = [row["w1_to_mu"] for row in rows]
    asym = math.log(lam) / r
    deg_bound = (r - 1) / (2 * r) * math.log(lam)
    tail = w1[3:]  # early blocks are pre-asymptotic; vacuous when K < 5
    flags = {
        "h_mu": h_mu,
        "entropy_asymptote": asym,
        "entropy_gap": bool(hs_[-1] - h_mu > 0),
        "entropy_increasing": bool(all(b > a_ for a_, b in zip(hs_, hs_[1:]))),
        "entropy_margin": bool(hs_[-1] > h_mu + 0.2 * (asym - p.c)),
        "w1_nonincreasing": bool(all(b <= a_ for a_, b in zip(tail, tail[1:]))),
        "degenerate_bound": deg_bound,
        "degenerate_rate_exceeds": bool(rows[-1]["eta_integral"] > deg_bound),
        "blocks_in_V_m": blocks_inside(fmap, base.blocks[:K], m),
    }
    return ProbeReport(p.to_dict(), base.summary(), rows, flags, m, notes)
