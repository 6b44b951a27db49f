"""Acceptance checks shared by ``foldent verify`` and the test-suite.

Every check produces lines of ``(criterion, check, quantity, value, target,
tolerance, relation)``; a line passes when the relation holds within the
tolerance.  Values are deterministic for a fixed seed.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .counterexample import (CounterexampleParams, build_counterexample, semicontinuity_probe)
from .entropy import (degenerate_rate, delta_decomposition, folding_entropy_branch,
                      folding_entropy_partition, local_dimension, lyapunov,
                      metric_entropy_brin_katok, metric_entropy_partition, phi)
from .maps import logistic, nfold, parse_map, skewed_tent
from .measures import (atomic, bernoulli, birkhoff_measure, lebesgue, parse_measure)
from .partitions import estimate_holder

TOLERANCES = {
    "folding_branch": 1e-6,
    "folding_partition": 5e-3,
    "tent": 5e-3,
    "equality": 2e-2,
    "dimension_bernoulli": 0.05,
    "dimension_lebesgue": 0.02,
    "inequality": 2e-2,
    "concavity": 1e-12,
    "monotone": 1e-9,
    "identity": 1e-9,
    "probe_formula": 1e-9,
    "degrate": 1e-4,
    "brin_katok": 0.05,
    "brin_katok_periodic": 1e-9,
}

# the skewed tent's corner makes the Holder constant of f' enormous; a unit
# threshold scale keeps every regular component regular at all levels
TENT_EPS0 = 1.0


@dataclass
class Line:
    criterion: int
    check: str
    quantity: str
    value: float
    target: float
    tolerance: float
    relation: str  # "abs": |value - target| <= tol, "le": value <= target + tol, "ge": value >= target - tol

    @property
    def passed(self) -> bool:
        v, t, tol = self.value, self.target, self.tolerance
        if not (math.isfinite(v) and math.isfinite(t)):
            return False
        if self.relation == "abs":
            return abs(v - t) <= tol
        if self.relation == "le":
            return v <= t + tol
        if self.relation == "ge":
            return v >= t - tol
        raise ValueError(self.relation)

    def row(self):
        return [self.criterion, self.check, self.quantity, self.value, self.target, self.tolerance,
                self.relation, "PASS" if self.passed else "FAIL"]


HEADER = ["criterion", "check", "quantity", "value", "target", "tolerance", "relation", "status"]


def tent_entropy(p):
    return (1 / p) * math.log(p) + ((p - 1) / p) * math.log(p / (p - 1))


def check_folding(tol, seed):
    out = []
    for N in (2, 3, 4):
        f, mu = nfold(N), lebesgue()
        out.append(Line(1, "folding", f"branch nfold({N})", folding_entropy_branch(f, mu).value,
                        math.log(N), tol["folding_branch"], "abs"))
        out.append(Line(1, "folding", f"partition nfold({N})",
                        folding_entropy_partition(f, mu, k_max=12).value, math.log(N),
                        tol["folding_partition"], "abs"))
    return out


def check_tent(tol, seed):
    out = []
    for p in (3, 5):
        f, mu = skewed_tent(p), lebesgue()
        hp = estimate_holder(f, 2.0, eps0=TENT_EPS0)
        target = tent_entropy(p)
        out.append(Line(2, "tent", f"branch tent({p})", folding_entropy_branch(f, mu).value, target,
                        tol["tent"], "abs"))
        out.append(Line(2, "tent", f"partition tent({p})",
                        folding_entropy_partition(f, mu, k_max=12, hp=hp).value, target, tol["tent"], "abs"))
    return out


def check_equality(tol, seed):
    pairs = [("nfold(2) leb", nfold(2), None), ("nfold(3) leb", nfold(3), None),
             ("tent(3) leb", skewed_tent(3), None), ("nfold(2) bernoulli(0.3,0.7)", nfold(2), (0.3, 0.7))]
    out = []
    for name, f, prob in pairs:
        mu = lebesgue() if prob is None else bernoulli(f, prob)
        h = metric_entropy_partition(f, mu).value
        F = folding_entropy_branch(f, mu).value
        out.append(Line(3, "equality", f"h - F {name}", h - F, 0.0, tol["equality"], "abs"))
    return out


def check_dimension(tol, seed):
    f = nfold(2)
    mu = bernoulli(f, (0.3, 0.7))
    sample = mu.sample_path(10**6, seed=seed)
    target = mu.entropy() / math.log(2)
    dim_b = local_dimension(sample, seed=seed).value
    dim_l = local_dimension(lebesgue(), seed=seed).value
    return [Line(4, "dimension", "bernoulli(0.3,0.7) sample", dim_b, target, tol["dimension_bernoulli"], "abs"),
            Line(4, "dimension", "lebesgue", dim_l, 1.0, tol["dimension_lebesgue"], "abs")]


ZOO = [("nfold:2", "lebesgue"), ("nfold:3", "lebesgue"), ("nfold:4", "lebesgue"),
       ("skewed_tent:3", "lebesgue"), ("skewed_tent:5", "lebesgue"), ("logistic:4", "arcsine"),
       ("nfold:2", "bernoulli:0.3,0.7"), ("nfold:2", "atomic:0.3333333333333333@0.5,0.6666666666666666@0.5"),
       ("identity", "lebesgue")]


def check_inequalities(tol, seed):
    out = []
    for m, s in ZOO:
        f = parse_map(m)
        mu = parse_measure(s, f, seed=seed)
        h = metric_entropy_partition(f, mu).value
        F = folding_entropy_branch(f, mu).value
        lam = lyapunov(f, mu)
        name = f"{m} {s.split(':')[0]}"
        out.append(Line(5, "inequalities", f"h <= max(lam,0) {name}", h, max(lam, 0.0), tol["inequality"], "le"))
        out.append(Line(5, "inequalities", f"h <= F + max(-lam,0) {name}", h, F + max(-lam, 0.0),
                        tol["inequality"], "le"))
    return out


def _monotone_excess(rep):
    worst = -math.inf
    ks = sorted(rep.I_table)
    for j in range(1, ks[-1] + 1):
        for k in (k for k in ks if k >= j):
            for kp in (kp for kp in ks if kp > k):
                worst = max(worst, rep.I_table[kp][j] - rep.I_table[k][j],
                            rep.Ip_table[kp][j] - rep.Ip_table[k][j])
    return worst


def check_machinery(tol, seed):
    rng = np.random.default_rng(seed)
    excess, bound = -math.inf, -math.inf
    for _ in range(1000):
        n = int(rng.integers(2, 12))
        p = rng.dirichlet(np.ones(n))
        x = rng.random(n)
        excess = max(excess, float(np.dot(p, phi(x)) - phi(np.dot(p, x))))
        bound = max(bound, float(np.sum(phi(p)) - math.log(n)))
    out = [Line(6, "machinery", "concavity excess", excess, 0.0, tol["concavity"], "le"),
           Line(6, "machinery", "sum phi(p) - log n", bound, 0.0, tol["concavity"], "le")]
    ce_map, _ = build_counterexample(CounterexampleParams(K_blocks=3))
    hp_ce = estimate_holder(ce_map, 2.0)
    cases = [("tent(3)", skewed_tent(3), estimate_holder(skewed_tent(3), 2.0, eps0=TENT_EPS0)),
             ("counterexample", ce_map, hp_ce),
             ("counterexample eps0=2", ce_map, hp_ce.with_eps0(2.0))]
    mu = lebesgue()
    for name, f, hp in cases:
        rep = delta_decomposition(f, mu, range(1, 13), hp=hp)
        out.append(Line(6, "machinery", f"I monotone excess {name}", _monotone_excess(rep), 0.0,
                        tol["monotone"], "le"))
        out.append(Line(6, "machinery", f"delta2 identity gap {name}", max(rep.diagnostics["identity_gap"]),
                        0.0, tol["identity"], "le"))
        if name == "counterexample":
            C = hp.inclusion_constant
            bad = 0
            for k, lv in rep.levels.items():
                sub = ce_map.sublevel_set(C * 2.0 ** (-k * hp.beta))
                for a, b in lv.part.degenerate:
                    bad += not any(lo <= a + 1e-12 and b <= hi + 1e-12 for lo, hi in sub)
            out.append(Line(6, "machinery", "degenerate inclusion violations", float(bad), 0.0, 0.0, "le"))
    return out


def check_probe(tol, seed):
    p = CounterexampleParams(seed_x0=seed)
    fmap, base = build_counterexample(p)
    rep = semicontinuity_probe(p, built=(fmap, base))
    out = []
    lam, r, L, g0, d0 = p.lam, p.r, p.L_big, p.gamma0, p.delta0
    for row, block in zip(rep.rows, base.blocks):
        k, n = row["k"], row["n_k"]
        log_M = (math.log(L) + math.log(g0) + (math.log(2) + n * math.log(lam) - math.log(d0)) / r
                 - math.log(2 * math.pi) - 2 * math.log(k))
        h_formula = (math.log(2) + log_M) / (n + base.N1 + 1)
        out.append(Line(7, "probe", f"h_nu formula k={k}", row["h_coded"], h_formula, tol["probe_formula"], "abs"))
        # |J_k| = 2 pi M_k / omega_k
        out.append(Line(7, "probe", f"block length k={k}",
                        math.exp(math.log(2 * math.pi) + block.log_M - block.log_omega) / block.length, 1.0,
                        tol["probe_formula"], "abs"))
    hs = [row["h_coded"] for row in rep.rows]
    out.append(Line(7, "probe", "h_nu increasing (min step)", min(b - a for a, b in zip(hs, hs[1:])), 0.0, 0.0, "ge"))
    h_mu = rep.flags["h_mu"]
    out.append(Line(7, "probe", "h_nu_8 - h_mu - 0.2 (log(lam)/r - c)",
                    hs[-1] - h_mu - 0.2 * (math.log(lam) / r - p.c), 0.0, 0.0, "ge"))
    w1 = [row["w1_to_mu"] for row in rep.rows[3:8]]
    out.append(Line(7, "probe", "W1 k=4..8 largest increase", max(b - a for a, b in zip(w1, w1[1:])), 0.0, 0.0, "le"))
    out.append(Line(7, "probe", f"|int_V_m log|f'| dnu_8| (m={rep.m})", rep.rows[-1]["eta_integral"],
                    (r - 1) / (2 * r) * math.log(lam), 0.0, "ge"))
    out.append(Line(7, "probe", "blocks inside V_m", float(rep.flags["blocks_in_V_m"]), 1.0, 0.0, "abs"))
    return out


def _logistic_eta_oracle(m):
    d = 2.0**-m
    g = lambda x: math.log(abs(4 - 8 * x))  # noqa: E731
    left = quad(g, 0.5 - d, 0.5, limit=200, epsabs=1e-13)[0]
    right = quad(g, 0.5, 0.5 + d, limit=200, epsabs=1e-13)[0]
    return abs(left + right)


def check_degrate(tol, seed):
    prof = degenerate_rate(logistic(4.0), lebesgue(), m_max=10, m_min=2)
    out = [Line(8, "degrate", f"logistic eta_{m}", eta, _logistic_eta_oracle(m), tol["degrate"], "abs")
           for m, eta in zip(prof.ms, prof.etas)]
    for N in (2, 3):
        z = degenerate_rate(nfold(N), lebesgue(), m_max=10)
        out.append(Line(8, "degrate", f"nfold({N}) max eta", max(z.etas), 0.0, 0.0, "abs"))
    return out


def check_brin_katok(tol, seed):
    f = nfold(2)
    mu = birkhoff_measure(f, 0.1234567, n=10**6, seed=seed)
    h = metric_entropy_brin_katok(f, mu, seed=seed).value
    per2 = metric_entropy_brin_katok(f, atomic([1 / 3, 2 / 3]), seed=seed).value
    return [Line(9, "brin_katok", "doubling birkhoff 1e6", h, math.log(2), tol["brin_katok"], "abs"),
            Line(9, "brin_katok", "period-2 orbit", per2, 0.0, tol["brin_katok_periodic"], "abs")]


CHECKS = {
    "folding": check_folding,
    "tent": check_tent,
    "equality": check_equality,
    "dimension": check_dimension,
    "inequalities": check_inequalities,
    "machinery": check_machinery,
    "probe": check_probe,
    "degrate": check_degrate,
    "brin_katok": check_brin_katok,
}


def run_verify(only=None, seed: int = 0, tolerances: dict | None = None, log=None):
    """Run the selected checks; returns ``(lines, timings)``."""
    tol = dict(TOLERANCES)
    unknown = set(tolerances or {}) - set(tol)
    if unknown:
        raise KeyError(f"unknown tolerance keys {sorted(unknown)}")
    tol.update(tolerances or {})
    names = list(CHECKS) if not only else list(only)
    for n in names:
        if n not in CHECKS:
            raise KeyError(f"unknown check {n!r}; choose from {', '.join(CHECKS)}")
    lines, timings = [], {}
    for n in names:
        t0 = time.perf_counter()
        got = CHECKS[n](tol, seed)
        timings[n] = time.perf_counter() - t0
        lines.extend(got)
        if log:
            for ln in got:
                log(ln)
    return lines, timings
