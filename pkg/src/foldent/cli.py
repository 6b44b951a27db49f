"""Command-line front end.

Each subcommand writes a CSV table and a JSON report (holding the resolved
configuration) into ``--out``, optionally an SVG figure, and prints its
headline number.  Exit codes: 0 success, 1 bad configuration, 2 computation
error, 3 failed verification.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

QUANTITIES = ("lyapunov", "folding", "entropy", "dimension", "degrate", "production")
COMMANDS = QUANTITIES + ("counterexample", "verify")
DEFAULTS = {"map": "nfold:2", "measure": "lebesgue", "out": "foldent-out", "bits": False, "seed": 0,
            "levels": None, "samples": None, "json": False, "svg": True, "estimator": None,
            "eps0": None, "params": None, "K": None, "only": None, "tolerances": None}


class ConfigError(ValueError):
    pass


def fmt(v):
    """CSV cell: 12 significant digits for reals."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    return str(v)


def write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def write_json(path: Path, payload):
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")
    return path


def build_parser():
    ap = argparse.ArgumentParser(prog="foldent", description="Folding entropy toolkit for interval maps.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="JSON file with any of the options below")
    ap.add_argument("--map", help="nfold:N, skewed_tent:p, logistic:c, identity, counterexample or a JSON file")
    ap.add_argument("--measure", help="lebesgue, arcsine, bernoulli:p,q, atomic:x@m,..., birkhoff:x0,n or JSON")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--bits", action="store_true", default=None, help="report entropies in bits")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--levels", type=int, help="partition depth (k_max, n_max or m_max)")
    ap.add_argument("--samples", type=int, help="sampled centers for ball estimators")
    ap.add_argument("--json", action="store_true", default=None, help="print the JSON report")
    ap.add_argument("--no-svg", dest="svg", action="store_false", default=None)
    ap.add_argument("--estimator", help="folding: branch|partition; entropy: partition|brin-katok")
    ap.add_argument("--eps0", type=float, help="threshold scale of the pullback partitions")
    ap.add_argument("--params", help="counterexample parameters (JSON text or file)")
    ap.add_argument("-K", type=int, help="number of probed blocks")
    ap.add_argument("--only", action="append", help="verify: restrict to a named check")
    return ap


def _load_json(text_or_path):
    text = str(text_or_path)
    if text.lstrip().startswith("{"):
        return json.loads(text)
    return json.loads(Path(text).read_text())


def resolve_config(ns) -> dict:
    cfg = dict(DEFAULTS)
    if ns.config:
        try:
            loaded = _load_json(ns.config)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        unknown = set(loaded) - set(DEFAULTS) - {"command"}
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        cfg.update(loaded)
    for key in DEFAULTS:
        v = getattr(ns, key, None)
        if v is not None:
            cfg[key] = v
    cfg["command"] = ns.command
    if isinstance(cfg["params"], str):
        try:
            cfg["params"] = _load_json(cfg["params"])
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read counterexample parameters: {exc}") from exc
    if isinstance(cfg["only"], str):
        cfg["only"] = [cfg["only"]]
    return cfg


def _unit(cfg):
    return math.log(2) if cfg["bits"] else 1.0


# -- quantity commands ------------------------------------------------------
def _prepare(cfg):
    from .maps import parse_map
    from .measures import parse_measure

    try:
        fmap = parse_map(cfg["map"])
        mu = parse_measure(cfg["measure"], fmap, seed=cfg["seed"])
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        raise ConfigError(str(exc)) from exc
    return fmap, mu


def run_quantity(cfg, out: Path):
    from . import entropy as E
    from . import plots

    fmap, mu = _prepare(cfg)
    cmd = cfg["command"]
    unit = _unit(cfg)
    series = None
    report = {}
    if cmd == "lyapunov":
        rep = {}
        value = E.lyapunov(fmap, mu, rep) / unit
        header, rows = ["quantity", "value"], [["lyapunov", value]]
        report = rep
    elif cmd == "folding":
        est = cfg["estimator"] or "branch"
        if est == "branch":
            r = E.folding_entropy_branch(fmap, mu)
        elif est == "partition":
            from .partitions import estimate_holder

            hp = estimate_holder(fmap, 2.0, eps0=cfg["eps0"]) if cfg["eps0"] else None
            r = E.folding_entropy_partition(fmap, mu, k_max=cfg["levels"] or 12, hp=hp)
            d = r.diagnostics
            series = (d["k"], {"delta1 + delta2": np.add(d["delta1"], d["delta2"]) / unit}, "level k")
        else:
            raise ConfigError(f"unknown folding estimator {est!r}")
        value = r.value / unit
        header, rows = r.csv_table()
        report = r.to_dict()
    elif cmd == "entropy":
        est = cfg["estimator"] or "partition"
        if est == "partition":
            r = E.metric_entropy_partition(fmap, mu, n_max=cfg["levels"] or 8)
            series = (r.diagnostics["n"], {"H(xi | f^-1 R_n)": np.divide(r.diagnostics["h_n"], unit)}, "n")
        elif est in ("brin-katok", "bk"):
            r = E.metric_entropy_brin_katok(fmap, mu, sample_x=cfg["samples"] or 200, seed=cfg["seed"])
            series = (np.log2(r.diagnostics["delta"]), {"mean slope": np.divide(r.diagnostics["mean_slope"], unit)},
                      "log2 delta")
        else:
            raise ConfigError(f"unknown entropy estimator {est!r}")
        value = r.value / unit
        header, rows = r.csv_table()
        report = r.to_dict()
    elif cmd == "dimension":
        r = E.local_dimension(mu, sample_x=cfg["samples"] or 200, seed=cfg["seed"])
        value = r.value
        slopes = sorted(r.diagnostics["slope"])
        header, rows = ["center_rank", "local_slope"], [[i, s] for i, s in enumerate(slopes)]
        series = (list(range(len(slopes))), {"sorted local slopes": slopes}, "center rank")
        report = r.to_dict()
    elif cmd == "degrate":
        prof = E.degenerate_rate(fmap, mu, m_max=cfg["levels"] or 10)
        value = max(prof.etas) if prof.etas else 0.0
        header, rows = prof.csv_table()
        series = (prof.ms, {"eta_m": prof.etas}, "m")
        report = prof.to_dict()
    elif cmd == "production":
        F = E.folding_entropy_branch(fmap, mu).value
        lam = E.lyapunov(fmap, mu)
        value = (F - lam) / unit
        header, rows = ["quantity", "value"], [["folding", F / unit], ["lyapunov", lam / unit],
                                               ["production", value]]
    else:  # pragma: no cover - argparse restricts the choices
        raise ConfigError(cmd)
    write_csv(out / f"{cmd}.csv", header, rows)
    payload = {"config": cfg, "value": value, "units": "bits" if cfg["bits"] else "nats", "report": report}
    write_json(out / f"{cmd}.json", payload)
    if cfg["svg"] and series is not None:
        x, ys, xlabel = series
        plots.series_plot(out / f"{cmd}.svg", x, ys, xlabel, cmd)
    for w in _warnings(report):
        print(f"warning: {w}", file=sys.stderr)
    print(f"{(value if abs(value) >= 5e-7 else 0.0):.6f}")
    if cfg["json"]:
        print(json.dumps(_jsonable(payload), sort_keys=True))
    return 0


def _warnings(report):
    w = report.get("resolution_warning") if isinstance(report, dict) else None
    return [w] if w else []


# -- counterexample -----------------------------------------------------------
def run_counterexample(cfg, out: Path):
    from . import plots
    from .counterexample import CounterexampleParams, build_counterexample, semicontinuity_probe

    try:
        params = CounterexampleParams.from_dict(cfg["params"] or {})
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    fmap, base = build_counterexample(params)
    rep = semicontinuity_probe(params, K=cfg["K"], built=(fmap, base))
    header, rows = rep.csv_table()
    write_csv(out / "probe.csv", header, rows)
    write_csv(out / "probe_flags.csv", ["flag", "value"], sorted(rep.flags.items()))
    (out / "map.json").write_text(fmap.to_json() + "\n")
    write_json(out / "probe.json", {"config": cfg, **rep.to_dict()})
    if cfg["svg"]:
        ks = [r["k"] for r in rep.rows]
        plots.series_plot(out / "probe.svg", ks, {"h(nu_k)": [r["h_formula"] for r in rep.rows]}, "k",
                          "entropy (nats)", "horseshoe entropies",
                          hlines={"log(lam)/r": rep.flags["entropy_asymptote"], "h(mu)": rep.flags["h_mu"]})
        plots.map_plot(out / "map.svg", fmap, zoom=(base.z0 - base.delta0, base.blocks[0].hi + base.delta0))
    for r in rep.rows:
        print(f"k={r['k']} n_k={r['n_k']} h={r['h_formula']:.6f} W1={r['w1_to_mu']:.6g} "
              f"eta={r['eta_integral']:.6f}")
    print("flags " + " ".join(f"{k}={fmt(v)}" for k, v in sorted(rep.flags.items())))
    return 0


# -- verify -------------------------------------------------------------------
def run_verify_cmd(cfg, out: Path):
    from .verify import HEADER, run_verify

    def show(line):
        print(f"{'PASS' if line.passed else 'FAIL'}  [{line.criterion}] {line.check}: {line.quantity} "
              f"= {line.value:.6g} (target {line.target:.6g}, {line.relation} tol {line.tolerance:.1e})")

    try:
        lines, timings = run_verify(cfg["only"], cfg["seed"], cfg["tolerances"], log=show)
    except KeyError as exc:
        raise ConfigError(str(exc.args[0])) from exc
    write_csv(out / "verify.csv", HEADER, [ln.row() for ln in lines])
    failed = sorted({(ln.criterion, ln.check) for ln in lines if not ln.passed})
    for name, t in timings.items():
        print(f"time {name}: {t:.1f}s")
    if failed:
        print("FAILED " + ", ".join(f"criterion {c} ({n})" for c, n in failed))
        return 3
    print(f"all {len(lines)} checks passed")
    return 0


def _error(kind, exc, code):
    msg = json.dumps({"error": kind, "type": type(exc).__name__, "name": getattr(exc, "name", None),
                      "message": str(exc)})
    print(msg, file=sys.stderr)
    return code


def main(argv=None) -> int:
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    try:
        cfg = resolve_config(ns)
        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
    except (ConfigError, OSError) as exc:
        return _error("config", exc, 1)
    try:
        if cfg["command"] in QUANTITIES:
            return run_quantity(cfg, out)
        if cfg["command"] == "counterexample":
            return run_counterexample(cfg, out)
        return run_verify_cmd(cfg, out)
    except ConfigError as exc:
        return _error("config", exc, 1)
    except Exception as exc:  # noqa: BLE001 - any failure inside a computation maps to exit 2
        return _error("computation", exc, 2)


if __name__ == "__main__":
    sys.exit(main())
