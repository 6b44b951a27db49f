"""One test per acceptance criterion, each printing a PASS/FAIL line."""

import time

import pytest

from foldent.cli import main
from foldent.verify import CHECKS, TOLERANCES

CRITERIA = {
    1: ("folding", 30.0),
    2: ("tent", None),
    3: ("equality", 60.0),
    4: ("dimension", None),
    5: ("inequalities", None),
    6: ("machinery", None),
    7: ("probe", 300.0),
    8: ("degrate", None),
    9: ("brin_katok", None),
}


def report(capsys, criterion, ok, detail):
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}")


@pytest.mark.parametrize("criterion", sorted(CRITERIA))
def test_criterion(criterion, capsys):
    name, budget = CRITERIA[criterion]
    t0 = time.perf_counter()
    lines = CHECKS[name](dict(TOLERANCES), 0)
    elapsed = time.perf_counter() - t0
    failed = [ln for ln in lines if not ln.passed]
    in_time = budget is None or elapsed < budget
    ok = not failed and in_time and all(ln.criterion == criterion for ln in lines)
    detail = f"{name}: {len(lines) - len(failed)}/{len(lines)} checks in {elapsed:.1f}s"
    if failed:
        detail += "; failed " + ", ".join(f"{ln.quantity}={ln.value:.6g}" for ln in failed)
    if not in_time:
        detail += f"; over the {budget:.0f}s budget"
    report(capsys, criterion, ok, detail)
    assert ok, detail


def test_criterion_10_determinism(tmp_path, capsys):
    outs = []
    for run in ("first", "second"):
        d = tmp_path / run
        code = main(["verify", "--seed", "0", "--out", str(d)])
        outs.append((code, (d / "verify.csv").read_bytes()))
    ok = outs[0][0] == 0 and outs[1][0] == 0 and outs[0][1] == outs[1][1]
    report(capsys, 10, ok, f"verify exit codes {outs[0][0]}, {outs[1][0]}; "
                           f"CSV identical: {outs[0][1] == outs[1][1]}")
    assert ok
