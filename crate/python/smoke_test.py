"""Builds the lipsearch_py extension and exercises the binding surface.

Run from anywhere: python3 python/smoke_test.py
"""

import shutil
import subprocess
import sys
import tempfile
from fractions import Fraction as F
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]


def build_and_import():
    subprocess.run(
        ["cargo", "build", "-p", "lipsearch-py"],
        cwd=ROOT,
        check=True,
    )
    built = ROOT / "target" / "debug" / "liblipsearch_py.so"
    stage = Path(tempfile.mkdtemp(prefix="lipsearch_py."))
    shutil.copy2(built, stage / "lipsearch_py.so")
    sys.path.insert(0, str(stage))
    import lipsearch_py

    return lipsearch_py


def main():
    lp = build_and_import()

    # Closed-form policy quantities at c = 3/10 on the unit window.
    assert lp.max_searches("0.3", "1") == 2
    assert F(lp.stop_threshold("0.3", "1")) == F(3, 5)
    assert F(lp.root_guarantee("0.3")) == F(3, 10)
    diameters, centers = lp.ball_partition("0.3", "1")
    assert sum(F(d) for d in diameters) == 1
    assert F(centers[0]) == F(2, 5)

    # First move, and the stop after a good-enough draw.
    assert F(lp.act("0.3", [])) == F(2, 5)
    assert lp.act("0.3", [("2/5", "3/5")]) is None

    # Window geometry is policy-free: one observation splits [0, 1].
    window = lp.search_window([("2/5", "3/5")])
    assert [(F(a), F(b)) for a, b in window] == [(F(0), F(0)), (F(4, 5), F(1))]

    # Landscape construction and evaluation.
    idx = lp.QualityIndex([("0", "1/2"), ("1/2", "1"), ("1", "1/2")])
    assert F(idx.evaluate("1/4")) == F(3, 4)
    assert F(idx.lipschitz()) == 1
    assert lp.QualityIndex.from_json(idx.to_json()).breakpoints() == idx.breakpoints()

    # A near-right tent forces both searches before the peak is pinned down.
    tent = lp.QualityIndex.tent("0.95")
    trace = lp.simulate("0.3", tent)
    assert [F(s["x"]) for s in trace["steps"]] == [F(2, 5), F(39, 40)]
    assert [F(s["z"]) for s in trace["steps"]] == [F(9, 20), F(39, 40)]
    assert F(trace["terminal"]["payoff"]) == F(3, 8)

    # The adversary pins the builtin policy to its guarantee, and the witness
    # landscape replays to the same outcome.
    adv_trace, witness = lp.adversary("0.3")
    assert F(adv_trace["terminal"]["payoff"]) == F(3, 10)
    replay = lp.simulate("0.3", witness)
    assert len(replay["steps"]) == len(adv_trace["steps"])
    assert F(replay["terminal"]["payoff"]) == F(3, 10)

    # The flat-then-rise landscape passes through (x, z) and attains 1.
    bif = lp.bifurcation_index("0.4", "0.6")
    assert F(bif.evaluate("0.4")) == F(3, 5)
    assert F(bif.evaluate("1")) == 1

    # Two-period classification and the stopping boundary.
    assert lp.classify("0.5", "0.9", "0.3") == "bifurcation_risk"
    assert lp.classify("0.1", "0.45", "0.3") == "continue"
    assert F(lp.m_curve("2/5", "0.3")) == F(3, 5)
    assert F(lp.bifurcation_bound("0.5")) == F(1, 2)
    assert F(lp.directional_bound("0.5", "0.3")) > F(lp.directional_bound("0.4", "0.3"))

    # The discrete oracle agrees with the closed form up to snapping and
    # confirms dynamic consistency.
    solved = lp.solve(16, 16, "0.3", 2)
    assert F(solved["value"]) == F(11, 40)
    assert any(F(a) == F(3, 8) for a in solved["best_first_actions"])
    assert F(lp.left_to_right_value(16, 16, "0.3", 2)) <= F(solved["value"])
    assert lp.dynamic_consistency_check(16, 16, "0.3", 2) is True

    # Bad input surfaces as ValueError, exhausted budgets as RuntimeError.
    try:
        lp.root_guarantee("0")
    except ValueError:
        pass
    else:
        raise AssertionError("cost 0 should be rejected")
    try:
        lp.solve(16, 16, "0.3", 2, state_cap=10)
    except RuntimeError:
        pass
    else:
        raise AssertionError("state cap 10 should exhaust the budget")

    print("smoke test: all bindings checks passed")


if __name__ == "__main__":
    main()
