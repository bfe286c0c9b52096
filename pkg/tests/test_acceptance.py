"""Acceptance criteria 1-10, one printed PASS/FAIL line each.

Run alone with ``pytest tests/test_acceptance.py -v -s`` or
``python3 tests/test_acceptance.py``.  Scenario criteria run the shipped
scenario files at their default verification settings (10^4 samples).
"""
import time

import numpy as np
import pytest

from fibertc.cli import build_planner, load_scenario, run_scenario, shipped_scenarios
from fibertc.geometry import based_domain, get_space
from fibertc.planner import (based_loop_planner_from_cat, cat_cover_to_planner, circle_planner,
                             convex_planner, planner_to_cat_cover, product_planner,
                             restrict_planner, to_loop_planner, torus_planner)
from fibertc.verify import VerificationConfig, check_loop_contract, check_partition, verify_planner

from test_planner import BUILTINS, COUNTS

RUNTIME_LIMIT = 10.0
CONTROLS = ["control-gap", "control-overlap", "control-broken-endpoint",
            "control-perturbed-midpoint", "control-seam", "control-count-mismatch"]


@pytest.fixture
def announce(capsys):
    def _announce(n, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
        return ok
    return _announce


def run(name, **kw):
    t0 = time.perf_counter()
    status, report = run_scenario(load_scenario(name), **kw)
    return status, report, time.perf_counter() - t0


def scenario_ok(status, report, count):
    return (status == 0 and report["pass"] and report["piece_count"] == count
            and report["checks"]["section_contract"]["worst"] <= 1e-9)


def test_criterion_1_odd_spheres(announce):
    parts = []
    ok = True
    for name in ("sphere-odd", "sphere-odd-3"):
        status, report, secs = run(name)
        ok &= scenario_ok(status, report, 1) and secs < RUNTIME_LIMIT
        parts.append(f"{name}: pieces={report['piece_count']} "
                     f"ratio={report['checks']['continuity_modulus']['extra']['max_ratio']:.3g} {secs:.1f}s")
    assert announce(1, ok, "; ".join(parts))


def test_criterion_2_even_sphere(announce):
    status, report, secs = run("sphere-even")
    ok = scenario_ok(status, report, 2) and secs < RUNTIME_LIMIT
    assert announce(2, ok, f"sphere-even: pieces={report['piece_count']} {secs:.1f}s")


def test_criterion_3_torus_and_klein(announce):
    s1, r1, _ = run("torus")
    s2, r2, _ = run("klein-quotient")
    ok = scenario_ok(s1, r1, 3) and s2 == 0 and r2["pass"] and r2["piece_count"] <= 3
    assert announce(3, ok, f"torus pieces={r1['piece_count']}, klein pieces={r2['piece_count']} (<= 3)")


def test_criterion_4_fhe_transport(announce):
    s1, r1, _ = run("cylinder-fhe")
    s2, r2, _ = run("cylinder-fhe-back")
    ok = scenario_ok(s1, r1, 2) and scenario_ok(s2, r2, 2)
    worst = max(r1["checks"]["section_contract"]["worst"], r2["checks"]["section_contract"]["worst"])
    assert announce(4, ok, f"to cylinder {r1['piece_count']} pieces, back {r2['piece_count']} pieces, "
                           f"endpoint worst {worst:.2g}")


def test_criterion_5_bundle_isomorphisms(announce):
    s1, r1, _ = run("circle-rotation")
    s2, r2, _ = run("torus-swap")
    ok = scenario_ok(s1, r1, 2) and scenario_ok(s2, r2, 3)
    assert announce(5, ok, f"rotation {r1['piece_count']} pieces, swap {r2['piece_count']} pieces")


def test_criterion_6_loop_equivalence(announce):
    cfg = VerificationConfig()
    details = []
    ok = True
    for name in sorted(BUILTINS):
        pl = to_loop_planner(BUILTINS[name]())
        part = check_partition(pl, cfg)
        loop = check_loop_contract(pl, cfg, partition=part)
        good = (pl.count == COUNTS[name] and part.status == "pass" and loop.status == "pass"
                and loop.worst <= 1e-9 and loop.n_checked == 10_000)
        ok &= good
        if not good:
            details.append(f"{name} broken")
    for name in ("loop-circle", "loop-torus", "loop-sphere-even"):
        status, report, _ = run(name)
        ok &= status == 0
    assert announce(6, ok, f"{len(BUILTINS)} builtins keep counts, loop contract <= 1e-9 on 10^4 samples"
                           + ("" if ok else ": " + ", ".join(details)))


def test_criterion_7_cat_witnesses(announce):
    s1, r1, _ = run("cat-round-trip")
    s2, r2, _ = run("based-loop-from-cat")
    ok = (scenario_ok(s1, r1, 2) and r1["checks"]["cat_witness"]["status"] == "pass"
          and r1["checks"]["cat_witness"]["extra"]["entries"] == 2
          and s2 == 0 and r2["checks"]["loop_contract"]["status"] == "pass" and r2["piece_count"] == 2)
    suite = [(circle_planner(), "S1", [1.0, 0.0]), (torus_planner(), "T2", [1.0, 0.0, 0.0, 1.0]),
             (convex_planner(get_space("D2")), "D2", [0.0, 0.0]),
             (product_planner(circle_planner(), convex_planner(get_space("I"))), "cylinder", [1.0, 0.0, 0.5])]
    counts = []
    for pl, space, base in suite:
        based = restrict_planner(pl, based_domain(get_space(space), np.array(base)))
        w = planner_to_cat_cover(based)
        counts.append((based.count, cat_cover_to_planner(w).count, based_loop_planner_from_cat(w).count))
    ok &= all(a == b == c for a, b, c in counts)
    assert announce(7, ok, f"S^1 witness entries={r1['checks']['cat_witness']['extra']['entries']}, "
                           f"round-trip counts {counts}")


def test_criterion_8_subadditivity_and_diagonal(announce):
    s1, r1, _ = run("combine-halves")
    s2, r2, _ = run("diagonal")
    ok = scenario_ok(s1, r1, 2) and scenario_ok(s2, r2, 1)
    assert announce(8, ok, f"combined {r1['piece_count']} pieces (<= 1 + 1), diagonal {r2['piece_count']} piece")


def test_criterion_9_negative_controls(announce):
    outcomes = []
    ok = True
    for name in CONTROLS:
        sc = load_scenario(name)
        status, report = run_scenario(sc)
        failed = sorted(k for k, v in report["checks"].items() if v["status"] == "fail")
        if sc.expected_failure == "expected_piece_count":
            good = status == 1 and not failed and not report["expected_piece_count"]["matched"]
        else:
            good = status == 1 and failed == [sc.expected_failure]
        ok &= good
        outcomes.append(f"{name}->{','.join(failed) or 'count'}")
    assert announce(9, ok, "; ".join(outcomes))


def test_criterion_10_determinism(announce, tmp_path):
    names = shipped_scenarios()
    same = []
    for name in names:
        blobs = []
        for k in range(2):
            d = tmp_path / f"{name}-{k}"
            d.mkdir()
            run_scenario(load_scenario(name), seed=3, samples=1000, report_path=d / "report.json",
                         export_dir=d)
            blobs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
        same.append(blobs[0] == blobs[1])
    parallel = []
    for name in ("klein-quotient", "control-seam", "cat-round-trip"):
        pl, witnesses = build_planner(load_scenario(name))
        reports = {verify_planner(pl, VerificationConfig(n_samples=1000, workers=w), witnesses).to_json()
                   for w in (1, 3, 8)}
        parallel.append(len(reports) == 1)
    ok = all(same) and all(parallel)
    assert announce(10, ok, f"{sum(same)}/{len(names)} scenarios byte-identical across reruns; "
                            f"{sum(parallel)}/{len(parallel)} reports invariant under 1/3/8 workers")


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q", "-s"]))
