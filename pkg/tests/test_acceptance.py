"""Acceptance criteria, each at exact tolerance.

Every test records a one-line PASS/FAIL verdict (printed in the terminal
summary) before asserting, so a failing criterion is still reported.
"""

import os
import random
import time
from fractions import Fraction as F
from pathlib import Path

import numpy as np

from butterflow.netgraph import TEMPLATE_VARIANTS, build_template, gns_sum_bound_butterfly1, min_cut
from butterflow.regions import achievable_region, capacity_region, equivalent, vertices
from butterflow.schemes import execute_arrays, plan, random_message_arrays, simulate, verify_reliability
from butterflow.secaudit import N_FAMILIES, XOR_FAMILY, audit, evaluate_families, impossibility_search

from conftest import ACCEPTANCE_LINES, UNIT, closed_form_planes, random_capacities

GOLDEN = Path(__file__).parent / "golden"
SECURE_CAPABLE = ("colocated_sources", "colocated_sinks", "butterfly2")


def verdict(number, ok, detail, started, limit=None):
    elapsed = time.perf_counter() - started
    in_time = limit is None or elapsed < limit
    status = "PASS" if ok and in_time else "FAIL"
    bound = f" (limit {limit} s)" if limit else ""
    ACCEPTANCE_LINES.append(f"{status} criterion {number}: {detail} [{elapsed:.1f} s{bound}]")
    print(ACCEPTANCE_LINES[-1])
    assert ok, detail
    assert in_time, f"criterion {number} took {elapsed:.1f} s, limit {limit} s"


def test_criterion_1_region_equivalence():
    t0 = time.perf_counter()
    rng = random.Random(1)
    mismatches, checked = [], 0
    for variant in TEMPLATE_VARIANTS:
        for _ in range(1000):
            caps = random_capacities(rng, top=5, max_den=8)
            if not equivalent(achievable_region(variant, caps), capacity_region(variant, caps)):
                mismatches.append((variant, caps))
            checked += 1
    verdict(1, not mismatches, f"{checked} achievable/capacity region pairs, {len(mismatches)} differ", t0, 30)


def test_criterion_2_vertex_achievability():
    t0 = time.perf_counter()
    rng = random.Random(2)
    npr = np.random.default_rng(2)
    failures, runs = [], 0
    for variant in TEMPLATE_VARIANTS:
        for _ in range(100):
            caps = random_capacities(rng, top=5, max_den=8)
            for v in vertices(capacity_region(variant, caps)):
                for q in (2, 3):
                    tp = plan(variant, caps, v.point, field=q)
                    for _ in range(10):
                        w1, w2 = random_message_arrays(tp, npr)
                        runs += 1
                        if not verify_reliability(execute_arrays(tp, w1, w2, npr)):
                            failures.append((variant, caps, v.point, q))
    verdict(2, not failures, f"{runs} vertex executions, {len(failures)} decoding errors", t0, 60)


def test_criterion_3_outer_bounds():
    t0 = time.perf_counter()
    rng = random.Random(3)
    bad, checked = [], 0
    for _ in range(1000):
        caps = random_capacities(rng, top=5, max_den=8)
        for variant in TEMPLATE_VARIANTS:
            net = build_template(variant, caps)
            planes = closed_form_planes(variant, caps)
            r1_form, r2_form = planes[0][2], planes[1][2]
            got = (min_cut(net, net.sources_for(1), net.sinks_for(1)),
                   min_cut(net, net.sources_for(2), net.sinks_for(2)))
            if got != (r1_form, r2_form):
                bad.append((variant, caps, got))
            checked += 2
        c = {k: F(v) for k, v in caps.items()}
        if gns_sum_bound_butterfly1(caps) != min(c["3"] + c["4"], c["3"] + c["5"]):
            bad.append(("gns", caps))
        checked += 1
    verdict(3, not bad, f"{checked} cut values against closed forms, {len(bad)} differ", t0, 30)


def test_criterion_4_secure_schemes_are_secret():
    t0 = time.perf_counter()
    rng = random.Random(4)
    grid = [F(0), F(1, 2), F(1), F(3, 2)]
    vectors = [dict(UNIT)] + [{str(i): rng.choice(grid) for i in range(1, 8)} for _ in range(20)]
    leaks, audited = [], 0
    for variant in SECURE_CAPABLE:
        for caps in vectors:
            for v in vertices(capacity_region(variant, caps, secure=True)):
                for q in (2, 3):
                    tp = plan(variant, caps, v.point, secure=True, field=q)
                    result = audit(tp)
                    audited += 1
                    if not result.passed:
                        leaks.append((variant, caps, v.point, q, result.first_failure))
    verdict(4, not leaks, f"{audited} secure vertex plans audited on every edge, {len(leaks)} leak", t0, 120)


def test_criterion_5_butterfly1_impossibility_witness():
    t0 = time.perf_counter()
    report = impossibility_search(workers=os.cpu_count() or 1)
    xor = evaluate_families(np.array([XOR_FAMILY]))
    xor_decodes = bool(xor["dec1"][0] and xor["dec2"][0])
    ok = (report.families == N_FAMILIES == 16_777_216 and report.secure_positive_rate == 0
          and report.decodable_both >= 1 and xor_decodes and report.xor_decodable_both)
    detail = (f"{report.families} families, {report.secure_positive_rate} secure at positive rate, "
              f"{report.decodable_both} decode (1,1) including xor={xor_decodes}")
    verdict(5, ok, detail, t0)


def test_criterion_6_leakage_contrast():
    t0 = time.perf_counter()
    silent, audited = [], 0
    for variant in TEMPLATE_VARIANTS:
        region = capacity_region(variant, UNIT)
        points = {v.point for v in vertices(region)} | {(F(1, 2), 0), (0, F(1, 2)), (F(1, 2), F(1, 2))}
        for p in points:
            if not any(p):
                continue
            for q in (2, 3):
                result = audit(plan(variant, UNIT, p, field=q))
                audited += 1
                if result.passed:
                    silent.append((variant, p, q))
    verdict(6, not silent, f"{audited} non-secure positive-rate plans, {len(silent)} pass the audit", t0, 10)


def test_criterion_7_golden_trace():
    t0 = time.perf_counter()
    tp = plan("butterfly1", UNIT, (1, 1), field=2)
    first, second = simulate(tp, 2), simulate(tp, 2)
    w1, w2 = int(first.w1[0].symbols[0]), int(first.w2[0].symbols[0])
    e3_is_xor = first.edges["3"].tolist() == [[w1 ^ w2]]
    same = first.to_csv().encode() == second.to_csv().encode() == (GOLDEN / "butterfly1_unit_seed2.csv").read_bytes()
    ok = e3_is_xor and same and verify_reliability(first)
    verdict(7, ok, f"e3 = W1 xor W2 is {e3_is_xor}, CSV byte-identical to golden is {same}", t0, 1)
