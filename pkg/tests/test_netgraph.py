import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from butterflow.errors import InvalidConfigError, UnsupportedVariantError
from butterflow.netgraph import (
    TEMPLATE_VARIANTS,
    Edge,
    Network,
    Node,
    Relay,
    Sink,
    Source,
    Variant,
    build_template,
    cutset_bounds,
    gns_sum_bound_butterfly1,
    min_cut,
    parse_rational,
    resolve_capacities,
    validate,
)

from conftest import UNIT, brute_force_min_cut, random_capacities


def test_butterfly1_unit_wiring():
    net = build_template(Variant.BUTTERFLY1, UNIT)
    assert net.labels == ("1", "2", "3", "4", "5", "6", "7")
    assert {e.label for e in net.out_edges("S1")} == {"1", "4"}
    assert net.edge("5").tail == "S2" and net.edge("5").head == "D1"
    assert net.edge("4").head == "D2"


def test_colocated_sources_merged_edge():
    caps = {"1+2": 2, "3": 1, "4": 1, "5": 1, "6": 1, "7": 1}
    net = build_template("cs", caps)
    assert len(net.edges) == 6
    assert len(net.out_edges("S")) == 3
    assert net.capacity("1+2") == 2
    assert net.labels[0] == "1+2"


def test_merged_capacity_from_constituents():
    caps = resolve_capacities("cd", {**UNIT, "6": Fraction(1, 2)})
    assert caps["6+7"] == Fraction(3, 2)
    with pytest.raises(InvalidConfigError):
        resolve_capacities("cs", {**UNIT, "1+2": 5})


@pytest.mark.parametrize("bad", [{**UNIT, "3": -1}, {k: v for k, v in UNIT.items() if k != "6"}])
def test_build_template_rejects_bad_capacities(bad):
    with pytest.raises(InvalidConfigError):
        build_template(Variant.BUTTERFLY1, bad)


def test_unknown_variant():
    with pytest.raises(InvalidConfigError):
        build_template("triangle", UNIT)


@pytest.mark.parametrize("text", ["1/0", "1.5", "abc", "", "2/-3"])
def test_parse_rational_rejects(text):
    with pytest.raises(InvalidConfigError):
        parse_rational(text)


def test_parse_rational_rejects_float():
    with pytest.raises(InvalidConfigError):
        parse_rational(0.5)
    assert parse_rational("3/6") == Fraction(1, 2)


@pytest.mark.parametrize("variant", TEMPLATE_VARIANTS)
def test_templates_validate(variant):
    assert validate(build_template(variant, UNIT)) == []


def test_reversed_bottleneck_is_reported():
    net = build_template(Variant.BUTTERFLY1, UNIT)
    edges = tuple(
        Edge("M2", "M1", "3", e.capacity) if e.label == "3" else e for e in net.edges
    )
    problems = validate(Network(Variant.BUTTERFLY1, net.nodes, edges))
    assert any("3 M1->M2 missing" in p for p in problems)
    assert any("M2" in p and "no incoming" in p for p in problems)


def test_cycle_is_reported():
    nodes = (Node("S1", Source(1)), Node("A", Relay("A")), Node("B", Relay("B")), Node("D1", Sink(1)))
    edges = (
        Edge("S1", "A", "1", Fraction(1)),
        Edge("A", "B", "2", Fraction(1)),
        Edge("B", "A", "3", Fraction(1)),
        Edge("B", "D1", "4", Fraction(1)),
    )
    assert any("cycle" in p for p in validate(Network(Variant.CUSTOM, nodes, edges)))


def test_duplicate_source_role_is_reported():
    nodes = (Node("a", Source(1)), Node("b", Source(1)), Node("d", Sink(1)))
    edges = (Edge("a", "d", "1", Fraction(1)), Edge("b", "d", "2", Fraction(1)))
    problems = validate(Network(Variant.CUSTOM, nodes, edges))
    assert any("Source(1)" in p for p in problems)


def test_merged_and_indexed_sources_conflict():
    nodes = (Node("a", Source("merged")), Node("b", Source(2)), Node("d", Sink("merged")))
    edges = (Edge("a", "d", "1", Fraction(1)), Edge("b", "d", "2", Fraction(1)))
    assert any("coexist" in p for p in validate(Network(Variant.CUSTOM, nodes, edges)))


def test_min_cut_unit_butterfly():
    net = build_template(Variant.BUTTERFLY1, UNIT)
    assert brute_force_min_cut(net, {"S1"}, {"D1"}) == 1
    assert brute_force_min_cut(net, {"S1", "S2"}, {"D1", "D2"}) == 3
    assert min_cut(net, {"S1"}, {"D1"}) == 1
    # both sessions jointly are cut at {e3, e4, e5}
    assert min_cut(net, {"S1", "S2"}, {"D1", "D2"}) == 3


def test_min_cut_unreachable_is_zero():
    net = build_template(Variant.BUTTERFLY1, UNIT)
    assert min_cut(net, {"D1"}, {"S1"}) == 0
    assert min_cut(net, {"M2"}, {"M1"}) == 0


def test_min_cut_rejects_overlap():
    net = build_template(Variant.BUTTERFLY1, UNIT)
    with pytest.raises(InvalidConfigError):
        min_cut(net, {"S1"}, {"S1", "D1"})


def test_cutset_bounds_examples():
    net = build_template(Variant.BUTTERFLY1, dict(zip("1234567", (2, 1, 3, 1, 1, 2, 2))))
    bounds = dict(cutset_bounds(net))
    assert bounds["R1"] == 2
    cs = dict(cutset_bounds(build_template("cs", UNIT)))
    assert cs["R1"] == 2  # C5 + min{C1+C2, C3, C7}
    zero = dict(cutset_bounds(build_template("bf2", {k: 0 for k in UNIT})))
    assert set(zero.values()) == {0}


def test_gns_examples():
    assert gns_sum_bound_butterfly1({"3": 1, "4": 1, "5": 1}) == 2
    assert gns_sum_bound_butterfly1({"3": 1, "4": 0, "5": 5}) == 1
    assert gns_sum_bound_butterfly1({"3": "3/2", "4": "1/2", "5": 2}) == 2
    assert gns_sum_bound_butterfly1(build_template("bf1", UNIT)) == 2
    with pytest.raises(UnsupportedVariantError):
        gns_sum_bound_butterfly1(build_template("bf2", UNIT))


@pytest.mark.parametrize("variant", TEMPLATE_VARIANTS)
def test_min_cut_matches_brute_force(variant):
    rng = random.Random(11)
    for _ in range(15):
        net = build_template(variant, random_capacities(rng))
        for s in (1, 2):
            src, dst = net.sources_for(s), net.sinks_for(s)
            assert min_cut(net, src, dst) == brute_force_min_cut(net, src, dst)
        everything = set(net.sources_for(1)) | set(net.sources_for(2))
        sinks = set(net.sinks_for(1)) | set(net.sinks_for(2))
        assert min_cut(net, everything, sinks) == brute_force_min_cut(net, everything, sinks)


rationals = st.fractions(min_value=0, max_value=5, max_denominator=8)
positive = st.fractions(min_value=Fraction(1, 8), max_value=5, max_denominator=8)


@settings(max_examples=60, deadline=None)
@given(st.lists(positive, min_size=7, max_size=7), st.fractions(min_value=Fraction(1, 4), max_value=4, max_denominator=4))
def test_min_cut_scales(caps, alpha):
    net = build_template("bf1", dict(zip("1234567", caps)))
    scaled = net.scaled(alpha)
    assert min_cut(scaled, {"S1"}, {"D1"}) == alpha * min_cut(net, {"S1"}, {"D1"})
    assert min_cut(scaled, {"S2"}, {"D2"}) == alpha * min_cut(net, {"S2"}, {"D2"})


@settings(max_examples=80, deadline=None)
@given(st.lists(positive, min_size=7, max_size=7))
def test_butterfly1_single_rate_cuts_are_closed_form(caps):
    c = dict(zip("1234567", caps))
    net = build_template("bf1", c)
    assert min_cut(net, {"S1"}, {"D1"}) == min(c["1"], c["3"], c["7"])
    assert min_cut(net, {"S2"}, {"D2"}) == min(c["2"], c["3"], c["6"])


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(TEMPLATE_VARIANTS), st.lists(rationals, min_size=7, max_size=7))
def test_templates_always_validate(variant, caps):
    assert validate(build_template(variant, dict(zip("1234567", caps)))) == []
