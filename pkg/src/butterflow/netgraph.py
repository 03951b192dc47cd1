"""Two-unicast DAG model, butterfly-family templates and exact cut bounds.

Capacities are :class:`fractions.Fraction` throughout; no floating point
value ever enters a cut computation.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

import networkx as nx

from .errors import InvalidConfigError, UnsupportedVariantError

Capacity = Fraction


class Variant(str, enum.Enum):
    BUTTERFLY1 = "butterfly1"
    CO_LOCATED_SOURCES = "colocated_sources"
    CO_LOCATED_SINKS = "colocated_sinks"
    BUTTERFLY2 = "butterfly2"
    CUSTOM = "custom"

    @classmethod
    def parse(cls, value: "Variant | str") -> "Variant":
        if isinstance(value, Variant):
            return value
        key = re.sub(r"[\s\-]+", "_", str(value).strip().lower())
        try:
            return _VARIANT_ALIASES[key]
        except KeyError:
            raise InvalidConfigError(f"unknown network variant {value!r}") from None


_VARIANT_ALIASES = {
    "butterfly1": Variant.BUTTERFLY1,
    "bf1": Variant.BUTTERFLY1,
    "colocated_sources": Variant.CO_LOCATED_SOURCES,
    "co_located_sources": Variant.CO_LOCATED_SOURCES,
    "cs": Variant.CO_LOCATED_SOURCES,
    "colocated_sinks": Variant.CO_LOCATED_SINKS,
    "co_located_sinks": Variant.CO_LOCATED_SINKS,
    "cd": Variant.CO_LOCATED_SINKS,
    "butterfly2": Variant.BUTTERFLY2,
    "bf2": Variant.BUTTERFLY2,
    "custom": Variant.CUSTOM,
}

TEMPLATE_VARIANTS = (
    Variant.BUTTERFLY1,
    Variant.CO_LOCATED_SOURCES,
    Variant.CO_LOCATED_SINKS,
    Variant.BUTTERFLY2,
)

MERGED = "merged"


@dataclass(frozen=True)
class NodeRole:
    kind: str  # "source" | "sink" | "relay"
    tag: str  # "1" | "2" | "merged" for terminals, relay name otherwise

    def __str__(self) -> str:
        return f"{self.kind.capitalize()}({self.tag})"

    def serves(self, session: int) -> bool:
        return self.tag == MERGED or self.tag == str(session)


def Source(tag: int | str) -> NodeRole:
    return NodeRole("source", str(tag))


def Sink(tag: int | str) -> NodeRole:
    return NodeRole("sink", str(tag))


def Relay(tag: str) -> NodeRole:
    return NodeRole("relay", tag)


@dataclass(frozen=True)
class Node:
    id: str
    role: NodeRole


@dataclass(frozen=True)
class Edge:
    tail: str
    head: str
    label: str
    capacity: Capacity


# (label, tail, head) per template, in ascending label order.
_WIRING: dict[Variant, tuple[tuple[str, str, str], ...]] = {
    Variant.BUTTERFLY1: (
        ("1", "S1", "M1"),
        ("2", "S2", "M1"),
        ("3", "M1", "M2"),
        ("4", "S1", "D2"),
        ("5", "S2", "D1"),
        ("6", "M2", "D2"),
        ("7", "M2", "D1"),
    ),
    Variant.CO_LOCATED_SOURCES: (
        ("1+2", "S", "M1"),
        ("3", "M1", "M2"),
        ("4", "S", "D2"),
        ("5", "S", "D1"),
        ("6", "M2", "D2"),
        ("7", "M2", "D1"),
    ),
    Variant.CO_LOCATED_SINKS: (
        ("1", "S1", "M1"),
        ("2", "S2", "M1"),
        ("3", "M1", "M2"),
        ("4", "S1", "D"),
        ("5", "S2", "D"),
        ("6+7", "M2", "D"),
    ),
    Variant.BUTTERFLY2: (
        ("1", "S1", "M1"),
        ("2", "S2", "M1"),
        ("3", "M1", "M2"),
        ("4", "S1", "D1"),
        ("5", "S2", "D2"),
        ("6", "M2", "D2"),
        ("7", "M2", "D1"),
    ),
}

_ROLES = {
    "S1": Source(1),
    "S2": Source(2),
    "S": Source(MERGED),
    "M1": Relay("M1"),
    "M2": Relay("M2"),
    "D1": Sink(1),
    "D2": Sink(2),
    "D": Sink(MERGED),
}

ALL_LABELS = ("1", "2", "3", "4", "5", "6", "7", "1+2", "6+7")


def edge_labels(variant: Variant | str) -> tuple[str, ...]:
    variant = Variant.parse(variant)
    if variant not in _WIRING:
        raise UnsupportedVariantError(f"{variant.value} has no fixed wiring")
    return tuple(label for label, _, _ in _WIRING[variant])


def parse_rational(value: object) -> Fraction:
    """Parse an exact rational from an int, Fraction or ``"p/q"`` string."""
    if isinstance(value, bool) or isinstance(value, float):
        raise InvalidConfigError(f"refusing inexact or boolean value {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not re.fullmatch(r"[+-]?\d+(/\d+)?", text):
            raise InvalidConfigError(f"malformed rational {value!r}")
        try:
            return Fraction(text)
        except ZeroDivisionError:
            raise InvalidConfigError(f"zero denominator in {value!r}") from None
    raise InvalidConfigError(f"cannot interpret {value!r} as a rational")


def normalize_label(key: object) -> str:
    """Map ``C3``, ``e3``, ``3`` or ``C1+C2`` to the canonical edge label."""
    text = str(key).strip().lower().replace(" ", "")
    text = re.sub(r"[ce]", "", text)
    if text not in ALL_LABELS:
        raise InvalidConfigError(f"unknown edge label {key!r}")
    return text


def resolve_capacities(
    variant: Variant | str, capacities: Mapping[object, object]
) -> dict[str, Fraction]:
    """Return one exact capacity per edge label of ``variant``.

    Merged edges accept either the merged label (``"1+2"``) or both
    constituents, which are summed. Giving both forms requires agreement.
    """
    variant = Variant.parse(variant)
    labels = edge_labels(variant)
    given: dict[str, Fraction] = {}
    for key, raw in capacities.items():
        label = normalize_label(key)
        value = parse_rational(raw)
        if value < 0:
            raise InvalidConfigError(f"capacity C{label} = {value} is negative")
        given[label] = value

    resolved: dict[str, Fraction] = {}
    used: set[str] = set()
    for label in labels:
        parts = label.split("+")
        if label in given:
            resolved[label] = given[label]
            used.add(label)
            if len(parts) > 1 and all(p in given for p in parts):
                if sum(given[p] for p in parts) != given[label]:
                    raise InvalidConfigError(
                        f"C{label} = {given[label]} disagrees with its constituents"
                    )
                used.update(parts)
        elif all(p in given for p in parts):
            resolved[label] = sum((given[p] for p in parts), Fraction(0))
            used.update(parts)
        else:
            raise InvalidConfigError(f"missing capacity C{label} for {variant.value}")
    extra = set(given) - used
    if extra:
        raise InvalidConfigError(
            f"labels {sorted(extra)} do not belong to {variant.value}"
        )
    return resolved


def _label_key(label: str) -> tuple[int, str]:
    return (int(label.split("+")[0]), label)


@dataclass(frozen=True)
class Network:
    variant: Variant
    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]
    _by_label: dict[str, Edge] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_by_label", {e.label: e for e in self.edges})

    def edge(self, label: str) -> Edge:
        return self._by_label[label]

    def capacity(self, label: str) -> Fraction:
        return self._by_label[label].capacity

    @property
    def capacities(self) -> dict[str, Fraction]:
        return {e.label: e.capacity for e in self.edges}

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(e.label for e in self.edges)

    def node(self, node_id: str) -> Node:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def in_edges(self, node_id: str) -> list[Edge]:
        return [e for e in self.edges if e.head == node_id]

    def out_edges(self, node_id: str) -> list[Edge]:
        return [e for e in self.edges if e.tail == node_id]

    def sources_for(self, session: int) -> list[str]:
        return [n.id for n in self.nodes if n.role.kind == "source" and n.role.serves(session)]

    def sinks_for(self, session: int) -> list[str]:
        return [n.id for n in self.nodes if n.role.kind == "sink" and n.role.serves(session)]

    def digraph(self) -> nx.MultiDiGraph:
        g = nx.MultiDiGraph()
        g.add_nodes_from(n.id for n in self.nodes)
        for e in self.edges:
            g.add_edge(e.tail, e.head, key=e.label, capacity=e.capacity)
        return g

    def topological_order(self) -> list[str]:
        return list(nx.lexicographical_topological_sort(self.digraph()))

    def scaled(self, factor: Fraction) -> "Network":
        edges = tuple(
            Edge(e.tail, e.head, e.label, e.capacity * factor) for e in self.edges
        )
        return Network(self.variant, self.nodes, edges)


def build_template(
    variant: Variant | str, capacities: Mapping[object, object]
) -> Network:
    variant = Variant.parse(variant)
    if variant is Variant.CUSTOM:
        raise InvalidConfigError("custom networks are built with Network(...) directly")
    caps = resolve_capacities(variant, capacities)
    wiring = sorted(_WIRING[variant], key=lambda w: _label_key(w[0]))
    node_ids: list[str] = []
    for _, tail, head in wiring:
        for nid in (tail, head):
            if nid not in node_ids:
                node_ids.append(nid)
    nodes = tuple(Node(nid, _ROLES[nid]) for nid in node_ids)
    edges = tuple(Edge(tail, head, label, caps[label]) for label, tail, head in wiring)
    return Network(variant, nodes, edges)


def validate(network: Network) -> list[str]:
    """Return a list of violations; an empty list means the network is sound."""
    problems: list[str] = []
    ids = [n.id for n in network.nodes]
    if len(set(ids)) != len(ids):
        problems.append("duplicate node ids")
    known = set(ids)

    labels = [e.label for e in network.edges]
    if len(set(labels)) != len(labels):
        problems.append("duplicate edge labels")
    for e in network.edges:
        if e.capacity < 0:
            problems.append(f"edge {e.label} has negative capacity")
        if e.tail == e.head:
            problems.append(f"edge {e.label} is a self-loop")
        for end in (e.tail, e.head):
            if end not in known:
                problems.append(f"edge {e.label} references unknown node {end}")

    roles = [n.role for n in network.nodes]
    for role in set(roles):
        if roles.count(role) > 1:
            problems.append(f"role {role} assigned to {roles.count(role)} nodes")
    for kind in ("source", "sink"):
        tags = {r.tag for r in roles if r.kind == kind}
        if MERGED in tags and tags & {"1", "2"}:
            problems.append(f"merged and per-session {kind} roles coexist")
        bad = tags - {"1", "2", MERGED}
        if bad:
            problems.append(f"unknown {kind} tags {sorted(bad)}")

    g = nx.MultiDiGraph()
    g.add_nodes_from(known)
    g.add_edges_from((e.tail, e.head) for e in network.edges if {e.tail, e.head} <= known)
    if not nx.is_directed_acyclic_graph(g):
        problems.append("edge set contains a directed cycle")

    role_of = {n.id: n.role for n in network.nodes}
    sources = [n.id for n in network.nodes if n.role.kind == "source"]
    reachable: set[str] = set(sources)
    for s in sources:
        reachable |= nx.descendants(g, s)
    for n in network.nodes:
        if n.role.kind == "source":
            continue
        if g.in_degree(n.id) == 0:
            problems.append(f"node {n.id} ({role_of[n.id]}) has no incoming edge")
        elif g.out_degree(n.id) > 0 and n.id not in reachable:
            problems.append(f"node {n.id} forwards traffic but is unreachable from a source")

    if network.variant in _WIRING:
        expected = {(label, t, h) for label, t, h in _WIRING[network.variant]}
        actual = {(e.label, e.tail, e.head) for e in network.edges}
        for label, t, h in sorted(expected - actual):
            problems.append(f"template edge {label} {t}->{h} missing")
        for label, t, h in sorted(actual - expected):
            problems.append(f"unexpected edge {label} {t}->{h} for {network.variant.value}")
        for n in network.nodes:
            if n.id in _ROLES and _ROLES[n.id] != n.role:
                problems.append(f"node {n.id} should have role {_ROLES[n.id]}")
    return problems


def min_cut(network: Network, sources: Iterable[str], sinks: Iterable[str]) -> Fraction:
    """Exact minimum edge cut separating ``sources`` from ``sinks``."""
    src, dst = set(sources), set(sinks)
    if not src or not dst:
        raise InvalidConfigError("min_cut needs nonempty node sets")
    if src & dst:
        raise InvalidConfigError(f"node sets overlap on {sorted(src & dst)}")
    known = {n.id for n in network.nodes}
    if not (src | dst) <= known:
        raise InvalidConfigError(f"unknown nodes {sorted((src | dst) - known)}")

    g = nx.DiGraph()
    g.add_nodes_from(known)
    for e in network.edges:
        if g.has_edge(e.tail, e.head):
            g[e.tail][e.head]["capacity"] += e.capacity
        else:
            g.add_edge(e.tail, e.head, capacity=Fraction(e.capacity))
    # Finite stand-in for infinity keeps networkx on the Fraction path.
    big = sum((e.capacity for e in network.edges), Fraction(0)) + 1
    s_star, t_star = ("__super_source__",), ("__super_sink__",)
    for s in src:
        g.add_edge(s_star, s, capacity=big)
    for t in dst:
        g.add_edge(t, t_star, capacity=big)
    value = nx.maximum_flow_value(
        g, s_star, t_star, flow_func=nx.algorithms.flow.edmonds_karp
    )
    return Fraction(value)


def cutset_bounds(network: Network) -> list[tuple[str, Fraction]]:
    s1, s2 = network.sources_for(1), network.sources_for(2)
    d1, d2 = network.sinks_for(1), network.sinks_for(2)
    if not (s1 and s2 and d1 and d2):
        raise InvalidConfigError("network lacks a source or sink for some session")
    return [
        ("R1", min_cut(network, s1, d1)),
        ("R2", min_cut(network, s2, d2)),
        ("R1 + R2", min_cut(network, set(s1) | set(s2), set(d1) | set(d2))),
    ]


def gns_sum_bound_butterfly1(capacities: Network | Mapping[object, object]) -> Fraction:
    """Sum-rate bound ``min(C3 + C4, C3 + C5)`` of butterfly network 1.

    Accepts a :class:`Network` (must be butterfly 1) or a capacity mapping
    containing at least C3, C4 and C5.
    """
    if isinstance(capacities, Network):
        if capacities.variant is not Variant.BUTTERFLY1:
            raise UnsupportedVariantError(
                f"sum-rate cut formula only covers butterfly1, not {capacities.variant.value}"
            )
        caps = capacities.capacities
    else:
        caps = {normalize_label(k): parse_rational(v) for k, v in capacities.items()}
    try:
        c3, c4, c5 = caps["3"], caps["4"], caps["5"]
    except KeyError as exc:
        raise InvalidConfigError(f"missing capacity C{exc.args[0]}") from None
    return min(c3 + c4, c3 + c5)
