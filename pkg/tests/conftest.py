"""Shared fixtures and independent oracles.

The oracles here deliberately avoid the library's own algorithms: the
min-cut oracle enumerates edge subsets, and the vertex oracle intersects
hand-written half-planes.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from butterflow.netgraph import Network

UNIT = {str(i): 1 for i in range(1, 8)}


def random_capacities(rng: random.Random, top: int = 5, max_den: int = 8) -> dict[str, Fraction]:
    caps = {}
    for i in range(1, 8):
        den = rng.randint(1, max_den)
        caps[str(i)] = Fraction(rng.randint(0, top * den), den)
    return caps


def brute_force_min_cut(network: Network, sources, sinks) -> Fraction:
    """Minimum capacity over all edge subsets whose removal disconnects."""
    src, dst = set(sources), set(sinks)
    edges = list(network.edges)

    def connected(kept) -> bool:
        seen, stack = set(src), list(src)
        while stack:
            u = stack.pop()
            for e in kept:
                if e.tail == u and e.head not in seen:
                    seen.add(e.head)
                    stack.append(e.head)
        return bool(seen & dst)

    best = None
    for mask in range(1 << len(edges)):
        removed = [e for i, e in enumerate(edges) if mask >> i & 1]
        kept = [e for i, e in enumerate(edges) if not mask >> i & 1]
        if connected(kept):
            continue
        cost = sum((e.capacity for e in removed), Fraction(0))
        if best is None or cost < best:
            best = cost
    return best


def halfplane_vertices(planes):
    """Vertices of {x >= 0, y >= 0, a x + b y <= c for (a, b, c) in planes}."""
    planes = [tuple(map(Fraction, p)) for p in planes] + [
        (Fraction(-1), Fraction(0), Fraction(0)),
        (Fraction(0), Fraction(-1), Fraction(0)),
    ]
    out = set()
    for (a1, b1, c1), (a2, b2, c2) in itertools.combinations(planes, 2):
        det = a1 * b2 - a2 * b1
        if det == 0:
            continue
        x = (c1 * b2 - c2 * b1) / det
        y = (a1 * c2 - a2 * c1) / det
        if all(a * x + b * y <= c for a, b, c in planes):
            out.add((x, y))
    return sorted(out)


def closed_form_planes(variant, c, secure=False):
    """Hand-expanded half-planes (a, b, c) for each capacity region."""
    m = min
    c = {k: Fraction(v) for k, v in c.items()}
    if variant == "colocated_sources":
        c12 = c["1"] + c["2"]
    if variant == "colocated_sinks":
        c67 = c["6"] + c["7"]
    if not secure:
        if variant == "butterfly1":
            return [(1, 0, m(c["1"], c["3"], c["7"])), (0, 1, m(c["2"], c["3"], c["6"])),
                    (1, 1, c["3"] + c["4"]), (1, 1, c["3"] + c["5"])]
        if variant == "colocated_sources":
            return [(1, 0, c["5"] + m(c12, c["3"], c["7"])), (0, 1, c["4"] + m(c12, c["3"], c["6"])),
                    (1, 1, c["4"] + c["5"] + m(c12, c["3"], c["6"] + c["7"]))]
        if variant == "colocated_sinks":
            return [(1, 0, c["4"] + m(c["1"], c["3"], c67)), (0, 1, c["5"] + m(c["2"], c["3"], c67)),
                    (1, 1, c["4"] + c["5"] + m(c["1"] + c["2"], c["3"], c67))]
        return [(1, 0, c["4"] + m(c["1"], c["3"], c["7"])), (0, 1, c["5"] + m(c["2"], c["3"], c["6"])),
                (1, 1, c["3"] + c["4"] + c["5"])]
    if variant == "butterfly1":
        return [(1, 0, 0), (0, 1, 0)]
    if variant == "colocated_sources":
        return [(1, 0, m(c["5"], c12, c["3"], c["7"])), (0, 1, m(c["4"], c12, c["3"], c["6"]))]
    if variant == "colocated_sinks":
        return [(1, 0, m(c["1"], c["4"])), (0, 1, m(c["2"], c["5"])), (1, 1, m(c["3"], c67))]
    return [(1, 0, m(c["4"], c["1"], c["3"], c["7"])), (0, 1, m(c["5"], c["2"], c["3"], c["6"])),
            (1, 1, c["3"])]


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

