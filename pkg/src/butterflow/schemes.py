"""Packet-level planning and execution of the constructive schemes.

A plan assigns each edge an ordered list of *segments*, contiguous runs of
slots of one kind (plain message, mixed, key, ciphertext).  Execution is
node-local: every node starts with what it owns (its messages and its
randomness) plus whatever arrived on its incoming edges, and must be able
to produce each outgoing segment from that alone.  Sinks decode from their
incoming edges only.

All arrays carry a leading batch axis so the secrecy auditor can push an
entire enumeration through the same code path as a single execution.
"""

from __future__ import annotations

import enum
import io
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

import numpy as np

from .errors import InfeasibleRateError, InvalidConfigError, PlanError, SecureImpossibleError
from .gfq import SYMBOL_DTYPE, FieldSpec, Packet, array_to_packets, packets_to_array
from .netgraph import MERGED, Network, Variant, build_template
from .regions import RatePair, achievable_region


class SlotKind(str, enum.Enum):
    PLAIN = "plain"
    MIXED = "mixed"
    KEY = "key"
    CIPHER = "cipher"


@dataclass(frozen=True)
class Segment:
    """``count`` consecutive slots of one kind.

    ``session`` is the message session for PLAIN/CIPHER and the owning
    source for KEY (0 = merged source); MIXED uses 0.  A CIPHER slot for
    message ``start + i`` is padded with key ``key_start + i``.
    """

    kind: SlotKind
    session: int
    start: int
    count: int
    key_start: int = 0

    @property
    def stop(self) -> int:
        return self.start + self.count

    def slots(self) -> Iterator[tuple[SlotKind, int, int]]:
        for i in range(self.start, self.stop):
            yield (self.kind, self.session, i)


@dataclass(frozen=True)
class TransmissionPlan:
    variant: Variant
    secure: bool
    field: FieldSpec
    block_n: int
    rate_pair: RatePair
    network: Network
    k1: int
    k2: int
    m: int | None
    key_owners: tuple[int, ...]
    edges: Mapping[str, tuple[Segment, ...]]
    packet_length: int = 1

    @property
    def n_keys(self) -> int:
        return len(self.key_owners)

    def slot_count(self, label: str) -> int:
        return sum(s.count for s in self.edges[label])

    def slots(self, label: str) -> list[tuple[SlotKind, int, int]]:
        return [slot for seg in self.edges[label] for slot in seg.slots()]

    def messages(self, session: int) -> int:
        return self.k1 if session == 1 else self.k2


def _lcm_of_denominators(values: Sequence[Fraction]) -> int:
    n = 1
    for v in values:
        n = math.lcm(n, Fraction(v).denominator)
    return n


def _seg(kind: SlotKind, session: int, start: int, stop: int, key_start: int = 0) -> list[Segment]:
    # empty runs are dropped so slot lists stay canonical
    if stop <= start:
        return []
    return [Segment(kind, session, start, stop - start, key_start)]


P, X, K, E = SlotKind.PLAIN, SlotKind.MIXED, SlotKind.KEY, SlotKind.CIPHER


def plan(
    variant: Variant | str,
    capacities: Mapping[object, object],
    rate_pair: RatePair | Sequence[object],
    secure: bool = False,
    field: FieldSpec | int = 2,
    packet_length: int = 1,
) -> TransmissionPlan:
    variant = Variant.parse(variant)
    field = field if isinstance(field, FieldSpec) else FieldSpec(field)
    if packet_length < 1:
        raise InvalidConfigError("packet length must be positive")
    if secure and variant is Variant.BUTTERFLY1:
        raise SecureImpossibleError(
            "secure communication is impossible on butterfly1: "
            "no positive rate survives a single wiretapped edge"
        )
    network = build_template(variant, capacities)
    caps = network.capacities
    rp = RatePair.of(rate_pair)

    region = achievable_region(variant, caps, secure)
    bad = region.first_violation(rp)
    if bad is not None:
        text = f"{bad.lhs_text} <= {bad.formula}"
        raise InfeasibleRateError(f"rate pair {rp} violates {text}", constraint=text)

    C = caps
    m_rate = None
    if variant is Variant.BUTTERFLY1 and not secure:
        m_rate = min(rp.r1, rp.r2, C["4"], C["5"])
    n = _lcm_of_denominators(
        [rp.r1, rp.r2, *C.values(), *([m_rate] if m_rate is not None else [])]
    )
    k1, k2 = int(n * rp.r1), int(n * rp.r2)
    m = int(n * m_rate) if m_rate is not None else None

    def cnt(x: Fraction) -> int:
        return int(n * x)

    edges: dict[str, list[Segment]] = {label: [] for label in network.labels}
    owners: list[int] = []

    if not secure:
        if variant is Variant.BUTTERFLY1:
            assert m is not None
            edges["1"] = _seg(P, 1, 0, k1)
            edges["2"] = _seg(P, 2, 0, k2)
            edges["3"] = _seg(P, 1, m, k1) + _seg(P, 2, m, k2) + _seg(X, 0, 0, m)
            edges["4"] = _seg(P, 1, 0, m)
            edges["5"] = _seg(P, 2, 0, m)
            edges["6"] = _seg(P, 2, m, k2) + _seg(X, 0, 0, m)
            edges["7"] = _seg(P, 1, m, k1) + _seg(X, 0, 0, m)
        elif variant is Variant.CO_LOCATED_SOURCES:
            a1, a2 = cnt(min(rp.r1, C["5"])), cnt(min(rp.r2, C["4"]))
            routed = _seg(P, 1, a1, k1) + _seg(P, 2, a2, k2)
            edges["1+2"] = routed
            edges["3"] = list(routed)
            edges["4"] = _seg(P, 2, 0, a2)
            edges["5"] = _seg(P, 1, 0, a1)
            edges["6"] = _seg(P, 2, a2, k2)
            edges["7"] = _seg(P, 1, a1, k1)
        elif variant is Variant.CO_LOCATED_SINKS:
            a1, a2 = cnt(min(rp.r1, C["4"])), cnt(min(rp.r2, C["5"]))
            routed = _seg(P, 1, a1, k1) + _seg(P, 2, a2, k2)
            edges["1"] = _seg(P, 1, a1, k1)
            edges["2"] = _seg(P, 2, a2, k2)
            edges["3"] = routed
            edges["4"] = _seg(P, 1, 0, a1)
            edges["5"] = _seg(P, 2, 0, a2)
            edges["6+7"] = list(routed)
        else:
            a1, a2 = cnt(min(rp.r1, C["4"])), cnt(min(rp.r2, C["5"]))
            edges["1"] = _seg(P, 1, a1, k1)
            edges["2"] = _seg(P, 2, a2, k2)
            edges["3"] = _seg(P, 1, a1, k1) + _seg(P, 2, a2, k2)
            edges["4"] = _seg(P, 1, 0, a1)
            edges["5"] = _seg(P, 2, 0, a2)
            edges["6"] = _seg(P, 2, a2, k2)
            edges["7"] = _seg(P, 1, a1, k1)
    elif variant is Variant.CO_LOCATED_SOURCES:
        # one shared key pool; K1 and K2 are overlapping prefixes of it
        pool = max(k1, k2)
        owners = [0] * pool
        edges["1+2"] = _seg(K, 0, 0, pool)
        edges["3"] = _seg(K, 0, 0, pool)
        edges["4"] = _seg(E, 2, 0, k2, key_start=0)
        edges["5"] = _seg(E, 1, 0, k1, key_start=0)
        edges["6"] = _seg(K, 0, 0, k2)
        edges["7"] = _seg(K, 0, 0, k1)
    else:
        # K1 = keys[0:k1] drawn at S1, K2 = keys[k1:k1+k2] drawn at S2
        owners = [1] * k1 + [2] * k2
        k_1 = _seg(K, 1, 0, k1)
        k_2 = _seg(K, 2, k1, k1 + k2)
        edges["1"] = k_1
        edges["2"] = k_2
        edges["3"] = k_1 + k_2
        edges["4"] = _seg(E, 1, 0, k1, key_start=0)
        edges["5"] = _seg(E, 2, 0, k2, key_start=k1)
        if variant is Variant.CO_LOCATED_SINKS:
            edges["6+7"] = k_1 + k_2
        else:
            edges["6"] = list(k_2)
            edges["7"] = list(k_1)

    result = TransmissionPlan(
        variant=variant,
        secure=secure,
        field=field,
        block_n=n,
        rate_pair=rp,
        network=network,
        k1=k1,
        k2=k2,
        m=m,
        key_owners=tuple(owners),
        edges={label: tuple(segs) for label, segs in edges.items()},
        packet_length=packet_length,
    )
    for label in network.labels:
        budget = n * C[label]
        if result.slot_count(label) > budget:
            raise PlanError(f"edge {label} needs {result.slot_count(label)} slots, has {budget}")
    return result


# --------------------------------------------------------------------------
# node-local propagation


class _Store:
    """What one node knows, per slot kind, across a batch of executions."""

    def __init__(self, tp: TransmissionPlan, batch: int):
        L = tp.packet_length
        self.tp = tp
        self.msg = {s: np.zeros((batch, tp.messages(s), L), SYMBOL_DTYPE) for s in (1, 2)}
        self.msg_ok = {s: np.zeros(tp.messages(s), bool) for s in (1, 2)}
        m = tp.m or 0
        self.mix = np.zeros((batch, m, L), SYMBOL_DTYPE)
        self.mix_ok = np.zeros(m, bool)
        self.key = np.zeros((batch, tp.n_keys, L), SYMBOL_DTYPE)
        self.key_ok = np.zeros(tp.n_keys, bool)
        self.ct = {s: np.zeros((batch, tp.messages(s), L), SYMBOL_DTYPE) for s in (1, 2)}
        self.ct_ok = {s: np.zeros(tp.messages(s), bool) for s in (1, 2)}
        self.ct_key = {s: np.full(tp.messages(s), -1) for s in (1, 2)}

    def emit(self, seg: Segment, node: str) -> np.ndarray:
        f = self.tp.field
        sl = slice(seg.start, seg.stop)
        if seg.kind is SlotKind.PLAIN:
            if self.msg_ok[seg.session][sl].all():
                return self.msg[seg.session][:, sl]
        elif seg.kind is SlotKind.MIXED:
            if self.mix_ok[sl].all():
                return self.mix[:, sl]
            if self.msg_ok[1][sl].all() and self.msg_ok[2][sl].all():
                return f.add(self.msg[1][:, sl], self.msg[2][:, sl])
        elif seg.kind is SlotKind.KEY:
            if self.key_ok[sl].all():
                return self.key[:, sl]
        else:
            s = seg.session
            ks = slice(seg.key_start, seg.key_start + seg.count)
            if self.ct_ok[s][sl].all() and (self.ct_key[s][sl] == np.arange(ks.start, ks.stop)).all():
                return self.ct[s][:, sl]
            if self.msg_ok[s][sl].all() and self.key_ok[ks].all():
                return f.add(self.msg[s][:, sl], self.key[:, ks])
        raise PlanError(f"node {node} cannot produce {seg}")

    def absorb(self, seg: Segment, values: np.ndarray) -> None:
        sl = slice(seg.start, seg.stop)
        if seg.kind is SlotKind.PLAIN:
            self.msg[seg.session][:, sl] = values
            self.msg_ok[seg.session][sl] = True
        elif seg.kind is SlotKind.MIXED:
            self.mix[:, sl] = values
            self.mix_ok[sl] = True
        elif seg.kind is SlotKind.KEY:
            self.key[:, sl] = values
            self.key_ok[sl] = True
        else:
            s = seg.session
            self.ct[s][:, sl] = values
            self.ct_ok[s][sl] = True
            self.ct_key[s][sl] = np.arange(seg.key_start, seg.key_start + seg.count)

    def recover(self, session: int) -> tuple[np.ndarray, np.ndarray]:
        """Best-effort decode of one session from this node's knowledge."""
        f = self.tp.field
        out = np.where(self.msg_ok[session][None, :, None], self.msg[session], 0)
        ok = self.msg_ok[session].copy()
        other = 2 if session == 1 else 1
        m = len(self.mix_ok)
        if m:
            idx = np.flatnonzero(~ok[:m] & self.mix_ok & self.msg_ok[other][:m])
            out[:, idx] = f.sub(self.mix[:, idx], self.msg[other][:, idx])
            ok[idx] = True
        keys = self.ct_key[session]
        have = ~ok & self.ct_ok[session]
        if self.tp.n_keys:
            have &= self.key_ok[np.clip(keys, 0, self.tp.n_keys - 1)]
        idx = np.flatnonzero(have)
        if idx.size:
            out[:, idx] = f.sub(self.ct[session][:, idx], self.key[:, keys[idx]])
            ok[idx] = True
        return out, ok


def _source_store(tp: TransmissionPlan, node_id: str, w: dict[int, np.ndarray], keys: np.ndarray) -> _Store:
    store = _Store(tp, keys.shape[0])
    role = tp.network.node(node_id).role
    for s in (1, 2):
        if role.serves(s):
            store.msg[s][...] = w[s]
            store.msg_ok[s][:] = True
    owner = 0 if role.tag == MERGED else int(role.tag)
    mask = np.array(tp.key_owners, dtype=int) == owner if tp.n_keys else np.zeros(0, bool)
    store.key[:, mask] = keys[:, mask]
    store.key_ok[mask] = True
    return store


def propagate(
    tp: TransmissionPlan, w1: np.ndarray, w2: np.ndarray, keys: np.ndarray
) -> dict[str, np.ndarray]:
    """Edge contents for a batch: arrays of shape ``(batch, slots, packet_length)``.

    ``w1``, ``w2`` and ``keys`` have shapes ``(batch, k1, L)``, ``(batch, k2, L)``
    and ``(batch, n_keys, L)``.
    """
    net = tp.network
    batch = keys.shape[0]
    L = tp.packet_length
    stores: dict[str, _Store] = {}
    for n in net.nodes:
        if n.role.kind == "source":
            stores[n.id] = _source_store(tp, n.id, {1: w1, 2: w2}, keys)
        else:
            stores[n.id] = _Store(tp, batch)

    contents: dict[str, np.ndarray] = {}
    for node_id in net.topological_order():
        for e in net.out_edges(node_id):
            parts = [stores[node_id].emit(seg, node_id) for seg in tp.edges[e.label]]
            data = np.concatenate(parts, axis=1) if parts else np.zeros((batch, 0, L), SYMBOL_DTYPE)
            contents[e.label] = data % tp.field.q
            offset = 0
            for seg in tp.edges[e.label]:
                stores[e.head].absorb(seg, data[:, offset:offset + seg.count])
                offset += seg.count
    return {label: contents[label] for label in net.labels}


def decode(
    tp: TransmissionPlan, edges: Mapping[str, np.ndarray]
) -> dict[int, tuple[np.ndarray, np.ndarray]]:
    """Decode both sessions at their sinks from incoming edge contents only.

    Returns ``{session: (values, recovered_mask)}`` with values shaped
    ``(batch, k_s, L)``.
    """
    net = tp.network
    batch = next(iter(edges.values())).shape[0] if edges else 1
    out: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    for s in (1, 2):
        sinks = net.sinks_for(s)
        if len(sinks) != 1:
            raise PlanError(f"session {s} needs exactly one sink")
        store = _Store(tp, batch)
        for e in net.in_edges(sinks[0]):
            data = edges[e.label]
            offset = 0
            for seg in tp.edges[e.label]:
                store.absorb(seg, data[:, offset:offset + seg.count])
                offset += seg.count
        out[s] = store.recover(s)
    return out


# --------------------------------------------------------------------------
# single executions


@dataclass(frozen=True)
class Trace:
    """One execution: inputs, every edge's content and the sinks' decodes.

    Symbols are kept as read-only arrays; the packet views are built on
    demand.
    """

    plan: TransmissionPlan
    messages: tuple[np.ndarray, np.ndarray]  # (k_s, packet_length) each
    key_symbols: np.ndarray  # (n_keys, packet_length)
    edges: Mapping[str, np.ndarray]  # label -> (slots, packet_length)

    @property
    def w1(self) -> tuple[Packet, ...]:
        return tuple(array_to_packets(self.messages[0], self.plan.field))

    @property
    def w2(self) -> tuple[Packet, ...]:
        return tuple(array_to_packets(self.messages[1], self.plan.field))

    @property
    def keys(self) -> tuple[Packet, ...]:
        return tuple(array_to_packets(self.key_symbols, self.plan.field))

    @property
    def decoded(self) -> tuple[tuple[Packet | None, ...], tuple[Packet | None, ...]]:
        """Per session, the packet each sink recovered (``None`` if not)."""
        res = _decode_trace(self)
        out = []
        for s in (1, 2):
            values, ok = res[s]
            pkts = array_to_packets(values, self.plan.field)
            out.append(tuple(p if good else None for p, good in zip(pkts, ok)))
        return out[0], out[1]

    def with_symbol(self, label: str, slot: int, value: int, position: int = 0) -> "Trace":
        """Copy of the trace with one edge symbol overwritten."""
        edges = {k: v.copy() for k, v in self.edges.items()}
        edges[label][slot, position] = value % self.plan.field.q
        for arr in edges.values():
            arr.setflags(write=False)
        return replace(self, edges=edges)

    def rows(self) -> Iterator[tuple[str, int, int]]:
        for label in self.plan.network.labels:
            for slot, packet in enumerate(self.edges[label]):
                for symbol in packet:
                    yield (label, slot, int(symbol))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("edge,slot,symbol\n")
        for label, slot, symbol in self.rows():
            buf.write(f"{label},{slot},{symbol}\n")
        return buf.getvalue()


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


def _decode_trace(trace: Trace) -> dict[int, tuple[np.ndarray, np.ndarray]]:
    res = decode(trace.plan, {label: arr[None] for label, arr in trace.edges.items()})
    return {s: (values[0], ok) for s, (values, ok) in res.items()}


def execute_arrays(
    tp: TransmissionPlan, w1: np.ndarray, w2: np.ndarray, rng: np.random.Generator
) -> Trace:
    """Execute with messages given as ``(k_s, packet_length)`` symbol arrays."""
    f, L = tp.field, tp.packet_length
    arrays = []
    for s, w in ((1, w1), (2, w2)):
        w = np.asarray(w, dtype=SYMBOL_DTYPE)
        if w.shape != (tp.messages(s), L):
            raise InvalidConfigError(
                f"session {s} expects {tp.messages(s)} packets of length {L}, got shape {w.shape}"
            )
        if w.size and (w.min() < 0 or w.max() >= f.q):
            raise InvalidConfigError(f"message symbols out of range for GF({f.q})")
        arrays.append(_frozen(w))
    keys = f.uniform((1, tp.n_keys, L), rng)
    edges = propagate(tp, arrays[0][None], arrays[1][None], keys)
    return Trace(
        plan=tp,
        messages=(arrays[0], arrays[1]),
        key_symbols=_frozen(keys[0]),
        edges={label: _frozen(arr[0]) for label, arr in edges.items()},
    )


def execute(
    tp: TransmissionPlan,
    w1: Sequence[Packet],
    w2: Sequence[Packet],
    rng: np.random.Generator,
) -> Trace:
    if len(w1) != tp.k1 or len(w2) != tp.k2:
        raise InvalidConfigError(
            f"plan expects {tp.k1} and {tp.k2} message packets, got {len(w1)} and {len(w2)}"
        )
    f, L = tp.field, tp.packet_length
    return execute_arrays(tp, packets_to_array(w1, f, L), packets_to_array(w2, f, L), rng)


def verify_reliability(trace: Trace) -> bool:
    """Zero-error check: re-decode from the trace's edges and compare to inputs."""
    res = _decode_trace(trace)
    return all(
        bool(res[s][1].all()) and np.array_equal(res[s][0], trace.messages[s - 1]) for s in (1, 2)
    )


def random_message_arrays(tp: TransmissionPlan, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    f, L = tp.field, tp.packet_length
    return f.uniform((tp.k1, L), rng), f.uniform((tp.k2, L), rng)


def random_messages(tp: TransmissionPlan, rng: np.random.Generator) -> tuple[list[Packet], list[Packet]]:
    w1, w2 = random_message_arrays(tp, rng)
    return array_to_packets(w1, tp.field), array_to_packets(w2, tp.field)


def simulate(tp: TransmissionPlan, seed: int) -> Trace:
    """Draw messages then keys from one seeded generator and execute."""
    rng = np.random.default_rng(seed)
    w1, w2 = random_message_arrays(tp, rng)
    return execute_arrays(tp, w1, w2, rng)
