"""Exact secrecy checks by exhaustive enumeration.

Two tools live here:

* :func:`audit` pushes every (message, key) assignment of a plan through the
  same propagation code as :func:`butterflow.schemes.execute` and tests, edge
  by edge, whether the observation is statistically independent of the
  message pair.  Independence is decided with integer counts, never floats.
* :func:`impossibility_search` enumerates every deterministic encoder family
  of the unit butterfly 1 with one random bit per source and counts how many
  are both decodable and perfectly secret.
"""

from __future__ import annotations

import json
import math
import os
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Hashable, Mapping, Sequence

import numpy as np

from .errors import AuditTooLargeError, InvalidConfigError
from .schemes import TransmissionPlan, propagate

DEFAULT_BUDGET = 2**24
BUDGET_ENV = "BUTTERFLOW_BUDGET"
_CHUNK = 2**16


def default_budget() -> int:
    raw = os.environ.get(BUDGET_ENV)
    if raw is None:
        return DEFAULT_BUDGET
    try:
        value = int(raw)
    except ValueError:
        raise InvalidConfigError(f"{BUDGET_ENV}={raw!r} is not an integer") from None
    if value < 1:
        raise InvalidConfigError(f"{BUDGET_ENV} must be positive")
    return value


# --------------------------------------------------------------------------
# distributions


def entropy_bits(table: Mapping[Hashable, Fraction | int]) -> float:
    """Shannon entropy of an exact (possibly unnormalized) mass table, in bits."""
    total = sum(table.values())
    if total <= 0:
        raise ValueError("empty distribution")
    h = 0.0
    for mass in table.values():
        if mass:
            p = float(Fraction(mass) / total)
            h -= p * math.log2(p)
    return h + 0.0


@dataclass(frozen=True)
class EdgeObservationDistribution:
    edge: str
    joint: Mapping[tuple[tuple[int, ...], tuple[int, ...]], Fraction]

    def message_marginal(self) -> dict[tuple[int, ...], Fraction]:
        out: dict[tuple[int, ...], Fraction] = {}
        for (w, _), p in self.joint.items():
            out[w] = out.get(w, Fraction(0)) + p
        return out

    def observation_marginal(self) -> dict[tuple[int, ...], Fraction]:
        out: dict[tuple[int, ...], Fraction] = {}
        for (_, z), p in self.joint.items():
            out[z] = out.get(z, Fraction(0)) + p
        return out

    def factorizes(self) -> bool:
        pw, pz = self.message_marginal(), self.observation_marginal()
        return all(self.joint.get((w, z), Fraction(0)) == pw[w] * pz[z] for w in pw for z in pz)

    def mutual_information_bits(self) -> float:
        return (
            entropy_bits(self.message_marginal())
            + entropy_bits(self.observation_marginal())
            - entropy_bits(self.joint)
        ) + 0.0


def _digits(index: np.ndarray, q: int, width: int) -> np.ndarray:
    """Base-q digits, most significant first, shape ``(len(index), width)``."""
    if width == 0:
        return np.zeros((len(index), 0), dtype=np.int64)
    powers = q ** np.arange(width - 1, -1, -1, dtype=np.int64)
    return (index[:, None] // powers) % q


def _state_space(tp: TransmissionPlan, budget: int) -> tuple[int, int, int]:
    L, q = tp.packet_length, tp.field.q
    msg_sym = (tp.k1 + tp.k2) * L
    key_sym = tp.n_keys * L
    if q ** (msg_sym + key_sym) > budget:
        raise AuditTooLargeError(
            f"audit needs {q}^{msg_sym + key_sym} states, budget is {budget}; "
            "use a smaller field or smaller rates"
        )
    return msg_sym, key_sym, q ** key_sym


def _batch(tp: TransmissionPlan, w_index: np.ndarray, key_sym: int, msg_sym: int,
           key_order: Sequence[int] | None):
    L, q = tp.packet_length, tp.field.q
    n_keys_states = q ** key_sym
    wd = _digits(w_index, q, msg_sym)
    kd = _digits(np.arange(n_keys_states, dtype=np.int64), q, key_sym)
    wd = np.repeat(wd, n_keys_states, axis=0)
    kd = np.tile(kd, (len(w_index), 1))
    B = len(w_index) * n_keys_states
    w1 = wd[:, : tp.k1 * L].reshape(B, tp.k1, L)
    w2 = wd[:, tp.k1 * L:].reshape(B, tp.k2, L)
    keys = kd.reshape(B, tp.n_keys, L)
    if key_order is not None:
        keys = keys[:, list(key_order)]
    return w1, w2, keys


def edge_distribution(tp: TransmissionPlan, label: str, budget: int | None = None) -> EdgeObservationDistribution:
    """Exact joint law of (W1, W2) and one edge's content under uniform inputs."""
    budget = default_budget() if budget is None else budget
    msg_sym, key_sym, _ = _state_space(tp, budget)
    q = tp.field.q
    total = q ** (msg_sym + key_sym)
    w_index = np.arange(q ** msg_sym, dtype=np.int64)
    w1, w2, keys = _batch(tp, w_index, key_sym, msg_sym, None)
    z = propagate(tp, w1, w2, keys)[label].reshape(total, -1)
    w = np.concatenate([w1.reshape(total, -1), w2.reshape(total, -1)], axis=1)
    counts = Counter(zip(map(tuple, w.tolist()), map(tuple, z.tolist())))
    return EdgeObservationDistribution(label, {k: Fraction(c, total) for k, c in counts.items()})


# --------------------------------------------------------------------------
# audit


@dataclass(frozen=True)
class EdgeVerdict:
    edge: str
    factorizes: bool
    mutual_information_bits: float


@dataclass(frozen=True)
class SecrecyVerdict:
    edges: tuple[EdgeVerdict, ...]
    states: int

    @property
    def passed(self) -> bool:
        return all(e.factorizes for e in self.edges)

    @property
    def first_failure(self) -> str | None:
        for e in self.edges:
            if not e.factorizes:
                return e.edge
        return None

    def by_edge(self) -> dict[str, EdgeVerdict]:
        return {e.edge: e for e in self.edges}


class _EdgeAccumulator:
    """Streams per-message observation histograms for one edge."""

    def __init__(self, q: int, width: int):
        self.q = q
        self.width = width
        self.use_int = width * math.log2(q) < 62
        self.powers = q ** np.arange(width, dtype=np.int64) if self.use_int else None
        self.ids: dict[bytes, int] = {}
        self.reference: np.ndarray | None = None
        self.factorizes = True
        self.z_counts: Counter[int] = Counter()
        self.h_cond_sum = 0.0
        self.n_w = 0

    def _codes(self, z: np.ndarray) -> np.ndarray:
        if self.width == 0:
            return np.zeros(z.shape[:2], dtype=np.int64)
        if self.use_int:
            return z @ self.powers
        flat = z.reshape(-1, self.width)
        out = np.empty(len(flat), dtype=np.int64)
        for i, row in enumerate(flat):
            out[i] = self.ids.setdefault(row.tobytes(), len(self.ids))
        return out.reshape(z.shape[:2])

    def add(self, z: np.ndarray) -> None:
        """``z`` has shape ``(n_messages, n_key_states, width)``."""
        codes = np.sort(self._codes(z), axis=1)
        if self.reference is None:
            self.reference = codes[0].copy()
        if self.factorizes and not (codes == self.reference[None, :]).all():
            self.factorizes = False
        nw, k = codes.shape
        flags = np.ones_like(codes, dtype=bool)
        flags[:, 1:] = codes[:, 1:] != codes[:, :-1]
        starts = np.flatnonzero(flags.ravel())
        lengths = np.diff(np.append(starts, nw * k))
        p = lengths / k
        self.h_cond_sum += float(-(p * np.log2(p)).sum())
        self.n_w += nw
        values, counts = np.unique(codes, return_counts=True)
        self.z_counts.update(dict(zip(values.tolist(), counts.tolist())))

    def mutual_information(self) -> float:
        if self.factorizes:
            return 0.0
        return max(entropy_bits(self.z_counts) - self.h_cond_sum / self.n_w, 0.0)


def audit(
    tp: TransmissionPlan,
    budget: int | None = None,
    key_order: Sequence[int] | None = None,
) -> SecrecyVerdict:
    """Check per-edge independence of observation and messages exactly.

    ``key_order`` relabels key packets (a permutation of their indices)
    before propagation.
    """
    budget = default_budget() if budget is None else budget
    msg_sym, key_sym, key_states = _state_space(tp, budget)
    if key_order is not None and sorted(key_order) != list(range(tp.n_keys)):
        raise InvalidConfigError("key_order must be a permutation of key indices")
    q, L = tp.field.q, tp.packet_length
    labels = tp.network.labels
    acc = {label: _EdgeAccumulator(q, tp.slot_count(label) * L) for label in labels}
    n_messages = q ** msg_sym
    per_chunk = max(1, _CHUNK // key_states)
    for start in range(0, n_messages, per_chunk):
        w_index = np.arange(start, min(start + per_chunk, n_messages), dtype=np.int64)
        w1, w2, keys = _batch(tp, w_index, key_sym, msg_sym, key_order)
        contents = propagate(tp, w1, w2, keys)
        for label in labels:
            z = contents[label].reshape(len(w_index), key_states, -1)
            acc[label].add(z)
    edges = tuple(
        EdgeVerdict(label, acc[label].factorizes, acc[label].mutual_information())
        for label in labels
    )
    return SecrecyVerdict(edges, n_messages * key_states)


# --------------------------------------------------------------------------
# exhaustive encoder search on the unit butterfly 1
#
# Family index digits, most significant first: f1 f2 f3 f4 f5 (16-way truth
# tables of two bits) then f6 f7 (4-way tables of one bit).  A two-input
# table t maps (a, b) to bit (t >> (2a + b)) & 1; a one-input table maps x to
# (t >> x) & 1.  f1, f4 read (W1, T1); f2, f5 read (W2, T2); f3 reads (Y1, Y2);
# f6, f7 read Y3.

RADICES = (16, 16, 16, 16, 16, 4, 4)
N_FAMILIES = math.prod(RADICES)
ENCODER_NAMES = ("f1", "f2", "f3", "f4", "f5", "f6", "f7")
IDENTITY_IN_MESSAGE = 0b1100  # f(w, t) = w
XOR = 0b0110
IDENTITY = 0b10

_inputs = np.arange(16, dtype=np.uint8)
_W1 = (_inputs >> 3) & 1
_W2 = (_inputs >> 2) & 1
_T1 = (_inputs >> 1) & 1
_T2 = _inputs & 1


def family_index(f1: int, f2: int, f3: int, f4: int, f5: int, f6: int, f7: int) -> int:
    idx = 0
    for digit, radix in zip((f1, f2, f3, f4, f5, f6, f7), RADICES):
        if not 0 <= digit < radix:
            raise ValueError(f"truth table {digit} out of range for radix {radix}")
        idx = idx * radix + digit
    return idx


def family_tables(index: int) -> dict[str, int]:
    digits = []
    for radix in reversed(RADICES):
        index, d = divmod(index, radix)
        digits.append(d)
    return dict(zip(ENCODER_NAMES, reversed(digits)))


XOR_FAMILY = family_index(
    IDENTITY_IN_MESSAGE, IDENTITY_IN_MESSAGE, XOR, IDENTITY_IN_MESSAGE, IDENTITY_IN_MESSAGE,
    IDENTITY, IDENTITY,
)


def _decodable(y_a: np.ndarray, y_b: np.ndarray, w: np.ndarray) -> np.ndarray:
    # bit 2c+w of the mask marks "observation c seen with message bit w"
    bins = (y_a * 2 + y_b) * 2 + w
    mask = np.bitwise_or.reduce(np.left_shift(np.uint8(1), bins), axis=1)
    return (mask & (mask >> 1) & 0x55) == 0


def _secret(z: np.ndarray) -> np.ndarray:
    ones = z.reshape(-1, 4, 4).sum(axis=2)
    return (ones == ones[:, :1]).all(axis=1)


def _edge_bits(f1, f2, f3, f4, f5, f6, f7) -> tuple[np.ndarray, ...]:
    """Edge symbols Y1..Y7 over the 16 inputs (broadcast over leading axes)."""
    y1 = (f1 >> (2 * _W1 + _T1)) & 1
    y4 = (f4 >> (2 * _W1 + _T1)) & 1
    y2 = (f2 >> (2 * _W2 + _T2)) & 1
    y5 = (f5 >> (2 * _W2 + _T2)) & 1
    y3 = (f3 >> (2 * y1 + y2)) & 1
    y6 = (f6 >> y3) & 1
    y7 = (f7 >> y3) & 1
    return y1, y2, y3, y4, y5, y6, y7


def evaluate_families(index: np.ndarray) -> dict[str, np.ndarray]:
    """Per-family flags for a vector of family indices."""
    index = np.asarray(index, dtype=np.int64)
    digits = []
    rest = index.copy()
    for radix in reversed(RADICES):
        digits.append((rest % radix).astype(np.uint8))
        rest //= radix
    ys = _edge_bits(*(d[:, None] for d in reversed(digits)))
    y1, y2, y3, y4, y5, y6, y7 = ys

    dec1 = _decodable(y5, y7, np.broadcast_to(_W1, y5.shape))
    dec2 = _decodable(y4, y6, np.broadcast_to(_W2, y4.shape))
    secret = np.ones(len(index), dtype=bool)
    for y in ys:
        secret &= _secret(y)
    return {"dec1": dec1, "dec2": dec2, "secret": secret}


_COUNT_KEYS = ("secure_positive_rate", "decodable_both", "decodable_any", "perfectly_secret")


def _search_range(bounds: tuple[int, int]) -> dict[str, int]:
    start, stop = bounds
    counts = {k: 0 for k in _COUNT_KEYS}
    first = {k: -1 for k in _COUNT_KEYS}
    for lo in range(start, stop, _CHUNK):
        idx = np.arange(lo, min(lo + _CHUNK, stop), dtype=np.int64)
        r = evaluate_families(idx)
        any_dec = r["dec1"] | r["dec2"]
        flags = {
            "secure_positive_rate": any_dec & r["secret"],
            "decodable_both": r["dec1"] & r["dec2"],
            "decodable_any": any_dec,
            "perfectly_secret": r["secret"],
        }
        for k, f in flags.items():
            counts[k] += int(f.sum())
            if first[k] < 0 and f.any():
                first[k] = int(idx[np.argmax(f)])
    return {**counts, **{f"first_{k}": v for k, v in first.items()}}


@dataclass
class SearchReport:
    families: int
    secure_positive_rate: int
    decodable_both: int
    decodable_any: int
    perfectly_secret: int
    xor_family: dict[str, int]
    xor_decodable_both: bool
    xor_leaks_on: list[str]
    examples: dict[str, dict[str, int] | None] = field(default_factory=dict)
    elapsed_seconds: float = 0.0
    workers: int = 1

    def to_json(self, include_timing: bool = True) -> str:
        data = asdict(self)
        if not include_timing:
            data.pop("elapsed_seconds")
            data.pop("workers")
        return json.dumps(data, indent=2, sort_keys=True)

    def to_text(self) -> str:
        lines = [
            f"families searched: {self.families}",
            f"secure-positive-rate families: {self.secure_positive_rate}",
            f"decodable (1,1) families: {self.decodable_both}",
            f"families decodable at one sink or more: {self.decodable_any}",
            f"perfectly secret families (any rate): {self.perfectly_secret}",
            f"xor family decodable (1,1): {self.xor_decodable_both}",
            f"xor family leaks on edges: {', '.join(self.xor_leaks_on) or 'none'}",
            f"elapsed seconds: {self.elapsed_seconds:.2f}",
        ]
        return "\n".join(lines)


def _xor_leaks() -> tuple[bool, list[str]]:
    tables = family_tables(XOR_FAMILY)
    r = evaluate_families(np.array([XOR_FAMILY]))
    ys = _edge_bits(*(np.uint8(tables[name]) for name in ENCODER_NAMES))
    leaks = [str(i) for i, y in enumerate(ys, start=1) if not _secret(y[None])[0]]
    return bool(r["dec1"][0] and r["dec2"][0]), leaks


def impossibility_search(
    theta_bits_per_source: int = 1,
    q: int = 2,
    n: int = 1,
    workers: int = 1,
    limit: int | None = None,
) -> SearchReport:
    """Enumerate unit butterfly 1 encoder families (or the first ``limit``)."""
    if (theta_bits_per_source, q, n) != (1, 2, 1):
        raise InvalidConfigError("the search is defined only for one random bit, q=2, n=1")
    total = N_FAMILIES if limit is None else min(int(limit), N_FAMILIES)
    t0 = time.perf_counter()
    workers = max(1, int(workers))
    step = -(-total // workers)
    ranges = [(lo, min(lo + step, total)) for lo in range(0, total, step)] or [(0, 0)]
    if workers == 1:
        parts = [_search_range(r) for r in ranges]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_search_range, ranges))

    counts = {k: sum(p[k] for p in parts) for k in _COUNT_KEYS}
    examples = {}
    for k in ("decodable_both", "perfectly_secret", "secure_positive_rate"):
        hits = [p[f"first_{k}"] for p in parts if p[f"first_{k}"] >= 0]
        examples[k] = family_tables(min(hits)) if hits else None
    xor_ok, leaks = _xor_leaks()
    return SearchReport(
        families=total,
        xor_family=family_tables(XOR_FAMILY),
        xor_decodable_both=xor_ok,
        xor_leaks_on=leaks,
        examples=examples,
        elapsed_seconds=time.perf_counter() - t0,
        workers=workers,
        **counts,
    )
