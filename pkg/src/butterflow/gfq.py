"""Prime-field symbols and packets.

``FieldSpec`` does the arithmetic on plain integer arrays so the scheme
executor and the secrecy auditor can broadcast over a batch axis;
``Packet`` is the immutable user-facing wrapper.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import FieldMismatchError, InvalidConfigError

SYMBOL_DTYPE = np.int64


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    if q % 2 == 0:
        return q == 2
    f = 3
    while f * f <= q:
        if q % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class FieldSpec:
    q: int = 2

    def __post_init__(self) -> None:
        if isinstance(self.q, bool) or not isinstance(self.q, (int, np.integer)):
            raise InvalidConfigError(f"field size must be an integer, got {self.q!r}")
        if not is_prime(int(self.q)):
            raise InvalidConfigError(f"field size {self.q} is not prime")
        object.__setattr__(self, "q", int(self.q))

    def add(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return (np.asarray(a) + np.asarray(b)) % self.q

    def sub(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return (np.asarray(a) - np.asarray(b)) % self.q

    def neg(self, a: np.ndarray) -> np.ndarray:
        return (-np.asarray(a)) % self.q

    def uniform(self, shape: int | tuple[int, ...], rng: np.random.Generator) -> np.ndarray:
        return rng.integers(0, self.q, size=shape, dtype=SYMBOL_DTYPE)


class Packet:
    """Fixed-length vector of GF(q) symbols."""

    __slots__ = ("field", "_symbols")

    def __init__(self, field: FieldSpec, symbols: Sequence[int] | np.ndarray):
        arr = np.array(symbols, dtype=SYMBOL_DTYPE).reshape(-1)
        if arr.size and (arr.min() < 0 or arr.max() >= field.q):
            raise InvalidConfigError(f"symbols out of range for GF({field.q})")
        arr.setflags(write=False)
        self.field = field
        self._symbols = arr

    @classmethod
    def _wrap(cls, field: FieldSpec, arr: np.ndarray) -> "Packet":
        # caller guarantees a read-only, in-range, 1-D int64 array
        p = cls.__new__(cls)
        p.field = field
        p._symbols = arr
        return p

    @property
    def symbols(self) -> np.ndarray:
        return self._symbols

    def __len__(self) -> int:
        return int(self._symbols.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Packet):
            return NotImplemented
        return self.field == other.field and np.array_equal(self._symbols, other._symbols)

    def __hash__(self) -> int:
        return hash((self.field.q, self._symbols.tobytes()))

    def __repr__(self) -> str:
        body = "".join(map(str, self._symbols)) if self.field.q <= 10 else list(self._symbols)
        return f"Packet(q={self.field.q}, {body})"

    def __add__(self, other: "Packet") -> "Packet":
        return add(self, other)

    def __sub__(self, other: "Packet") -> "Packet":
        return sub(self, other)


def _check(a: Packet, b: Packet) -> None:
    if a.field != b.field:
        raise FieldMismatchError(f"GF({a.field.q}) vs GF({b.field.q})")
    if len(a) != len(b):
        raise FieldMismatchError(f"packet lengths {len(a)} and {len(b)} differ")


def add(a: Packet, b: Packet) -> Packet:
    _check(a, b)
    return Packet(a.field, a.field.add(a.symbols, b.symbols))


def sub(a: Packet, b: Packet) -> Packet:
    _check(a, b)
    return Packet(a.field, a.field.sub(a.symbols, b.symbols))


def zero_packet(field: FieldSpec, length: int) -> Packet:
    return Packet(field, np.zeros(length, dtype=SYMBOL_DTYPE))


def uniform_packet(field: FieldSpec, length: int, rng: np.random.Generator) -> Packet:
    if length < 0:
        raise InvalidConfigError("packet length must be non-negative")
    return Packet(field, field.uniform(length, rng))


def packets_to_array(packets: Sequence[Packet], field: FieldSpec, length: int) -> np.ndarray:
    """Stack packets into a ``(count, length)`` array after checking them."""
    out = np.zeros((len(packets), length), dtype=SYMBOL_DTYPE)
    for i, p in enumerate(packets):
        if p.field != field:
            raise FieldMismatchError(f"packet {i} is over GF({p.field.q}), expected GF({field.q})")
        if len(p) != length:
            raise FieldMismatchError(f"packet {i} has length {len(p)}, expected {length}")
        out[i] = p.symbols
    return out


def array_to_packets(arr: np.ndarray, field: FieldSpec) -> list[Packet]:
    """Split a ``(count, length)`` array into packets, validating it once."""
    rows = np.array(arr, dtype=SYMBOL_DTYPE, ndmin=2)
    if rows.size and (rows.min() < 0 or rows.max() >= field.q):
        raise InvalidConfigError(f"symbols out of range for GF({field.q})")
    rows.setflags(write=False)
    return [Packet._wrap(field, row) for row in rows]
