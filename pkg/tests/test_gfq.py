import itertools
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from butterflow.errors import FieldMismatchError, InvalidConfigError
from butterflow.gfq import (
    FieldSpec,
    Packet,
    add,
    array_to_packets,
    is_prime,
    packets_to_array,
    sub,
    uniform_packet,
    zero_packet,
)

GF2, GF5 = FieldSpec(2), FieldSpec(5)


def test_xor_example():
    assert add(Packet(GF2, [1, 0, 1]), Packet(GF2, [0, 1, 1])) == Packet(GF2, [1, 1, 0])


def test_mod5_example():
    assert add(Packet(GF5, [3]), Packet(GF5, [4])) == Packet(GF5, [2])
    assert Packet(GF5, [3]) - Packet(GF5, [4]) == Packet(GF5, [4])


def test_group_inverse_on_random_pairs():
    rng = np.random.default_rng(1)
    for q in (2, 3, 7):
        f = FieldSpec(q)
        for _ in range(1000 // 3 + 1):
            a, b = uniform_packet(f, 5, rng), uniform_packet(f, 5, rng)
            assert sub(add(a, b), b) == a


def test_mismatch_errors():
    with pytest.raises(FieldMismatchError):
        add(Packet(GF2, [1]), Packet(GF5, [1]))
    with pytest.raises(FieldMismatchError):
        add(Packet(GF2, [1]), Packet(GF2, [1, 0]))
    with pytest.raises(FieldMismatchError):
        packets_to_array([Packet(GF2, [1])], GF5, 1)


def test_field_and_symbol_validation():
    assert [q for q in range(12) if is_prime(q)] == [2, 3, 5, 7, 11]
    with pytest.raises(InvalidConfigError):
        FieldSpec(4)
    with pytest.raises(ValueError):
        Packet(GF2, [2])


def test_uniform_packet_basics():
    assert len(uniform_packet(GF2, 0, np.random.default_rng(0))) == 0
    a = uniform_packet(GF5, 20, np.random.default_rng(42))
    b = uniform_packet(GF5, 20, np.random.default_rng(42))
    assert a == b
    with pytest.raises(InvalidConfigError):
        uniform_packet(GF2, -1, np.random.default_rng(0))


def test_uniform_bit_frequency():
    ones = uniform_packet(GF2, 10**5, np.random.default_rng(2024)).symbols.mean()
    assert 0.49 <= ones <= 0.51


def test_array_round_trip():
    rng = np.random.default_rng(3)
    pkts = [uniform_packet(GF5, 4, rng) for _ in range(3)]
    assert array_to_packets(packets_to_array(pkts, GF5, 4), GF5) == pkts


def test_packets_are_immutable():
    p = Packet(GF2, [1, 0])
    with pytest.raises(ValueError):
        p.symbols[0] = 0
    assert hash(p) == hash(Packet(GF2, [1, 0]))


@pytest.mark.parametrize("q", [2, 3, 5])
@pytest.mark.parametrize("length", [1, 2, 3])
def test_one_time_pad_is_exactly_uniform(q, length):
    f = FieldSpec(q)
    space = list(itertools.product(range(q), repeat=length))
    for m in space:
        counts = Counter(tuple(add(Packet(f, m), Packet(f, k)).symbols) for k in space)
        assert set(counts) == set(space)
        assert set(counts.values()) == {1}


prime_st = st.sampled_from([2, 3, 5, 7, 11])


@settings(max_examples=100, deadline=None)
@given(prime_st, st.data())
def test_abelian_group_laws(q, data):
    f = FieldSpec(q)
    syms = st.lists(st.integers(0, q - 1), min_size=4, max_size=4)
    a, b, c = (Packet(f, data.draw(syms)) for _ in range(3))
    zero = zero_packet(f, 4)
    assert a + b == b + a
    assert (a + b) + c == a + (b + c)
    assert a + zero == a
    assert a + (zero - a) == zero
    assert (a - b) + b == a
