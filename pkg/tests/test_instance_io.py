from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from odecga.instance_io import (
    AtspInstance,
    RegistryFormatError,
    TsplibFormatError,
    default_optima_registry,
    generate_random_instance,
    load_optima_registry,
    parse_tsplib_atsp,
    write_tsplib_atsp,
)

from conftest import M4_ROWS, brute_force_optimum

TOY3 = """NAME: toy3
TYPE: ATSP
COMMENT: three vertices
DIMENSION: {dim}
EDGE_WEIGHT_TYPE: EXPLICIT
EDGE_WEIGHT_FORMAT: FULL_MATRIX
EDGE_WEIGHT_SECTION
9999 1 2
3 9999 {c23}
5 6 9999
EOF
"""


def toy3(dim=3, c23="4"):
    return TOY3.format(dim=dim, c23=c23)


def test_parse_toy3():
    inst = parse_tsplib_atsp(toy3())
    assert inst.name == "toy3"
    assert inst.n == 3
    assert inst.c(0, 1) == 1
    assert inst.c(1, 0) == 3
    assert inst.c(2, 1) == 6


def test_sentinel_diagonal_is_not_a_cost():
    inst = parse_tsplib_atsp(toy3())
    assert inst.c_aver == Fraction(1 + 2 + 3 + 4 + 5 + 6, 6)
    with pytest.raises(ValueError):
        inst.c(1, 1)


def test_weights_may_wrap_lines_arbitrarily():
    text = toy3().replace("9999 1 2\n3 9999 4\n", "9999\n1   2 3\n\t9999 4 ")
    assert parse_tsplib_atsp(text).cost.tolist() == parse_tsplib_atsp(toy3()).cost.tolist()


def test_token_count_mismatch():
    with pytest.raises(TsplibFormatError, match="token count mismatch"):
        parse_tsplib_atsp(toy3(dim=4))


def test_negative_weight():
    with pytest.raises(TsplibFormatError, match="negative weight"):
        parse_tsplib_atsp(toy3(c23="-5"))


@pytest.mark.parametrize(
    "mutate, message",
    [
        (lambda t: t.replace("DIMENSION: 3\n", ""), "missing header key DIMENSION"),
        (lambda t: t.replace("TYPE: ATSP\n", "TYPE: ATSP\nTYPE: ATSP\n"), "duplicate header key TYPE"),
        (lambda t: t.replace("FULL_MATRIX", "LOWER_DIAG_ROW"), "unsupported weight format"),
        (lambda t: t.replace("TYPE: ATSP", "TYPE: TSP"), "unsupported TYPE"),
        (lambda t: t.replace("EXPLICIT", "EUC_2D"), "unsupported EDGE_WEIGHT_TYPE"),
        (lambda t: t.split("EDGE_WEIGHT_SECTION")[0], "missing header key EDGE_WEIGHT_SECTION"),
    ],
)
def test_header_errors(mutate, message):
    with pytest.raises(TsplibFormatError, match=message):
        parse_tsplib_atsp(mutate(toy3()))


@settings(max_examples=50, deadline=None)
@given(n=st.integers(2, 9), data=st.data())
def test_write_parse_roundtrip(n, data):
    vals = data.draw(st.lists(st.integers(0, 10**6), min_size=n * n, max_size=n * n))
    inst = AtspInstance("rt", np.array(vals).reshape(n, n))
    back = parse_tsplib_atsp(write_tsplib_atsp(inst))
    assert back.n == n
    assert np.array_equal(back.cost, inst.cost)
    assert back.c_aver * n * (n - 1) == int(inst.cost.sum())


def test_registry_basic(m4):
    # 25 is M4's optimum: check by enumerating all 6 tours
    assert brute_force_optimum(m4) == 25
    assert load_optima_registry("toy4 25") == {"toy4": 25}


def test_registry_comments_and_blank_lines():
    assert load_optima_registry("# comment\n") == {}
    assert load_optima_registry("\n# a\nfoo 3\n\n") == {"foo": 3}


@pytest.mark.parametrize(
    "text, message",
    [
        ("toy4 25\ntoy4 26", "duplicate"),
        ("toy4", "malformed"),
        ("toy4 x", "malformed"),
        ("toy4 0", "non-positive"),
        ("toy4 -3", "non-positive"),
    ],
)
def test_registry_errors(text, message):
    with pytest.raises(RegistryFormatError, match=message):
        load_optima_registry(text)


def test_bundled_registry():
    reg = default_optima_registry()
    assert reg["ftv33"] == 1286
    assert reg["rbg443"] == 2720
    assert len(reg) == 27


def test_random_instance_deterministic():
    a = generate_random_instance(5, 1)
    b = generate_random_instance(5, 1)
    c = generate_random_instance(5, 2)
    assert np.array_equal(a.cost, b.cost)
    assert not np.array_equal(a.cost, c.cost)
    off = a.cost[~np.eye(5, dtype=bool)]
    assert off.min() >= 1 and off.max() <= 100


def test_random_instance_too_small():
    with pytest.raises(ValueError):
        generate_random_instance(2, 0)


def test_instance_is_immutable():
    inst = AtspInstance("m4", M4_ROWS)
    with pytest.raises(ValueError):
        inst.cost[0, 1] = 5
