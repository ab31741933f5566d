import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from alphadiv.serialize import dumps, fmt, parse_number


def test_fmt_uses_17_digits():
    assert fmt(0.1) == "0.10000000000000001"
    assert fmt(2) == "2"
    assert fmt(math.inf) == "inf"
    assert fmt(-math.inf) == "-inf"


def test_fmt_rejects_nan():
    with pytest.raises(ValueError):
        fmt(math.nan)


@pytest.mark.parametrize("tok, val", [("inf", math.inf), ("-Infinity", -math.inf),
                                      (" 1e-3 ", 1e-3), (2, 2.0)])
def test_parse_number(tok, val):
    assert parse_number(tok) == val


@given(st.floats(allow_nan=False))
def test_fmt_roundtrips(x):
    assert parse_number(fmt(x)) == x


def test_dumps_structure():
    obj = {"a": [1, 0.5, math.inf], "b": None, "c": True, "d": np.float64(0.25),
           "e": np.array([1.0, 2.0]), "f": {}, "g": []}
    text = dumps(obj)
    assert json.loads(text) == {"a": [1, 0.5, "inf"], "b": None, "c": True, "d": 0.25,
                                "e": [1.0, 2.0], "f": {}, "g": []}
    assert json.loads(dumps(obj, indent=2)) == json.loads(text)


def test_dumps_is_byte_stable():
    obj = {"x": 1 / 3, "y": [0.1, 0.2]}
    assert dumps(obj, indent=2) == dumps(obj, indent=2)
    assert "0.33333333333333331" in dumps(obj)


def test_dumps_rejects_unknown():
    with pytest.raises(TypeError):
        dumps(object())
