import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from unsharp import io as uio
from unsharp.observables import InvalidPovmError
from unsharp.rng import substream
from unsharp.search import random_povm


@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(1, 3))
def test_povm_round_trip_is_exact(seed, n, d):
    p = random_povm(n, d, substream(seed, 40))
    q = uio.povm_from_json(uio.povm_to_json(p))
    assert q.labels == p.labels
    for a, b in zip(p, q):
        np.testing.assert_array_equal(a, b)


def test_labels_optional(example1):
    obj = uio.povm_to_dict(example1)
    del obj["labels"]
    assert uio.povm_from_dict(obj).labels == ("1", "2", "3")


@pytest.mark.parametrize(
    "text",
    [
        "{",
        "[]",
        '{"dim": 2}',
        '{"dim": 0, "effects": []}',
        '{"dim": 1, "effects": [[[1, 0]]]}',
        '{"dim": 1, "effects": [[[["1", 0]]]]}',
        '{"dim": 1, "effects": [[[[NaN, 0]]]]}',
        '{"dim": 1, "effects": [[[[1, 0]]]], "labels": [1]}',
        '{"dim": 2, "effects": [[[[1, 0]]]]}',
    ],
)
def test_malformed_inputs_raise_format_error(text):
    with pytest.raises(uio.FormatError):
        uio.povm_from_json(text)


def test_invariant_violation_is_not_format_error():
    text = json.dumps({"dim": 1, "effects": [[[[0.5, 0]]]]})
    with pytest.raises(InvalidPovmError):
        uio.povm_from_json(text)


def test_dumps_rejects_nan():
    with pytest.raises(ValueError):
        uio.dumps({"x": float("nan")})


def test_state_round_trip():
    rho = np.array([[0.75, 0.1j], [-0.1j, 0.25]])
    back = uio.state_from_dict(uio.loads(uio.dumps(uio.state_to_dict(rho))))
    np.testing.assert_array_equal(back, rho)


def test_csv_uses_17_digits():
    text = uio.to_csv([{"a": 1 / 3, "b": "x", "c": 2}], ["a", "b", "c"])
    assert text == "a,b,c\n0.33333333333333331,x,2\n"
    assert float(text.splitlines()[1].split(",")[0]) == 1 / 3
