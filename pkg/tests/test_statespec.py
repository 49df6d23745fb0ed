import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phasekit.errors import DimensionError, StateSpecError
from phasekit.fock import make_fock_state, save_state
from phasekit.statespec import build_state, default_dim, format_state_spec, parse_state_spec


def test_simple_specs():
    assert parse_state_spec("fock:3").params == 3
    assert parse_state_spec("coherent:3").params == 3
    assert parse_state_spec("coherent:1.5-0.5i").params == complex(1.5, -0.5)
    assert parse_state_spec("coherent:-2i").params == complex(0, -2)


def test_superposition_spec():
    spec = parse_state_spec("sup:1*fock:0+1*fock:1")
    state = build_state(spec)
    np.testing.assert_allclose(state.amplitudes, [1 / math.sqrt(2)] * 2)
    spec = parse_state_spec("sup:(0.5-1i)*fock:2-2*coherent:1+1i")
    weights = [w for w, _ in spec.params]
    assert weights == [complex(0.5, -1), -2]
    assert spec.params[1][1].params == complex(1, 1)


@pytest.mark.parametrize("text, pos", [("fock:x", 5), ("coherent:", 9), ("sup:1fock:0", 5), ("wave:1", 0),
                                       ("fock:1junk", 6), ("sup:(1+1i*fock:0", 9)])
def test_errors_carry_position(text, pos):
    with pytest.raises(StateSpecError) as info:
        parse_state_spec(text)
    assert info.value.position == pos
    assert f"position {pos}" in str(info.value)


def test_default_dims():
    assert default_dim(parse_state_spec("fock:4")) == 5
    assert default_dim(parse_state_spec("coherent:3")) == 35
    assert default_dim(parse_state_spec("sup:1*fock:20+1*coherent:1")) == 21


def test_file_spec(tmp_path):
    path = tmp_path / "st.json"
    save_state(make_fock_state(1, 3), path)
    state = build_state(parse_state_spec(f"file:{path}"), dim=5)
    assert state.dim == 5 and state.amplitudes[1] == 1
    with pytest.raises(DimensionError):
        build_state(parse_state_spec(f"file:{path}"), dim=2)


weights = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False).filter(lambda z: abs(z) > 1e-3)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(weights, st.integers(0, 6)), min_size=1, max_size=4))
def test_format_parse_roundtrip(terms):
    text = "sup:" + "+".join(f"({w.real!r}{w.imag:+}i)*fock:{n}" for w, n in terms)
    spec = parse_state_spec(text)
    again = parse_state_spec(format_state_spec(spec))
    for (w1, s1), (w2, s2) in zip(spec.params, again.params):
        assert s1 == s2
        assert abs(w1 - w2) <= 1e-10 * max(1.0, abs(w1))
