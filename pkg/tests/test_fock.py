import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phasekit.errors import DimensionError, TruncationError, ValidationError
from phasekit.fock import (
    OperatorMatrix,
    PhaseWindow,
    TruncatedState,
    coherent_amplitudes,
    coherent_overlap,
    displacement_matrix,
    elementary_operators,
    load_state,
    make_coherent_state,
    make_fock_state,
    q_function,
    save_state,
    superpose,
)


def naive_coherent(alpha, dim):
    return np.array([math.exp(-abs(alpha) ** 2 / 2) * alpha**n / math.sqrt(math.factorial(n)) for n in range(dim)])


def test_coherent_amplitudes_match_naive_formula():
    alpha = 1.2 - 0.7j
    np.testing.assert_allclose(coherent_amplitudes(alpha, 30), naive_coherent(alpha, 30), atol=1e-15)


def test_coherent_amplitudes_large_n_finite():
    amps = coherent_amplitudes(20.0, 700)
    assert np.all(np.isfinite(amps))
    assert math.isclose(float(np.sum(np.abs(amps) ** 2)), 1.0, abs_tol=1e-12)


def test_coherent_truncation_guard():
    with pytest.raises(TruncationError):
        make_coherent_state(3.0, 10)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        state = make_coherent_state(3.0, 10, force=True)
    assert math.isclose(float(np.sum(np.abs(state.amplitudes) ** 2)), 1.0, abs_tol=1e-12)


def test_fock_state_validation():
    assert make_fock_state(3, 5).amplitudes[3] == 1
    with pytest.raises(DimensionError):
        make_fock_state(5, 5)
    with pytest.raises(ValidationError):
        TruncatedState(2, np.array([1.0, 1.0]))


def test_superpose_renormalizes():
    state = superpose([(1.0, make_fock_state(0, 2)), (1.0, make_fock_state(1, 2))])
    np.testing.assert_allclose(state.amplitudes, [1 / math.sqrt(2)] * 2)


def test_elementary_operators_commutator():
    ops = elementary_operators(12)
    a, ad = ops["annihilation"].entries, ops["creation"].entries
    comm = a @ ad - ad @ a
    # identity except at the truncation edge
    np.testing.assert_allclose(np.diag(comm)[:-1], 1.0)
    np.testing.assert_allclose(ad @ a, ops["number"].entries, atol=1e-14)


def test_displacement_of_vacuum_is_coherent():
    d = displacement_matrix(1.5, 60)
    np.testing.assert_allclose(d.entries[:, 0][:25], naive_coherent(1.5, 25), atol=1e-12)
    assert d.meta["unitarity_defect"] < 1e-12


def test_q_function_normalizes():
    state = make_coherent_state(1 + 0.5j, 25)
    x = np.linspace(-7, 7, 281)
    grid = x[:, None] + 1j * x[None, :]
    total = float(np.sum(q_function(state, grid))) * (x[1] - x[0]) ** 2
    assert math.isclose(total, 1.0, abs_tol=1e-8)
    assert math.isclose(float(q_function(state, 1 + 0.5j)), 1 / math.pi, rel_tol=1e-10)


def test_coherent_overlap_formula():
    alpha, beta = 0.8 + 0.3j, -0.4 + 1.1j
    state = make_coherent_state(alpha, 40)
    expected = math.exp(-abs(alpha - beta) ** 2)
    assert math.isclose(abs(coherent_overlap(state, beta)) ** 2, expected, rel_tol=1e-10)


def test_window_centering_closed_on_top():
    w = PhaseWindow(0.0)
    assert w.centered(math.pi) == pytest.approx(math.pi)
    assert w.centered(-math.pi) == pytest.approx(math.pi)
    assert PhaseWindow(1.0).wrap(1.0 + 3 * math.pi) == pytest.approx(1.0 + math.pi)


@settings(max_examples=50, deadline=None)
@given(st.floats(-50, 50, allow_nan=False), st.floats(-3, 3, allow_nan=False))
def test_window_wrap_lands_in_window(theta, center):
    w = PhaseWindow(center)
    out = float(w.wrap(theta))
    assert w.lower - 1e-9 < out <= w.upper + 1e-9
    assert math.isclose(math.cos(out), math.cos(theta), abs_tol=1e-9)


def test_operator_matrix_rejects_nonfinite():
    with pytest.raises(ValidationError):
        OperatorMatrix(2, np.array([[np.nan, 0], [0, 0]]), "turski-analytic", {})


def test_state_file_roundtrip(tmp_path):
    state = superpose([(1.0, make_fock_state(0, 4)), (0.5j, make_fock_state(3, 4))])
    path = tmp_path / "s.json"
    save_state(state, path)
    back = load_state(path)
    np.testing.assert_allclose(back.amplitudes, state.amplitudes, atol=1e-15)


def test_state_file_bad_norm(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"dim": 2, "amplitudes": [{"re": 1, "im": 0}, {"re": 1, "im": 0}]}')
    with pytest.raises(ValidationError):
        load_state(path)
