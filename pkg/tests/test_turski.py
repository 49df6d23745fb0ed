import math

import mpmath
import numpy as np
import pytest

from phasekit.errors import PhasekitWarning, ValidationError
from phasekit.fock import PhaseWindow, make_coherent_state, make_fock_state, superpose
from phasekit.quadrature import build_polar_grid
from phasekit.turski import (
    EvolutionConfig,
    acid_test,
    angular_integral,
    build_exp_phase_operator,
    build_moment_operator,
    build_phase_operator_analytic,
    build_phase_operator_quadrature,
    equation_of_motion_check,
    evolve_phase_operator,
    operator_expectation_moments,
    phase_moments_q,
    unitarity_defect,
    verify_angular_integrals,
)


def element_by_double_integral(m, n, power=1):
    """(1/pi) int int theta^power <m|alpha><alpha|n> r dr dtheta, straight from the definition."""
    k = m - n
    radial = mpmath.quad(lambda r: r ** (m + n + 1) * mpmath.exp(-r * r), [0, mpmath.inf])
    ang = mpmath.quad(lambda t: t**power * mpmath.exp(1j * k * t), [-mpmath.pi, 0, mpmath.pi])
    return complex(ang * radial / (mpmath.pi * mpmath.sqrt(mpmath.factorial(m) * mpmath.factorial(n))))


def test_analytic_elements_match_definition():
    op = build_phase_operator_analytic(8)
    for m, n in [(0, 1), (1, 0), (2, 5), (7, 0), (3, 3), (6, 7)]:
        assert abs(op[m, n] - element_by_double_integral(m, n)) < 1e-13


def test_moment_two_elements_match_definition():
    op = build_moment_operator(2, 6)
    for m, n in [(0, 0), (0, 1), (2, 5), (4, 4)]:
        assert abs(op[m, n] - element_by_double_integral(m, n, 2)) < 1e-13
    assert op[0, 0].real == pytest.approx(math.pi**2 / 3, abs=1e-14)


def test_known_low_elements():
    op = build_phase_operator_analytic(4)
    assert op[0, 1] == pytest.approx(-0.5j * math.sqrt(math.pi), abs=1e-15)
    assert op[1, 0] == pytest.approx(0.5j * math.sqrt(math.pi), abs=1e-15)


def test_angular_integral_closed_forms():
    assert verify_angular_integrals(16)
    assert angular_integral(0, 0) == pytest.approx(2 * math.pi)
    assert angular_integral(1, 0) == 0
    assert angular_integral(2, 0) == pytest.approx(2 * math.pi**3 / 3)


def test_quadrature_matches_analytic():
    q = build_phase_operator_quadrature(16)
    a = build_phase_operator_analytic(16)
    assert np.max(np.abs(q.entries - a.entries)) < 1e-10
    assert q.meta["hermiticity_defect_pre"] < 1e-10


def test_analytic_operator_structure():
    op = build_phase_operator_analytic(20).entries
    assert np.array_equal(op, op.conj().T)
    assert np.max(np.abs(np.diag(op))) == 0
    # purely imaginary with alternating sign pattern
    assert np.all(op.real == 0)


def test_window_shift_adds_identity_multiple():
    base = build_phase_operator_analytic(6).entries
    shifted = build_phase_operator_analytic(6, PhaseWindow(0.4)).entries
    # rotation of the window: phi_theta0 = U (phi_0 + theta0) U^dag with U = exp(i theta0 n)
    u = np.diag(np.exp(1j * 0.4 * np.arange(6)))
    np.testing.assert_allclose(shifted, u @ (base + 0.4 * np.eye(6)) @ u.conj().T, atol=1e-14)


def test_exp_operator_band_and_values():
    e = build_exp_phase_operator(1, 10).entries
    assert np.count_nonzero(e - np.diag(np.diag(e, 1), 1)) == 0
    assert e[0, 1] == pytest.approx(math.sqrt(math.pi) / 2)
    # n-th band element from the Gamma ratio, computed independently
    for n in range(9):
        expected = float(mpmath.gamma(n + 1.5) / mpmath.sqrt(mpmath.factorial(n) * mpmath.factorial(n + 1)))
        assert e[n, n + 1] == pytest.approx(expected, rel=1e-13)
    np.testing.assert_allclose(build_exp_phase_operator(-1, 10).entries, e.conj().T)
    quad = build_exp_phase_operator(1, 10, analytic=False).entries
    assert np.max(np.abs(quad - e)) < 1e-12


def test_unitarity_report_values():
    rep = unitarity_defect(12)
    assert rep.diagonal_of_EEdag[0] == pytest.approx(math.pi / 4, abs=1e-14)
    assert rep.diagonal_of_EdagE[0] == 0
    # E^dag E shifts the same values down one level
    np.testing.assert_allclose(rep.diagonal_of_EdagE[1:], rep.diagonal_of_EEdag[:-1], atol=1e-14)
    assert np.all(np.diff(rep.diagonal_of_EEdag[:-1]) > 0)
    assert np.all(rep.diagonal_of_EEdag[:-1] < 1)
    with pytest.raises(ValidationError):
        unitarity_defect(1)


@pytest.mark.parametrize("n", [0, 3, 7])
def test_acid_test_number_states(n):
    result = acid_test(n, 16)
    assert result.passed
    assert abs(result.deviation) < 1e-10


def test_acid_test_coarse_grid():
    # 8 angular nodes already integrate a flat marginal exactly
    with pytest.warns(PhasekitWarning):
        result = acid_test(0, 4, build_polar_grid(16, 8))
    assert abs(result.deviation) < 1e-10


@pytest.mark.parametrize("state", [
    make_coherent_state(1.2 + 0.9j, 30),
    superpose([(1.0, make_fock_state(0, 2)), (1j, make_fock_state(1, 2))]),
    make_coherent_state(-2.0, 35),
])
def test_q_and_operator_moments_agree(state):
    q = phase_moments_q(state)
    op = operator_expectation_moments(state)
    assert q.mean == pytest.approx(op.mean, abs=1e-10)
    assert q.second_moment == pytest.approx(op.second_moment, abs=1e-10)


def test_operator_moments_with_window():
    state = make_coherent_state(1.5 * np.exp(2.5j), 30)
    window = PhaseWindow(2.0)
    q = phase_moments_q(state, build_polar_grid(128, 512, window))
    op = operator_expectation_moments(state, window=window)
    assert q.mean == pytest.approx(op.mean, abs=1e-10)
    assert q.variance == pytest.approx(op.variance, abs=1e-10)


def test_superposition_mean():
    # |0> + i|1>: mean phase is sqrt(pi)/2 from the single off-diagonal element
    state = superpose([(1.0, make_fock_state(0, 2)), (1j, make_fock_state(1, 2))])
    assert operator_expectation_moments(state).mean == pytest.approx(math.sqrt(math.pi) / 2, abs=1e-14)


def test_matrix_square_differs_from_second_moment_operator():
    state = make_fock_state(0, 8)
    rep = operator_expectation_moments(state, dim=8)
    assert rep.meta["matrix_square_gap"] > 0.1


def test_evolution_law():
    op = build_phase_operator_analytic(10)
    assert np.array_equal(evolve_phase_operator(op, EvolutionConfig(1.0, 0.0)).entries, op.entries)
    u = np.diag(np.exp(1j * 0.3 * 2.0 * np.arange(10)))
    evolved = evolve_phase_operator(op, EvolutionConfig(2.0, 0.3)).entries
    np.testing.assert_allclose(evolved, u @ op.entries @ u.conj().T, atol=1e-13)
    check = equation_of_motion_check(op)
    assert check["commutator_vs_law"] < 1e-12
    assert check["finite_difference_vs_law"] < 1e-6
    with pytest.raises(ValidationError):
        EvolutionConfig(0.0, 1.0)


def test_rotated_coherent_state_mean_follows_window():
    window = PhaseWindow(math.pi / 3)
    state = make_coherent_state(3 * np.exp(1j * math.pi / 3), 35)
    rep = phase_moments_q(state, build_polar_grid(128, 512, window))
    assert rep.mean == pytest.approx(math.pi / 3, abs=1e-3)
    base = phase_moments_q(make_coherent_state(3.0, 35))
    assert rep.variance == pytest.approx(base.variance, abs=1e-12)
