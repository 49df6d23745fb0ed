"""The coherent-state-integral phase operator and everything built on it.

    phi = (1/pi) * integral of theta |alpha><alpha| d^2 alpha,  theta = arg(alpha)

with theta taken in the branch window. Matrix elements factor into a radial
Gamma-function integral and an angular integral of theta^k exp(i p theta),
p = m - n, which gives the closed forms used by the ``analytic`` routes:

    <m|phi|n> = -i (-1)^(m-n) Gamma((m+n)/2 + 1) / ((m-n) sqrt(m! n!)),  m != n

and zero on the diagonal (window centered at 0). The quadrature routes sum
the same integrand over a PolarGrid.
"""

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_legendre

from phasekit.errors import ConvergenceError, DimensionError, ValidationError
from phasekit.fock import OperatorMatrix, PhaseWindow, TruncatedState, make_fock_state
from phasekit.quadrature import (
    MomentReport,
    build_polar_grid,
    coherent_projector_integral,
    default_n_angular,
    moments_from_marginal,
    phase_marginal,
)
from phasekit.special import log_factorial, log_gamma

HERMITICITY_LIMIT = 1e-6
ACID_TOL = 1e-6
ACID_VARIANCE = math.pi**2 / 3


def angular_integral(power, p):
    """Closed form of the integral of phi^power exp(i p phi) over (-pi, pi].

    ``p`` is an integer array; ``power`` is 0, 1 or 2.
    """
    p = np.asarray(p)
    sign = np.where(p % 2 == 0, 1.0, -1.0)
    safe = np.where(p == 0, 1, p)
    if power == 0:
        return np.where(p == 0, 2 * math.pi, 0.0).astype(complex)
    if power == 1:
        return np.where(p == 0, 0.0, -2j * math.pi * sign / safe)
    if power == 2:
        return np.where(p == 0, 2 * math.pi**3 / 3, 4 * math.pi * sign / safe**2).astype(complex)
    raise ValidationError(f"closed-form angular integrals exist for powers 0..2, got {power}")


@functools.lru_cache(maxsize=1)
def verify_angular_integrals(max_freq=64, tol=1e-10):
    """Check the closed forms against Gauss-Legendre quadrature once per process."""
    x, w = roots_legendre(400)
    phi = math.pi * x
    p = np.arange(-max_freq, max_freq + 1)
    basis = np.exp(1j * np.outer(p, phi))
    for power in (0, 1, 2):
        numeric = basis @ (math.pi * w * phi**power)
        err = float(np.max(np.abs(numeric - angular_integral(power, p))))
        if err > tol:
            raise ConvergenceError(f"closed-form angular integral of power {power} is off by {err:.3g}")
    return True


def _radial_factor(dim):
    """Gamma((m+n)/2 + 1) / (2 sqrt(m! n!)) in log space."""
    m, n = np.indices((dim, dim))
    return 0.5 * np.exp(log_gamma((m + n) / 2 + 1) - 0.5 * (log_factorial(m) + log_factorial(n)))


def _absolute_angular(power, p, theta0):
    """Integral of theta^power exp(i p theta) over the window centered at theta0."""
    total = sum(math.comb(power, l) * theta0 ** (power - l) * angular_integral(l, p) for l in range(power + 1))
    return np.exp(1j * p * theta0) * total


def _analytic_moment_entries(power, dim, theta0):
    verify_angular_integrals()
    m, n = np.indices((dim, dim))
    entries = _radial_factor(dim) * _absolute_angular(power, m - n, theta0) / math.pi
    # exact Hermiticity: mirror the upper triangle
    upper = np.triu(entries)
    return upper + np.triu(entries, 1).conj().T


def _hermitize(raw, method, meta):
    defect = float(np.max(np.abs(raw - raw.conj().T))) if raw.size else 0.0
    if defect > HERMITICITY_LIMIT:
        raise ConvergenceError(f"{method} construction is non-Hermitean by {defect:.3g}; use a larger grid")
    meta["hermiticity_defect_pre"] = defect
    return (raw + raw.conj().T) / 2


def _quadrature_moment_entries(power, dim, grid):
    theta0 = grid.window.theta0
    total = sum(math.comb(power, l) * theta0 ** (power - l) * coherent_projector_integral(grid, dim, l)
                for l in range(power + 1))
    return total


def _default_grid(dim, grid, window):
    if grid is None:
        return build_polar_grid(n_angular=default_n_angular(dim), window=window or PhaseWindow())
    return grid


def build_phase_operator_quadrature(dim, grid=None):
    """Phase operator by summing theta |alpha><alpha| over a polar grid."""
    if dim < 1:
        raise ValidationError(f"dimension must be >= 1, got {dim}")
    grid = _default_grid(dim, grid, None)
    meta = {"grid": grid.describe(), "theta0": grid.window.theta0}
    entries = _hermitize(_quadrature_moment_entries(1, dim, grid), "turski-quadrature", meta)
    return OperatorMatrix(dim, entries, "turski-quadrature", meta)


def build_phase_operator_analytic(dim, window=None):
    """Phase operator from the closed-form matrix elements (exactly Hermitean)."""
    if dim < 1:
        raise ValidationError(f"dimension must be >= 1, got {dim}")
    theta0 = (window or PhaseWindow()).theta0
    entries = _analytic_moment_entries(1, dim, theta0)
    return OperatorMatrix(dim, entries, "turski-analytic", {"theta0": theta0, "hermiticity_defect_pre": 0.0})


def build_moment_operator(k, dim, grid=None, window=None, analytic=True):
    """Operator (1/pi) * integral of theta^k |alpha><alpha| d^2 alpha, k in {1, 2}.

    This is a separate operator per k, not a matrix power of the k = 1 case.
    ``analytic=False`` (or passing a ``grid``) selects the quadrature route.
    """
    if k not in (1, 2):
        raise ValidationError(f"moment operators are defined for k = 1, 2; got {k}")
    if dim < 1:
        raise ValidationError(f"dimension must be >= 1, got {dim}")
    if grid is None and analytic:
        theta0 = (window or PhaseWindow()).theta0
        entries = _analytic_moment_entries(k, dim, theta0)
        meta = {"k": k, "theta0": theta0, "route": "analytic", "hermiticity_defect_pre": 0.0}
        return OperatorMatrix(dim, entries, "moment-k", meta)
    grid = _default_grid(dim, grid, window)
    meta = {"k": k, "theta0": grid.window.theta0, "route": "quadrature", "grid": grid.describe()}
    entries = _hermitize(_quadrature_moment_entries(k, dim, grid), "moment-k", meta)
    return OperatorMatrix(dim, entries, "moment-k", meta)


def build_exp_phase_operator(sign, dim, grid=None, analytic=True):
    """Exponential phase operator (1/pi) * integral of exp(+-i theta) |alpha><alpha| d^2 alpha.

    For sign +1 the only nonzero band is the first superdiagonal,

        <n|E|n+1> = Gamma(n + 3/2) / sqrt(n! (n+1)!),

    so E lowers the photon number like exp(i phi) should. Sign -1 is the
    conjugate transpose.
    """
    if sign not in (1, -1):
        raise ValidationError(f"sign must be +1 or -1, got {sign}")
    if dim < 1:
        raise ValidationError(f"dimension must be >= 1, got {dim}")
    method = "exp-phase-plus" if sign == 1 else "exp-phase-minus"
    if grid is None and analytic:
        n = np.arange(dim - 1)
        band = np.exp(log_gamma(n + 1.5) - 0.5 * (log_factorial(n) + log_factorial(n + 1)))
        entries = np.diag(band.astype(complex), 1)
        if sign == -1:
            entries = entries.conj().T
        return OperatorMatrix(dim, entries, method, {"sign": sign, "route": "analytic"})
    grid = _default_grid(dim, grid, None)
    entries = coherent_projector_integral(grid, dim, 0, np.exp(1j * sign * grid.angular_nodes))
    return OperatorMatrix(dim, entries, method, {"sign": sign, "route": "quadrature", "grid": grid.describe()})


@dataclass(frozen=True)
class UnitarityReport:
    """Measured products of the exponential phase operators on the truncated space."""

    dim: int
    diagonal_of_EdagE: np.ndarray
    diagonal_of_EEdag: np.ndarray
    max_defect_inner_block: float
    max_defect_inner_block_EEdag: float
    max_offdiagonal: float
    route: str

    def to_dict(self):
        return {
            "dim": self.dim,
            "route": self.route,
            "diagonal_of_EdagE": [float(v) for v in self.diagonal_of_EdagE],
            "diagonal_of_EEdag": [float(v) for v in self.diagonal_of_EEdag],
            "max_defect_inner_block": self.max_defect_inner_block,
            "max_defect_inner_block_EEdag": self.max_defect_inner_block_EEdag,
            "max_offdiagonal": self.max_offdiagonal,
            "note": ("E = (1/pi) int exp(i theta)|alpha><alpha| d^2alpha. The claimed identity "
                     "E^dag E = 1 is not asserted: (E^dag E)_00 = 0 and (E E^dag)_00 = pi/4; "
                     "both diagonals approach 1 only as n grows."),
        }


def unitarity_defect(dim, construction="analytic", grid=None):
    """Measure E^dag E and E E^dag against the identity.

    The inner block drops the last Fock level, where truncation zeroes the
    row of E E^dag. Nothing here assumes E is unitary.
    """
    if dim < 2:
        raise ValidationError(f"unitarity report needs dim >= 2, got {dim}")
    if construction not in ("analytic", "quadrature"):
        raise ValidationError(f"unknown construction {construction!r}")
    e = build_exp_phase_operator(1, dim, grid=grid, analytic=construction == "analytic").entries
    edag_e = e.conj().T @ e
    e_edag = e @ e.conj().T
    inner = dim - 1
    eye = np.eye(inner)
    off = max(float(np.max(np.abs(x - np.diag(np.diag(x))))) for x in (edag_e, e_edag))
    return UnitarityReport(
        dim,
        np.real(np.diag(edag_e)).copy(),
        np.real(np.diag(e_edag)).copy(),
        float(np.max(np.abs(edag_e[:inner, :inner] - eye))),
        float(np.max(np.abs(e_edag[:inner, :inner] - eye))),
        off,
        construction,
    )


def phase_moments_q(state, grid=None, k_max=2):
    """Phase moments from the angular marginal of the Q function."""
    grid = _default_grid(state.dim, grid, None)
    return moments_from_marginal(phase_marginal(state, grid), k_max, method="q-integral")


def operator_expectation_moments(state, dim=None, k_max=2, window=None):
    """Moments as <psi|phi^(k)|psi> with the analytic moment operators.

    ``meta['matrix_square_second_moment']`` is <psi|phi^2|psi> with phi^2 the
    matrix square of the k = 1 operator in ``dim``; it differs from the
    second moment at finite truncation and is reported, not used.
    """
    if k_max not in (1, 2):
        raise ValidationError(f"operator moments support k_max 1 or 2, got {k_max}")
    dim = state.dim if dim is None else dim
    if state.dim > dim:
        raise DimensionError(f"state dim {state.dim} exceeds operator dim {dim}")
    window = window or PhaseWindow()
    centered = PhaseWindow(0.0)
    # centered-coordinate operators, phase factors restore the window position
    rot = state.rotated(-window.theta0) if window.theta0 else state
    phi1 = build_moment_operator(1, dim, window=centered).entries
    phi2 = build_moment_operator(2, dim, window=centered).entries
    mean_c = rot.expectation(phi1).real
    second_c = rot.expectation(phi2).real
    square = rot.expectation(phi1 @ phi1).real
    theta0 = window.theta0
    meta = {
        "operator_dim": dim,
        "grid": {"n_radial": None, "n_angular": None, "theta0": theta0},
        "matrix_square_second_moment": square + 2 * theta0 * mean_c + theta0**2,
        "matrix_square_gap": second_c - square,
        "centered_moments": [mean_c, second_c][:k_max],
    }
    norm = float(np.sum(np.abs(state.amplitudes) ** 2))
    return MomentReport(theta0 + mean_c, second_c + 2 * theta0 * mean_c + theta0**2,
                        second_c - mean_c**2, "operator-expectation", abs(1 - norm), meta)


@dataclass(frozen=True)
class AcidTestResult:
    n: int
    dim: int
    variance: float
    passed: bool
    report: MomentReport

    @property
    def deviation(self):
        return self.variance - ACID_VARIANCE

    def to_dict(self):
        return {"n": self.n, "dim": self.dim, "variance": self.variance, "expected": ACID_VARIANCE,
                "deviation": self.deviation, "pass": self.passed, "report": self.report.to_dict()}


def acid_test(n, dim, grid=None):
    """Phase variance of |n>; passes when it equals pi^2/3 within 1e-6."""
    state = make_fock_state(n, dim)
    report = phase_moments_q(state, grid)
    return AcidTestResult(n, dim, report.variance, abs(report.variance - ACID_VARIANCE) <= ACID_TOL, report)


@dataclass(frozen=True)
class EvolutionConfig:
    omega: float = 1.0
    t: float = 0.0

    def __post_init__(self):
        if not self.omega > 0:
            raise ValidationError(f"omega must be positive, got {self.omega}")


def evolve_phase_operator(op, cfg):
    """Heisenberg picture exp(i w n t) X exp(-i w n t), elementwise."""
    m, n = np.indices((op.dim, op.dim))
    entries = op.entries * np.exp(1j * cfg.omega * (m - n) * cfg.t)
    meta = dict(op.meta, omega=cfg.omega, t=cfg.t)
    return OperatorMatrix(op.dim, entries, op.method, meta)


def number_commutator(op):
    """[n, X] by explicit matrix products."""
    number = np.diag(np.arange(op.dim, dtype=float))
    return number @ op.entries - op.entries @ number


def equation_of_motion_check(op, omega=1.0, step=1e-6):
    """Compare i w [n, X] with a central finite difference of X(t) at t = 0.

    Returns the largest elementwise deviations of (commutator vs rotation law,
    finite difference vs rotation law).
    """
    m, n = np.indices((op.dim, op.dim))
    law = 1j * omega * (m - n) * op.entries
    commutator = 1j * omega * number_commutator(op)
    plus = evolve_phase_operator(op, EvolutionConfig(omega, step)).entries
    minus = evolve_phase_operator(op, EvolutionConfig(omega, -step)).entries
    derivative = (plus - minus) / (2 * step)
    return {
        "commutator_vs_law": float(np.max(np.abs(commutator - law))),
        "finite_difference_vs_law": float(np.max(np.abs(derivative - law))),
        "step": step,
    }
