"""Polar quadrature over the complex plane and the phase marginal of Q.

Radial rule
    With u = r^2 the measure r dr exp(-r^2) becomes exp(-u) du / 2. Integrands
    built from Fock-basis bilinears are exp(-r^2) times a polynomial in r, i.e.
    exp(-u) times a polynomial in sqrt(u), which ordinary Gauss-Laguerre does
    not integrate exactly (odd powers of r give half-integer powers of u). The
    radial rule is therefore the Gauss rule for the weight r exp(-r^2) on
    [0, inf): n nodes integrate r^p exp(-r^2) r dr exactly for p < 2n.

Angular rule
    Nodes are equispaced on the branch window. Periodic integrands use the
    equal weight 2 pi / M. The non-periodic factor (theta - theta0)^k gets
    product-integration weights that are exact whenever the periodic part is
    a trigonometric polynomial of degree below M/2.
"""

import functools
import math
import warnings
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import roots_legendre

from phasekit.errors import ConvergenceError, IntegrationError, PhasekitWarning, ValidationError
from phasekit.fock import PhaseWindow
from phasekit.special import log_factorial

DEFAULT_N_RADIAL = 128
MIN_N_ANGULAR = 512
MARGINAL_NORM_TOL = 1e-4
NEGATIVE_CLAMP = -1e-14


def default_n_angular(dim):
    return max(MIN_N_ANGULAR, 8 * dim)


def _half_range_recurrence(n):
    """Jacobi-matrix coefficients for the weight r exp(-r^2) on [0, inf).

    Chebyshev's algorithm on the moments Gamma(p/2 + 1)/2. The moment map is
    badly conditioned, so it runs in extended precision; roughly n digits
    are lost.
    """
    with mpmath.workdps(3 * n // 2 + 50):
        mu = [mpmath.gamma(mpmath.mpf(p) / 2 + 1) / 2 for p in range(2 * n)]
        a = [mpmath.mpf(0)] * n
        b = [mpmath.mpf(0)] * n
        a[0] = mu[1] / mu[0]
        b[0] = mu[0]
        prev = [mpmath.mpf(0)] * (2 * n)
        cur = list(mu)
        for k in range(1, n):
            new = [mpmath.mpf(0)] * (2 * n)
            for l in range(k, 2 * n - k):
                new[l] = cur[l + 1] - a[k - 1] * cur[l] - b[k - 1] * prev[l]
            a[k] = new[k + 1] / new[k] - cur[k] / cur[k - 1]
            b[k] = new[k] / cur[k - 1]
            prev, cur = cur, new
        return (np.array([float(v) for v in a]),
                np.array([float(mpmath.sqrt(v)) for v in b]))


@functools.lru_cache(maxsize=16)
def half_range_gauss(n):
    """Nodes and log-weights of the n-point Gauss rule for r exp(-r^2) dr."""
    a, sqrt_b = _half_range_recurrence(n)
    if n == 1:
        return np.array([a[0]]), np.array([math.log(sqrt_b[0] ** 2)])
    x = eigh_tridiagonal(a, sqrt_b[1:], eigvals_only=True)
    # one Newton polish of the eigenvalues, then Christoffel weights
    # 1 / sum_k p_k(x)^2 from the orthonormal recurrence (rescaled to avoid overflow)
    for polish in (True, False):
        p0, p1 = np.zeros(n), np.full(n, 1.0 / sqrt_b[0])
        d0, d1 = np.zeros(n), np.zeros(n)
        total = p1 * p1
        log_scale = np.zeros(n)
        for k in range(n - 1):
            p2 = ((x - a[k]) * p1 - sqrt_b[k] * p0) / sqrt_b[k + 1]
            d2 = ((x - a[k]) * d1 + p1 - sqrt_b[k] * d0) / sqrt_b[k + 1]
            total += p2 * p2
            p0, p1, d0, d1 = p1, p2, d1, d2
            big = np.abs(p1) > 1e100
            if big.any():
                c = np.where(big, 1e-100, 1.0)
                p0 *= c
                p1 *= c
                d0 *= c
                d1 *= c
                total *= c * c
                log_scale -= 2 * np.log(c)
        if polish:
            pn = (x - a[n - 1]) * p1 - sqrt_b[n - 1] * p0
            dn = (x - a[n - 1]) * d1 + p1 - sqrt_b[n - 1] * d0
            x = x - pn / dn
    return x, -(np.log(total) + log_scale)


@functools.lru_cache(maxsize=64)
def angular_moment_weights(n_angular, power):
    """Weights v_j with sum_j v_j g(phi_j) = integral of phi^power g(phi) over (-pi, pi].

    phi_j = 2 pi j / M for j = -M/2+1 .. M/2. Exact for trigonometric
    polynomials g of degree < M/2. Computed by integrating phi^power against
    the trigonometric Lagrange basis with a Gauss-Legendre rule fine enough to
    resolve frequency M/2.
    """
    m = n_angular
    if power == 0:
        weights = np.full(m, 2 * math.pi / m)
        weights.setflags(write=False)
        return weights
    half = m // 2
    x, w = roots_legendre(m + 64)
    phi_q = math.pi * x
    w_q = math.pi * w * phi_q**power
    phi_nodes = centered_angular_nodes(m)
    weights = np.full(m, float(np.sum(w_q)))
    for start in range(1, half + 1, 512):
        p = np.arange(start, min(start + 512, half + 1))
        arg = np.outer(p, phi_q)
        cos_mom = np.cos(arg) @ w_q
        sin_mom = np.sin(arg) @ w_q
        factor = np.where(p == half, 1.0, 2.0)[:, None]
        node_arg = np.outer(p, phi_nodes)
        weights += np.sum(factor * (cos_mom[:, None] * np.cos(node_arg) + sin_mom[:, None] * np.sin(node_arg)), axis=0)
    weights /= m
    weights.setflags(write=False)
    return weights


def centered_angular_nodes(n_angular):
    j = np.arange(-n_angular // 2 + 1, n_angular // 2 + 1)
    return 2 * math.pi * j / n_angular


@dataclass(frozen=True)
class PolarGrid:
    """Tensor grid alpha = r_i exp(i theta_j) for integrals over the plane."""

    radial_nodes: np.ndarray
    radial_weights: np.ndarray  # for  int_0^inf f(r) r dr
    log_gaussian_weights: np.ndarray  # for int_0^inf g(r) exp(-r^2) r dr
    angular_nodes: np.ndarray
    angular_weight: float
    window: PhaseWindow = field(default_factory=PhaseWindow)

    @property
    def n_radial(self):
        return len(self.radial_nodes)

    @property
    def n_angular(self):
        return len(self.angular_nodes)

    @property
    def centered_nodes(self):
        return centered_angular_nodes(self.n_angular)

    @property
    def gaussian_weights(self):
        return np.exp(self.log_gaussian_weights)

    def points(self):
        """Complex nodes, shape (n_radial, n_angular)."""
        return self.radial_nodes[:, None] * np.exp(1j * self.angular_nodes)[None, :]

    def moment_weights(self, power):
        return angular_moment_weights(self.n_angular, power)

    def describe(self):
        return {"n_radial": self.n_radial, "n_angular": self.n_angular, "theta0": self.window.theta0}


def build_polar_grid(n_radial=DEFAULT_N_RADIAL, n_angular=MIN_N_ANGULAR, window=None):
    if window is None:
        window = PhaseWindow()
    if n_radial < 2:
        raise ValidationError(f"n_radial must be >= 2, got {n_radial}")
    if n_angular < 4 or n_angular % 2:
        raise ValidationError(f"n_angular must be even and >= 4, got {n_angular}")
    r, log_w = half_range_gauss(n_radial)
    full = np.exp(log_w + r * r)
    thetas = window.theta0 + centered_angular_nodes(n_angular)
    for arr in (r, full, log_w, thetas):
        arr.setflags(write=False)
    return PolarGrid(r, full, log_w, thetas, 2 * math.pi / n_angular, window)


def integrate_polar(f, grid, theta_power=0):
    """Integral of (theta - theta0)^theta_power * f(alpha) d^2 alpha on ``grid``.

    ``f`` receives the complex node array of shape (n_radial, n_angular). The
    angular power is passed separately because it is not periodic: folding it
    into ``f`` would reduce the angular rule to a first-order Riemann sum.
    """
    values = np.asarray(f(grid.points()))
    if values.shape != (grid.n_radial, grid.n_angular):
        values = np.broadcast_to(values, (grid.n_radial, grid.n_angular))
    bad = ~np.isfinite(values)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        alpha = grid.radial_nodes[i] * np.exp(1j * grid.angular_nodes[j])
        raise IntegrationError(f"integrand is {values[i, j]} at node (r={grid.radial_nodes[i]:.6g}, "
                               f"theta={grid.angular_nodes[j]:.6g}), alpha={alpha:.6g}")
    radial = grid.radial_weights @ values
    return complex(radial @ grid.moment_weights(theta_power))


def scaled_overlap_factors(grid, dim):
    """Factors of sqrt(w_i) <alpha_ij|n> = R[i, n] * E[j, n].

    ``R`` carries sqrt of the full radial weight and the Gaussian, combined in
    log space; ``E[j, n] = exp(-i n theta_j)``.
    """
    n = np.arange(dim)
    log_r = np.log(grid.radial_nodes)[:, None]
    radial = np.exp(0.5 * grid.log_gaussian_weights[:, None] + n * log_r - 0.5 * log_factorial(n))
    phases = np.exp(-1j * np.outer(grid.angular_nodes, n))
    return radial, phases


def check_grid_resolution(grid, dim):
    if grid.n_radial < dim or grid.n_angular < 2 * dim:
        warnings.warn(
            f"grid ({grid.n_radial} radial, {grid.n_angular} angular) does not resolve dim {dim} exactly; "
            f"need n_radial >= {dim} and n_angular >= {2 * dim}",
            PhasekitWarning,
            stacklevel=3,
        )


def coherent_projector_integral(grid, dim, theta_power=0, angular=None):
    """(1/pi) * integral of (theta-theta0)^k g(theta) |alpha><alpha| d^2 alpha on the grid.

    ``angular`` is the periodic factor g evaluated at the absolute angular
    nodes (defaults to 1). The double sum over nodes factorizes into a radial
    Gram matrix and an angular sum per matrix element.
    """
    check_grid_resolution(grid, dim)
    radial, _ = scaled_overlap_factors(grid, dim)
    gram = radial.T @ radial
    weights = np.array(grid.moment_weights(theta_power), dtype=complex)
    if angular is not None:
        weights = weights * np.asarray(angular)
    # <m|alpha><alpha|n> carries exp(i (m - n) theta)
    offsets = np.arange(-(dim - 1), dim)
    band = np.exp(1j * np.outer(offsets, grid.angular_nodes)) @ weights
    m, n = np.indices((dim, dim))
    return gram * band[m - n + dim - 1] / math.pi


@dataclass(frozen=True)
class PhaseDistribution:
    """Sampled phase marginal P(theta) = int_0^inf Q(r e^{i theta}) r dr."""

    thetas: np.ndarray
    values: np.ndarray
    window: PhaseWindow
    norm_defect: float
    raw_min: float = 0.0
    grid: dict = field(default_factory=dict)

    @property
    def n_angular(self):
        return len(self.thetas)


@dataclass(frozen=True)
class MomentReport:
    """Phase moments; ``variance`` is computed in window-centered coordinates."""

    mean: float
    second_moment: float
    variance: float
    method: str
    norm_defect: float
    meta: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "mean": self.mean,
            "second_moment": self.second_moment,
            "variance": self.variance,
            "method": self.method,
            "norm_defect": self.norm_defect,
            "grid": self.meta.get("grid", {}),
            "meta": {k: v for k, v in self.meta.items() if k != "grid"},
        }


def phase_marginal(state, grid):
    check_grid_resolution(grid, state.dim)
    if grid.n_angular < 8 * state.dim:
        warnings.warn(f"n_angular={grid.n_angular} is below the recommended 8*dim={8 * state.dim}",
                      PhasekitWarning, stacklevel=2)
    radial, phases = scaled_overlap_factors(grid, state.dim)
    # sqrt(w_i) <alpha_ij|psi>, summed over n in a fixed order per node
    amps = radial @ (state.amplitudes[:, None] * phases.T)
    raw = np.sum(np.abs(amps) ** 2, axis=0) / math.pi
    raw_min = float(raw.min())
    values = np.where(raw < 0, 0.0, raw)
    values.setflags(write=False)
    defect = abs(1.0 - float(np.sum(values)) * grid.angular_weight)
    return PhaseDistribution(grid.angular_nodes, values, grid.window, defect, raw_min, grid.describe())


def _centered_moments(values, k_max):
    m = len(values)
    return [float(values @ angular_moment_weights(m, k)) for k in range(k_max + 1)]


def moments_from_marginal(dist, k_max=2, method="q-integral"):
    """Moments of theta under P, reported in absolute coordinates.

    Moments are accumulated in centered coordinates phi = theta - theta0 and
    shifted back binomially; the variance never leaves centered coordinates.
    ``meta['convergence_estimate']`` is the variance change when every other
    angular node is dropped.
    """
    if not 1 <= k_max <= 4:
        raise ValidationError(f"k_max must be in 1..4, got {k_max}")
    if dist.norm_defect > MARGINAL_NORM_TOL:
        raise ConvergenceError(f"phase marginal norm defect {dist.norm_defect:.3g} exceeds {MARGINAL_NORM_TOL:g}")
    kk = max(2, k_max)
    centered = _centered_moments(dist.values, kk)
    theta0 = dist.window.theta0
    absolute = [sum(math.comb(k, l) * theta0 ** (k - l) * centered[l] for l in range(k + 1)) for k in range(kk + 1)]
    variance = centered[2] - centered[1] ** 2
    estimate = None
    half = dist.n_angular // 2
    if half >= 4 and half % 2 == 0:
        coarse = _centered_moments(dist.values[1::2], 2)
        estimate = abs(variance - (coarse[2] - coarse[1] ** 2))
    meta = {
        "grid": dict(dist.grid),
        "moments": absolute[1: k_max + 1],
        "centered_moments": centered[1: k_max + 1],
        "convergence_estimate": estimate,
        "raw_min": dist.raw_min,
    }
    return MomentReport(absolute[1], absolute[2], variance, method, dist.norm_defect, meta)
