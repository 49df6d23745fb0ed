"""Pegg-Barnett phase formalism in an (s+1)-dimensional space.

Phase states |theta_m> = (s+1)^(-1/2) sum_n exp(i n theta_m) |n> with
theta_m = theta0 + 2 pi m / (s+1) form an orthonormal basis, and the phase
operator is diagonal in it.
"""

import math
from dataclasses import dataclass

import numpy as np

from phasekit.errors import DimensionError, ValidationError
from phasekit.fock import OperatorMatrix, PhaseWindow
from phasekit.quadrature import MomentReport, PhaseDistribution


@dataclass(frozen=True)
class PBConfig:
    s: int
    theta0: float

    def __post_init__(self):
        if self.s < 1:
            raise ValidationError(f"Pegg-Barnett s must be >= 1, got {self.s}")

    @classmethod
    def aligned(cls, s, window=None):
        """Reference phase chosen so every theta_m lies in ``window``.

        theta_s lands on the closed upper edge theta_c + pi, the same as the
        last node of an (s+1)-point polar grid.
        """
        center = (window or PhaseWindow()).theta0
        return cls(int(s), center - math.pi + 2 * math.pi / (s + 1))

    @property
    def size(self):
        return self.s + 1

    @property
    def phases(self):
        return self.theta0 + 2 * math.pi * np.arange(self.size) / self.size

    @property
    def center(self):
        """Midpoint of the phase values; moments are accumulated relative to it."""
        return self.theta0 + math.pi * self.s / self.size

    def describe(self):
        return {"s": self.s, "theta0": self.theta0}


def phase_states(cfg):
    """Columns are |theta_m> in the Fock basis."""
    n = np.arange(cfg.size)
    return np.exp(1j * np.outer(n, cfg.phases)) / math.sqrt(cfg.size)


def pb_phase_operator(cfg):
    states = phase_states(cfg)
    entries = (states * cfg.phases) @ states.conj().T
    return OperatorMatrix(cfg.size, entries, "pegg-barnett", cfg.describe())


def pb_distribution(state, cfg):
    """p_m = |<theta_m|psi>|^2, evaluated without building the operator."""
    if state.dim > cfg.size:
        raise DimensionError(f"state dim {state.dim} exceeds Pegg-Barnett dimension s+1={cfg.size}")
    n = np.arange(state.dim)
    overlaps = np.exp(-1j * np.outer(cfg.phases, n)) @ state.amplitudes / math.sqrt(cfg.size)
    probs = np.abs(overlaps) ** 2
    window = PhaseWindow(cfg.center)
    defect = abs(1.0 - float(np.sum(probs)))
    return PhaseDistribution(cfg.phases, probs, window, defect, float(probs.min()),
                             {"s": cfg.s, "theta0": cfg.theta0})


def pb_moments(state, cfg, k_max=2):
    if not 1 <= k_max <= 4:
        raise ValidationError(f"k_max must be in 1..4, got {k_max}")
    dist = pb_distribution(state, cfg)
    centered_phases = cfg.phases - cfg.center
    kk = max(2, k_max)
    centered = [float(np.sum(dist.values * centered_phases**k)) for k in range(kk + 1)]
    c = cfg.center
    absolute = [sum(math.comb(k, l) * c ** (k - l) * centered[l] for l in range(k + 1)) for k in range(kk + 1)]
    meta = {
        "grid": {"n_radial": None, "n_angular": cfg.size, "theta0": cfg.theta0},
        "s": cfg.s,
        "moments": absolute[1: k_max + 1],
        "centered_moments": centered[1: k_max + 1],
        "center": c,
    }
    return MomentReport(absolute[1], absolute[2], centered[2] - centered[1] ** 2, "pegg-barnett",
                        dist.norm_defect, meta)

