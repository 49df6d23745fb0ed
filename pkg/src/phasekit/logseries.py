"""Displaced logarithm-series phase operator and its comparison with the integral form.

    phi_LS = -(i/2) D(chi) [ln(1 + a/chi) - ln(1 + a^dag/chi)] D^dag(chi)

with the logarithm replaced by its power series truncated at order K, built in
a padded working dimension and cut down to the reported block.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from phasekit.errors import ConvergenceError, DimensionError, PhasekitWarning, ValidationError
from phasekit.fock import OperatorMatrix, displacement_matrix

TAIL_LIMIT = 1e-3
EQUIVALENCE_FIELDS = ("m", "n", "ls_re", "ls_im", "ref_re", "ref_im", "abs_dev")


@dataclass(frozen=True)
class LogSeriesConfig:
    chi: float
    series_order: int
    dim_report: int
    dim_work: int

    def __post_init__(self):
        if not self.chi > 0:
            raise ValidationError(f"chi must be positive, got {self.chi}")
        if self.series_order < 1:
            raise ValidationError(f"series order must be >= 1, got {self.series_order}")
        if self.dim_report < 1:
            raise ValidationError(f"report dimension must be >= 1, got {self.dim_report}")
        if self.dim_work < 4 * self.dim_report:
            raise ValidationError(f"dim_work={self.dim_work} must be at least 4*dim_report={4 * self.dim_report}")
        if self.chi <= math.sqrt(self.dim_work - 1):
            warnings.warn(f"chi={self.chi:g} does not exceed ||a|| = sqrt({self.dim_work - 1}); "
                          "the log series may not converge", PhasekitWarning, stacklevel=3)

    @classmethod
    def default(cls, dim_report, chi=None, series_order=64, dim_work=None):
        """dim_work = 8 * dim_report and chi = 4 sqrt(dim_work) unless given."""
        dim_work = 8 * dim_report if dim_work is None else dim_work
        chi = 4 * math.sqrt(dim_work) if chi is None else chi
        return cls(float(chi), int(series_order), int(dim_report), int(dim_work))

    def describe(self):
        return {"chi": self.chi, "K": self.series_order, "dim_report": self.dim_report, "dim_work": self.dim_work}


def log_series(cfg):
    """Partial sum of ln(1 + a/chi) in ``dim_work`` plus per-term max norms."""
    n = cfg.dim_work
    scaled = np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1) / cfg.chi
    power = np.eye(n)
    total = np.zeros((n, n))
    norms = []
    for k in range(1, cfg.series_order + 1):
        power = power @ scaled
        term = ((-1) ** (k - 1) / k) * power
        total += term
        norms.append(float(np.max(np.abs(term))))
    return total, norms


def build_log_series_operator(cfg, strict=True):
    """Log-series phase operator, top-left ``dim_report`` block.

    ``meta['series_tail']`` is the max-norm of the last series term; above
    1e-3 the construction is rejected unless ``strict`` is off (low-order
    diagnostics such as K = 1).
    """
    series, norms = log_series(cfg)
    tail = norms[-1]
    if strict and tail > TAIL_LIMIT:
        raise ConvergenceError(f"log series tail {tail:.3g} exceeds {TAIL_LIMIT:g}; raise K or chi")
    with warnings.catch_warnings():
        # D(chi) is routinely truncated here; its edge weight is kept in meta
        warnings.simplefilter("ignore", PhasekitWarning)
        disp = displacement_matrix(cfg.chi, cfg.dim_work)
    d = disp.entries
    inner = -0.5j * (series - series.T)
    full = d @ inner @ d.conj().T
    block = full[: cfg.dim_report, : cfg.dim_report]
    meta = dict(cfg.describe())
    meta.update({
        "series_tail": tail,
        "term_norms": norms,
        "displacement_unitarity_defect": disp.meta["unitarity_defect"],
        "displacement_edge_tail": disp.meta["edge_tail"],
        "hermiticity_defect_pre": float(np.max(np.abs(block - block.conj().T))),
    })
    return OperatorMatrix(cfg.dim_report, block, "log-series", meta)


@dataclass(frozen=True)
class EquivalenceReport:
    block: int
    max_abs_dev: float
    fro_dev: float
    diagonal_max: float
    entries: list

    def to_dict(self):
        return {
            "block": self.block,
            "max_abs_dev": self.max_abs_dev,
            "fro_dev": self.fro_dev,
            "diagonal_max": self.diagonal_max,
            "entries": self.entries,
        }


def equivalence_report(ls_op, turski_op, block):
    """Deviation of two operators on their common top-left block. No thresholds."""
    if block < 1 or block > ls_op.dim or block > turski_op.dim:
        raise DimensionError(f"block {block} does not fit operators of dim {ls_op.dim} and {turski_op.dim}")
    a = ls_op.block(block)
    b = turski_op.block(block)
    diff = a - b
    rows = []
    for m in range(block):
        for n in range(block):
            rows.append({
                "m": m, "n": n,
                "ls_re": float(a[m, n].real), "ls_im": float(a[m, n].imag),
                "ref_re": float(b[m, n].real), "ref_im": float(b[m, n].imag),
                "abs_dev": float(abs(diff[m, n])),
            })
    return EquivalenceReport(
        block,
        float(np.max(np.abs(diff))),
        float(np.linalg.norm(diff)),
        float(np.max(np.abs(np.diag(a)))),
        rows,
    )


def convergence_study(cfg, orders, reference, strict=True):
    """Equivalence reports for the same config at several series orders."""
    out = []
    for order in orders:
        sub = LogSeriesConfig(cfg.chi, order, cfg.dim_report, cfg.dim_work)
        out.append((order, equivalence_report(build_log_series_operator(sub, strict), reference, cfg.dim_report)))
    return out
