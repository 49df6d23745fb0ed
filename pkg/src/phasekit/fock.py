"""Truncated Fock space: states, elementary operators, coherent overlaps, Q.

Conventions: the Fock basis is |0>, ..., |dim-1>; coherent-state amplitudes
are <n|alpha> = exp(-|alpha|^2/2) alpha^n / sqrt(n!); operator entries are
``entries[m, n] = <m|X|n>``.
"""

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from phasekit.errors import DimensionError, PhasekitWarning, TruncationError, ValidationError
from phasekit.special import log_factorial, poisson_tail

NORM_TOL = 1e-10
COHERENT_TAIL_TOL = 1e-10
FILE_NORM_TOL = 1e-6

OPERATOR_METHODS = frozenset({
    "turski-quadrature",
    "turski-analytic",
    "log-series",
    "pegg-barnett",
    "exp-phase-plus",
    "exp-phase-minus",
    "moment-k",
    "elementary",
})


def _frozen(array):
    array = np.array(array, dtype=complex)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class PhaseWindow:
    """Branch window (theta0 - pi, theta0 + pi] for arg(alpha)."""

    theta0: float = 0.0

    @property
    def lower(self):
        return self.theta0 - math.pi

    @property
    def upper(self):
        return self.theta0 + math.pi

    @property
    def length(self):
        return 2 * math.pi

    def centered(self, theta):
        """Map angles into (-pi, pi], measured from ``theta0``."""
        phi = np.mod(np.asarray(theta, dtype=float) - self.theta0 + math.pi, 2 * math.pi) - math.pi
        # mod sends the upper edge to the lower one; the window is closed on top
        return np.where(phi == -math.pi, math.pi, phi)

    def wrap(self, theta):
        """Map angles into the window itself."""
        return self.theta0 + self.centered(theta)


@dataclass(frozen=True)
class TruncatedState:
    """Normalized pure state in the Fock basis."""

    dim: int
    amplitudes: np.ndarray
    label: str = ""

    def __post_init__(self):
        amps = _frozen(self.amplitudes)
        if self.dim < 1:
            raise ValidationError(f"state dimension must be >= 1, got {self.dim}")
        if amps.shape != (self.dim,):
            raise ValidationError(f"expected {self.dim} amplitudes, got shape {amps.shape}")
        if not np.all(np.isfinite(amps)):
            raise ValidationError("state amplitudes must be finite")
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValidationError(f"state is not normalized: sum |c_n|^2 = {norm!r}")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, amplitudes, label=""):
        amps = np.asarray(amplitudes, dtype=complex)
        norm = math.sqrt(float(np.sum(np.abs(amps) ** 2)))
        if norm == 0:
            raise ValidationError("cannot normalize the zero vector")
        return cls(len(amps), amps / norm, label)

    def padded(self, dim):
        """Embed into a larger Fock space by zero padding."""
        if dim < self.dim:
            raise DimensionError(f"cannot embed a dim-{self.dim} state into dim {dim}")
        amps = np.zeros(dim, dtype=complex)
        amps[: self.dim] = self.amplitudes
        return TruncatedState(dim, amps, self.label)

    def rotated(self, delta):
        """Apply exp(i delta n) to the state."""
        phases = np.exp(1j * delta * np.arange(self.dim))
        return TruncatedState(self.dim, self.amplitudes * phases, f"{self.label}@rot{delta:g}")

    def expectation(self, matrix):
        """<psi|M|psi> for a dense matrix at least as large as the state."""
        matrix = np.asarray(matrix)
        if matrix.shape[0] < self.dim:
            raise DimensionError(f"operator dim {matrix.shape[0]} < state dim {self.dim}")
        block = matrix[: self.dim, : self.dim]
        return complex(np.vdot(self.amplitudes, block @ self.amplitudes))


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense operator on a truncated Fock space, tagged with how it was built."""

    dim: int
    entries: np.ndarray
    method: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        entries = _frozen(self.entries)
        if entries.shape != (self.dim, self.dim):
            raise ValidationError(f"expected a {self.dim}x{self.dim} matrix, got {entries.shape}")
        if self.method not in OPERATOR_METHODS:
            raise ValidationError(f"unknown operator method {self.method!r}")
        if not np.all(np.isfinite(entries)):
            raise ValidationError(f"{self.method} operator has non-finite entries")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "meta", dict(self.meta))

    def hermiticity_defect(self):
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))

    def block(self, size):
        if size > self.dim:
            raise DimensionError(f"block {size} exceeds operator dim {self.dim}")
        return self.entries[:size, :size]

    def __getitem__(self, index):
        return self.entries[index]


def make_fock_state(n, dim):
    if dim < 1:
        raise ValidationError(f"dimension must be >= 1, got {dim}")
    if n < 0:
        raise ValidationError(f"Fock index must be non-negative, got {n}")
    if n >= dim:
        raise DimensionError(f"Fock index {n} does not fit in dimension {dim}")
    amps = np.zeros(dim, dtype=complex)
    amps[n] = 1.0
    return TruncatedState(dim, amps, f"fock:{n}")


def format_complex(z):
    z = complex(z)
    if z.imag == 0:
        return f"{z.real:.12g}"
    sign = "+" if z.imag >= 0 else "-"
    return f"{z.real:.12g}{sign}{abs(z.imag):.12g}i"


def coherent_amplitudes(alpha, dim):
    """Unnormalized-by-truncation amplitudes <n|alpha>, n < dim, in log space."""
    alpha = complex(alpha)
    amps = np.zeros(dim, dtype=complex)
    r = abs(alpha)
    if r == 0:
        amps[0] = 1.0
        return amps
    n = np.arange(dim)
    log_mag = -0.5 * r * r + n * math.log(r) - 0.5 * log_factorial(n)
    return np.exp(log_mag) * np.exp(1j * n * math.atan2(alpha.imag, alpha.real))


def make_coherent_state(alpha, dim, force=False):
    """Coherent state |alpha> truncated to ``dim`` and renormalized.

    Raises TruncationError when more than 1e-10 of the Poisson weight lies
    outside the space, unless ``force`` is set.
    """
    if dim < 1:
        raise ValidationError(f"dimension must be >= 1, got {dim}")
    alpha = complex(alpha)
    tail = poisson_tail(abs(alpha) ** 2, dim)
    if tail > COHERENT_TAIL_TOL and not force:
        raise TruncationError(
            f"dimension {dim} captures only {1 - tail:.12g} of coherent state {format_complex(alpha)}",
            captured=1 - tail,
        )
    return TruncatedState.normalized(coherent_amplitudes(alpha, dim), f"coherent:{format_complex(alpha)}")


def superpose(terms):
    """Normalized sum of weighted states; ``terms`` is [(weight, state), ...]."""
    if not terms:
        raise ValidationError("superposition needs at least one term")
    dim = max(state.dim for _, state in terms)
    total = np.zeros(dim, dtype=complex)
    for weight, state in terms:
        total[: state.dim] += complex(weight) * state.amplitudes
    label = "sup:" + "+".join(f"({format_complex(w)})*{s.label}" for w, s in terms)
    return TruncatedState.normalized(total, label)


def elementary_operators(dim):
    """Annihilation, creation and number operators truncated to ``dim``."""
    if dim < 1:
        raise ValidationError(f"dimension must be >= 1, got {dim}")
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)
    return {
        "annihilation": OperatorMatrix(dim, a, "elementary", {"kind": "annihilation"}),
        "creation": OperatorMatrix(dim, a.conj().T, "elementary", {"kind": "creation"}),
        "number": OperatorMatrix(dim, np.diag(np.arange(dim, dtype=float)), "elementary", {"kind": "number"}),
    }


def displacement_matrix(chi, dim_work):
    """D(chi) = exp(chi (a^dag - a)) by scaling-and-squaring in ``dim_work``.

    The truncated generator is exactly anti-Hermitean, so D stays unitary to
    round-off; ``meta['unitarity_defect']`` records that. The truncation error
    proper is the Poisson weight of |chi> beyond ``dim_work``, recorded as
    ``meta['edge_tail']`` and warned about above 1e-10.
    """
    if dim_work < 1:
        raise ValidationError(f"working dimension must be >= 1, got {dim_work}")
    chi = float(chi)
    a = np.diag(np.sqrt(np.arange(1, dim_work, dtype=float)), 1)
    d = linalg.expm(chi * (a.T - a)).astype(complex)
    defect = float(np.max(np.abs(d.conj().T @ d - np.eye(dim_work))))
    tail = poisson_tail(chi * chi, dim_work)
    if tail > COHERENT_TAIL_TOL:
        warnings.warn(
            f"displacement chi={chi:g} is truncated in dim {dim_work}: coherent tail {tail:.3g}, "
            f"unitarity defect {defect:.3g}",
            PhasekitWarning,
            stacklevel=2,
        )
    meta = {"kind": "displacement", "chi": chi, "unitarity_defect": defect, "edge_tail": tail}
    return OperatorMatrix(dim_work, d, "elementary", meta)


def coherent_overlap(state, alpha):
    """<alpha|psi>; ``alpha`` may be a scalar or an array."""
    alpha = np.asarray(alpha, dtype=complex)
    r = np.abs(alpha)[..., None]
    n = np.arange(state.dim)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_r = np.log(r)
        # n * log(0) is nan at n = 0; the n = 0 term is exactly exp(-r^2/2)
        powers = np.where(n == 0, 0.0, n * log_r)
    log_mag = -0.5 * r * r + powers - 0.5 * log_factorial(n)
    phase = np.exp(-1j * n * np.angle(alpha)[..., None])
    result = np.sum(np.exp(log_mag) * phase * state.amplitudes, axis=-1)
    return complex(result) if result.ndim == 0 else result


def q_function(state, alpha):
    """Husimi function Q(alpha) = |<alpha|psi>|^2 / pi."""
    value = np.abs(coherent_overlap(state, alpha)) ** 2 / math.pi
    return float(value) if np.ndim(value) == 0 else value


def load_state(path):
    """Read a state file {"dim": N, "amplitudes": [{"re": x, "im": y}, ...]}."""
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON ({exc})") from exc
    try:
        dim = int(data["dim"])
        amps = np.array([complex(float(a["re"]), float(a.get("im", 0.0))) for a in data["amplitudes"]])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: malformed state file ({exc})") from exc
    if len(amps) != dim:
        raise ValidationError(f"{path}: dim is {dim} but {len(amps)} amplitudes given")
    norm = float(np.sum(np.abs(amps) ** 2))
    if abs(norm - 1.0) > FILE_NORM_TOL:
        raise ValidationError(f"{path}: state norm {norm!r} is outside 1 +/- {FILE_NORM_TOL:g}")
    return TruncatedState(dim, amps / math.sqrt(norm), f"file:{path}")


def save_state(state, path):
    data = {
        "dim": state.dim,
        "amplitudes": [{"re": float(c.real), "im": float(c.imag)} for c in state.amplitudes],
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")
