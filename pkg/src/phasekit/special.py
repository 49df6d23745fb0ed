"""Log-space factorials and Poisson tails.

Everything that involves n! or |alpha|^(2n) goes through logarithms so that
dimensions up to ~1024 do not overflow.
"""

import numpy as np
from scipy import special


def log_gamma(x):
    """Natural log of Gamma(x) for positive real ``x`` (scalar or array)."""
    return special.gammaln(x)


def log_factorial(n):
    """log(n!) for non-negative integers ``n``."""
    return special.gammaln(np.asarray(n, dtype=float) + 1.0)


def poisson_tail(mean, dim):
    """Probability that a Poisson(mean) variable is >= ``dim``.

    This is the weight a coherent state with |alpha|^2 = mean puts outside a
    Fock space of dimension ``dim``. Uses the regularized lower incomplete
    gamma function, which stays accurate when the tail is tiny.
    """
    if mean == 0:
        return 0.0
    return float(special.gammainc(dim, mean))


def min_coherent_dim(mean, tail=1e-10):
    """Smallest dimension whose Poisson tail does not exceed ``tail``."""
    dim = max(1, int(np.floor(mean)))
    while poisson_tail(mean, dim) > tail:
        dim += 1
    return dim
