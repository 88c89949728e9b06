"""The ordered l2 penalty and the shrinkage operators used by the z-updates.

For a non-increasing weight vector ``lam`` the ordered l2 penalty is

    J(x) = sum_i lam[i] * x_(i)^2

where ``x_(i)^2`` is the i-th largest squared entry of ``x``. Its square root
is a norm whenever ``lam[0] > 0``.

Weights are matched to coordinates by rank: the coordinate holding the i-th
largest magnitude gets ``lam[i]``. Ties are broken by ascending original
index so the assignment is deterministic.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatch, NonMonotone, TooLarge

ORACLE_MAX_SIZE = 6


@dataclass(frozen=True, init=False)
class RegularizationSequence:
    """Non-increasing, non-negative weights with a strictly positive head.

    Parameters
    ----------
    values : array_like
        ``lam[0] >= lam[1] >= ... >= lam[p-1] >= 0`` and ``lam[0] > 0``.

    Raises
    ------
    NonMonotone
        If the values increase anywhere.
    ValueError
        On negative, non-finite or all-zero values.
    """

    values: np.ndarray

    def __init__(self, values):
        lam = np.array(values, dtype=float).reshape(-1)
        _check_weights(lam)
        if lam[0] <= 0.0:
            raise ValueError("the largest weight must be strictly positive")
        lam.setflags(write=False)
        object.__setattr__(self, "values", lam)

    def __len__(self):
        return self.values.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, RegularizationSequence):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    __hash__ = None

    def scaled(self, c):
        """Return ``c * self`` (``c`` must be positive)."""
        return RegularizationSequence(c * self.values)


def _check_weights(lam):
    if lam.ndim != 1 or lam.shape[0] == 0:
        raise ValueError("weights must be a non-empty 1-D array")
    if not np.all(np.isfinite(lam)):
        raise ValueError("weights must be finite")
    if np.any(lam < 0.0):
        raise ValueError("weights must be non-negative")
    increases = np.flatnonzero(np.diff(lam) > 0.0)
    if increases.size:
        i = int(increases[0])
        raise NonMonotone(
            f"weights increase at position {i + 1} ({lam[i]!r} -> {lam[i + 1]!r})", index=i
        )


def _weights(lam, p):
    """Validated weight array for a length-``p`` vector.

    Accepts a :class:`RegularizationSequence` or any non-increasing,
    non-negative array (all zeros allowed, for limit cases).
    """
    if isinstance(lam, RegularizationSequence):
        w = lam.values
    else:
        w = np.asarray(lam, dtype=float).reshape(-1)
        _check_weights(w)
    if w.shape[0] != p:
        raise DimensionMismatch(f"weights have length {w.shape[0]}, vector has length {p}")
    return w


def _vector(x):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionMismatch(f"expected a 1-D vector, got shape {x.shape}")
    return x


@dataclass(frozen=True)
class OrderStatisticView:
    """Rank view of a vector's magnitudes.

    ``permutation[i]`` is the original index of the i-th largest magnitude and
    ``magnitudes[i] = |x[permutation[i]]|``.
    """

    permutation: np.ndarray
    magnitudes: np.ndarray


def order_statistics(x):
    x = _vector(x)
    a = np.abs(x)
    perm = np.argsort(-a, kind="stable")
    return OrderStatisticView(permutation=perm, magnitudes=a[perm])


def ordered_l2_penalty(x, lam):
    """``sum_i lam[i] * x_(i)^2``."""
    x = _vector(x)
    w = _weights(lam, x.shape[0])
    m = order_statistics(x).magnitudes
    return float(np.sum(w * (m * m)))


def sqrt_ordered_l2(x, lam):
    """Square root of :func:`ordered_l2_penalty`; a norm on R^p.

    Evaluated on ``x / max|x|`` and rescaled, so tiny or huge entries do not
    underflow or overflow when squared.
    """
    x = _vector(x)
    w = _weights(lam, x.shape[0])
    m = order_statistics(x).magnitudes
    top = m[0] if m.size else 0.0
    if top == 0.0:
        return 0.0
    s = m / top
    return float(top * np.sqrt(np.sum(w * (s * s))))


def ordered_l1_penalty(x, lam):
    """``sum_i lam[i] * |x|_(i)`` (sorted l1 norm)."""
    x = _vector(x)
    w = _weights(lam, x.shape[0])
    return float(np.sum(w * order_statistics(x).magnitudes))


def _rank_matched(v, w):
    """Weights reordered so ``out[j]`` is the weight of coordinate ``j``'s rank."""
    out = np.empty_like(w)
    out[order_statistics(v).permutation] = w
    return out


def shrink_ordered_l2(v, lam, rho):
    """Rank-matched ridge shrinkage ``z_j = rho * v_j / (lam_(rank j) + rho)``.

    This is the closed-form z-update of ordered ridge ADMM. It coincides with
    the proximal map of ``J / 2`` whenever shrinking does not reorder the
    magnitudes; :func:`prox_oracle_small` measures the gap otherwise.
    """
    v = _vector(v)
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    w = _rank_matched(v, _weights(lam, v.shape[0]))
    return rho * v / (w + rho)


def shrink_ordered_elastic_net(v, lam1, lam2, rho):
    """Rank-matched elastic-net shrinkage.

    Per coordinate, with the weights of its rank::

        z = ((rho v - l1) / (l2 + rho))_+ - ((-rho v - l1) / (l2 + rho))_+
    """
    v = _vector(v)
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    p = v.shape[0]
    perm = order_statistics(v).permutation
    w1 = np.empty(p)
    w2 = np.empty(p)
    w1[perm] = _weights(lam1, p)
    w2[perm] = _weights(lam2, p)
    denom = w2 + rho
    return np.maximum(0.0, (rho * v - w1) / denom) - np.maximum(0.0, (-rho * v - w1) / denom)


def soft_threshold(v, kappa):
    """``sign(v) * max(0, |v| - kappa)``, elementwise."""
    if kappa < 0:
        raise ValueError(f"kappa must be non-negative, got {kappa}")
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(0.0, np.abs(v) - kappa)


def prox_objective(z, v, lam, rho):
    """``0.5 * J(z) + (rho / 2) * ||v - z||^2``."""
    z = _vector(z)
    d = np.asarray(v, dtype=float) - z
    return 0.5 * ordered_l2_penalty(z, lam) + 0.5 * rho * float(d @ d)


def prox_oracle_small(v, lam, rho):
    """Exhaustive minimizer of :func:`prox_objective` over rank assignments.

    Every permutation of the weights is tried as a fixed coordinate
    assignment; each gives a diagonal problem with closed-form solution, which
    is then scored with the true (sorted) objective. The best one is returned.

    Raises
    ------
    TooLarge
        If ``len(v) > 6``.
    """
    v = _vector(v)
    p = v.shape[0]
    if p > ORACLE_MAX_SIZE:
        raise TooLarge(f"oracle enumerates p! assignments; p={p} exceeds {ORACLE_MAX_SIZE}")
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    w = _weights(lam, p)
    best, best_val = None, np.inf
    for perm in itertools.permutations(range(p)):
        z = rho * v / (w[list(perm)] + rho)
        val = prox_objective(z, v, w, rho)
        if val < best_val:
            best, best_val = z, val
    return best
