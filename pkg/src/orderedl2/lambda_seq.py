"""BHq-style regularizing sequences.

The base sequence is ``lambda_bh(k) = Phi^{-1}(1 - q k / (2 p))``. Each term
after the first is inflated by a correction factor

    lambda(k) = lambda_bh(k) * sqrt(1 + sum_{j<k} lambda_bh(j)^2 / D(k))

with denominator ``D(k)`` depending on the sample-size mode:

=========  ============
mode       D(k)
=========  ============
``n=p``    ``p - k - 1``
``n=2p``   ``2p - k - 1``
``n=<m>``  ``m - k``
=========  ============

The inflated sequence need not be monotone (small ``q`` makes it grow); with
``monotone_clip`` the running minimum is returned instead.
"""

import csv
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .exceptions import DegenerateDenominator, NonMonotone, OutOfDomain
from .penalty import RegularizationSequence

N_EQUALS_P = "n=p"
N_EQUALS_2P = "n=2p"

# Acklam's rational approximation (relative error ~1.15e-9 before refinement).
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425
_SQRT2 = np.sqrt(2.0)
_SQRT2PI = np.sqrt(2.0 * np.pi)


def norm_cdf(x):
    """Standard normal CDF, accurate in both tails."""
    return 0.5 * erfc(-np.asarray(x, dtype=float) / _SQRT2)


def _lower_quantile(t):
    """Quantile for ``0 < t <= 0.5`` (result is <= 0)."""
    x = np.empty_like(t)
    tail = t < _P_LOW
    if np.any(tail):
        r = np.sqrt(-2.0 * np.log(t[tail]))
        num = ((((_C[0] * r + _C[1]) * r + _C[2]) * r + _C[3]) * r + _C[4]) * r + _C[5]
        den = (((_D[0] * r + _D[1]) * r + _D[2]) * r + _D[3]) * r + 1.0
        x[tail] = num / den
    mid = ~tail
    if np.any(mid):
        s = t[mid] - 0.5
        r = s * s
        num = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * s
        den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
        x[mid] = num / den
    # one Halley step against the erfc-based CDF
    e = 0.5 * erfc(-x / _SQRT2) - t
    u = e * _SQRT2PI * np.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


def inv_norm_cdf(alpha):
    """Standard normal quantile ``Phi^{-1}(alpha)`` for ``0 < alpha < 1``.

    Works elementwise on arrays; returns a float for scalar input. The upper
    half is computed as ``-Phi^{-1}(1 - alpha)`` so the result is exactly odd
    whenever ``1 - alpha`` is representable.

    Raises
    ------
    OutOfDomain
        If any ``alpha`` is outside the open interval (0, 1).
    """
    a = np.asarray(alpha, dtype=float)
    if not np.all((a > 0.0) & (a < 1.0)):
        raise OutOfDomain("alpha must lie strictly between 0 and 1")
    flat = a.reshape(-1)
    upper = flat > 0.5
    t = np.where(upper, 1.0 - flat, flat)
    x = _lower_quantile(t)
    x = np.where(upper, -x, x)
    if a.ndim == 0:
        return float(x[0])
    return x.reshape(a.shape)


def _bh_values(k, p, q):
    k = np.asarray(k, dtype=float)
    frac = q * k / (2.0 * p)
    if np.any(frac >= 0.5):
        raise OutOfDomain(
            f"q*k/(2p) must stay below 1/2 for a positive lambda (q={q}, p={p}, k<={k.max():g})"
        )
    return inv_norm_cdf(1.0 - frac)


def bh_lambda(k, p, q):
    """``Phi^{-1}(1 - q k / (2 p))`` for a single rank ``k >= 1``."""
    if k < 1:
        raise OutOfDomain(f"k must be >= 1, got {k}")
    return float(_bh_values(k, p, q))


@dataclass(frozen=True)
class BhqConfig:
    """Parameters of a BHq sequence.

    ``n_mode`` is ``"n=p"``, ``"n=2p"`` or an explicit sample count ``n``.
    ``length=None`` picks the longest valid length: ``p - 2`` for ``n=p``,
    ``p`` for ``n=2p`` and ``min(p, n - 1)`` for explicit ``n``.
    """

    q: float
    p: int
    n_mode: object = N_EQUALS_P
    length: int = None
    monotone_clip: bool = True

    def __post_init__(self):
        if not 0.0 < self.q <= 1.0:
            raise ValueError(f"q must lie in (0, 1], got {self.q}")
        if self.p < 1:
            raise ValueError(f"p must be >= 1, got {self.p}")
        if isinstance(self.n_mode, str):
            if self.n_mode not in (N_EQUALS_P, N_EQUALS_2P):
                raise ValueError(f"unknown n_mode {self.n_mode!r}")
        elif int(self.n_mode) != self.n_mode or self.n_mode < 1:
            raise ValueError(f"explicit n must be a positive integer, got {self.n_mode!r}")
        K = self.K
        if not 1 <= K <= self.p:
            raise ValueError(f"length must lie in [1, p={self.p}], got {K}")

    @property
    def K(self):
        if self.length is not None:
            return int(self.length)
        if self.n_mode == N_EQUALS_P:
            return max(1, self.p - 2)
        if self.n_mode == N_EQUALS_2P:
            return self.p
        return max(1, min(self.p, int(self.n_mode) - 1))

    def denominators(self, k):
        k = np.asarray(k, dtype=float)
        if self.n_mode == N_EQUALS_P:
            return self.p - k - 1.0
        if self.n_mode == N_EQUALS_2P:
            return 2.0 * self.p - k - 1.0
        return float(self.n_mode) - k


def raw_lambda_sequence(cfg):
    """Base and inflated sequences ``(lambda_bh, lambda)`` before any clipping."""
    k = np.arange(1, cfg.K + 1)
    lam_bh = np.atleast_1d(_bh_values(k, cfg.p, cfg.q))
    lam = lam_bh.copy()
    if cfg.K > 1:
        D = cfg.denominators(k[1:])
        if np.any(D <= 0):
            bad = int(k[1:][np.argmax(D <= 0)])
            raise DegenerateDenominator(
                f"correction denominator is {cfg.denominators(bad):g} at k={bad} "
                f"(mode {cfg.n_mode}, p={cfg.p}); use a shorter length"
            )
        prefix = np.cumsum(lam_bh * lam_bh)[:-1]
        lam[1:] = lam_bh[1:] * np.sqrt(1.0 + prefix / D)
    return lam_bh, lam


def first_increase(values):
    """Index ``i`` of the first ``values[i+1] > values[i]``, or ``None``."""
    idx = np.flatnonzero(np.diff(values) > 0.0)
    return int(idx[0]) if idx.size else None


def sorted_lambda_sequence(cfg):
    """Regularizing sequence for ``cfg`` as a :class:`RegularizationSequence`.

    Raises
    ------
    NonMonotone
        If ``cfg.monotone_clip`` is off and the inflated sequence increases.
    DegenerateDenominator
        If a correction denominator is not positive.
    """
    _, lam = raw_lambda_sequence(cfg)
    if cfg.monotone_clip:
        lam = np.minimum.accumulate(lam)
    else:
        i = first_increase(lam)
        if i is not None:
            raise NonMonotone(
                f"lambda sequence increases at k={i + 2} (q={cfg.q}, mode {cfg.n_mode})", index=i
            )
    return RegularizationSequence(lam)


def lambda_table(cfg):
    """Columns ``k``, ``lambda_bh`` and ``lambda`` for plotting.

    ``lambda`` is clipped when ``cfg.monotone_clip`` is set and raw otherwise;
    no monotonicity error is raised here.
    """
    lam_bh, lam = raw_lambda_sequence(cfg)
    if cfg.monotone_clip:
        lam = np.minimum.accumulate(lam)
    return {"k": np.arange(1, cfg.K + 1), "lambda_bh": lam_bh, "lambda": lam}


def write_lambda_csv(path, table):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "lambda_bh", "lambda"])
        for k, a, b in zip(table["k"], table["lambda_bh"], table["lambda"]):
            w.writerow([int(k), f"{a:.17g}", f"{b:.17g}"])


def read_lambda_csv(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {"k": data[:, 0].astype(int), "lambda_bh": data[:, 1], "lambda": data[:, 2]}
