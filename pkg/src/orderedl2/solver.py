"""Over-relaxed scaled-form ADMM for ordered ridge, ordered elastic net and lasso.

All three problems share the splitting ``min f(x) + g(z) s.t. x = z`` with
``f(x) = 0.5 ||Ax - b||^2``; they differ only in the z-update. One iteration:

    x   <- (A^T A + rho I)^{-1} (A^T b + rho (z - u))
    xh  <- alpha x + (1 - alpha) z
    z'  <- shrink(xh + u)
    u   <- u + alpha (x - z') + (1 - alpha) (z - z')

Stopping uses the primal residual ``r = x - z'`` and dual residual
``s = rho (z - z')`` against

    eps_pri  = sqrt(p) eps_abs + eps_rel max(||x||, ||z'||)
    eps_dual = sqrt(n) eps_abs + eps_rel ||rho u||

with ``n`` the number of rows of ``A``.
"""

import csv
import json
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import penalty
from .exceptions import ConvergenceWarning, DimensionMismatch, NonFiniteError
from .linalg import build_ridge_factor, ridge_solve

ORDERED_L2 = "ordered_l2"
ORDERED_ELASTIC_NET = "ordered_elastic_net"
LASSO = "lasso"
PENALTIES = (ORDERED_L2, ORDERED_ELASTIC_NET, LASSO)

TRACE_FIELDS = ("iter", "r_norm", "s_norm", "eps_pri", "eps_dual", "objective")


@dataclass(frozen=True)
class SolverConfig:
    """ADMM settings.

    ``trace_every`` keeps every k-th TraceRecord (the final one is always
    kept). ``penalty`` and ``alpha_en`` are only read by :func:`fit`.
    """

    rho: float = 1.0
    alpha: float = 1.0
    eps_abs: float = 1e-4
    eps_rel: float = 1e-2
    max_iter: int = 10000
    penalty: str = ORDERED_L2
    alpha_en: float = 0.1
    trace_every: int = 1

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if not 1.0 <= self.alpha <= 1.8:
            raise ValueError(f"alpha must lie in [1.0, 1.8], got {self.alpha}")
        if not (self.eps_abs > 0 and self.eps_rel > 0):
            raise ValueError("tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.penalty not in PENALTIES:
            raise ValueError(f"penalty must be one of {PENALTIES}, got {self.penalty!r}")
        if not 0.0 <= self.alpha_en <= 1.0:
            raise ValueError(f"alpha_en must lie in [0, 1], got {self.alpha_en}")
        if self.trace_every < 1:
            raise ValueError("trace_every must be >= 1")


@dataclass
class AdmmState:
    x: np.ndarray
    z: np.ndarray
    u: np.ndarray
    iter: int = 0

    @classmethod
    def zeros(cls, p):
        return cls(np.zeros(p), np.zeros(p), np.zeros(p), 0)


@dataclass(frozen=True)
class TraceRecord:
    iter: int
    r_norm: float
    s_norm: float
    eps_pri: float
    eps_dual: float
    objective: float


@dataclass
class FitResult:
    coefficients: np.ndarray
    converged: bool
    iterations: int
    trace: list = field(repr=False)
    nonzero_count: int
    wall_time: float
    state: AdmmState = field(repr=False, default=None)
    lambda_spec: dict = field(default_factory=dict)

    def to_dict(self, coefficients_path=None):
        out = {
            "converged": bool(self.converged),
            "iterations": int(self.iterations),
            "wall_time_s": float(self.wall_time),
            "nonzero_count": int(self.nonzero_count),
            "lambda_spec": self.lambda_spec,
        }
        if coefficients_path is not None:
            out["coefficients_path"] = str(coefficients_path)
        return out


def zero_tolerance(z):
    return 1e-6 * max(1.0, float(np.max(np.abs(z))) if z.size else 0.0)


def count_nonzero(z):
    return int(np.count_nonzero(np.abs(z) > zero_tolerance(z)))


def _check_problem(A, b):
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or b.ndim != 1 or A.shape[0] != b.shape[0]:
        raise DimensionMismatch(f"A {A.shape} and b {b.shape} are inconsistent")
    return A, b


def least_squares_loss(A, b, x):
    r = A @ x - b
    return 0.5 * float(r @ r)


def objective_ordered_ridge(A, b, x, lam):
    """``0.5 ||Ax - b||^2 + 0.5 J(x)``."""
    A, b = _check_problem(A, b)
    x = np.asarray(x, dtype=float)
    if x.shape != (A.shape[1],):
        raise DimensionMismatch(f"x has shape {x.shape}, expected ({A.shape[1]},)")
    return least_squares_loss(A, b, x) + 0.5 * penalty.ordered_l2_penalty(x, lam)


def objective_ordered_elastic_net(A, b, x, lam1, lam2):
    """``0.5 ||Ax - b||^2 + sum lam1_i |x|_(i) + 0.5 sum lam2_i x_(i)^2``."""
    A, b = _check_problem(A, b)
    x = np.asarray(x, dtype=float)
    return (least_squares_loss(A, b, x) + penalty.ordered_l1_penalty(x, lam1)
            + 0.5 * penalty.ordered_l2_penalty(x, lam2))


def objective_lasso(A, b, x, lam):
    A, b = _check_problem(A, b)
    x = np.asarray(x, dtype=float)
    return least_squares_loss(A, b, x) + lam * float(np.sum(np.abs(x)))


def compute_lambda_max(A, b):
    """``||A^T b||_inf``: the smallest lasso weight giving the zero solution."""
    A, b = _check_problem(A, b)
    return float(np.max(np.abs(A.T @ b)))


def x_update(f, z, u):
    """Exact minimizer of ``0.5 ||Ax - b||^2 + (rho/2) ||x - z + u||^2``."""
    return ridge_solve(f, f.Atb + f.rho * (np.asarray(z) - np.asarray(u)))


def relax(x_new, z_old, alpha):
    """``alpha * x_new + (1 - alpha) * z_old``."""
    x_new = np.asarray(x_new, dtype=float)
    z_old = np.asarray(z_old, dtype=float)
    if x_new.shape != z_old.shape:
        raise DimensionMismatch(f"shapes {x_new.shape} and {z_old.shape} differ")
    return alpha * x_new + (1.0 - alpha) * z_old


def stopping_thresholds(x, z, u, rho, n, eps_abs, eps_rel):
    """``(eps_pri, eps_dual)`` for the current iterates."""
    p = x.shape[0]
    eps_pri = np.sqrt(p) * eps_abs + eps_rel * max(np.linalg.norm(x), np.linalg.norm(z))
    eps_dual = np.sqrt(n) * eps_abs + eps_rel * np.linalg.norm(rho * u)
    return float(eps_pri), float(eps_dual)


def _run_admm(A, b, z_step, objective, cfg, lambda_spec):
    A, b = _check_problem(A, b)
    n, p = A.shape
    t0 = time.perf_counter()
    f = build_ridge_factor(A, b, cfg.rho)
    rho, alpha = cfg.rho, cfg.alpha
    st = AdmmState.zeros(p)
    trace = []
    converged = False
    rec = None
    for k in range(1, cfg.max_iter + 1):
        x = x_update(f, st.z, st.u)
        xh = relax(x, st.z, alpha)
        z_old = st.z
        z = z_step(xh + st.u)
        u = st.u + alpha * (x - z) + (1.0 - alpha) * (z_old - z)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(z)) and np.all(np.isfinite(u))):
            raise NonFiniteError(f"non-finite iterate at iteration {k}")
        st = AdmmState(x, z, u, k)

        r_norm = float(np.linalg.norm(x - z))
        s_norm = float(np.linalg.norm(rho * (z_old - z)))
        eps_pri, eps_dual = stopping_thresholds(x, z, u, rho, n, cfg.eps_abs, cfg.eps_rel)
        rec = TraceRecord(k, r_norm, s_norm, eps_pri, eps_dual, objective(z))
        converged = r_norm <= eps_pri and s_norm <= eps_dual
        if k % cfg.trace_every == 0 or converged or k == cfg.max_iter:
            trace.append(rec)
        if converged:
            break
    if not converged:
        warnings.warn(
            f"ADMM reached max_iter={cfg.max_iter} without converging", ConvergenceWarning,
            stacklevel=3,
        )
    wall = time.perf_counter() - t0
    return FitResult(
        coefficients=st.z.copy(),
        converged=converged,
        iterations=st.iter,
        trace=trace,
        nonzero_count=count_nonzero(st.z),
        wall_time=wall,
        state=st,
        lambda_spec=lambda_spec,
    )


def fit_ordered_ridge(A, b, lam, cfg=None):
    """Ordered ridge regression ``min 0.5||Ax-b||^2 + 0.5 J_lam(x)`` by ADMM.

    Parameters
    ----------
    A : (n, p) array_like
    b : (n,) array_like
    lam : RegularizationSequence or array_like of length p
    cfg : SolverConfig, optional

    Returns
    -------
    FitResult
        ``coefficients`` is the final ``z`` iterate.
    """
    cfg = cfg or SolverConfig()
    A, b = _check_problem(A, b)
    w = penalty._weights(lam, A.shape[1])
    rho = cfg.rho
    return _run_admm(
        A, b,
        lambda v: penalty.shrink_ordered_l2(v, w, rho),
        lambda z: objective_ordered_ridge(A, b, z, w),
        cfg,
        {"penalty": ORDERED_L2, "lambda_1": float(w[0]), "lambda_p": float(w[-1])},
    )


def fit_ordered_elastic_net(A, b, lam_bh, alpha_en, cfg=None):
    """Ordered elastic net with weights ``alpha_en * lam_bh`` (l1) and
    ``(1 - alpha_en) * lam_bh`` (l2)."""
    cfg = cfg or SolverConfig()
    if not 0.0 <= alpha_en <= 1.0:
        raise ValueError(f"alpha_en must lie in [0, 1], got {alpha_en}")
    A, b = _check_problem(A, b)
    w = penalty._weights(lam_bh, A.shape[1])
    lam1 = alpha_en * w
    lam2 = (1.0 - alpha_en) * w
    rho = cfg.rho
    return _run_admm(
        A, b,
        lambda v: penalty.shrink_ordered_elastic_net(v, lam1, lam2, rho),
        lambda z: objective_ordered_elastic_net(A, b, z, lam1, lam2),
        cfg,
        {"penalty": ORDERED_ELASTIC_NET, "alpha_en": float(alpha_en),
         "lambda_1": float(w[0]), "lambda_p": float(w[-1])},
    )


def fit_lasso(A, b, lambda_scalar, cfg=None):
    """Lasso ``min 0.5||Ax-b||^2 + lambda ||x||_1`` by the same ADMM loop."""
    cfg = cfg or SolverConfig()
    if not lambda_scalar > 0:
        raise ValueError(f"lambda must be positive, got {lambda_scalar}")
    A, b = _check_problem(A, b)
    kappa = lambda_scalar / cfg.rho
    return _run_admm(
        A, b,
        lambda v: penalty.soft_threshold(v, kappa),
        lambda z: objective_lasso(A, b, z, lambda_scalar),
        cfg,
        {"penalty": LASSO, "lambda": float(lambda_scalar)},
    )


def fit(A, b, lam, cfg):
    """Dispatch on ``cfg.penalty``; ``lam`` is a scalar for the lasso."""
    if cfg.penalty == ORDERED_L2:
        return fit_ordered_ridge(A, b, lam, cfg)
    if cfg.penalty == ORDERED_ELASTIC_NET:
        return fit_ordered_elastic_net(A, b, lam, cfg.alpha_en, cfg)
    return fit_lasso(A, b, float(lam), cfg)


def write_trace_csv(path, trace):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_FIELDS)
        for r in trace:
            w.writerow([r.iter] + [f"{getattr(r, k):.17g}" for k in TRACE_FIELDS[1:]])


def read_trace_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [
        TraceRecord(int(r["iter"]), *(float(r[k]) for k in TRACE_FIELDS[1:])) for r in rows
    ]


def write_result_json(path, result, coefficients_path=None, extra=None):
    payload = result.to_dict(coefficients_path)
    if extra:
        payload.update(extra)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return payload
