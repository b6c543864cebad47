"""Group-sparse representation of a sample on the multi-subspace.

Solves, over the stacked row coefficient vector, a least-squares fit of
the sample penalized by the sum of per-group Euclidean norms. The solver
is proximal gradient descent with group soft-thresholding, optionally
accelerated, and certifies its answer through the group-wise KKT
residual, so any correct solver is interchangeable.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

# relative accuracy of the power-iteration step-size estimate
_POWER_TOLERANCE = 1e-6
_POWER_MAX_ITERS = 1000


@dataclass(frozen=True)
class SolverConfig:
    lam: float
    max_iters: int = 1000
    kkt_tolerance: float = 1e-6
    acceleration: bool = True

    def __post_init__(self):
        if self.lam < 0:
            raise InvalidInputError("the penalty weight must be nonnegative")
        if self.kkt_tolerance <= 0:
            raise InvalidInputError("kkt_tolerance must be positive")
        if self.max_iters < 1:
            raise InvalidInputError("max_iters must be >= 1")


@dataclass
class GroupSparseCoefficients:
    """Solver output: the coefficient vector plus its certificate."""

    beta: np.ndarray
    groups: list[tuple[int, int]]
    converged: bool = True
    iterations: int = 0
    kkt: float = 0.0
    empty_model: bool = False

    def group_norms(self, kind: str = "l2") -> np.ndarray:
        order = 1 if kind == "l1" else 2
        return np.array(
            [np.linalg.norm(self.beta[start:stop], ord=order) if stop > start else 0.0
             for start, stop in self.groups]
        )


def prox_group_soft_threshold(v: np.ndarray, groups, threshold: float) -> np.ndarray:
    """Shrink each group toward zero: out_g = max(0, 1 - t/||v_g||) v_g."""
    if threshold < 0:
        raise InvalidInputError("threshold must be nonnegative")
    v = np.asarray(v, dtype=np.float64)
    out = v.copy()
    if threshold == 0:
        return out
    for start, stop in groups:
        norm = np.linalg.norm(v[start:stop])
        if norm <= threshold:
            out[start:stop] = 0.0
        else:
            out[start:stop] *= 1.0 - threshold / norm
    return out


def _check_sample(x, model) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size != model.n_features:
        raise InvalidInputError(f"sample has length {x.size}, model expects {model.n_features}")
    if not np.isfinite(x).all():
        raise InvalidInputError("sample contains NaN or Inf entries")
    return x


def _check_beta(beta, model) -> np.ndarray:
    beta = np.asarray(beta, dtype=np.float64).ravel()
    if beta.size != model.total_width:
        raise InvalidInputError(f"coefficients have length {beta.size}, model expects {model.total_width}")
    return beta


def objective_value(beta, x, model, lam: float) -> float:
    """0.5 * squared fit error plus the weighted group-norm penalty."""
    x = _check_sample(x, model)
    beta = _check_beta(beta, model)
    dictionary = model.stacked_basis()
    fit = x - beta @ dictionary
    penalty = sum(
        np.linalg.norm(beta[start:stop]) for start, stop in model.group_layout if stop > start
    )
    return float(0.5 * fit @ fit + lam * penalty)


def kkt_residual(beta, x, model, lam: float) -> float:
    """Max group-wise violation of the first-order optimality conditions.

    Active groups measure the norm of gradient plus the penalty
    subgradient along the group direction; zero groups measure how far
    the gradient norm exceeds the penalty weight.
    """
    x = _check_sample(x, model)
    beta = _check_beta(beta, model)
    dictionary = model.stacked_basis()
    if dictionary.shape[0] == 0:
        return 0.0
    grad = (beta @ dictionary - x) @ dictionary.T
    worst = 0.0
    for start, stop in model.group_layout:
        if stop == start:
            continue
        g = grad[start:stop]
        b = beta[start:stop]
        norm_b = np.linalg.norm(b)
        if norm_b > 0:
            violation = np.linalg.norm(g + lam * b / norm_b)
        else:
            violation = max(0.0, np.linalg.norm(g) - lam)
        worst = max(worst, float(violation))
    return worst


def _largest_eigenvalue(gram: np.ndarray) -> float:
    """Top eigenvalue of a PSD matrix by power iteration."""
    n = gram.shape[0]
    v = np.full(n, 1.0 / np.sqrt(n))
    estimate = 0.0
    for _ in range(_POWER_MAX_ITERS):
        w = gram @ v
        norm = np.linalg.norm(w)
        if norm == 0:
            return 0.0
        v = w / norm
        current = float(v @ gram @ v)
        if abs(current - estimate) <= _POWER_TOLERANCE * max(abs(current), 1e-300):
            return current
        estimate = current
    return estimate


def solve(x, model, cfg: SolverConfig, start=None) -> GroupSparseCoefficients:
    """Proximal gradient solve with a KKT-residual stopping certificate.

    Runs from zero (or a warm ``start``) with step size one over the top
    eigenvalue of the basis Gram matrix; returns once the residual drops
    to ``kkt_tolerance``, else the best iterate at ``max_iters`` with
    ``converged`` unset. A model whose groups are all empty yields an
    empty coefficient vector and a warning.
    """
    x = _check_sample(x, model)
    groups = model.group_layout
    dictionary = model.stacked_basis()
    width = dictionary.shape[0]
    if width == 0:
        warnings.warn("model has no basis rows; returning an empty representation")
        return GroupSparseCoefficients(
            beta=np.zeros(0), groups=groups, converged=True, iterations=0, kkt=0.0, empty_model=True
        )

    gram = dictionary @ dictionary.T
    lipschitz = _largest_eigenvalue(gram)
    # inflate to cover the residual power-iteration underestimate
    step = 1.0 / (lipschitz * (1.0 + 10 * _POWER_TOLERANCE))

    if start is not None:
        beta = np.asarray(start, dtype=np.float64).ravel().copy()
        if beta.size != width:
            raise InvalidInputError(f"warm start has length {beta.size}, expected {width}")
    else:
        beta = np.zeros(width)
    momentum = beta.copy()
    t_prev = 1.0

    projected = x @ dictionary.T
    iterations = 0
    residual = kkt_residual(beta, x, model, cfg.lam)
    converged = residual <= cfg.kkt_tolerance
    while not converged and iterations < cfg.max_iters:
        iterations += 1
        grad = (momentum @ gram) - projected
        candidate = prox_group_soft_threshold(momentum - step * grad, groups, step * cfg.lam)
        if cfg.acceleration:
            t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_prev * t_prev))
            momentum = candidate + ((t_prev - 1.0) / t_next) * (candidate - beta)
            t_prev = t_next
        else:
            momentum = candidate
        beta = candidate
        residual = kkt_residual(beta, x, model, cfg.lam)
        converged = residual <= cfg.kkt_tolerance
    return GroupSparseCoefficients(
        beta=beta,
        groups=groups,
        converged=bool(converged),
        iterations=iterations,
        kkt=float(residual),
    )
