"""Dense-matrix kernels the rest of the package is built on.

Provides truncated SVD approximation, bilateral-random-projection (BRP)
low-rank approximation, orthonormal row-basis extraction and global
top-k hard thresholding. All routines are pure functions of their inputs
plus, where randomness is involved, an explicit seed or generator, so
they are safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from .errors import DegenerateProjectionError, InvalidInputError

# Above this estimated condition number the sketch core matrix gets a
# ridge before solving.
CONDITION_LIMIT = 1e12

_MODES = ("svd", "brp")


@dataclass(frozen=True)
class LowRankApproxConfig:
    """How to compute a rank-limited approximation.

    target_rank: rank budget r; values above min(rows, cols) are clamped.
    mode: "svd" for the exact truncated SVD, "brp" for the randomized path.
    power_passes: number of adaptive re-projection rounds in BRP mode.
    regularization_epsilon: ridge added to the sketch core matrix when it
        is ill-conditioned; None selects 1e-10 times its Frobenius norm.
    """

    target_rank: int
    mode: str = "svd"
    power_passes: int = 1
    regularization_epsilon: float | None = None

    def __post_init__(self):
        if self.mode not in _MODES:
            raise InvalidInputError(f"unknown approximation mode {self.mode!r}, expected one of {_MODES}")
        if self.target_rank < 1:
            raise InvalidInputError(f"target_rank must be >= 1, got {self.target_rank}")
        if self.power_passes < 1:
            raise InvalidInputError(f"power_passes must be >= 1, got {self.power_passes}")
        if self.regularization_epsilon is not None and self.regularization_epsilon < 0:
            raise InvalidInputError("regularization_epsilon must be nonnegative")


def as_matrix(m, name="matrix", require_finite=True) -> np.ndarray:
    """Coerce to a 2-D float64 array, rejecting non-finite entries."""
    out = np.asarray(m, dtype=np.float64)
    if out.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-D, got shape {out.shape}")
    if require_finite and out.size and not np.isfinite(out).all():
        raise InvalidInputError(f"{name} contains NaN or Inf entries")
    return out


def frobenius_norm_sq(m) -> float:
    """Sum of squared entries."""
    m = np.asarray(m, dtype=np.float64)
    return float(np.sum(m * m))


def truncated_svd_approx(m, rank: int) -> np.ndarray:
    """Best rank-<=rank approximation via the top singular triplets.

    The squared Frobenius error equals the sum of the squared discarded
    singular values.
    """
    m = as_matrix(m)
    if rank < 1:
        raise InvalidInputError(f"rank must be >= 1, got {rank}")
    if min(m.shape) == 0:
        return np.zeros_like(m)
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    r = min(rank, s.size)
    return (u[:, :r] * s[:r]) @ vt[:r]


def brp_low_rank_approx(m, cfg: LowRankApproxConfig, rng=0) -> np.ndarray:
    """Randomized rank-<=r approximation via bilateral random projections.

    Draws an r-column standard Gaussian test matrix, sketches the input
    from both sides with adaptive re-projection, and combines the sketches
    through a linear solve of the small core matrix (never an explicit
    inverse). Deterministic for a fixed seed/generator.

    Raises DegenerateProjectionError when the core matrix stays singular
    after regularization; callers may retry with a fresh seed.
    """
    m = as_matrix(m)
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    n, p = m.shape
    r = min(cfg.target_rank, n, p)
    if r == 0 or not np.any(m):
        return np.zeros_like(m)

    sketch_right = m @ rng.standard_normal((p, r))
    for _ in range(cfg.power_passes):
        probe = sketch_right
        sketch_left = m.T @ sketch_right
        sketch_right = m @ sketch_left
    core = probe.T @ sketch_right

    if np.linalg.cond(core) > CONDITION_LIMIT:
        eps = cfg.regularization_epsilon
        if eps is None:
            eps = 1e-10 * np.linalg.norm(core)
        core = core + eps * np.eye(r)
        if np.linalg.cond(core) > CONDITION_LIMIT:
            raise DegenerateProjectionError(
                "sketch core matrix stays singular after regularization; retry with another seed"
            )
    try:
        combined = sla.solve(core, sketch_left.T)
    except (sla.LinAlgError, np.linalg.LinAlgError) as exc:
        raise DegenerateProjectionError(f"sketch core matrix is singular: {exc}") from exc
    if not np.isfinite(combined).all():
        raise DegenerateProjectionError("sketch core matrix solve produced non-finite values")
    return sketch_right @ combined


def orthonormal_row_basis(m, max_rank: int) -> np.ndarray:
    """Orthonormal rows spanning the row space of m, at most max_rank of them.

    Computed through a column-pivoted QR factorization of the transpose;
    the numerical rank is read off the diagonal of the triangular factor.
    An all-zero (or zero-sized) input yields a 0-row basis.
    """
    m = as_matrix(m)
    p = m.shape[1]
    if max_rank < 0:
        raise InvalidInputError(f"max_rank must be >= 0, got {max_rank}")
    if m.shape[0] == 0 or max_rank == 0 or not np.any(m):
        return np.zeros((0, p))
    q, r, _ = sla.qr(m.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    tol = diag[0] * max(m.shape) * np.finfo(np.float64).eps
    rank = int(np.count_nonzero(diag > tol))
    rank = min(rank, max_rank)
    return np.ascontiguousarray(q[:, :rank].T)


def hard_threshold_top_k(m, k: int) -> tuple[np.ndarray, set[tuple[int, int]]]:
    """Keep the k entries of largest magnitude, zero the rest.

    Returns the thresholded matrix and the support as a set of
    (row, col) pairs. Exact zeros never enter the support, so fewer than
    k entries may be kept. Ties on equal magnitude are broken toward the
    smaller (row, col) index in row-major order, which makes the result
    deterministic.
    """
    m = as_matrix(m)
    rows, cols = m.shape
    if k < 0 or k > m.size:
        raise InvalidInputError(f"k must be in [0, {m.size}], got {k}")
    out = np.zeros_like(m)
    if k == 0 or m.size == 0:
        return out, set()

    flat_abs = np.abs(m).ravel()
    nnz = int(np.count_nonzero(flat_abs))
    keep = min(k, nnz)
    if keep == 0:
        return out, set()
    if keep == nnz:
        idx = np.flatnonzero(flat_abs)
    else:
        # value of the keep-th largest entry; flatnonzero preserves
        # row-major order, which realizes the tie-break
        cut = np.partition(flat_abs, flat_abs.size - keep)[flat_abs.size - keep]
        above = np.flatnonzero(flat_abs > cut)
        ties = np.flatnonzero(flat_abs == cut)[: keep - above.size]
        idx = np.concatenate([above, ties])
    out.ravel()[idx] = m.ravel()[idx]
    support = {(int(i) // cols, int(i) % cols) for i in idx}
    return out, support


def flop_estimate(rows: int, cols: int, rank: int, mode: str = "svd", power_passes: int = 1) -> int:
    """Crude floating-point operation count for one low-rank approximation.

    Matmul terms are counted as 2*m*n*k; the SVD term uses the classical
    dense bound. Intended for relative comparisons only.
    """
    if mode == "svd":
        return 2 * rows * cols * min(rows, cols) + 2 * rows * cols * rank
    if mode == "brp":
        sketch = 2 * rows * cols * rank
        passes = power_passes * 2 * (2 * rows * cols * rank)
        core = 2 * rank * rank * rows + 2 * rank ** 3 // 3 + 2 * rank * rank * cols
        combine = 2 * rows * rank * cols
        return sketch + passes + core + combine
    raise InvalidInputError(f"unknown mode {mode!r}")
