"""Training stage: structured low-rank + sparse decomposition.

The data matrix is split into one component per label, each supported on
the rows that carry the label and rank-limited there, plus a globally
sparse residual with a cardinality budget. Alternating minimization
cycles through the label components (ascending label order) and the
residual; each subproblem has a closed-form global solution, so with the
exact SVD path the objective never increases from one recorded point to
the next. Per-label orthonormal row bases extracted from the final
components form the multi-subspace model used for prediction.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .data import FeatureTransform, LabeledDataset
from .errors import (
    DegenerateProjectionError,
    InvalidInputError,
    NumericalDivergenceError,
)
from .linalg import (
    LowRankApproxConfig,
    brp_low_rank_approx,
    frobenius_norm_sq,
    hard_threshold_top_k,
    orthonormal_row_basis,
    truncated_svd_approx,
)


@dataclass(frozen=True)
class TrainingConfig:
    """Hyperparameters of one training run.

    rank: shared rank budget, or one budget per label. Budgets larger
        than a label's row count (or the feature dimension) are clamped.
    sparsity: residual cardinality budget; an int is an absolute entry
        count, a float in [0, 1) is a fraction of the matrix size.
    epsilon: stop once the objective falls to this value or below.
    max_rounds: hard cap on full update rounds.
    relative_tolerance: additionally stop when a full round shrinks the
        objective by less than this relative amount.
    approx: "svd" for exact rank truncation, "brp" for the randomized path.
    """

    rank: int | tuple[int, ...] = 3
    sparsity: int | float = 0.0
    epsilon: float = 1e-6
    max_rounds: int = 50
    relative_tolerance: float = 1e-6
    approx: str = "svd"
    power_passes: int = 1
    regularization_epsilon: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.epsilon <= 0:
            raise InvalidInputError("epsilon must be positive")
        if self.max_rounds < 1:
            raise InvalidInputError("max_rounds must be >= 1")
        if self.approx not in ("svd", "brp"):
            raise InvalidInputError(f"unknown approximation mode {self.approx!r}")
        if isinstance(self.sparsity, float) and not isinstance(self.sparsity, bool):
            if not 0.0 <= self.sparsity < 1.0:
                raise InvalidInputError("a fractional sparsity budget must lie in [0, 1)")
        elif self.sparsity < 0:
            raise InvalidInputError("sparsity budget must be nonnegative")

    def resolved_ranks(self, ds: LabeledDataset) -> list[int]:
        """Per-label rank budgets clamped to each label's feasible maximum."""
        if isinstance(self.rank, int):
            ranks = [self.rank] * ds.n_labels
        else:
            ranks = list(self.rank)
            if len(ranks) != ds.n_labels:
                raise InvalidInputError(f"got {len(ranks)} ranks for {ds.n_labels} labels")
        out = []
        for i, r in enumerate(ranks):
            if r < 1:
                raise InvalidInputError(f"rank for label {i} must be >= 1, got {r}")
            out.append(min(r, len(ds.label_rows[i]), ds.n_features))
        return out

    def resolved_sparsity(self, ds: LabeledDataset) -> int:
        size = ds.n_samples * ds.n_features
        if isinstance(self.sparsity, float) and not isinstance(self.sparsity, bool):
            budget = int(round(self.sparsity * size))
        else:
            budget = int(self.sparsity)
        if budget > size:
            raise InvalidInputError(f"sparsity budget {budget} exceeds the {size} matrix entries")
        return budget

    def to_dict(self) -> dict:
        return {
            "rank": self.rank if isinstance(self.rank, int) else list(self.rank),
            "sparsity": self.sparsity,
            "epsilon": self.epsilon,
            "max_rounds": self.max_rounds,
            "relative_tolerance": self.relative_tolerance,
            "approx": self.approx,
            "power_passes": self.power_passes,
            "regularization_epsilon": self.regularization_epsilon,
            "seed": self.seed,
        }


@dataclass
class DecompositionState:
    """Current iterate: per-label components, sparse residual, trace.

    Component i is zero outside the rows carrying label i; the residual
    support never exceeds the cardinality budget. objective_trace records
    the objective after every sub-update.
    """

    components: list[np.ndarray]
    residual: np.ndarray
    support: set[tuple[int, int]]
    objective_trace: list[float]


@dataclass
class MultiSubspaceModel:
    """Learned per-label subspaces plus everything prediction needs.

    bases[i] is an orthonormal-row matrix spanning the subspace of label
    i (possibly 0 rows for labels without usable training rows);
    group_layout[i] is the half-open (start, stop) range of label i's
    coefficients inside the stacked coefficient vector.
    """

    bases: list[np.ndarray]
    group_layout: list[tuple[int, int]]
    n_features: int
    ranks: list[int]
    training: dict
    dataset_fingerprint: str = ""
    normalization: FeatureTransform | None = None
    label_names: list[str] | None = None

    def __post_init__(self):
        offset = 0
        for i, (basis, (start, stop)) in enumerate(zip(self.bases, self.group_layout)):
            basis = np.asarray(basis, dtype=np.float64)
            self.bases[i] = basis
            if basis.ndim != 2 or basis.shape[1] != self.n_features:
                raise InvalidInputError(f"basis {i} has shape {basis.shape}, expected (*, {self.n_features})")
            if (start, stop) != (offset, offset + basis.shape[0]):
                raise InvalidInputError("group layout is not contiguous in label order")
            offset = stop
            if basis.shape[0]:
                gram = basis @ basis.T
                if not np.allclose(gram, np.eye(basis.shape[0]), atol=1e-8):
                    raise InvalidInputError(f"basis {i} does not have orthonormal rows")

    @property
    def n_labels(self) -> int:
        return len(self.bases)

    @property
    def total_width(self) -> int:
        return self.group_layout[-1][1] if self.group_layout else 0

    def group_widths(self) -> list[int]:
        return [stop - start for start, stop in self.group_layout]

    def stacked_basis(self) -> np.ndarray:
        """All basis rows stacked in label order, shape (total_width, p)."""
        if not self.bases:
            return np.zeros((0, self.n_features))
        return np.vstack([np.zeros((0, self.n_features))] + self.bases)


def group_layout_from_widths(widths) -> list[tuple[int, int]]:
    layout, offset = [], 0
    for w in widths:
        layout.append((offset, offset + int(w)))
        offset += int(w)
    return layout


@dataclass
class TrainingDiagnostics:
    """What happened during a training run."""

    rounds: int
    stop_reason: str
    initial_objective: float
    final_objective: float
    round_objectives: list[float] = field(default_factory=list)
    round_seconds: list[float] = field(default_factory=list)
    total_seconds: float = 0.0


def objective(state: DecompositionState, ds: LabeledDataset) -> float:
    """Squared Frobenius norm of the unexplained part of the data."""
    remainder = ds.features - np.add.reduce(state.components) - state.residual
    return frobenius_norm_sq(remainder)


def initialize(ds: LabeledDataset) -> DecompositionState:
    """Seed the iterate by splitting each sample evenly over its labels.

    Rows with no labels contribute nothing to any component and can only
    be absorbed by the sparse residual later. The residual starts at zero
    and the trace is seeded with the starting objective.
    """
    counts = ds.labels.sum(axis=1).astype(np.float64)
    shared = np.zeros_like(ds.features)
    labeled = counts > 0
    shared[labeled] = ds.features[labeled] / counts[labeled, None]
    components = []
    for rows in ds.label_rows:
        comp = np.zeros_like(ds.features)
        comp[rows] = shared[rows]
        components.append(comp)
    state = DecompositionState(
        components=components,
        residual=np.zeros_like(ds.features),
        support=set(),
        objective_trace=[],
    )
    state.objective_trace.append(objective(state, ds))
    return state


def _rank_limited(block: np.ndarray, rank: int, cfg: TrainingConfig, rng) -> np.ndarray:
    """Rank-limited approximation of one residual block per config.

    A degenerate random sketch is retried once with fresh randomness and
    then falls back to the exact SVD for this sub-update.
    """
    if cfg.approx == "svd":
        return truncated_svd_approx(block, rank)
    approx_cfg = LowRankApproxConfig(
        target_rank=rank,
        mode="brp",
        power_passes=cfg.power_passes,
        regularization_epsilon=cfg.regularization_epsilon,
    )
    for _ in range(2):
        try:
            return brp_low_rank_approx(block, approx_cfg, rng)
        except DegenerateProjectionError:
            continue
    return truncated_svd_approx(block, rank)


def update_label_component(
    state: DecompositionState,
    ds: LabeledDataset,
    cfg: TrainingConfig,
    label: int,
    rng=None,
) -> DecompositionState:
    """Refit one label's component to the residual left by the others.

    The rows of label ``label`` get the rank-limited approximation of
    what the other components and the sparse residual do not explain;
    all other rows stay zero. Labels without any rows are left untouched.
    """
    if not 0 <= label < ds.n_labels:
        raise InvalidInputError(f"label index {label} outside [0, {ds.n_labels})")
    rows = ds.label_rows[label]
    if rows.size == 0:
        return state
    if rng is None or not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(cfg.seed if rng is None else rng)
    rank = cfg.resolved_ranks(ds)[label]

    block = ds.features[rows] - state.residual[rows]
    for j, comp in enumerate(state.components):
        if j != label:
            block = block - comp[rows]
    refit = np.zeros_like(ds.features)
    refit[rows] = _rank_limited(block, rank, cfg, rng)

    components = list(state.components)
    components[label] = refit
    new_state = DecompositionState(
        components=components,
        residual=state.residual,
        support=state.support,
        objective_trace=list(state.objective_trace),
    )
    new_state.objective_trace.append(objective(new_state, ds))
    return new_state


def update_sparse_residual(
    state: DecompositionState, ds: LabeledDataset, cfg: TrainingConfig
) -> DecompositionState:
    """Recompute the sparse residual as the top-K remainder entries."""
    budget = cfg.resolved_sparsity(ds)
    remainder = ds.features - np.add.reduce(state.components)
    residual, support = hard_threshold_top_k(remainder, budget)
    new_state = DecompositionState(
        components=state.components,
        residual=residual,
        support=support,
        objective_trace=list(state.objective_trace),
    )
    new_state.objective_trace.append(objective(new_state, ds))
    return new_state


def _project_to_rank_budgets(
    state: DecompositionState, ds: LabeledDataset, ranks: list[int]
) -> DecompositionState:
    """Clip every initial component to its rank budget.

    The even-split initialization reproduces the labeled rows exactly but
    generally violates the rank constraints, which would make the first
    recorded objective meaningless as a stopping reference. Truncating
    each component first makes every recorded iterate feasible, so the
    monotonicity guarantee of the exact-SVD path holds over the whole
    trace. The trace is restarted at the projected iterate.
    """
    components = []
    for i, rows in enumerate(ds.label_rows):
        comp = np.zeros_like(ds.features)
        if rows.size and ranks[i] > 0:
            comp[rows] = truncated_svd_approx(state.components[i][rows], ranks[i])
        components.append(comp)
    projected = DecompositionState(
        components=components,
        residual=state.residual,
        support=state.support,
        objective_trace=[],
    )
    projected.objective_trace.append(objective(projected, ds))
    return projected


def train(
    ds: LabeledDataset, cfg: TrainingConfig
) -> tuple[MultiSubspaceModel, DecompositionState, TrainingDiagnostics]:
    """Run the full alternating minimization and extract the model.

    Per round, every label with at least one row is refit in ascending
    label order, then the sparse residual is recomputed. The run stops
    when the objective reaches ``epsilon``, when a full round improves it
    by less than ``relative_tolerance`` (relatively), or at
    ``max_rounds``. Bases are the orthonormal row spaces of the final
    components, clipped to the per-label rank budgets.
    """
    ranks = cfg.resolved_ranks(ds)
    cfg.resolved_sparsity(ds)
    rng = np.random.default_rng(cfg.seed)

    start = time.perf_counter()
    state = _project_to_rank_budgets(initialize(ds), ds, ranks)
    initial = state.objective_trace[0]
    if not np.isfinite(initial):
        raise NumericalDivergenceError("initialization produced a non-finite objective")

    round_objectives: list[float] = []
    round_seconds: list[float] = []
    rounds = 0
    stop_reason = "epsilon" if initial <= cfg.epsilon else "max_rounds"
    if initial > cfg.epsilon:
        for _ in range(cfg.max_rounds):
            round_start = time.perf_counter()
            before = state.objective_trace[-1]
            for i in range(ds.n_labels):
                state = update_label_component(state, ds, cfg, i, rng)
                if not np.isfinite(state.objective_trace[-1]):
                    raise NumericalDivergenceError(
                        f"non-finite objective after updating the component of label {i}"
                    )
            state = update_sparse_residual(state, ds, cfg)
            if not np.isfinite(state.objective_trace[-1]):
                raise NumericalDivergenceError("non-finite objective after the sparse residual update")
            rounds += 1
            current = state.objective_trace[-1]
            round_objectives.append(current)
            round_seconds.append(time.perf_counter() - round_start)
            if current <= cfg.epsilon:
                stop_reason = "epsilon"
                break
            if before > 0 and (before - current) / before < cfg.relative_tolerance:
                stop_reason = "stalled"
                break

    bases = []
    for i, rows in enumerate(ds.label_rows):
        if rows.size and ranks[i] > 0:
            bases.append(orthonormal_row_basis(state.components[i][rows], ranks[i]))
        else:
            bases.append(np.zeros((0, ds.n_features)))
    model = MultiSubspaceModel(
        bases=bases,
        group_layout=group_layout_from_widths(b.shape[0] for b in bases),
        n_features=ds.n_features,
        ranks=ranks,
        training=cfg.to_dict(),
        dataset_fingerprint=ds.fingerprint(),
        normalization=ds.transform,
        label_names=ds.label_names,
    )
    diagnostics = TrainingDiagnostics(
        rounds=rounds,
        stop_reason=stop_reason,
        initial_objective=initial,
        final_objective=state.objective_trace[-1],
        round_objectives=round_objectives,
        round_seconds=round_seconds,
        total_seconds=time.perf_counter() - start,
    )
    return model, state, diagnostics
