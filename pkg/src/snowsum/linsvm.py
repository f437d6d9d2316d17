"""L2-regularized squared-hinge linear SVM trained by dual coordinate descent.

The primal objective is

    f(w) = 1/2 ||w||^2 + C * sum_i max(0, 1 - y_i w.x_i)^2

solved through its dual, which for the squared hinge has a per-example diagonal
term 1/(2C) and no upper box bound. One dual variable (one example) is updated
per step with a closed-form projected Newton step while maintaining
w = sum_i alpha_i y_i x_i; examples are visited in a freshly seeded-shuffled
order every epoch. Training stops when the maximal projected-gradient violation
over an epoch drops to the configured tolerance.

The bias, when enabled, is a constant-1 feature appended to every example, so
it is regularized like any other weight.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from ._binio import ByteReader, ByteWriter, check_magic
from .errors import DataError

MODEL_MAGIC = b"SNOWMDL1"


@dataclass(frozen=True)
class TrainConfig:
    C: float = 10.0
    tolerance: float = 1e-4
    max_epochs: int = 1000
    seed: int = 0
    bias_augmented: bool = True

    def __post_init__(self):
        if self.C <= 0:
            raise DataError(f"C must be positive, got {self.C}")
        if self.tolerance <= 0:
            raise DataError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_epochs < 1:
            raise DataError(f"max_epochs must be >= 1, got {self.max_epochs}")


@dataclass(frozen=True, eq=False)
class BinaryLinearModel:
    w: np.ndarray
    bias_augmented: bool
    C: float
    dim: int
    # Training diagnostics; not serialized, not part of equality.
    epochs_run: int = field(default=0, compare=False)
    final_violation: float = field(default=0.0, compare=False)
    converged: bool = field(default=True, compare=False)

    def __post_init__(self):
        expected = self.dim + (1 if self.bias_augmented else 0)
        if self.w.shape != (expected,):
            raise DataError(f"weight vector has length {self.w.shape}, expected ({expected},)")
        if self.C <= 0:
            raise DataError(f"C must be positive, got {self.C}")

    def __eq__(self, other):
        if not isinstance(other, BinaryLinearModel):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.bias_augmented == other.bias_augmented
            and self.C == other.C
            and self.w.tobytes() == other.w.tobytes()
        )


@dataclass(frozen=True, eq=False)
class MulticlassModel:
    classes: tuple[int, ...]
    models: tuple[BinaryLinearModel, ...]
    dim: int

    def __post_init__(self):
        if len(self.classes) != len(self.models):
            raise DataError("one binary model required per class")
        if list(self.classes) != sorted(set(self.classes)):
            raise DataError("classes must be unique and sorted ascending")
        for code, m in zip(self.classes, self.models):
            if not 0 <= code <= 255:
                raise DataError(f"class code {code} out of range")
            if m.dim != self.dim:
                raise DataError(f"model for class {code} has dim {m.dim}, expected {self.dim}")
            if m.bias_augmented != self.models[0].bias_augmented:
                raise DataError("all binary models must share the bias flag")

    @property
    def bias_augmented(self) -> bool:
        return self.models[0].bias_augmented

    def __eq__(self, other):
        if not isinstance(other, MulticlassModel):
            return NotImplemented
        return (
            self.classes == other.classes
            and self.dim == other.dim
            and all(a == b for a, b in zip(self.models, other.models))
        )


def _as_matrix(X, dim=None) -> np.ndarray:
    A = np.asarray(X, dtype=np.float64)
    if A.ndim == 1:
        A = A.reshape(1, -1)
    if A.ndim != 2:
        raise DataError(f"feature matrix must be 2-d, got shape {A.shape}")
    if dim is not None and A.shape[1] != dim:
        raise DataError(f"feature dimension {A.shape[1]} does not match model dim {dim}")
    if not np.all(np.isfinite(A)):
        raise DataError("feature matrix contains non-finite values")
    return A


def _augment(X: np.ndarray) -> np.ndarray:
    ones = np.ones((X.shape[0], 1), dtype=np.float64)
    return np.hstack([X, ones])


def train_binary(X, y, cfg: TrainConfig = TrainConfig()) -> BinaryLinearModel:
    """Train one binary model on +/-1 labels. Deterministic for fixed inputs and seed."""
    A = _as_matrix(X)
    labels = np.asarray(y, dtype=np.float64).ravel()
    if A.shape[0] == 0:
        raise DataError("empty training set")
    if labels.shape[0] != A.shape[0]:
        raise DataError(f"{A.shape[0]} examples but {labels.shape[0]} labels")
    if not np.all(np.isin(labels, (-1.0, 1.0))):
        raise DataError("labels must be +1 or -1")
    if np.unique(labels).size < 2:
        raise DataError("training set must contain both classes")

    dim = A.shape[1]
    if cfg.bias_augmented:
        A = _augment(A)
    A = np.ascontiguousarray(A)

    dii = 1.0 / (2.0 * cfg.C)
    qdiag = np.einsum("ij,ij->i", A, A) + dii
    alpha = np.zeros(A.shape[0], dtype=np.float64)
    w = np.zeros(A.shape[1], dtype=np.float64)

    rng = np.random.default_rng(cfg.seed)
    epochs = 0
    violation = np.inf
    for _ in range(cfg.max_epochs):
        order = rng.permutation(A.shape[0]).astype(np.int64)
        violation = _kernels.dcd_epoch(A, labels, alpha, w, qdiag, dii, order)
        epochs += 1
        if violation <= cfg.tolerance:
            break

    return BinaryLinearModel(
        w=w,
        bias_augmented=cfg.bias_augmented,
        C=cfg.C,
        dim=dim,
        epochs_run=epochs,
        final_violation=float(violation),
        converged=bool(violation <= cfg.tolerance),
    )


def objective(model: BinaryLinearModel, X, y) -> float:
    """Primal objective 1/2 ||w||^2 + C * sum max(0, 1 - y w.x)^2."""
    A = _as_matrix(X, model.dim)
    labels = np.asarray(y, dtype=np.float64).ravel()
    if labels.shape[0] != A.shape[0]:
        raise DataError(f"{A.shape[0]} examples but {labels.shape[0]} labels")
    if model.bias_augmented:
        A = _augment(A)
    margins = 1.0 - labels * (A @ model.w)
    hinge = np.maximum(margins, 0.0)
    return float(0.5 * model.w @ model.w + model.C * np.sum(hinge * hinge))


def decision_value(model: BinaryLinearModel, x) -> float:
    v = np.asarray(x, dtype=np.float64).ravel()
    if v.shape[0] != model.dim:
        raise DataError(f"feature dimension {v.shape[0]} does not match model dim {model.dim}")
    out = float(v @ model.w[: model.dim])
    if model.bias_augmented:
        out += float(model.w[model.dim])
    return out


def predict_binary(model: BinaryLinearModel, x) -> int:
    """Sign of the decision value; a value of exactly 0 predicts +1."""
    return 1 if decision_value(model, x) >= 0.0 else -1


def decision_matrix(model: MulticlassModel, X) -> np.ndarray:
    """Rows of per-class decision values, columns ordered like model.classes."""
    A = _as_matrix(X, model.dim)
    W = np.stack([m.w[: model.dim] for m in model.models])
    scores = A @ W.T
    if model.bias_augmented:
        scores += np.array([m.w[m.dim] for m in model.models])
    return scores


def train_ovr(X, labels, cfg: TrainConfig = TrainConfig()) -> MulticlassModel:
    """One-vs-rest reduction: per class, that class is +1 and the rest -1.

    Every binary problem is trained with the same config (including seed).
    """
    A = _as_matrix(X)
    codes = np.asarray(labels).ravel()
    if codes.shape[0] != A.shape[0]:
        raise DataError(f"{A.shape[0]} examples but {codes.shape[0]} labels")
    present = sorted(int(c) for c in np.unique(codes))
    if len(present) < 2:
        raise DataError("one-vs-rest training needs at least 2 distinct classes")

    models = []
    for code in present:
        y = np.where(codes == code, 1.0, -1.0)
        models.append(train_binary(A, y, cfg))
    return MulticlassModel(classes=tuple(present), models=tuple(models), dim=A.shape[1])


def predict_multi(model: MulticlassModel, x) -> int:
    """Class with the maximal decision value; ties go to the smallest code."""
    scores = decision_matrix(model, np.asarray(x, dtype=np.float64).reshape(1, -1))[0]
    return int(model.classes[int(np.argmax(scores))])


def predict_multi_batch(model: MulticlassModel, X) -> np.ndarray:
    """Vectorized predict_multi over rows; identical tie behavior (argmax picks
    the first maximal column and classes are sorted ascending)."""
    scores = decision_matrix(model, X)
    codes = np.asarray(model.classes)
    return codes[np.argmax(scores, axis=1)]


DEFAULT_C_GRID = tuple(float(c) for c in range(1, 21))


@dataclass(frozen=True)
class GridSearchResult:
    best_C: float
    table: tuple[tuple[float, float], ...]  # (C, mean CV accuracy) per grid value


def grid_search_C(X, labels, grid=DEFAULT_C_GRID, k: int = 10, seed: int = 0,
                  base_cfg: TrainConfig = TrainConfig()) -> GridSearchResult:
    """k-fold cross-validated accuracy per C; best_C is the highest mean, ties
    broken toward the smallest C."""
    from .evaluation import kfold_cv  # local import, avoids module cycle

    grid = tuple(float(c) for c in grid)
    if not grid:
        raise DataError("empty C grid")
    if len(set(grid)) != len(grid):
        raise DataError("duplicate values in C grid")

    rows = []
    best_C = None
    best_acc = -1.0
    for C in sorted(grid):
        result = kfold_cv(X, labels, replace(base_cfg, C=C), k=k, seed=seed)
        rows.append((C, result.mean_accuracy))
        if result.mean_accuracy > best_acc:
            best_acc = result.mean_accuracy
            best_C = C
    return GridSearchResult(best_C=best_C, table=tuple(rows))


def save_model(model: MulticlassModel) -> bytes:
    """Serialize to the SNOWMDL1 layout: u8 bias flag, u32 dim, u32 n_classes,
    then per class u8 code, f64 C, and (dim + bias slot) f64 weights."""
    w = ByteWriter()
    w.raw(MODEL_MAGIC)
    w.u8(1 if model.bias_augmented else 0)
    w.u32(model.dim)
    w.u32(len(model.classes))
    for code, m in zip(model.classes, model.models):
        w.u8(code)
        w.f64(m.C)
        w.f64_array(m.w)
    return w.getvalue()


def load_model(data: bytes) -> MulticlassModel:
    r = ByteReader(data, "model file")
    model = _read_model(r)
    r.expect_done()
    return model


def _read_model(r: ByteReader) -> MulticlassModel:
    check_magic(r, MODEL_MAGIC)
    bias = r.u8()
    if bias not in (0, 1):
        raise DataError(f"invalid bias flag {bias}")
    dim = r.u32()
    n_classes = r.u32()
    if dim < 1 or n_classes < 1:
        raise DataError(f"invalid model header: dim={dim}, n_classes={n_classes}")
    slots = dim + bias
    classes = []
    models = []
    for _ in range(n_classes):
        code = r.u8()
        C = r.f64()
        weights = r.f64_array(slots)
        classes.append(code)
        models.append(BinaryLinearModel(w=weights, bias_augmented=bool(bias), C=C, dim=dim))
    return MulticlassModel(classes=tuple(classes), models=tuple(models), dim=dim)
