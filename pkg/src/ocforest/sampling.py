"""Training-set downsampling: plain random subsets and SVM-scored best-of-K search."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Dataset
from .kernels.smo import smo_solve

log = logging.getLogger(__name__)

KKT_TOL = 1e-3
MAX_ITER = 100_000


class ConfigurationError(ValueError):
    pass


def kernel_matrix(A, B, gamma: float, kind: str = "rbf") -> np.ndarray:
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * A @ B.T
    sq = np.maximum(sq, 0.0)
    if kind == "rbf":
        return np.exp(-gamma * sq)
    if kind == "laplacian":
        return np.exp(-gamma * np.sqrt(sq))
    raise ConfigurationError(f"unknown kernel {kind!r}")


@dataclass(frozen=True, eq=False)
class SvmModel:
    support_vectors: np.ndarray
    coef: np.ndarray  # dual weight times +-1 label, support vectors only
    bias: float
    gamma: float
    c_svm: float
    kernel: str = "rbf"
    constant_class: Optional[int] = None  # set when trained on one class

    def decision_function(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if self.constant_class is not None:
            return np.full(X.shape[0], 1.0 if self.constant_class == 1 else -1.0)
        if X.shape[1] != self.support_vectors.shape[1]:
            raise ValueError(f"expected {self.support_vectors.shape[1]} features, got {X.shape[1]}")
        if self.coef.size == 0:
            return np.full(X.shape[0], self.bias)
        return kernel_matrix(X, self.support_vectors, self.gamma, self.kernel) @ self.coef + self.bias

    def predict(self, X) -> np.ndarray:
        return (self.decision_function(X) > 0).astype(np.int64)


def train_svm(points, labels, gamma: Optional[float] = None, c_svm: float = 1.0,
              kernel: str = "rbf", tol: float = KKT_TOL, max_iter: int = MAX_ITER) -> SvmModel:
    """Kernel SVM; ``gamma`` defaults to 1/p. One-class input yields a constant model."""
    X = np.asarray(points, dtype=np.float64)
    y01 = np.asarray(labels, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] != y01.shape[0]:
        raise ValueError("points must be (n, p) with one label per row")
    if X.shape[0] < 1:
        raise ValueError("need at least one point")
    gamma = 1.0 / X.shape[1] if gamma is None else float(gamma)
    if np.unique(y01).size < 2:
        log.warning("single-class training set; SVM degenerates to a constant classifier")
        return SvmModel(X[:0], np.zeros(0), 0.0, gamma, c_svm, kernel, int(y01[0]))
    y = np.where(y01 == 1, 1.0, -1.0)
    K = kernel_matrix(X, X, gamma, kernel)
    alpha, rho, _ = smo_solve(K, y, float(c_svm), float(tol), int(max_iter))
    sv = alpha > 0
    return SvmModel(X[sv].copy(), (alpha * y)[sv], -float(rho), gamma, c_svm, kernel)


def majority_scorer(points, labels) -> "_Constant":
    return _Constant(int(2 * int(np.sum(labels)) > len(labels)))


class _Constant:
    def __init__(self, cls: int):
        self.cls = cls

    def predict(self, X) -> np.ndarray:
        return np.full(np.atleast_2d(X).shape[0], self.cls, dtype=np.int64)


@dataclass(frozen=True)
class SubsetSearchConfig:
    subset_size: int = 75
    iterations: int = 100
    seed: int = 0
    scorer: str = "svm"  # svm | majority-baseline
    kernel: str = "rbf"
    gamma: Optional[float] = None
    c_svm: float = 1.0

    def __post_init__(self):
        if self.iterations < 1 or self.subset_size < 1:
            raise ConfigurationError("need iterations >= 1 and subset_size >= 1")
        if self.scorer not in ("svm", "majority-baseline"):
            raise ConfigurationError(f"unknown scorer {self.scorer!r}")


def draw_subset(n: int, size: int, seed: int, index: int) -> np.ndarray:
    """Sorted draw without replacement; stream ``index`` of ``seed`` is independent of how many are drawn."""
    if size > n:
        raise ConfigurationError(f"subset of {size} from {n} rows")
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))
    return np.sort(rng.choice(n, size=size, replace=False))


def random_subsets(n: int, size: int, count: int, seed: int) -> list[np.ndarray]:
    return [draw_subset(n, min(size, n), seed, k) for k in range(count)]


def select_training_subset(train: Dataset, validation: Dataset, config: SubsetSearchConfig = SubsetSearchConfig()):
    """Best of K random subsets by validation accuracy of a scorer trained on each.

    Returns ``(indices into train, best validation accuracy)``; ties keep the
    earliest iteration.
    """
    if validation.n == 0:
        raise ConfigurationError("validation set is empty")
    if config.subset_size > train.n:
        raise ConfigurationError(f"subset size {config.subset_size} exceeds training rows {train.n}")
    best_idx, best_acc = None, -1.0
    for k in range(config.iterations):
        idx = draw_subset(train.n, config.subset_size, config.seed, k)
        Xs, ys = train.features[idx], train.labels[idx]
        if config.scorer == "svm":
            model = train_svm(Xs, ys, config.gamma, config.c_svm, config.kernel)
        else:
            model = majority_scorer(Xs, ys)
        acc = float(np.mean(model.predict(validation.features) == validation.labels))
        if acc > best_acc:
            best_idx, best_acc = idx, acc
    return best_idx, best_acc
