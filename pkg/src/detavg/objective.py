"""Regularized empirical-risk objectives over linear predictions.

An :class:`Objective` is

    L(w) = (1/n) sum_i l_i(w @ x_i) + (lam / 2) * ||w||^2

with per-example convex losses ``l_i`` evaluated at the linear prediction,
so the Hessian is a scaled Gram matrix plus a ridge:

    grad L(w) = (1/n) sum_i l_i'(w @ x_i) x_i + lam * w
    hess L(w) = (1/n) sum_i l_i''(w @ x_i) x_i x_i^T + lam * I

The ridge term makes the Hessian positive definite (eigenvalues >= lam),
which every solver in the package relies on.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from . import linalg


@dataclass(frozen=True)
class Dataset:
    """Feature matrix with one label per row.

    Attributes
    ----------
    X : ndarray of shape (n, d)
    y : ndarray of shape (n,)
    """

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if X.ndim != 2:
            raise ValueError(f"X must be 2-d, got shape {X.shape}")
        if y.shape != (X.shape[0],):
            raise ValueError(f"y has shape {y.shape}, expected ({X.shape[0]},)")
        if X.shape[0] < 1 or X.shape[1] < 1:
            raise ValueError("dataset needs at least one row and one column")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("dataset contains non-finite entries")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]


class LossKind(enum.Enum):
    """Per-example loss applied to the linear prediction z = w @ x."""

    SQUARE = "square"
    LOGISTIC = "logistic"

    def value_terms(self, z: np.ndarray, y: np.ndarray) -> np.ndarray:
        if self is LossKind.SQUARE:
            return (z - y) ** 2
        # log(1 + e^z) - y z, stable for large |z|
        return np.logaddexp(0.0, z) - y * z

    def dvalue(self, z: np.ndarray, y: np.ndarray) -> np.ndarray:
        if self is LossKind.SQUARE:
            return 2.0 * (z - y)
        return expit(z) - y

    def d2value(self, z: np.ndarray, y: np.ndarray) -> np.ndarray:
        if self is LossKind.SQUARE:
            return np.full_like(z, 2.0)
        s = expit(z)
        return s * (1.0 - s)


def _check_labels(loss: LossKind, y: np.ndarray) -> None:
    if loss is LossKind.LOGISTIC and not np.all(np.isin(y, (0.0, 1.0))):
        raise ValueError("logistic loss expects labels in {0, 1}")


@dataclass(frozen=True)
class Objective:
    """Dataset, loss kind, and ridge weight bundled with their calculus.

    Parameters
    ----------
    data : Dataset
    loss : LossKind
    lam : float
        Ridge weight, must be positive.
    """

    data: Dataset
    loss: LossKind = LossKind.SQUARE
    lam: float = field(default=1e-3)

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        _check_labels(self.loss, self.data.y)

    @property
    def d(self) -> int:
        return self.data.d

    def predictions(self, w: np.ndarray) -> np.ndarray:
        return self.data.X @ np.asarray(w, dtype=float)

    def loss_value(self, w: np.ndarray) -> float:
        w = np.asarray(w, dtype=float)
        z = self.data.X @ w
        terms = self.loss.value_terms(z, self.data.y)
        return float(terms.mean() + 0.5 * self.lam * (w @ w))

    def gradient(self, w: np.ndarray) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        z = self.data.X @ w
        g = self.data.X.T @ self.loss.dvalue(z, self.data.y) / self.data.n
        return g + self.lam * w

    def hessian(self, w: np.ndarray) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        z = self.data.X @ w
        curv = self.loss.d2value(z, self.data.y)
        H = (self.data.X.T * curv) @ self.data.X / self.data.n
        return linalg.symmetrize(H) + self.lam * np.eye(self.data.d)

    def exact_newton_step(self, w: np.ndarray) -> np.ndarray:
        """Step p solving hess(w) p = grad(w); the update is w - p."""
        return linalg.solve_psd(self.hessian(w), self.gradient(w))
