"""Distributed estimation of precision-matrix statistics.

Each machine inverts a ridged subsampled second-moment matrix
``Sigma_hat_t + (eta / sqrt(m)) I`` and reports a statistic of that
inverse (its trace, or its full diagonal) together with the determinant
of the inverted matrix as a weight.  The ridge guarantees invertibility
even on empty subsamples and shrinks as machines are added, so the
determinant-weighted combination converges to the statistic of the
unridged inverse covariance, which is also the exact reference the
estimates are scored against.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import linalg
from .averaging import LocalEstimate, WeightedAccumulator, combine_determinantal
from .errors import NotPositiveDefinite, SingularCovariance
from .objective import Dataset
from .parallel import parallel_map
from .sketch import SeedSpec, SketchMask, draw_mask, local_covariance


class Statistic(enum.Enum):
    """Function of the precision matrix being estimated."""

    TRACE = "trace"
    DIAGONAL = "diagonal"


@dataclass(frozen=True)
class UqConfig:
    """Fleet size, local sample size, ridge scale, and target statistic."""

    m: int
    k: int
    eta: float = 1.0
    statistic: Statistic = Statistic.TRACE

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"need at least one machine, got m={self.m}")
        if self.k < 1:
            raise ValueError(f"need a positive sample size, got k={self.k}")
        if not self.eta > 0:
            raise ValueError(f"ridge scale eta must be positive, got {self.eta}")


@dataclass(frozen=True)
class UqRow:
    statistic: str
    m: int
    k: int
    eta: float
    trial: int
    estimate: float
    exact: float
    abs_err: float


def _statistic_of_inverse(A: np.ndarray, statistic: Statistic) -> tuple[float | np.ndarray, float]:
    """Statistic of A^{-1} plus log det A, from one Cholesky factorization."""
    L = linalg.cholesky(A)
    inv_diag = np.diag(linalg.solve_chol(L, np.eye(A.shape[0])))
    log_det = float(2.0 * np.sum(np.log(np.diag(L))))
    if statistic is Statistic.TRACE:
        return float(inv_diag.sum()), log_det
    return inv_diag.copy(), log_det


def local_uq_estimate(
    data: Dataset, mask: SketchMask, eta: float, m: int, statistic: Statistic
) -> LocalEstimate:
    """One machine's statistic of the ridged subsampled precision matrix.

    The value is F((Sigma_hat + (eta/sqrt(m)) I)^{-1}) and the log-weight
    is log det(Sigma_hat + (eta/sqrt(m)) I).  An empty subsample reduces
    to the pure ridge, whose inverse trace is d sqrt(m) / eta.
    """
    ridge = eta / np.sqrt(m)
    A = local_covariance(data, mask) + ridge * np.eye(data.d)
    value, log_det = _statistic_of_inverse(A, statistic)
    return LocalEstimate(value=value, log_weight=log_det)


def exact_statistic(data: Dataset, statistic: Statistic) -> float | np.ndarray:
    """Statistic of the unridged inverse covariance (1/n X^T X)^{-1}.

    Raises
    ------
    SingularCovariance
        If the covariance is not invertible, e.g. when n < d.
    """
    sigma = linalg.symmetrize(data.X.T @ data.X / data.n)
    # roundoff can hand a rank-deficient matrix a tiny positive pivot, so a
    # successful factorization alone does not certify invertibility
    spectrum = np.linalg.eigvalsh(sigma)
    if spectrum[0] <= spectrum[-1] * 1e-12:
        raise SingularCovariance(
            "covariance is singular to working precision "
            f"(eigenvalue range [{spectrum[0]:.3e}, {spectrum[-1]:.3e}])"
        )
    try:
        value, _ = _statistic_of_inverse(sigma, statistic)
    except NotPositiveDefinite as exc:
        raise SingularCovariance(f"covariance is singular: {exc}") from exc
    return value


def estimate_precision_statistic(
    data: Dataset, cfg: UqConfig, seed: int, trial: int = 0
) -> tuple[float | np.ndarray, float | np.ndarray, float]:
    """Determinant-weighted distributed estimate, its exact value, and the error.

    Machine t draws its subsample from the stream keyed by (seed, trial, t).
    The error is the Euclidean norm of the elementwise deviation, which for
    the trace statistic is just the absolute error.
    """
    estimates = []
    for t in range(cfg.m):
        mask = draw_mask(data.n, cfg.k, SeedSpec(seed, trial, t))
        estimates.append(local_uq_estimate(data, mask, cfg.eta, cfg.m, cfg.statistic))
    estimate = combine_determinantal(estimates)
    exact = exact_statistic(data, cfg.statistic)
    abs_err = float(np.linalg.norm(np.atleast_1d(np.asarray(estimate) - np.asarray(exact))))
    return estimate, exact, abs_err


def _uq_trial(
    data: Dataset,
    k: int,
    eta: float,
    m_list: list[int],
    statistic: Statistic,
    seed: int,
    trial: int,
    exact: float | np.ndarray,
) -> dict[int, tuple[float, float]]:
    # covariances are reused across the m grid; the ridge depends on m, so
    # each snapshot refactorizes the first m of them
    covs = []
    for t in range(max(m_list)):
        mask = draw_mask(data.n, k, SeedSpec(seed, trial, t))
        covs.append(local_covariance(data, mask))
    eye = np.eye(data.d)
    exact_arr = np.atleast_1d(np.asarray(exact, dtype=float))
    out: dict[int, tuple[float, float]] = {}
    for m in m_list:
        ridge = eta / np.sqrt(m)
        acc = WeightedAccumulator()
        for t in range(m):
            value, log_det = _statistic_of_inverse(covs[t] + ridge * eye, statistic)
            acc.push(LocalEstimate(value=value, log_weight=log_det))
        est = acc.finalize()
        est_arr = np.atleast_1d(np.asarray(est, dtype=float))
        abs_err = float(np.linalg.norm(est_arr - exact_arr))
        out[m] = (float(est_arr.sum()), abs_err)
    return out


def uq_sweep(
    data: Dataset,
    k: int,
    eta: float,
    m_list: list[int],
    trials: int,
    statistic: Statistic,
    seed: int,
    threads: int = 1,
) -> list[UqRow]:
    """Error table for the precision-statistic estimator over a grid of m.

    The ``estimate`` and ``exact`` columns carry the scalar entry sum of
    the statistic, which for the trace statistic is the statistic itself
    and for the diagonal equals the matching trace estimate.  ``abs_err``
    is the Euclidean norm of the elementwise deviation.

    Returns rows sorted by (m, trial); identical output at any ``threads``.
    """
    if len(m_list) == 0 or any(m < 1 for m in m_list):
        raise ValueError(f"machine counts must be positive, got {m_list}")
    if sorted(set(m_list)) != list(m_list):
        raise ValueError(f"m_list must be strictly increasing, got {m_list}")
    if trials < 1:
        raise ValueError(f"need at least one trial, got {trials}")
    UqConfig(m=m_list[0], k=k, eta=eta, statistic=statistic)  # validates k, eta
    exact = exact_statistic(data, statistic)
    exact_sum = float(np.atleast_1d(np.asarray(exact, dtype=float)).sum())

    def run(trial: int):
        return _uq_trial(data, k, eta, m_list, statistic, seed, trial, exact)

    per_trial = parallel_map(run, range(trials), threads)
    rows = []
    for m in m_list:
        for trial in range(trials):
            est_sum, abs_err = per_trial[trial][m]
            rows.append(UqRow(statistic.value, m, k, eta, trial, est_sum, exact_sum, abs_err))
    return rows
