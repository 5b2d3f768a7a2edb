"""Penalized pairwise covariance estimator in representer form.

Given replicates observed at a few random locations each, every ordered pair
of distinct measurements ``(j, k)`` of subject ``i`` contributes the raw
covariance ``W_ij * W_ik`` at location pair ``(U_ij, U_ik)`` with weight
``1 / (n r_i (r_i - 1))``. The estimator minimizes

    sum_m w_m (y_m - g(first_m, second_m))^2 + eta * ||g||^2_{H_p (x) H_p}

over the tensor Sobolev space. Its minimizer is a finite combination of
tensor kernel sections at the pair anchors,

    g(u, v) = sum_m c_m psi(t(u, first_m)) psi(t(v, second_m)),

with ``c`` solving ``(K + eta W^-1) c = y``.

All anchors are drawn from the ``N = sum_i r_i`` measured locations, so the
``M x M`` Gram matrix is gathered from an ``N x N`` table of ``psi`` values
and prediction collapses ``c`` onto an ``N x N`` coefficient matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import DesignError, NumericalError, ParameterError, ResourceError, SpaceMismatchError
from .kernel import ZonalKernel, kernel_matrix
from .spaces import SpaceParams

__all__ = [
    "MAX_PAIRS",
    "Dataset",
    "PairDesign",
    "CovEstimate",
    "assemble_pairs",
    "gram_matrix",
    "fit",
    "predict",
    "predict_grid",
    "hp_norm_sq",
    "objective",
]

MAX_PAIRS = 20_000


@dataclass(frozen=True)
class Dataset:
    """Noisy measurements of ``n`` independent replicates.

    ``locations[i]`` is an ``(r_i, D)`` array of points and ``values[i]`` the
    ``r_i`` noisy field values observed there.
    """

    space: SpaceParams
    locations: tuple
    values: tuple

    def __post_init__(self):
        locs = tuple(np.atleast_2d(np.asarray(x, dtype=float)) for x in self.locations)
        vals = tuple(np.asarray(w, dtype=float).reshape(-1) for w in self.values)
        if len(locs) != len(vals):
            raise DesignError("locations and values must list the same subjects")
        D = self.space.ambient_dim
        for i, (x, w) in enumerate(zip(locs, vals)):
            if x.shape[1] != D:
                raise SpaceMismatchError(f"subject {i}: points have {x.shape[1]} coordinates, expected {D}")
            if x.shape[0] != w.shape[0]:
                raise DesignError(f"subject {i}: {x.shape[0]} locations but {w.shape[0]} values")
        object.__setattr__(self, "locations", locs)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return len(self.locations)

    @property
    def r(self) -> list[int]:
        return [len(w) for w in self.values]


@dataclass(frozen=True)
class PairDesign:
    """Flattened off-diagonal pair regression rows.

    Row ``m`` regresses ``response[m]`` on the location pair
    ``(points[first_idx[m]], points[second_idx[m]])`` with weight ``weight[m]``.
    ``points`` stacks every subject's locations in order.
    """

    space: SpaceParams
    points: np.ndarray
    first_idx: np.ndarray
    second_idx: np.ndarray
    response: np.ndarray
    weight: np.ndarray
    subject: np.ndarray

    @property
    def size(self) -> int:
        return int(self.response.size)

    @property
    def first(self) -> np.ndarray:
        return self.points[self.first_idx]

    @property
    def second(self) -> np.ndarray:
        return self.points[self.second_idx]


@dataclass(frozen=True)
class CovEstimate:
    """Fitted representer coefficients over the pair anchors."""

    kernel: ZonalKernel
    points: np.ndarray
    first_idx: np.ndarray
    second_idx: np.ndarray
    coeffs: np.ndarray
    eta: float
    _cmat: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        N = self.points.shape[0]
        cmat = np.zeros((N, N))
        np.add.at(cmat, (self.first_idx, self.second_idx), self.coeffs)
        object.__setattr__(self, "_cmat", cmat)

    @property
    def space(self) -> SpaceParams:
        return self.kernel.params

    @property
    def coef_matrix(self) -> np.ndarray:
        """Coefficients accumulated on location pairs: ``g(u, v) = psi_u^T C psi_v``."""
        return self._cmat

    @property
    def first(self) -> np.ndarray:
        return self.points[self.first_idx]

    @property
    def second(self) -> np.ndarray:
        return self.points[self.second_idx]


def assemble_pairs(data: Dataset) -> PairDesign:
    """Enumerate ordered off-diagonal pairs, subject-major then ``j`` then ``k``.

    Raises
    ------
    DesignError
        If a subject has fewer than two measurements.
    """
    if data.n == 0:
        raise DesignError("dataset has no subjects")
    n = data.n
    offsets = np.concatenate([[0], np.cumsum(data.r)])
    firsts, seconds, resp, wts, subj = [], [], [], [], []
    for i, w in enumerate(data.values):
        r = w.size
        if r < 2:
            raise DesignError(f"subject {i} has r_i = {r}; at least two measurements are required")
        j, k = np.nonzero(~np.eye(r, dtype=bool))
        firsts.append(offsets[i] + j)
        seconds.append(offsets[i] + k)
        resp.append(w[j] * w[k])
        wts.append(np.full(j.size, 1.0 / (n * r * (r - 1))))
        subj.append(np.full(j.size, i))
    return PairDesign(
        space=data.space,
        points=np.concatenate(data.locations, axis=0),
        first_idx=np.concatenate(firsts),
        second_idx=np.concatenate(seconds),
        response=np.concatenate(resp),
        weight=np.concatenate(wts),
        subject=np.concatenate(subj),
    )


def _check_space(k: ZonalKernel, space: SpaceParams) -> None:
    if k.params != space:
        raise SpaceMismatchError(f"kernel on {k.params.label} used with data on {space.label}")


def gram_matrix(k: ZonalKernel, design: PairDesign) -> np.ndarray:
    """``K[m, m'] = psi(t(first_m, first_m')) * psi(t(second_m, second_m'))``."""
    _check_space(k, design.space)
    psi = kernel_matrix(k, design.points)
    psi = 0.5 * (psi + psi.T)
    f, s = design.first_idx, design.second_idx
    return psi[np.ix_(f, f)] * psi[np.ix_(s, s)]


def fit(
    k: ZonalKernel,
    design: PairDesign,
    eta: float,
    *,
    gram: np.ndarray | None = None,
    max_pairs: int = MAX_PAIRS,
) -> CovEstimate:
    """Solve the penalized problem; returns the representer coefficients.

    Parameters
    ----------
    k : ZonalKernel
    design : PairDesign
    eta : float
        Penalty weight, strictly positive.
    gram : ndarray, optional
        Precomputed :func:`gram_matrix` (reused across penalty values).
    max_pairs : int
        Cap on the number of pair rows.

    Raises
    ------
    NumericalError
        If the Cholesky factorization fails; a larger ``eta`` usually helps.
    ResourceError
        If the design exceeds ``max_pairs`` rows.
    """
    if not eta > 0 or not np.isfinite(eta):
        raise ParameterError(f"eta must be a positive finite number, got {eta}")
    M = design.size
    if M < 1:
        raise DesignError("empty design")
    if M > max_pairs:
        raise ResourceError(f"design has {M} pair rows, above the cap of {max_pairs}")
    K = gram_matrix(k, design) if gram is None else gram
    A = K.copy()
    A[np.diag_indices_from(A)] += eta / design.weight
    try:
        factor = linalg.cho_factor(A, lower=True, check_finite=True)
    except (linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"Cholesky factorization failed ({exc}); try a larger eta") from exc
    c = linalg.cho_solve(factor, design.response)
    if not np.all(np.isfinite(c)):
        raise NumericalError("non-finite coefficients; try a larger eta")
    return CovEstimate(
        kernel=k,
        points=design.points,
        first_idx=design.first_idx,
        second_idx=design.second_idx,
        coeffs=c,
        eta=float(eta),
    )


def predict(est: CovEstimate, u, v):
    """Evaluate the fitted covariance at point pairs.

    ``u`` and ``v`` are single points ``(D,)`` or matching arrays ``(Q, D)``;
    the result is a scalar or a length-``Q`` array.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    scalar = u.ndim == 1 and v.ndim == 1
    U, V = np.broadcast_arrays(np.atleast_2d(u), np.atleast_2d(v))
    psi_u = kernel_matrix(est.kernel, U, est.points)
    psi_v = kernel_matrix(est.kernel, V, est.points)
    out = np.sum((psi_u @ est.coef_matrix) * psi_v, axis=1)
    return float(out[0]) if scalar else out


def predict_grid(est: CovEstimate, U, V=None) -> np.ndarray:
    """Fitted covariance on all pairs of rows of ``U`` and ``V`` (default ``U``)."""
    psi_u = kernel_matrix(est.kernel, U, est.points)
    psi_v = psi_u if V is None else kernel_matrix(est.kernel, V, est.points)
    return psi_u @ est.coef_matrix @ psi_v.T


def hp_norm_sq(est: CovEstimate) -> float:
    """Squared tensor Sobolev norm ``c^T K c`` of the fitted function."""
    psi = kernel_matrix(est.kernel, est.points)
    psi = 0.5 * (psi + psi.T)
    C = est.coef_matrix
    return float(np.sum(C * (psi @ C @ psi)))


def objective(k: ZonalKernel, design: PairDesign, est: CovEstimate) -> float:
    """Weighted squared loss on the design plus ``eta`` times the squared norm."""
    _check_space(k, design.space)
    if est.points.shape != design.points.shape or not np.array_equal(est.points, design.points):
        fitted = predict(est, design.first, design.second)
    else:
        psi = kernel_matrix(k, design.points)
        psi = 0.5 * (psi + psi.T)
        M = psi @ est.coef_matrix @ psi
        fitted = M[design.first_idx, design.second_idx]
    loss = float(np.sum(design.weight * (design.response - fitted) ** 2))
    return loss + est.eta * hp_norm_sq(est)
