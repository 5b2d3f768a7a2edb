"""Penalty tuning, Monte Carlo L2 error and the convergence-rate study.

The penalty follows ``eta = c0 * (n r / log n)^(-2p / (2p + d))`` where ``r``
is the harmonic mean of the per-subject counts; the squared L2 error over
``M x M`` is integrated by Monte Carlo against the normalized measure, and
the study fits the log-log slope of the mean error against ``n``.

Seeding: each (n, r, replication) cell uses
``SeedSequence(seed, spawn_key=(n, r, replication))``, spawned once more into
a data stream and an error-integration stream. Results therefore do not
depend on grid order or on how cells are scheduled across threads.
"""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
from collections import Counter
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError, ParameterError, SpaceMismatchError, TphcovError, UnsupportedSpaceError
from .estimator import CovEstimate, assemble_pairs, fit, gram_matrix
from .kernel import DEFAULT_TOL, ZonalKernel, kernel_matrix, zonal_green
from .simulate import CovModel, NoiseSpec, default_model, sample_dataset, true_cov
from .spaces import SpaceParams, as_rng, sample_uniform, space_params

__all__ = [
    "SLOPE_BAND",
    "DEGENERATE_FLOOR",
    "harmonic_mean",
    "theorem_exponent",
    "theorem_eta",
    "mc_l2_error",
    "ModelConfig",
    "EtaRule",
    "ExperimentConfig",
    "PointResult",
    "RateReport",
    "cell_seed",
    "rate_study",
    "write_report",
]

SLOPE_BAND = (-1.05, -0.45)
DEGENERATE_FLOOR = 1e-12


def harmonic_mean(r_list: Sequence[int]) -> float:
    """``n / sum_i 1/r_i``."""
    r = [float(x) for x in r_list]
    if not r:
        raise ParameterError("harmonic mean of an empty list")
    if min(r) < 2:
        raise ParameterError("all r_i must be at least 2")
    return float(statistics.harmonic_mean(r))


def theorem_exponent(p: float, d: int) -> float:
    """Rate exponent ``2p / (2p + d)``."""
    return 2.0 * p / (2.0 * p + d)


def theorem_eta(n: int, r: float, p: float, d: int, c0: float = 1.0) -> float:
    """Penalty ``c0 * (n r / ln n)^(-2p / (2p + d))``.

    Raises
    ------
    DomainError
        If ``n < 2`` (``ln n`` must be positive).
    ParameterError
        If ``r < 2``, ``p <= d`` or ``c0 <= 0``.
    """
    if n < 2:
        raise DomainError(f"n must be at least 2 so that log n > 0, got {n}")
    if r < 2:
        raise ParameterError(f"r must be at least 2, got {r}")
    if not p > d:
        raise ParameterError(f"the rate regime needs p > d, got p = {p}, d = {d}")
    if not c0 > 0:
        raise ParameterError("c0 must be positive")
    return c0 * (n * r / math.log(n)) ** (-theorem_exponent(p, d))


def mc_l2_error(est: CovEstimate, model: CovModel, Q: int, rng=None) -> tuple[float, float]:
    """Monte Carlo estimate of ``||est - C||^2`` in L2 of the product measure.

    Draws ``Q`` independent uniform pairs ``(U, V)`` and averages the squared
    difference; returns the mean and its standard error.
    """
    if Q < 100:
        raise ParameterError(f"need at least 100 error samples, got {Q}")
    if est.space != model.space:
        raise SpaceMismatchError(f"estimate on {est.space.label}, model on {model.space.label}")
    if not model.space.supports_points:
        raise UnsupportedSpaceError("Monte Carlo integration needs point sampling")
    tables = _mc_tables(est.kernel, model, Q, rng)
    return _mc_score(est, *tables)


def _mc_tables(kernel: ZonalKernel, model: CovModel, Q: int, rng):
    """Integration pairs reduced to kernel sections and true covariance values."""
    rng = as_rng(rng)
    U = sample_uniform(model.space, Q, rng)
    V = sample_uniform(model.space, Q, rng)
    return U, V, true_cov(model, U, V)


def _mc_score(est: CovEstimate, U, V, truth, psi=None) -> tuple[float, float]:
    if psi is None:
        psi = (kernel_matrix(est.kernel, U, est.points), kernel_matrix(est.kernel, V, est.points))
    psi_u, psi_v = psi
    fitted = np.sum((psi_u @ est.coef_matrix) * psi_v, axis=1)
    sq = (fitted - truth) ** 2
    return float(np.mean(sq)), float(np.std(sq, ddof=1) / math.sqrt(sq.size))


@dataclass(frozen=True)
class ModelConfig:
    """Default-model schedule: ``b_l = gamma_l = (1 - lambda_l)^-s`` up to ``ell_max``."""

    s: float = 4.0
    ell_max: int = 30
    sigmas: tuple = (1.0, 1.0)
    anchors: tuple | None = None
    q: float = 2.5

    def build(self, space: SpaceParams) -> CovModel:
        anchors = None if self.anchors is None else [np.asarray(a, dtype=float) for a in self.anchors]
        return default_model(space, s=self.s, ell_max=self.ell_max, sigmas=self.sigmas, anchors=anchors, q=self.q)

    @classmethod
    def from_dict(cls, d: dict | None) -> "ModelConfig":
        d = dict(d or {})
        unknown = set(d) - {"s", "ell_max", "sigmas", "anchors", "q"}
        if unknown:
            raise ParameterError(f"unknown model config keys {sorted(unknown)}")
        if "sigmas" in d:
            d["sigmas"] = tuple(float(x) for x in d["sigmas"])
        if d.get("anchors") is not None:
            d["anchors"] = tuple(tuple(float(x) for x in a) for a in d["anchors"])
        return cls(**d)

    def to_dict(self) -> dict:
        return {
            "s": self.s,
            "ell_max": self.ell_max,
            "sigmas": list(self.sigmas),
            "anchors": None if self.anchors is None else [list(a) for a in self.anchors],
            "q": self.q,
        }


@dataclass(frozen=True)
class EtaRule:
    """``kind="theorem"`` scales the theorem rate by ``value`` (c0); ``"fixed"`` uses ``value`` as eta."""

    kind: str = "theorem"
    value: float = 1.0

    def __post_init__(self):
        if self.kind not in ("theorem", "fixed"):
            raise ParameterError(f"eta rule must be 'theorem' or 'fixed', got {self.kind!r}")
        if not self.value > 0:
            raise ParameterError("eta rule value must be positive")


@dataclass(frozen=True)
class ExperimentConfig:
    space: SpaceParams = field(default_factory=lambda: space_params("sphere", 2))
    model: ModelConfig = field(default_factory=ModelConfig)
    noise: NoiseSpec = field(default_factory=lambda: NoiseSpec(0.25))
    p: float = 3.0
    tol: float = DEFAULT_TOL
    grid: tuple = ((25, 5), (50, 5), (100, 5), (200, 5))
    replications: int = 20
    eta_rule: EtaRule = field(default_factory=EtaRule)
    c0_sweep: tuple | None = (0.1, 1.0, 10.0)
    error_samples: int = 2000
    seed: int = 0

    def __post_init__(self):
        d = self.space.d
        q = self.model.q
        if not self.p > d:
            raise ParameterError(f"p must exceed d = {d}, got {self.p}")
        if q is not None and not (d / 2 < q <= self.p):
            raise ParameterError(f"need d/2 < q <= p, got q = {q}")
        if self.replications < 1 or self.error_samples < 100:
            raise ParameterError("replications must be positive and error_samples at least 100")
        if not self.grid:
            raise ParameterError("empty design grid")
        for n, r in self.grid:
            if n < 2 or r < 2:
                raise ParameterError(f"design point (n={n}, r={r}) needs n >= 2 and r >= 2")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        known = {
            "space", "model", "noise", "p", "tol", "grid", "replications",
            "eta_rule", "c0_sweep", "error_samples", "seed",
        }
        unknown = set(d) - known
        if unknown:
            raise ParameterError(f"unknown config keys {sorted(unknown)}")
        kw = {}
        if "space" in d:
            kw["space"] = space_params(d["space"]["kind"], d["space"]["d"])
        if "model" in d:
            kw["model"] = ModelConfig.from_dict(d["model"])
        if "noise" in d:
            kw["noise"] = NoiseSpec(float(d["noise"]["sigma2"]), d["noise"].get("law", "gaussian"))
        if "grid" in d:
            kw["grid"] = tuple((int(n), int(r)) for n, r in d["grid"])
        if "eta_rule" in d:
            rule = d["eta_rule"]
            kind = rule.get("kind", "theorem")
            value = rule.get("c0", 1.0) if kind == "theorem" else rule.get("eta")
            if value is None:
                raise ParameterError("fixed eta rule needs an 'eta' value")
            kw["eta_rule"] = EtaRule(kind, float(value))
        if "c0_sweep" in d:
            kw["c0_sweep"] = None if d["c0_sweep"] is None else tuple(float(c) for c in d["c0_sweep"])
        for key, cast in (("p", float), ("tol", float), ("replications", int), ("error_samples", int), ("seed", int)):
            if key in d:
                kw[key] = cast(d[key])
        return cls(**kw)

    def to_dict(self) -> dict:
        rule = {"kind": self.eta_rule.kind}
        rule["c0" if self.eta_rule.kind == "theorem" else "eta"] = self.eta_rule.value
        return {
            "space": self.space.to_dict(),
            "model": self.model.to_dict(),
            "noise": {"sigma2": self.noise.sigma2, "law": self.noise.law},
            "p": self.p,
            "tol": self.tol,
            "grid": [list(g) for g in self.grid],
            "replications": self.replications,
            "eta_rule": rule,
            "c0_sweep": None if self.c0_sweep is None else list(self.c0_sweep),
            "error_samples": self.error_samples,
            "seed": self.seed,
        }

    def candidates(self, n: int, r: float) -> list[tuple[float, float]]:
        """``(c0, eta)`` pairs tried at one design point (c0 is NaN for a fixed eta)."""
        if self.eta_rule.kind == "fixed":
            return [(math.nan, self.eta_rule.value)]
        c0s = self.c0_sweep if self.c0_sweep else (self.eta_rule.value,)
        return [(c0, theorem_eta(n, r, self.p, self.space.d, c0)) for c0 in c0s]


@dataclass(frozen=True)
class PointResult:
    n: int
    r: int
    c0: float
    eta: float
    mean_sq_error: float
    std_error: float


@dataclass(frozen=True)
class RateReport:
    """Per-point errors at the selected penalty plus the fitted log-log slope.

    ``sweep`` keeps every penalty candidate (the sensitivity table); ``rows``
    keeps the best candidate per design point.
    """

    rows: tuple
    sweep: tuple
    slope: float
    intercept: float
    slope_r: int | None
    target: float
    band: tuple = SLOPE_BAND
    degenerate: bool = False

    @property
    def in_band(self) -> bool:
        return (not self.degenerate) and self.band[0] <= self.slope <= self.band[1]

    def to_csv(self) -> str:
        return _rows_csv(self.rows)

    def sweep_csv(self) -> str:
        return _rows_csv(self.sweep)

    def summary(self) -> dict:
        at = {row.n: row.mean_sq_error for row in self.rows if row.r == self.slope_r}
        decreasing = None
        if len(at) >= 2:
            decreasing = at[max(at)] < at[min(at)]
        return {
            "slope": None if math.isnan(self.slope) else self.slope,
            "intercept": None if math.isnan(self.intercept) else self.intercept,
            "slope_r": self.slope_r,
            "target": self.target,
            "band": list(self.band),
            "in_band": self.in_band,
            "degenerate": self.degenerate,
            "error_decreases_in_n": decreasing,
        }


def _fmt(x: float) -> str:
    return "nan" if math.isnan(x) else format(x, ".17g")


def _rows_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "r", "eta", "mean_sq_error", "std_error", "c0"])
    for row in rows:
        w.writerow([row.n, row.r, _fmt(row.eta), _fmt(row.mean_sq_error), _fmt(row.std_error), _fmt(row.c0)])
    return buf.getvalue()


def cell_seed(seed: int, n: int, r: int, replication: int) -> np.random.SeedSequence:
    """Seed of one (design point, replication) cell."""
    return np.random.SeedSequence(seed, spawn_key=(n, r, replication))


def _run_cell(config: ExperimentConfig, kernel: ZonalKernel, model: CovModel, n: int, r: int, rep: int):
    data_ss, err_ss = cell_seed(config.seed, n, r, rep).spawn(2)
    data = sample_dataset(model, n, r, config.noise, data_ss)
    design = assemble_pairs(data)
    K = gram_matrix(kernel, design)
    r_h = harmonic_mean(data.r)
    U, V, truth = _mc_tables(kernel, model, config.error_samples, np.random.default_rng(err_ss))
    # kernel sections at the integration points are shared by every penalty candidate
    psi = (kernel_matrix(kernel, U, design.points), kernel_matrix(kernel, V, design.points))
    errors = []
    for _, eta in config.candidates(n, r_h):
        est = fit(kernel, design, eta, gram=K)
        errors.append(_mc_score(est, U, V, truth, psi)[0])
    return errors


def _fit_slope(ns, errs) -> tuple[float, float]:
    x = np.log(np.asarray(ns, dtype=float))
    y = np.log(np.asarray(errs, dtype=float))
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(slope), float(intercept)


def rate_study(config: ExperimentConfig, threads: int = 1, progress=None) -> RateReport:
    """Simulate, fit and score every (design point, replication) cell.

    For each design point the penalty candidate with the smallest mean error
    is kept. The slope is fitted by unweighted least squares of
    ``log(mean error)`` on ``log n`` over the points sharing the most common
    ``r`` (at least three are required for a slope).
    """
    kernel = zonal_green(config.space, config.p, tol=config.tol)
    model = config.model.build(config.space)
    cells = [(n, r, rep) for n, r in config.grid for rep in range(config.replications)]

    def run(cell):
        n, r, rep = cell
        try:
            out = _run_cell(config, kernel, model, n, r, rep)
        except TphcovError as exc:
            raise type(exc)(f"design point n={n}, r={r}, replication {rep}: {exc}") from exc
        if progress is not None:
            progress(cell)
        return out

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = dict(zip(cells, pool.map(run, cells)))
    else:
        results = {cell: run(cell) for cell in cells}

    rows, sweep = [], []
    R = config.replications
    for n, r in config.grid:
        cands = config.candidates(n, float(r))
        errs = np.array([results[(n, r, rep)] for rep in range(R)])  # (R, candidates)
        means = errs.mean(axis=0)
        ses = errs.std(axis=0, ddof=1) / math.sqrt(R) if R > 1 else np.full(len(cands), math.nan)
        point = [
            PointResult(n, r, c0, eta, float(m), float(se))
            for (c0, eta), m, se in zip(cands, means, ses)
        ]
        sweep.extend(point)
        rows.append(point[int(np.argmin(means))])

    r_counts = Counter(row.r for row in rows)
    slope_r, count = r_counts.most_common(1)[0]
    sub = sorted((row.n, row.mean_sq_error) for row in rows if row.r == slope_r)
    degenerate = any(e < DEGENERATE_FLOOR for _, e in sub)
    slope = intercept = math.nan
    if count >= 3 and not degenerate:
        slope, intercept = _fit_slope(*zip(*sub))
    return RateReport(
        rows=tuple(rows),
        sweep=tuple(sweep),
        slope=slope,
        intercept=intercept,
        slope_r=slope_r,
        target=-theorem_exponent(config.p, config.space.d),
        degenerate=degenerate,
    )


def write_report(report: RateReport, config: ExperimentConfig, out_dir) -> dict:
    """Write ``report.csv``, ``sweep.csv`` and ``summary.json`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.csv").write_text(report.to_csv())
    (out / "sweep.csv").write_text(report.sweep_csv())
    summary = report.summary()
    summary["config"] = config.to_dict()
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary
