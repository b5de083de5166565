"""Experiment configuration, the four studies, slope fitting and CSV output.

Every study is split into tasks whose boundaries do not depend on the number
of worker processes; each task warm-starts its solves from its own base state.
Results are therefore byte-identical for any ``threads`` value.
"""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import logging
import math
import os
import subprocess
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np
import yaml

from . import __version__
from .coeff import AffinePotential, make_rng, sample_y
from .deriv import BoundRatioReport, bound_scan, default_step
from .multiindex import MultiIndex
from .errors import GapError, SolverError
from .qmc import (LatticeRule, PODWeights, cbc_construct, default_theta, draw_shifts,
                  generate_points, is_prime, summarize_shifts, alpha_for_q)
from .solver import (ProblemSpec, admissible, admissible_energy, gap_report, identity_defect,
                     linearized_ground_T, solve_ground, verify_amplitude_bound)
from .spatial import Grid

log = logging.getLogger(__name__)

OUT_ENV = "SEMILINEAR_UQ_OUT"
EXIT_OK, EXIT_HARD, EXIT_SOFT = 0, 1, 3

# RNG streams (shifts use qmc.SHIFT_STREAM = 1)
GAP_STREAM, DERIV_STREAM, TRUNC_STREAM = 2, 3, 4


# ---------------------------------------------------------------- config

@dataclass
class ProblemCfg:
    d: int = 1
    p: int = 3
    eta: float = 1.0
    h: float = 0.01
    domain: str = "unit"


@dataclass
class PotentialCfg:
    c: float = 1.0
    theta_dec: float = 2.0
    margin: float = 0.1
    s_max: int = 64
    family: str = "sine"


@dataclass
class SolverCfg:
    tol: float | None = None
    damping: float = 0.5


@dataclass
class QMCCfg:
    s: int = 4
    theta: float | str = "auto"
    N: list = field(default_factory=lambda: [127, 251, 503, 1009])
    R: int = 16
    delta: float = 0.05
    slope_max: float = -0.8
    quantities: list = field(default_factory=lambda: ["lambda"])


@dataclass
class TruncationCfg:
    s: list = field(default_factory=lambda: [2, 4, 8, 16, 32])
    s_ref: int = 64
    n_points: int = 509
    sampler: str = "qmc"  # or "mc"
    corners: bool = True
    antithetic: bool = True
    strong_band: float = 0.3
    weak_band: float = 0.5
    chunk: int = 32


@dataclass
class GapCfg:
    s: int = 16
    n_samples: int = 200
    chunk: int = 25


@dataclass
class DerivCfg:
    coords: list = field(default_factory=lambda: [1, 2])
    order_cap: int = 2
    n_samples: int = 2
    s: int = 4
    target: str = "lambda"
    step: float | None = None
    richardson: int = 0
    factor: float = 10.0


@dataclass
class ExperimentConfig:
    problem: ProblemCfg = field(default_factory=ProblemCfg)
    potential: PotentialCfg = field(default_factory=PotentialCfg)
    solver: SolverCfg = field(default_factory=SolverCfg)
    qmc: QMCCfg = field(default_factory=QMCCfg)
    truncation: TruncationCfg = field(default_factory=TruncationCfg)
    gap: GapCfg = field(default_factory=GapCfg)
    deriv: DerivCfg = field(default_factory=DerivCfg)
    seed: int = 0
    out: str | None = None

    def validate(self):
        pr = self.problem
        if pr.domain != "unit":
            raise ValueError("only the unit domain (0,1)^d is supported")
        if not admissible(pr.d, pr.p):
            raise ValueError(f"(d, p) = ({pr.d}, {pr.p}) not admissible")
        return self

    def validate_for(self, study: str):
        """Checks that only matter for one study type."""
        pr, s_max = self.problem, self.potential.s_max
        if study == "deriv":
            if self.deriv.target == "energy" and not admissible_energy(pr.d, pr.p):
                raise ValueError(f"(d, p) = ({pr.d}, {pr.p}) not admissible for energy derivatives")
            if self.deriv.s > s_max or max(self.deriv.coords) > self.deriv.s:
                raise ValueError("derivative coordinates must lie within deriv.s <= potential.s_max")
        elif study == "truncation":
            t = self.truncation
            if any(b <= a for a, b in zip(t.s, t.s[1:])):
                raise ValueError("truncation s list must be increasing")
            if max(t.s) > t.s_ref or t.s_ref > s_max:
                raise ValueError("need s <= s_ref <= potential.s_max")
            if t.sampler == "qmc" and not is_prime(t.n_points):
                raise ValueError("truncation n_points must be prime for the lattice sampler")
        elif study == "qmc":
            for N in self.qmc.N:
                if not is_prime(N):
                    raise ValueError(f"QMC point count {N} is not prime")
            if self.qmc.s > s_max:
                raise ValueError("qmc.s exceeds potential.s_max")
        elif study == "gap":
            if self.gap.s > s_max:
                raise ValueError("gap.s exceeds potential.s_max")
        return self

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def hash(self) -> str:
        """Short digest of everything except seed and output location."""
        d = self.to_dict()
        d.pop("seed")
        d.pop("out")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]


_SECTIONS = {"problem": ProblemCfg, "potential": PotentialCfg, "solver": SolverCfg, "qmc": QMCCfg,
             "truncation": TruncationCfg, "gap": GapCfg, "deriv": DerivCfg}


def config_from_dict(raw: dict | None) -> ExperimentConfig:
    raw = dict(raw or {})
    kwargs: dict[str, Any] = {}
    for name, cls in _SECTIONS.items():
        block = raw.pop(name, None) or {}
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(block) - known
        if unknown:
            raise ValueError(f"unknown keys in [{name}]: {sorted(unknown)}")
        kwargs[name] = cls(**block)
    for key in ("seed", "out"):
        if key in raw:
            kwargs[key] = raw.pop(key)
    if raw:
        raise ValueError(f"unknown top-level keys: {sorted(raw)}")
    return ExperimentConfig(**kwargs).validate()


def load_config(path: str | Path | None) -> ExperimentConfig:
    if path is None:
        return config_from_dict({})
    with open(path) as fh:
        return config_from_dict(yaml.safe_load(fh))


def version_string() -> str:
    try:
        out = subprocess.run(["git", "describe", "--tags", "--always", "--dirty"],
                             cwd=Path(__file__).parent, capture_output=True, text=True, timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    return f"v{__version__}"


@lru_cache(maxsize=8)
def _spec_cached(key: str) -> ProblemSpec:
    raw = json.loads(key)
    pr, po = raw["problem"], raw["potential"]
    grid = Grid.from_h(pr["h"], pr["d"])
    pot = AffinePotential.algebraic(po["c"], po["theta_dec"], po["s_max"], d=pr["d"],
                                    family=po["family"], margin=po["margin"])
    return ProblemSpec(grid, pot, pr["eta"], pr["p"])


def build_spec(cfg: ExperimentConfig) -> ProblemSpec:
    key = json.dumps({"problem": dataclasses.asdict(cfg.problem),
                      "potential": dataclasses.asdict(cfg.potential)}, sort_keys=True)
    return _spec_cached(key)


def _solve(spec: ProblemSpec, cfg: ExperimentConfig, y, u0=None):
    return solve_ground(spec, y, tol=cfg.solver.tol, damping=cfg.solver.damping, u0=u0)


def _map(fn: Callable, tasks: Sequence, threads: int) -> list:
    if threads <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, tasks))


# ---------------------------------------------------------------- tables

@dataclass
class Table:
    columns: list
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_csv(table: Table, path: str | Path) -> Path:
    """Write '#'-prefixed metadata lines, a header and the rows; atomic via rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    for k, v in table.meta.items():
        buf.write(f"# {k}={_fmt(v)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([_fmt(v) for v in row])
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(buf.getvalue())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _parse(v: str):
    for conv in (int, float):
        try:
            return conv(v)
        except ValueError:
            pass
    return v


def read_csv(path: str | Path) -> Table:
    meta, lines = {}, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("# "):
            k, _, v = line[2:].partition("=")
            meta[k] = _parse(v)
        else:
            lines.append(line)
    reader = csv.reader(lines)
    columns = next(reader)
    rows = [[_parse(v) for v in r] for r in reader]
    return Table(columns, rows, meta)


# ---------------------------------------------------------------- fits

@dataclass
class SlopeFit:
    x: np.ndarray
    y: np.ndarray
    slope: float
    intercept: float
    r2: float


def fit_slope(xs: Sequence[float], ys: Sequence[float]) -> SlopeFit:
    """Least-squares line through (log x, log y)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) != len(ys) or len(xs) < 3:
        raise ValueError("need at least three points")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("log-log fit needs positive data")
    lx, ly = np.log(xs), np.log(ys)
    A = np.column_stack([lx, np.ones_like(lx)])
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    if not np.isfinite(slope):
        raise ValueError("non-finite slope")
    return SlopeFit(lx, ly, float(slope), float(intercept), r2)


@dataclass
class FitCheck:
    study: str
    quantity: str
    fit: SlopeFit
    target: float
    lower: float
    upper: float

    @property
    def passed(self) -> bool:
        return self.lower <= self.fit.slope <= self.upper


FIT_COLUMNS = ["study", "quantity", "slope", "intercept", "r2", "target", "lower", "upper", "passed"]


@dataclass
class StudyResult:
    name: str
    table: Table
    fits: list = field(default_factory=list)
    hard_failures: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        if self.hard_failures:
            return EXIT_HARD
        if any(not f.passed for f in self.fits):
            return EXIT_SOFT
        return EXIT_OK

    def fit_table(self, meta: dict) -> Table:
        rows = [[f.study, f.quantity, f.fit.slope, f.fit.intercept, f.fit.r2, f.target,
                 f.lower, f.upper, int(f.passed)] for f in self.fits]
        return Table(FIT_COLUMNS, rows, meta)


def _meta(cfg: ExperimentConfig, **extra) -> dict:
    m = {"study": extra.pop("study"), "h": cfg.problem.h, "d": cfg.problem.d, "p": cfg.problem.p,
         "eta": cfg.problem.eta, "c": cfg.potential.c, "theta_dec": cfg.potential.theta_dec,
         "family": cfg.potential.family, "s_max": cfg.potential.s_max,
         "config_hash": cfg.hash(), "seed": cfg.seed, "version": version_string()}
    m.update(extra)
    return m


# ---------------------------------------------------------------- QMC study

def _profile(grid: Grid) -> np.ndarray:
    """Fixed profile g(x) = prod_i x_i (1 - x_i); G(u) = <g, u>."""
    return np.prod(grid.coords * (1.0 - grid.coords), axis=1)


def _qmc_task(args) -> tuple:
    cfg, N, z, shift = args
    spec = build_spec(cfg)
    s = len(z)
    rule = LatticeRule(N, tuple(z))
    base = _solve(spec, cfg, np.zeros(s))
    g = _profile(spec.grid)
    vals = np.empty((N, 3))
    for k, y in enumerate(generate_points(rule, np.asarray(shift))):
        gs = _solve(spec, cfg, y, u0=base.u)
        vals[k] = gs.lam, gs.energy, spec.grid.inner(g, gs.u)
    return tuple(float(np.sum(vals[:, i])) / N for i in range(3))


def qmc_weights(cfg: ExperimentConfig, s: int) -> PODWeights:
    theta = cfg.qmc.theta
    if theta == "auto":
        theta = default_theta(1.0 / cfg.potential.theta_dec)
    pot_norms = cfg.potential.c * np.arange(1, s + 1, dtype=float) ** (-cfg.potential.theta_dec)
    return PODWeights.from_beta(pot_norms, float(theta))


QMC_COLUMNS = ["N", "s", "R", "seed", "quantity", "mean", "rmse", "config_hash", "version"]


def run_qmc_convergence(cfg: ExperimentConfig, threads: int = 1) -> StudyResult:
    cfg.validate_for("qmc")
    q = cfg.qmc
    w = qmc_weights(cfg, q.s)
    shifts = draw_shifts(q.s, q.R, cfg.seed)
    rules = {N: cbc_construct(N, q.s, w) for N in q.N}
    tasks = [(cfg, N, rules[N].z, tuple(shifts[r])) for N in q.N for r in range(q.R)]
    out = _map(_qmc_task, tasks, threads)
    names = ["lambda", "energy", "functional"]
    meta = _meta(cfg, study="qmc", R=q.R, s=q.s, theta_weights=w.theta)
    table = Table(QMC_COLUMNS, meta=meta)
    rmse = {n: [] for n in names}
    h, ver = cfg.hash(), meta["version"]
    for i, N in enumerate(q.N):
        block = np.asarray(out[i * q.R:(i + 1) * q.R])
        for j, name in enumerate(names):
            est = summarize_shifts(block[:, j], rules[N], cfg.seed)
            rmse[name].append(est.rmse)
            if name in q.quantities:
                table.rows.append([N, q.s, q.R, cfg.seed, name, est.mean, est.rmse, h, ver])
    res = StudyResult("qmc", table, summary={"z": {N: list(r.z) for N, r in rules.items()}})
    alpha = alpha_for_q(1.0 / cfg.potential.theta_dec, q.delta)
    for name in q.quantities:
        fit = fit_slope(q.N, rmse[name])
        res.fits.append(FitCheck("qmc", name, fit, -alpha, -math.inf, q.slope_max))
    return res


# ---------------------------------------------------------------- truncation study

def truncation_points(cfg: ExperimentConfig) -> np.ndarray:
    """The y-sample in s_ref dimensions: a shifted lattice (or iid draws), plus corners."""
    t = cfg.truncation
    s = t.s_ref
    if t.sampler == "qmc":
        w = PODWeights.from_beta(cfg.potential.c * np.arange(1, s + 1, dtype=float) ** (-cfg.potential.theta_dec),
                                 default_theta(1.0 / cfg.potential.theta_dec))
        rule = cbc_construct(t.n_points, s, w)
        Y = generate_points(rule, make_rng(cfg.seed, TRUNC_STREAM).random(s))
    elif t.sampler == "mc":
        Y = sample_y(s, cfg.seed, t.n_points, stream=TRUNC_STREAM)
    else:
        raise ValueError(f"unknown sampler {t.sampler!r}")
    return Y


def _truncation_task(args):
    cfg, Y, for_weak = args
    spec = build_spec(cfg)
    S = cfg.truncation.s
    base = _solve(spec, cfg, np.zeros(cfg.truncation.s_ref))
    strong = np.zeros((len(Y), len(S)))
    weak = np.zeros((len(Y), len(S)))
    for k, y in enumerate(Y):
        full = _solve(spec, cfg, y, u0=base.u).lam
        for i, s in enumerate(S):
            ys = y.copy()
            ys[s:] = 0.0
            trunc = _solve(spec, cfg, ys, u0=base.u).lam
            strong[k, i] = abs(full - trunc)
            if for_weak:
                if cfg.truncation.antithetic:
                    ya = y.copy()
                    ya[s:] *= -1.0
                    mirror = _solve(spec, cfg, ya, u0=base.u).lam
                    weak[k, i] = 0.5 * (full + mirror) - trunc
                else:
                    weak[k, i] = full - trunc
    return strong, weak


TRUNC_COLUMNS = ["s", "strong_error", "weak_error", "weak_stderr", "n_points", "seed",
                 "config_hash", "version"]


def run_truncation(cfg: ExperimentConfig, threads: int = 1) -> StudyResult:
    """Strong error: max over the sample of |lambda_ref - lambda_s|.
    Weak error: |mean of lambda_ref - lambda_s|, with the tail coordinates
    symmetrised (y_tail and -y_tail averaged) when ``antithetic`` is set.
    """
    cfg.validate_for("truncation")
    t = cfg.truncation
    Y = truncation_points(cfg)
    chunks = [(cfg, Y[i:i + t.chunk], True) for i in range(0, len(Y), t.chunk)]
    if t.corners:
        corners = np.vstack([np.full(t.s_ref, 0.5), np.full(t.s_ref, -0.5)])
        chunks.append((cfg, corners, False))
    out = _map(_truncation_task, chunks, threads)
    strong = np.vstack([o[0] for o in out]).max(axis=0)
    weak_samples = np.vstack([o[1] for o, c in zip(out, chunks) if c[2]])
    weak = np.abs(weak_samples.mean(axis=0))
    weak_se = weak_samples.std(axis=0, ddof=1) / math.sqrt(len(weak_samples))
    meta = _meta(cfg, study="truncation", s_ref=t.s_ref, n_points=t.n_points, sampler=t.sampler,
                 corners=int(t.corners), antithetic=int(t.antithetic))
    table = Table(TRUNC_COLUMNS, meta=meta)
    for i, s in enumerate(t.s):
        table.rows.append([s, float(strong[i]), float(weak[i]), float(weak_se[i]), len(Y), cfg.seed,
                           meta["config_hash"], meta["version"]])
    res = StudyResult("truncation", table)
    theta = cfg.potential.theta_dec
    keep = [i for i, s in enumerate(t.s) if s < t.s_ref]
    xs = [t.s[i] for i in keep]
    if len(xs) >= 3:
        target = 1.0 - theta
        res.fits.append(FitCheck("truncation", "strong", fit_slope(xs, strong[keep]), target,
                                 target - t.strong_band, target + t.strong_band))
        target = 1.0 - 2.0 * theta
        res.fits.append(FitCheck("truncation", "weak", fit_slope(xs, weak[keep]), target,
                                 target - t.weak_band, target + t.weak_band))
    return res


# ---------------------------------------------------------------- gap scan

GAP_COLUMNS = ["sample", "lam", "lam_T", "gap", "witness", "seed", "config_hash", "version"]


def _gap_task(args):
    cfg, Y = args
    spec = build_spec(cfg)
    base = _solve(spec, cfg, np.zeros(Y.shape[1]))
    rows, failures = [], []
    for y in Y:
        gs = _solve(spec, cfg, y, u0=base.u)
        try:
            rep = gap_report(spec, gs, cfg.solver.tol)
        except GapError as exc:
            failures.append(str(exc))
            t = linearized_ground_T(spec, gs, cfg.solver.tol)
            rows.append((gs.lam, t.value, t.value - gs.lam, float("nan")))
            continue
        rows.append((rep.lam, rep.lam_T, rep.gap, rep.lower_witness))
    return rows, failures


def run_gap_scan(cfg: ExperimentConfig, threads: int = 1) -> StudyResult:
    cfg.validate_for("gap")
    g = cfg.gap
    Y = sample_y(g.s, cfg.seed, g.n_samples, stream=GAP_STREAM)
    out = _map(_gap_task, [(cfg, Y[i:i + g.chunk]) for i in range(0, len(Y), g.chunk)], threads)
    meta = _meta(cfg, study="gap", s=g.s, n_samples=g.n_samples)
    table = Table(GAP_COLUMNS, meta=meta)
    failures = []
    k = 0
    for rows, fails in out:
        failures.extend(fails)
        for r in rows:
            table.rows.append([k, *r, cfg.seed, meta["config_hash"], meta["version"]])
            k += 1
    gaps = np.asarray(table.column("gap"))
    if np.any(gaps <= 0):
        failures.append(f"nonpositive gap (min {gaps.min():.3e})")
    summary = {"min_gap": float(gaps.min()), "median_gap": float(np.median(gaps)),
               "max_gap": float(gaps.max()), "min_witness": float(np.nanmin(table.column("witness"))),
               "min_gap_minus_witness": float(np.nanmin(gaps - np.asarray(table.column("witness"))))}
    return StudyResult("gap", table, hard_failures=failures, summary=summary)


# ---------------------------------------------------------------- derivative scan

DERIV_COLUMNS = ["nu", "target", "value", "step", "r", "sample", "seed", "config_hash", "version"]


def _deriv_task(args):
    cfg, y = args
    spec = build_spec(cfg)
    dc = cfg.deriv
    rep = bound_scan(spec, [y], dc.order_cap, dc.coords, dc.target, dc.step, dc.richardson)
    return [(nu.pack(), est, r) for nu, _, est, r in rep.rows]


def run_deriv_scan(cfg: ExperimentConfig, threads: int = 1) -> StudyResult:
    cfg.validate_for("deriv")
    dc = cfg.deriv
    # keep the widest stencil (7 points at the default step) inside the box
    Y = 0.9 * sample_y(dc.s, cfg.seed, dc.n_samples, stream=DERIV_STREAM)
    out = _map(_deriv_task, [(cfg, y) for y in Y], threads)
    meta = _meta(cfg, study="deriv", coords=";".join(map(str, dc.coords)), order_cap=dc.order_cap,
                 target=dc.target)
    table = Table(DERIV_COLUMNS, meta=meta)
    report = BoundRatioReport(dc.target, list(dc.coords))
    for k, rows in enumerate(out):
        for packed, est, r in rows:
            nu = MultiIndex.unpack(packed)
            step = 0.0 if nu.is_zero() else (dc.step or default_step(nu.order))
            table.rows.append([packed, dc.target, est, step, r, k, cfg.seed, meta["config_hash"],
                               meta["version"]])
            report.rows.append((nu, k, est, r))
    summary = {"per_order": report.per_order(), "cross_order_constant": report.cross_order_constant,
               "single_constant_holds": report.single_constant_holds(dc.factor)}
    return StudyResult("deriv", table, summary=summary)


# ---------------------------------------------------------------- output helpers

def output_dir(cfg: ExperimentConfig, override: str | None = None) -> Path:
    return Path(override or cfg.out or os.environ.get(OUT_ENV) or "results")


def write_study(res: StudyResult, out: Path) -> list[Path]:
    paths = [emit_csv(res.table, out / f"{res.name}.csv")]
    if res.fits:
        paths.append(emit_csv(res.fit_table(res.table.meta), out / f"{res.name}_fits.csv"))
    return paths


def solve_hard_checks(spec: ProblemSpec, gs) -> list[str]:
    """Normalisation, positivity, amplitude and identity checks on one state."""
    fails = []
    if abs(spec.grid.norm(gs.u) - 1.0) > 1e-10:
        fails.append("state not normalised")
    if not np.all(gs.u > 0):
        fails.append("state not positive")
    if not verify_amplitude_bound(spec, gs):
        fails.append("amplitude bound violated")
    if abs(identity_defect(spec, gs)) > 1e-8 * abs(gs.lam):
        fails.append("eigenvalue-energy identity violated")
    return fails


__all__ = [
    "ExperimentConfig", "config_from_dict", "load_config", "build_spec", "Table", "emit_csv", "read_csv",
    "SlopeFit", "fit_slope", "FitCheck", "StudyResult", "run_qmc_convergence", "run_truncation",
    "run_gap_scan", "run_deriv_scan", "output_dir", "write_study", "version_string",
    "EXIT_OK", "EXIT_HARD", "EXIT_SOFT", "SolverError",
]
