"""Experiment harness: configs, Monte Carlo replication, persistence, summaries.

Runs are persisted as one CSV per (strategy, repetition) so experiments are
resumable: pairs whose output file already exists are skipped, and identical
config plus seed reproduces byte-identical files.  For that reason run and
summary CSVs contain no wall-clock columns; timings live in the in-memory
records and in the candidate-measurement table, which is inherently
machine-dependent.  Floats are written with 17 significant digits.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .benchfn import get_benchmark
from .candidates import SubsampleConfig, tricands
from .errors import (
    ConfigError,
    DegenerateInput,
    MissingStrategy,
    TooFewPoints,
    TriangulationFailed,
)
from .optimizer import (
    LHS_STRATEGIES,
    RAW_STRATEGIES,
    STRATEGY_NAMES,
    Strategy,
    run_bo,
)

logger = logging.getLogger(__name__)

RUN_SCHEMA = "tricands-run-v1"
SUMMARY_SCHEMA = "tricands-summary-v1"
MEASURE_SCHEMA = "tricands-measure-v1"

# Cap large enough that targeted subsampling never triggers in measure mode.
_NO_CAP = 2**62


def _fmt(x) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class ExperimentConfig:
    """One benchmark, several strategies, `repetitions` paired restarts."""

    benchmark: str
    strategies: tuple
    n0: int = 12
    n_end: int = 50
    n_sub_max: int | None = None
    candidate_cap: int | None = None
    n_starts: int = 5
    repetitions: int = 30
    base_seed: int = 0
    out_dir: str = "results"

    def __post_init__(self):
        object.__setattr__(self, "strategies", tuple(self.strategies))
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if not self.n0 < self.n_end:
            raise ConfigError("need n0 < n_end")
        for name in self.strategies:
            if name not in STRATEGY_NAMES:
                raise ConfigError(
                    f"unknown strategy {name!r}; known: {', '.join(STRATEGY_NAMES)}"
                )
        if not self.strategies:
            raise ConfigError("at least one strategy is required")

    def resolved_caps(self):
        """(tricands cap, generic candidate count) with 100*d defaults."""
        d = get_benchmark(self.benchmark).d
        n_sub = self.n_sub_max if self.n_sub_max is not None else 100 * d
        cap = self.candidate_cap if self.candidate_cap is not None else n_sub
        return n_sub, cap

    def strategy_for(self, name: str) -> Strategy:
        n_sub, cap = self.resolved_caps()
        return Strategy(
            name=name,
            candidate_cap=cap if name in LHS_STRATEGIES else n_sub,
            n_starts=self.n_starts,
        )


_CONFIG_KEYS = {
    "benchmark": str,
    "strategies": str,
    "n0": int,
    "n_end": int,
    "n_sub_max": int,
    "candidate_cap": int,
    "n_starts": int,
    "repetitions": int,
    "base_seed": int,
    "out_dir": str,
}


def parse_config(path) -> ExperimentConfig:
    """Parse a flat key = value config file with '#' comments."""
    raw = {}
    text = Path(path).read_text()
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        try:
            raw[key] = _CONFIG_KEYS[key](value)
        except ValueError:
            raise ConfigError(
                f"{path}:{lineno}: invalid value {value!r} for {key}"
            ) from None
    if "benchmark" not in raw:
        raise ConfigError(f"{path}: missing required key 'benchmark'")
    if "strategies" not in raw:
        raise ConfigError(f"{path}: missing required key 'strategies'")
    raw["strategies"] = tuple(
        s.strip() for s in raw["strategies"].split(",") if s.strip()
    )
    try:
        get_benchmark(raw["benchmark"])
    except KeyError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return ExperimentConfig(**raw)


def _safe_name(name: str) -> str:
    return name.replace("/", "-").replace(" ", "_")


def run_path(out_dir, strategy: str, rep: int) -> Path:
    return Path(out_dir) / "runs" / f"{_safe_name(strategy)}__rep{rep:04d}.csv"


def write_run_csv(path, record, rep: int):
    """Persist one run: one row per evaluation n = 1..n_end, no wall times."""
    X, Y = record.X_final, np.asarray(record.Y_final, dtype=float)
    d = X.shape[1]
    bov = np.minimum.accumulate(Y)
    evals = np.zeros(Y.shape[0], dtype=int)
    evals[record.n0 :] = record.per_acq_evals
    header = (
        ["schema", "strategy", "rep", "seed", "n"]
        + [f"x{k}" for k in range(d)]
        + ["y", "bov", "acq_evals"]
    )
    lines = [",".join(header)]
    for i in range(Y.shape[0]):
        row = (
            [RUN_SCHEMA, record.strategy, str(rep), str(record.seed), str(i + 1)]
            + [_fmt(v) for v in X[i]]
            + [_fmt(Y[i]), _fmt(bov[i]), str(evals[i])]
        )
        lines.append(",".join(row))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")


@dataclass(frozen=True)
class LoadedRun:
    """Just enough of a persisted run to summarize it."""

    strategy: str
    rep: int
    bov: np.ndarray
    criterion_evals_total: int


def read_run_csv(path) -> LoadedRun:
    lines = Path(path).read_text().strip().splitlines()
    header = lines[0].split(",")
    cols = {name: j for j, name in enumerate(header)}
    if header[0] != "schema":
        raise ConfigError(f"{path}: not a run CSV")
    strategy, rep = None, None
    bov, evals = [], 0
    for line in lines[1:]:
        parts = line.split(",")
        strategy = parts[cols["strategy"]]
        rep = int(parts[cols["rep"]])
        bov.append(float(parts[cols["bov"]]))
        evals += int(parts[cols["acq_evals"]])
    return LoadedRun(
        strategy=strategy, rep=rep, bov=np.array(bov), criterion_evals_total=evals
    )


def _bov_series(record) -> np.ndarray:
    if hasattr(record, "bov"):
        return np.asarray(record.bov, dtype=float)
    return record.bov_full()


@dataclass(frozen=True)
class SummaryTable:
    """Per-(strategy, n) BOV distribution and per-strategy mean eval totals."""

    strategies: tuple
    n_values: np.ndarray
    median: dict
    q1: dict
    q3: dict
    whisker_lo: dict
    whisker_hi: dict
    lo: dict
    hi: dict
    mean_evals: dict

    def median_at(self, strategy: str, n: int) -> float:
        return float(self.median[strategy][np.searchsorted(self.n_values, n)])


def summarize(records, strategies=None) -> SummaryTable:
    """Reduce run records to medians, quartiles (type 7), and whiskers.

    Order of ``records`` does not matter; output is sorted by strategy name.
    """
    by_strategy = {}
    for rec in records:
        by_strategy.setdefault(rec.strategy, []).append(_bov_series(rec))
    if strategies is not None:
        missing = [s for s in strategies if s not in by_strategy]
        if missing:
            raise MissingStrategy(f"no records for: {', '.join(missing)}")
        by_strategy = {s: by_strategy[s] for s in by_strategy if s in strategies}
    if not by_strategy:
        raise MissingStrategy("no records at all")

    names = tuple(sorted(by_strategy))
    n_len = {len(series) for traces in by_strategy.values() for series in traces}
    if len(n_len) != 1:
        raise ValueError("records disagree on trace length")
    n_values = np.arange(1, n_len.pop() + 1)

    median, q1, q3, wlo, whi, lo, hi, mean_evals = {}, {}, {}, {}, {}, {}, {}, {}
    for name in names:
        traces = np.array(by_strategy[name])
        median[name] = np.percentile(traces, 50, axis=0)
        q1[name] = np.percentile(traces, 25, axis=0)
        q3[name] = np.percentile(traces, 75, axis=0)
        iqr = q3[name] - q1[name]
        lo[name] = traces.min(axis=0)
        hi[name] = traces.max(axis=0)
        low_fence = q1[name] - 1.5 * iqr
        high_fence = q3[name] + 1.5 * iqr
        wlo[name] = np.where(traces >= low_fence[None, :], traces, np.inf).min(axis=0)
        whi[name] = np.where(traces <= high_fence[None, :], traces, -np.inf).max(axis=0)
    evals_by = {}
    for rec in records:
        if strategies is None or rec.strategy in names:
            evals_by.setdefault(rec.strategy, []).append(rec.criterion_evals_total)
    for name in names:
        mean_evals[name] = float(np.mean(evals_by[name]))

    return SummaryTable(
        strategies=names,
        n_values=n_values,
        median=median,
        q1=q1,
        q3=q3,
        whisker_lo=wlo,
        whisker_hi=whi,
        lo=lo,
        hi=hi,
        mean_evals=mean_evals,
    )


def write_summary_csvs(summary: SummaryTable, out_dir):
    """Plot-ready CSVs: median trace, per-n box stats, mean eval totals."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    lines = ["schema,strategy,n,median_bov"]
    for name in summary.strategies:
        for i, n in enumerate(summary.n_values):
            lines.append(
                f"{SUMMARY_SCHEMA},{name},{n},{_fmt(summary.median[name][i])}"
            )
    (out / "summary_median.csv").write_text("\n".join(lines) + "\n")

    lines = [
        "schema,strategy,n,lo,whisker_lo,q1,median,q3,whisker_hi,hi"
    ]
    for name in summary.strategies:
        for i, n in enumerate(summary.n_values):
            vals = [
                summary.lo[name][i],
                summary.whisker_lo[name][i],
                summary.q1[name][i],
                summary.median[name][i],
                summary.q3[name][i],
                summary.whisker_hi[name][i],
                summary.hi[name][i],
            ]
            lines.append(
                f"{SUMMARY_SCHEMA},{name},{n}," + ",".join(_fmt(v) for v in vals)
            )
    (out / "summary_box.csv").write_text("\n".join(lines) + "\n")

    lines = ["schema,strategy,mean_criterion_evals"]
    for name in summary.strategies:
        lines.append(f"{SUMMARY_SCHEMA},{name},{_fmt(summary.mean_evals[name])}")
    (out / "summary_evals.csv").write_text("\n".join(lines) + "\n")


def _run_pair(cfg: ExperimentConfig, name: str, rep: int):
    objective = get_benchmark(cfg.benchmark)
    record = run_bo(
        objective,
        cfg.strategy_for(name),
        n0=cfg.n0,
        n_end=cfg.n_end,
        seed=cfg.base_seed + rep,
    )
    write_run_csv(run_path(cfg.out_dir, name, rep), record, rep)
    return name, rep


def _is_complete_run(path: Path, n_end: int) -> bool:
    """True if the file parses as a run CSV with the full n_end rows."""
    if not path.exists():
        return False
    try:
        return read_run_csv(path).bov.shape[0] == n_end
    except (ConfigError, ValueError, IndexError, KeyError):
        return False


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> SummaryTable:
    """Run all (strategy, repetition) pairs not already complete on disk.

    A pair is skipped only if its CSV parses with the full row count, so a
    partially written file from an interrupted run is recomputed.  Every
    strategy at repetition r is seeded with base_seed + r, so all strategies
    of a repetition share the same initial design.  Finishes by (re)writing
    the summary CSVs from everything on disk.
    """
    pending = [
        (name, rep)
        for rep in range(cfg.repetitions)
        for name in cfg.strategies
        if not _is_complete_run(run_path(cfg.out_dir, name, rep), cfg.n_end)
    ]
    logger.info(
        "experiment %s: %d pairs to run, %d already on disk",
        cfg.benchmark,
        len(pending),
        cfg.repetitions * len(cfg.strategies) - len(pending),
    )
    if workers > 1 and pending:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_pair, cfg, name, rep) for name, rep in pending]
            for fut in futures:
                fut.result()
    else:
        for name, rep in pending:
            _run_pair(cfg, name, rep)

    records = [
        read_run_csv(run_path(cfg.out_dir, name, rep))
        for rep in range(cfg.repetitions)
        for name in cfg.strategies
    ]
    summary = summarize(records, strategies=cfg.strategies)
    write_summary_csvs(summary, cfg.out_dir)
    return summary


def measure_design(d: int, n: int, rep: int, seed: int) -> np.ndarray:
    """The uniform design used for one cell of the measurement sweep."""
    return np.random.default_rng([seed, d, n, rep]).uniform(size=(n, d))


def measure_candidates(d_list, n_list, reps: int, seed: int = 0) -> list:
    """Candidate counts and generation time over a (d, n) sweep.

    Returns one dict per successful cell with keys d, n, rep, n_T, n_F, N,
    millis; cells whose triangulation fails are logged and skipped.
    """
    if not (len(d_list) and len(n_list)):
        raise ValueError("d_list and n_list must be nonempty")
    rows = []
    for d in d_list:
        for n in n_list:
            if n < d + 1:
                continue
            for rep in range(reps):
                X = measure_design(d, n, rep, seed)
                t0 = time.perf_counter()
                try:
                    cands = tricands(
                        X, SubsampleConfig(n_sub_max=_NO_CAP, seed=seed)
                    )
                except (DegenerateInput, TriangulationFailed, TooFewPoints) as exc:
                    logger.warning(
                        "measure cell d=%d n=%d rep=%d skipped: %s", d, n, rep, exc
                    )
                    continue
                millis = 1e3 * (time.perf_counter() - t0)
                rows.append(
                    {
                        "d": d,
                        "n": n,
                        "rep": rep,
                        "n_T": int((cands.kinds == "interior").sum()),
                        "n_F": int((cands.kinds == "fringe").sum()),
                        "N": cands.N,
                        "millis": millis,
                    }
                )
    return rows


def write_measure_csv(rows, path):
    lines = ["schema,d,n,rep,n_T,n_F,N,millis"]
    for r in rows:
        lines.append(
            f"{MEASURE_SCHEMA},{r['d']},{r['n']},{r['rep']},"
            f"{r['n_T']},{r['n_F']},{r['N']},{r['millis']:.3f}"
        )
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")
