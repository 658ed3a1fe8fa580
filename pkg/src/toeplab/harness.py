"""Experiment orchestration: configs, trial pipelines, persistence.

Every run is reproducible from its manifest: trial ``t`` at size ``n``
uses the seed ``derive_seed(master_seed, n, t)`` and nothing else, and
aggregates are combined with a deterministic pairwise tree reduction so
that worker scheduling can never change output bytes.  The wall-time
column is the one deliberately nondeterministic field; canonical byte
comparisons mask it (see :func:`canonical_trials_bytes`).
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed

from . import __version__
from .ensemble import EntrySpec, sample_entries
from .seeding import derive_seed
from .spectra import HermitianOp, LanczosError, top_eig_lanczos
from .toeplitz import apply_projected_diagonal, circle_adjusted_diagonal
from .blocks import (admissible_count, build_bricks, check_admissibility,
                     partition, threshold_set)

CSV_HEADER = "n,trial,seed,ratio,iters,residual,ms"

SUBCOMMANDS = ("simulate", "constant", "blocks", "invariance", "verify", "eigvec")


@dataclass
class ExperimentConfig:
    subcommand: str = "simulate"
    ensemble: str = "gaussian"
    df: float = 6.0                      # student_t parameter
    gamma: float = 4.0
    n_list: tuple[int, ...] = (128, 256)
    trials: int = 10
    epsilon: float = 0.5
    master_seed: int = 20260809
    output_dir: str = "out"
    solver_tol: float = 1e-8
    max_iter: int = 600
    n_jobs: int = 1

    def entry_spec(self) -> EntrySpec:
        if self.ensemble == "student_t":
            return EntrySpec("student_t", gamma=self.gamma, df=self.df)
        return EntrySpec(self.ensemble, gamma=self.gamma)

    def as_dict(self) -> dict:
        return asdict(self)


def load_config(path: str | Path) -> dict:
    """Flat ``key = value`` file; '#' starts a comment."""
    out: dict[str, str] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"bad config line: {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key] = val
    return out


def config_from_sources(file_values: dict | None = None, **overrides) -> ExperimentConfig:
    cfg = ExperimentConfig()
    merged: dict = {}
    if file_values:
        merged.update(file_values)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    for key, val in merged.items():
        if not hasattr(cfg, key):
            raise ValueError(f"unknown config key {key!r}")
        cur = getattr(cfg, key)
        if key == "n_list":
            if isinstance(val, str):
                val = tuple(int(x) for x in val.split(","))
            else:
                val = tuple(int(x) for x in val)
        elif isinstance(cur, bool):
            val = str(val).lower() in ("1", "true", "yes")
        elif isinstance(cur, int):
            val = int(val)
        elif isinstance(cur, float):
            val = float(val)
        else:
            val = str(val)
        setattr(cfg, key, val)
    return cfg


# -- deterministic aggregation -------------------------------------------------


def tree_sum(values) -> float:
    """Pairwise summation in a fixed order; independent of chunking upstream."""
    vals = [float(v) for v in values]
    if not vals:
        return 0.0
    while len(vals) > 1:
        nxt = [vals[i] + vals[i + 1] for i in range(0, len(vals) - 1, 2)]
        if len(vals) % 2:
            nxt.append(vals[-1])
        vals = nxt
    return vals[0]


def aggregate(values) -> dict:
    vals = list(map(float, values))
    n = len(vals)
    if n == 0:
        return {"count": 0}
    mean = tree_sum(vals) / n
    var = tree_sum((v - mean) ** 2 for v in vals) / (n - 1) if n > 1 else 0.0
    return {
        "count": n,
        "mean": mean,
        "stderr": math.sqrt(var / n) if n > 1 else 0.0,
        "min": min(vals),
        "max": max(vals),
    }


# -- the simulate pipeline -------------------------------------------------------


@dataclass
class TrialRecord:
    n: int
    trial_index: int
    seed: int
    ratio: float
    iterations: int
    residual: float
    wall_ms: float
    failed: bool = False

    def csv_row(self) -> str:
        return ",".join([
            str(self.n), str(self.trial_index), str(self.seed),
            _fmt(self.ratio), str(self.iterations), _fmt(self.residual),
            f"{self.wall_ms:.3f}",
        ])


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def run_trial(spec: EntrySpec, n: int, trial_index: int, seed: int,
              tol: float, max_iter: int) -> TrialRecord:
    """Sample a row, form the adjusted Fourier diagonal, extract the top
    eigenvalue matrix-free, and report the law-of-large-numbers ratio."""
    t0 = time.perf_counter()
    arr = sample_entries(spec, n, seed)
    d = circle_adjusted_diagonal(arr)
    op = HermitianOp(2 * n, lambda v: apply_projected_diagonal(d, v))
    try:
        rep = top_eig_lanczos(op, tol=tol, max_iter=max_iter, seed=derive_seed(seed, 0xE16))
        ratio = math.sqrt(2.0) * rep.lambda_max / math.sqrt(2.0 * math.log(n))
        ms = (time.perf_counter() - t0) * 1e3
        return TrialRecord(n, trial_index, seed, ratio, rep.iterations, rep.residual, ms)
    except LanczosError as err:
        ms = (time.perf_counter() - t0) * 1e3
        rep = err.report
        return TrialRecord(n, trial_index, seed, float("nan"), rep.iterations,
                           rep.residual, ms, failed=True)


def run_simulate(config: ExperimentConfig) -> dict:
    spec = config.entry_spec()
    records: list[TrialRecord] = []
    for n in config.n_list:
        if n & (n - 1):
            raise ValueError(f"sizes must be powers of two, got {n}")
        seeds = [derive_seed(config.master_seed, n, t) for t in range(config.trials)]
        jobs = (delayed(run_trial)(spec, n, t, seeds[t], config.solver_tol, config.max_iter)
                for t in range(config.trials))
        records.extend(Parallel(n_jobs=config.n_jobs)(jobs))
    summary: dict = {"config": config.as_dict(), "version": __version__, "per_n": {}}
    for n in config.n_list:
        ok = [r for r in records if r.n == n and not r.failed]
        failed = sum(1 for r in records if r.n == n and r.failed)
        agg = aggregate([r.ratio for r in ok])
        agg["failed"] = failed
        agg["abs_gap_to_limit"] = abs(agg.get("mean", 0.0) - 0.8288) if ok else None
        summary["per_n"][str(n)] = agg
    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    trials_path = outdir / "trials.csv"
    lines = [CSV_HEADER] + [r.csv_row() for r in records]
    trials_path.write_text("\n".join(lines) + "\n")
    summary_path = outdir / "summary.json"
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    write_manifest(outdir, config, {"trials.csv": trials_path, "summary.json": summary_path})
    return summary


def canonical_trials_bytes(path: str | Path) -> bytes:
    """trials.csv with the wall-time column masked (the one legitimately
    nondeterministic field)."""
    out = []
    for line in Path(path).read_text().splitlines():
        cols = line.split(",")
        if cols and cols[-1] != "ms":
            cols[-1] = "_"
        out.append(",".join(cols))
    return ("\n".join(out) + "\n").encode()


def artifact_hash(path: str | Path) -> str:
    p = Path(path)
    if p.name == "trials.csv":
        data = canonical_trials_bytes(p)
    else:
        data = p.read_bytes()
    return hashlib.sha256(data).hexdigest()


def write_manifest(outdir: Path, config: ExperimentConfig, artifacts: dict) -> Path:
    manifest = {
        "config": config.as_dict(),
        "version": __version__,
        "artifacts": {name: artifact_hash(p) for name, p in artifacts.items()},
    }
    path = outdir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


# -- other subcommand pipelines --------------------------------------------------


def run_blocks(config: ExperimentConfig) -> dict:
    """Partition statistics at the first configured size; JSON dump of the
    bricks, visibility, partition intervals and the threshold set."""
    spec = config.entry_spec()
    n = config.n_list[0]
    layout = build_bricks(n)
    per_trial = []
    admissible = 0
    symmetric = 0
    for t in range(config.trials):
        arr = sample_entries(spec, n, derive_seed(config.master_seed, n, t))
        d = circle_adjusted_diagonal(arr)
        S = threshold_set(d, config.epsilon)
        p = partition(layout, S)
        rep = check_admissibility(p)
        admissible += rep.admissible
        vis = p.visible
        m = layout.m
        symmetric += all(bool(vis[m + k]) == bool(vis[m - k]) for k in range(1, m + 1))
        per_trial.append({
            "trial": t,
            "threshold_count": int(len(S.indices)),
            "visible": [bool(v) for v in vis],
            "parts": [[J.start, J.stop] for J in p.parts],
            "admissible": rep.admissible,
        })
    result = {
        "config": config.as_dict(),
        "version": __version__,
        "n": n,
        "brick_bounds": [int(b) for b in layout.bounds],
        "M": admissible_count(config.epsilon),
        "admissible_fraction": admissible / config.trials,
        "visibility_symmetric_fraction": symmetric / config.trials,
        "trials": per_trial,
    }
    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / "blocks.json"
    path.write_text(json.dumps(result, indent=2, sort_keys=True) + "\n")
    write_manifest(outdir, config, {"blocks.json": path})
    return result


def run_constant(config: ExperimentConfig) -> dict:
    from .varopt import verify_norm_chain
    report = verify_norm_chain(seed=config.master_seed)
    report["config"] = config.as_dict()
    report["version"] = __version__
    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / "constant.json"
    path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    write_manifest(outdir, config, {"constant.json": path})
    return report


def run_invariance(config: ExperimentConfig) -> dict:
    from .ensemble import EntrySpec
    from .lindeberg import (bump_objective, cosine_objective,
                            diagonal_statistic_row, linear_statistic,
                            quadratic_objective, swap_experiment)
    rad, gau = EntrySpec("rademacher"), EntrySpec("gaussian")
    theta = np.array([1.0])
    cases = {
        "linear_quadratic": swap_experiment(
            rad, gau, linear_statistic(theta), quadratic_objective(),
            trials=config.trials, seed=derive_seed(config.master_seed, 1)),
        "cosine": swap_experiment(
            rad, gau, linear_statistic(theta), cosine_objective(),
            trials=config.trials, seed=derive_seed(config.master_seed, 2)),
    }
    n = 16
    lvl = math.sqrt(2.0 * math.log(n))
    cases["bump"] = swap_experiment(
        rad, gau, linear_statistic(diagonal_statistic_row(n, 3)),
        bump_objective(0.8 * lvl, 1.6 * lvl, 0.25 * lvl),
        trials=min(config.trials, 200), seed=derive_seed(config.master_seed, 3))
    report = {"config": config.as_dict(), "version": __version__}
    for name, rep in cases.items():
        report[name] = {
            "lhs": rep.lhs, "lhs_stderr": rep.lhs_stderr,
            "bound": rep.bound, "bound_stderr": rep.bound_stderr,
            "trials": rep.trials, "holds": rep.holds(),
        }
    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / "invariance.json"
    path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    write_manifest(outdir, config, {"invariance.json": path})
    return report


def run_eigvec(config: ExperimentConfig) -> dict:
    """Exploratory localization diagnostics of the top eigenvector."""
    spec = config.entry_spec()
    rows = []
    for n in config.n_list:
        if n > 1024:
            raise ValueError("eigvec diagnostics capped at n = 2**10")
        arr = sample_entries(spec, n, derive_seed(config.master_seed, n, 0))
        d = circle_adjusted_diagonal(arr)
        op = HermitianOp(2 * n, lambda v: apply_projected_diagonal(d, v))
        vec = _top_eigvector(op, seed=derive_seed(config.master_seed, n, 1))
        weights = np.abs(vec) ** 2
        order = np.sort(weights)[::-1]
        csum = np.cumsum(order)
        support_90 = int(np.searchsorted(csum, 0.9) + 1)
        rows.append({
            "n": n,
            "ipr": float((weights ** 2).sum()),
            "support_size_90pct": support_90,
        })
    report = {"config": config.as_dict(), "version": __version__, "rows": rows}
    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / "eigvec.json"
    path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    write_manifest(outdir, config, {"eigvec.json": path})
    return report


def _top_eigvector(op: HermitianOp, seed: int, tol: float = 1e-10) -> np.ndarray:
    return top_eig_lanczos(op, tol=tol, seed=seed).vector
