"""Scenario runner: config in, reports and plot-ready data out.

Outputs are staged in a hidden directory under the output directory and moved
into place only when the run finishes; on any error the staging directory is
removed. The manifest is written last. Nothing in the outputs depends on the
worker count, so reruns are byte-identical apart from ``wall_time``.
"""

from __future__ import annotations

import logging
import os
import shutil
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .branching import SimulationGuardError, generation_counts
from .config import ConfigError, ScenarioConfig
from .grid import DriFunction, GridGuardError, GridMismatchError, audit_model, build_grids, default_step
from .io import atomic_write, grid_to_dict, write_counts_csv, write_grid_csv, write_json, write_table_csv
from .stats import mean_estimate
from .steps import InfiniteMomentError, JointStepModel
from .verify import (
    TheoremReport,
    Thresholds,
    verify_blackwell,
    verify_clt_flt,
    verify_elementary,
    verify_key_renewal,
    verify_rate,
    verify_second_moment,
    verify_slln,
    verify_support_lemmas,
    verify_variance,
)

log = logging.getLogger(__name__)

EXIT_OK, EXIT_VERDICT, EXIT_SCHEMA, EXIT_GUARD = 0, 1, 2, 3
GUARD_ERRORS = (GridGuardError, GridMismatchError, SimulationGuardError, InfiniteMomentError,
                ArithmeticError, MemoryError)


@dataclass
class RunManifest:
    config_sha256: str
    task: str
    seed: int
    tool_version: str = __version__
    wall_time: float = 0.0
    artifacts: dict[str, str] = field(default_factory=dict)
    verdicts: dict[str, str] = field(default_factory=dict)
    exit_code: int = EXIT_OK

    def to_dict(self) -> dict:
        return {
            "tool": "iprw",
            "tool_version": self.tool_version,
            "config_sha256": self.config_sha256,
            "task": self.task,
            "seed": self.seed,
            "artifacts": dict(sorted(self.artifacts.items())),
            "verdicts": dict(self.verdicts),
            "exit_code": self.exit_code,
            "wall_time": self.wall_time,
        }


class _Stage:
    """Collects artifacts in a staging directory."""

    def __init__(self, out: Path):
        self.out = out
        out.mkdir(parents=True, exist_ok=True)
        self.dir = Path(tempfile.mkdtemp(prefix=".staging-", dir=out))
        self.artifacts: dict[str, str] = {}

    def path(self, name: str) -> Path:
        self.artifacts[name] = name
        return self.dir / name

    def commit(self) -> None:
        for name in self.artifacts:
            dest = self.out / name
            dest.parent.mkdir(parents=True, exist_ok=True)
            os.replace(self.dir / name, dest)
        shutil.rmtree(self.dir, ignore_errors=True)

    def abort(self) -> None:
        shutil.rmtree(self.dir, ignore_errors=True)


# -- defaults ----------------------------------------------------------------

VERIFY_DEFAULTS: dict[str, dict[str, Any]] = {
    "audit": {"t": 50.0, "J": 3, "h": 0.01},
    "elementary": {"j": 2, "t_list": [25, 50, 100, 200], "h": 0.01},
    "rate": {"j": [1, 2], "t_list": [25, 50, 100, 200], "h": 0.01},
    "blackwell": {"j": 2, "h0": 1.0, "t_list": [10, 20, 30, 50], "h": 0.01},
    "key_renewal": {"j": 1, "f": {"kind": "exp_decay", "c": 1.0}, "t_list": [10, 20, 30, 50], "h": 0.01},
    "second_moment": {"j": 2, "t": 10.0, "replicates": 10000, "h": 0.001},
    "variance": {"j": 2, "t": 50.0, "replicates": 10000, "h": 0.01},
    "slln": {"j": 2, "t_checkpoints": [25, 50, 100, 200], "n_paths": 5},
    "clt_flt": {"j": [1, 2], "t": [100.0, 100.0], "u_points": [0.5, 1.0], "replicates": 10000,
                "centering": "grid"},
    "support_lemmas": {"t_ladder": [25, 50, 100, 200], "t_moment": 100.0, "replicates": 10000},
}
THEOREMS = tuple(k for k in VERIFY_DEFAULTS if k != "audit")


def _as_list(x, n: int | None = None) -> list:
    if isinstance(x, list):
        return x
    return [x] * (n or 1)


def _audit_report(model: JointStepModel, t: float, J: int, h: float) -> TheoremReport:
    audit = audit_model(model, h, t, J)
    rep = TheoremReport("bound_audit", {"model": model.to_dict(), "t": t, "J": J, "h": h})
    for c in audit.checks:
        rep.add(c.name, c.worst_margin, ">= -tolerance", c.tolerance, c.passed, "identity")
        rep.observed[c.name] = {"worst_margin": c.worst_margin, "worst_t": c.worst_t, "bound": c.detail}
    if audit.lord3_constants:
        rep.observed["lord3_fitted_c1_c2"] = list(audit.lord3_constants)
    return rep


def theorem_reports(name: str, model: JointStepModel, params: dict, seed: int, workers: int,
                    thr: Thresholds, corrupt: float = 1.0) -> list[tuple[str, TheoremReport]]:
    """Run one theorem check; some expand into several reports (one per j)."""
    p = {**VERIFY_DEFAULTS[name], **params}
    if name == "audit":
        return [("audit", _audit_report(model, float(p["t"]), int(p["J"]), float(p["h"])))]
    if name == "elementary":
        return [(name, verify_elementary(model, p["j"], p["t_list"], p["h"], corrupt, thr=thr))]
    if name == "rate":
        return [(f"rate_j{j}", verify_rate(model, j, p["t_list"], p["h"], corrupt, thr=thr))
                for j in _as_list(p["j"])]
    if name == "blackwell":
        return [(name, verify_blackwell(model, p["j"], p["h0"], p["t_list"], p["h"], corrupt, thr=thr))]
    if name == "key_renewal":
        f = DriFunction.from_dict(p["f"])
        return [(name, verify_key_renewal(model, p["j"], f, p["t_list"], p["h"], corrupt, thr=thr))]
    if name == "second_moment":
        return [(name, verify_second_moment(model, p["j"], p["t"], p["replicates"], seed, p["h"],
                                            corrupt, workers, thr=thr))]
    if name == "variance":
        return [(name, verify_variance(model, p["j"], p["t"], p["replicates"], seed, p["h"], corrupt,
                                       workers, thr=thr))]
    if name == "slln":
        return [(name, verify_slln(model, p["j"], p["t_checkpoints"], p["n_paths"], seed, corrupt,
                                   workers, thr=thr))]
    if name == "clt_flt":
        js = _as_list(p["j"])
        ts = _as_list(p["t"], len(js))
        out = []
        for j, t in zip(js, ts):
            rep = verify_clt_flt(model, j, t, p["u_points"], p["replicates"], seed, p.get("centering", "grid"),
                                 p.get("h"), corrupt, workers, cross_generation=(j == 1), thr=thr)
            out.append((f"clt_flt_j{j}", rep))
        return out
    if name == "support_lemmas":
        return [(name, verify_support_lemmas(model, p["t_ladder"], p["replicates"], seed, p["t_moment"],
                                             p.get("h"), corrupt=corrupt, workers=workers, thr=thr))]
    raise ValueError(f"unknown theorem {name!r}")


# -- plot artifacts ------------------------------------------------------------

_PLOT_SCRIPT = '''"""Plot {csv} (generated; needs matplotlib)."""
import csv
from pathlib import Path

import matplotlib.pyplot as plt

here = Path(__file__).parent
with open(here / "{csv}") as fh:
    rows = list(csv.DictReader(fh))
x = [float(r["{x}"]) for r in rows]
for col in {ys!r}:
    plt.plot(x, [float(r[col]) for r in rows], marker="o", label=col)
plt.xlabel("{x}")
plt.legend()
plt.savefig(here / "{png}")
'''


def _plot(stage: _Stage, stem: str, columns: dict[str, Any]) -> None:
    """plots/<stem>.csv plus a matplotlib script that renders it."""
    write_table_csv(stage.path(f"plots/{stem}.csv"), columns)
    names = list(columns)
    script = _PLOT_SCRIPT.format(csv=f"{stem}.csv", x=names[0], ys=names[1:], png=f"{stem}.png")
    atomic_write(stage.path(f"plots/plot_{stem}.py"), script)


def _emit_report(stage: _Stage, name: str, rep: TheoremReport, verdicts: dict[str, str]) -> None:
    write_json(stage.path(f"reports/{name}.json"), rep.to_dict())
    verdicts[name] = rep.verdict
    if rep.theorem == "variance":
        _plot(stage, name, rep.observed["plot"])
    elif rep.theorem == "slln":
        ts = rep.inputs["t"]
        traj = rep.observed["trajectories"]
        cols = {"t": ts}
        for k, row in enumerate(traj):
            cols[f"path{k}"] = row
        _plot(stage, name, cols)
    elif rep.theorem in ("elementary", "blackwell"):
        _plot(stage, name, {"t": rep.inputs["t"], "ratio": rep.observed["ratio"]})
    elif rep.theorem == "rate":
        _plot(stage, name, {"t": rep.inputs["t"], "residual": rep.observed["residual"]})


# -- tasks -----------------------------------------------------------------------

def _task_renewal(cfg: ScenarioConfig, stage: _Stage, verdicts: dict, seed: int, workers: int,
                  thr: Thresholds) -> None:
    model = cfg.model
    t = float(cfg.get("t", 20.0))
    J = int(cfg.get("J", 3))
    h = float(cfg.get("h", default_step(model, t)))
    g = build_grids(model, h, t, J)
    series = {"U": g.U, "V": g.Vj(1)}
    for j in range(2, J + 1):
        series[f"V_{j}"] = g.Vj(j)
    for name, grid in series.items():
        write_grid_csv(stage.path(f"grids/{name}.csv"), grid)
        write_json(stage.path(f"grids/{name}.json"), grid_to_dict(grid))
    if model.xi.has_moment(2):
        rep = _audit_report(model, t, J, h)
        _emit_report(stage, "audit", rep, verdicts)


def _task_simulate(cfg: ScenarioConfig, stage: _Stage, verdicts: dict, seed: int, workers: int,
                   thr: Thresholds) -> None:
    model = cfg.model
    t = float(cfg.get("t", 20.0))
    J = int(cfg.get("J", 2))
    u = np.asarray(cfg.get("u_points", [0.25, 0.5, 0.75, 1.0]), dtype=float)
    R = int(cfg.get("replicates", 1000))
    counts, nu = generation_counts(model, t, J, u, R, seed, workers)
    if cfg.get("dump_paths", False):
        write_counts_csv(stage.path("counts_raw.csv"), counts, u)
    h = float(cfg.get("h", default_step(model, t)))
    g = build_grids(model, h, t, J)
    rows: dict[str, list] = {"j": [], "u": [], "mean": [], "se": [], "variance": [], "grid_V": []}
    rep = TheoremReport("simulate", {"model": model.to_dict(), "t": t, "J": J, "u": u,
                                     "replicates": R, "seed": seed, "h": h})
    for j in range(1, J + 1):
        for i, ui in enumerate(u):
            x = counts[:, j - 1, i].astype(float)
            est = mean_estimate(x)
            V = g.Vj(j).at(ui * t)
            rows["j"].append(j)
            rows["u"].append(ui)
            rows["mean"].append(est.point)
            rows["se"].append(est.se)
            rows["variance"].append(float(np.var(x, ddof=1)))
            rows["grid_V"].append(V)
            rep.add(f"mean_vs_grid_j{j}_u{ui:g}", est.point, V, thr.invariant_k * est.se,
                    est.within(V, thr.invariant_k), "statistic")
    dominated = bool(np.all(counts[:, 0, -1] <= nu))
    rep.add("N1_le_nu", dominated, True, 0, dominated, "identity")
    write_table_csv(stage.path("counts_summary.csv"), rows)
    _emit_report(stage, "simulate", rep, verdicts)


def _single(name: str, keys: tuple[str, ...]) -> Callable:
    def task(cfg: ScenarioConfig, stage: _Stage, verdicts: dict, seed: int, workers: int,
             thr: Thresholds) -> None:
        params = {k: cfg.get(k) for k in keys if cfg.get(k) is not None}
        params.update((cfg.get("overrides") or {}).get(name, {}))
        for rname, rep in theorem_reports(name, cfg.model, params, seed, workers, thr):
            _emit_report(stage, rname, rep, verdicts)
    return task


def _task_clt(cfg: ScenarioConfig, stage: _Stage, verdicts: dict, seed: int, workers: int,
              thr: Thresholds, flt: bool = False) -> None:
    j = int(cfg.get("j", cfg.get("J", 1)))
    t = float(cfg.get("t", 100.0))
    u = cfg.get("u_points", [0.5, 1.0]) if flt else [1.0]
    rep = verify_clt_flt(cfg.model, j, t, u, int(cfg.get("replicates", 10000)), seed,
                         cfg.get("centering", "grid"), cfg.get("h"), workers=workers,
                         cross_generation=flt, thr=thr)
    _emit_report(stage, f"{'flt' if flt else 'clt'}_j{j}", rep, verdicts)


def _task_verify_all(cfg: ScenarioConfig, stage: _Stage, verdicts: dict, seed: int, workers: int,
                     thr: Thresholds) -> None:
    names = cfg.get("theorems") or ["audit", *THEOREMS]
    overrides = cfg.get("overrides") or {}
    for name in names:
        for rname, rep in theorem_reports(name, cfg.model, overrides.get(name, {}), seed, workers, thr):
            _emit_report(stage, rname, rep, verdicts)


TASKS: dict[str, Callable] = {
    "renewal": _task_renewal,
    "simulate": _task_simulate,
    "variance": _single("variance", ("j", "t", "replicates", "h")),
    "slln": _single("slln", ("j", "t_checkpoints", "n_paths")),
    "clt": _task_clt,
    "flt": lambda *a: _task_clt(*a, flt=True),
    "verify-all": _task_verify_all,
}


def run(cfg: ScenarioConfig, out: str | Path | None = None, seed: int | None = None,
        workers: int | None = None, task: str | None = None,
        theorems: list[str] | None = None) -> tuple[RunManifest, int]:
    """Execute the scenario and return (manifest, exit code)."""
    start = time.perf_counter()
    seed = cfg.seed if seed is None else seed
    workers = cfg.workers if workers is None else workers
    task = task or cfg.task
    out_dir = Path(out or cfg.get("output") or "iprw-out")
    thr = Thresholds.from_dict(cfg.get("thresholds"))
    if theorems is not None:
        cfg = ScenarioConfig({**cfg.raw, "theorems": theorems}, cfg.sha256, cfg.model)
    manifest = RunManifest(cfg.sha256, task, seed)
    stage = _Stage(out_dir)
    try:
        TASKS[task](cfg, stage, manifest.verdicts, seed, workers, thr)
    except GUARD_ERRORS as exc:
        stage.abort()
        log.error("computation guard: %s", exc)
        manifest.exit_code = EXIT_GUARD
        return manifest, EXIT_GUARD
    except (ValueError, KeyError, TypeError) as exc:
        # the scenario asks for something its model does not support
        stage.abort()
        log.error("invalid scenario: %s", exc)
        manifest.exit_code = EXIT_SCHEMA
        return manifest, EXIT_SCHEMA
    except BaseException:
        stage.abort()
        raise
    stage.commit()
    ok = all(v == "pass" for v in manifest.verdicts.values())
    manifest.exit_code = EXIT_OK if ok else EXIT_VERDICT
    manifest.artifacts = dict(stage.artifacts)
    manifest.wall_time = round(time.perf_counter() - start, 3)
    write_json(out_dir / "manifest.json", manifest.to_dict())
    return manifest, manifest.exit_code


def summary_text(out_dir: str | Path) -> str:
    """Human-readable rendering of every report under ``out_dir``."""
    from .io import read_json

    out_dir = Path(out_dir)
    man = read_json(out_dir / "manifest.json")
    lines = [f"task {man['task']}  seed {man['seed']}  exit {man['exit_code']}"]
    for name, verdict in man["verdicts"].items():
        rep = read_json(out_dir / "reports" / f"{name}.json")
        lines.append(f"[{verdict.upper():>12}] {name}")
        for c in rep["checks"]:
            mark = "ok " if c["passed"] else "BAD"
            lines.append(f"    {mark} {c['name']}")
        lines.extend(f"    note: {d}" for d in rep["diagnostics"])
    return "\n".join(lines)


__all__ = ["ConfigError", "RunManifest", "TASKS", "THEOREMS", "run", "summary_text", "theorem_reports"]
