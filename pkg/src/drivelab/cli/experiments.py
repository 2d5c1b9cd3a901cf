"""Experiment orchestration behind the CLI subcommands.

A run directory holds stage artifacts plus a content-hashed manifest:

    scenarios/{train,val,test}/*.scn
    checkpoints/base.npz, checkpoints/<variant>.npz
    datasets/<variant>/...
    reports/*.csv, reports/*.json
    plots/*.png

Stage seeds derive from the experiment seed by label, so reruns are
hermetic; evaluation streams share one derived seed across variants, which
keeps comparisons paired. With ``resume``, completed stages are loaded from
their artifacts instead of recomputed, which yields byte-identical results
because every stage reads its inputs back from disk either way.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from itertools import product
from pathlib import Path

from drivelab.cli.config import (
    ExperimentConfig,
    config_hash,
    serialize_config,
    set_by_path,
)
from drivelab.cli.manifest import RunManifest
from drivelab.errors import ConfigError
from drivelab.evaluation import ROW_COLUMNS, evaluate
from drivelab.policy import Policy, load_checkpoint, pretrain_bc, save_checkpoint
from drivelab.rng import derive_key, derive_rng
from drivelab.rollout import collect_dataset, load_dataset, save_dataset
from drivelab.sim import generate_scenarios, load_scenarios, save_scenarios
from drivelab.train import finetune

BASELINE_VARIANTS = ("base", "continued-bc", "expert-replay", "rollout-sft")

# Axes touching these sections invalidate the shared scenario/pretrain stages.
_HEAVY_SECTIONS = ("scenarios", "pretrain", "policy", "sim", "seed", "name")


def _axis_is_heavy(path: str) -> bool:
    return path.split(".")[0] in _HEAVY_SECTIONS


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path: Path, columns: list[str], rows: list[dict]) -> None:
    lines = [",".join(columns)]
    for r in rows:
        lines.append(",".join(_fmt(r[c]) for c in columns))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")


def _report_json(report) -> str:
    return json.dumps(report.as_dict(), indent=1, sort_keys=True)


class Run:
    """One experiment run rooted at ``<out_dir>/<name>``."""

    def __init__(self, cfg: ExperimentConfig, resume: bool = False):
        self.cfg = cfg
        self.dir = Path(cfg.out_dir) / cfg.name
        self.resume = resume
        chash = config_hash(cfg)
        manifest_path = self.dir / "manifest.json"
        if resume and manifest_path.exists():
            self.manifest = RunManifest.load(self.dir)
            if self.manifest.data["config_hash"] != chash:
                raise ConfigError(
                    "resume requested but the config differs from the recorded run"
                )
        else:
            self.manifest = RunManifest(self.dir, chash)
            self.dir.mkdir(parents=True, exist_ok=True)
            (self.dir / "config.json").write_text(serialize_config(cfg) + "\n")
            self.manifest.save()
        self.policy = Policy(cfg.policy)

    # -- stages ----------------------------------------------------------

    def stage_scenarios(self) -> dict[str, list]:
        splits = ("train", "val", "test")
        if self.resume and self.manifest.stage_done("scenarios"):
            return {s: load_scenarios(self.dir / "scenarios" / s) for s in splits}
        n_train, n_val, n_test = self.cfg.scenarios.split_sizes()
        seed = derive_key(self.cfg.seed, "scenarios")
        all_scenarios = generate_scenarios(
            seed, n_train + n_val + n_test, self.cfg.scenarios.generation
        )
        out = {
            "train": all_scenarios[:n_train],
            "val": all_scenarios[n_train : n_train + n_val],
            "test": all_scenarios[n_train + n_val :],
        }
        artifacts = {}
        for split in splits:
            d = self.dir / "scenarios" / split
            save_scenarios(out[split], d)
            artifacts[split] = d
        self.manifest.record_stage("scenarios", artifacts)
        return out

    def stage_pretrain(self, train_scenarios) -> dict:
        path = self.dir / "checkpoints" / "base.npz"
        if self.resume and self.manifest.stage_done("pretrain"):
            params, _, _ = load_checkpoint(path)
            return params
        pcfg = replace(self.cfg.pretrain, seed=derive_key(self.cfg.seed, "pretrain"))
        params0 = self.policy.init_params(derive_rng(self.cfg.seed, "init"))
        params, log = pretrain_bc(self.policy, params0, train_scenarios, pcfg)
        path.parent.mkdir(parents=True, exist_ok=True)
        save_checkpoint(path, params, self.cfg.policy, {"stage": "pretrain"})
        log_path = self.dir / "reports" / "pretrain_log.csv"
        write_csv(
            log_path,
            ["step", "loss"],
            [{"step": s, "loss": l} for s, l in log],
        )
        self.manifest.record_stage("pretrain", {"checkpoint": path, "log": log_path})
        return params

    def stage_collect(self, params, train_scenarios, variant: str = "gen"):
        d = self.dir / "datasets" / variant
        stage = f"collect:{variant}"
        if self.resume and self.manifest.stage_done(stage):
            return load_dataset(d)
        c = self.cfg.collect
        ds = collect_dataset(
            self.policy, params, train_scenarios, c.n_roll,
            self.cfg.sim, self.cfg.distance, self.cfg.recovery,
            seed=derive_key(self.cfg.seed, "collect", variant),
            mode=c.mode, k=c.k, tau=c.tau, replan=c.replan,
            checkpoint_id="base",
        )
        save_dataset(ds, d)
        self.manifest.record_stage(stage, {"dataset": d})
        return load_dataset(d)

    def stage_finetune(self, params, train_scenarios, variant: str, tcfg=None,
                       mode=None, initial_dataset=None):
        path = self.dir / "checkpoints" / f"{variant}.npz"
        stage = f"finetune:{variant}"
        if self.resume and self.manifest.stage_done(stage):
            tuned, _, _ = load_checkpoint(path)
            return tuned
        c = self.cfg.collect
        tcfg = tcfg or self.cfg.train
        tcfg = replace(tcfg, seed=derive_key(self.cfg.seed, "train", variant), n_roll=c.n_roll)
        result = finetune(
            self.policy, params, train_scenarios, tcfg,
            self.cfg.sim, self.cfg.distance, self.cfg.recovery,
            mode=mode or c.mode, k=c.k, tau=c.tau, replan=c.replan,
            initial_dataset=initial_dataset,
        )
        path.parent.mkdir(parents=True, exist_ok=True)
        ckpt = result.checkpoint
        save_checkpoint(
            path, ckpt.params, self.cfg.policy,
            {"stage": stage, "step": ckpt.step, "refresh_generation": ckpt.refresh_generation,
             "loss_stats": ckpt.loss_stats},
        )
        log_path = self.dir / "reports" / f"train_log_{variant}.csv"
        write_csv(
            log_path,
            ["step", "loss", "refresh_generation", "wall_s"],
            [
                {"step": s, "loss": l, "refresh_generation": g, "wall_s": w}
                for s, l, g, w in result.log
            ],
        )
        self.manifest.record_stage(stage, {"checkpoint": path, "log": log_path})
        return ckpt.params

    def stage_eval(self, params, test_scenarios, variant: str):
        rows_path = self.dir / "reports" / f"eval_rows_{variant}.csv"
        summary_path = self.dir / "reports" / f"eval_summary_{variant}.json"
        stage = f"eval:{variant}"
        if self.resume and self.manifest.stage_done(stage):
            return self._load_eval(variant, test_scenarios)
        ecfg = replace(
            self.cfg.eval,
            seed=derive_key(self.cfg.seed, "eval"),
            scene_set_id=f"{self.cfg.name}:test",
        )
        report, rows = evaluate(
            self.policy, params, test_scenarios, ecfg, self.cfg.sim,
            self.cfg.distance, replan=self.cfg.collect.replan,
        )
        write_csv(rows_path, ROW_COLUMNS, rows)
        summary_path.write_text(_report_json(report) + "\n")
        self.manifest.record_stage(stage, {"rows": rows_path, "summary": summary_path})
        return report, rows

    def _load_eval(self, variant: str, test_scenarios):
        from drivelab.evaluation.evaluate import MetricsReport

        summary = json.loads(
            (self.dir / "reports" / f"eval_summary_{variant}.json").read_text()
        )
        report = MetricsReport(**summary)
        rows = _read_csv(self.dir / "reports" / f"eval_rows_{variant}.csv")
        return report, rows


def _read_csv(path: Path) -> list[dict]:
    lines = path.read_text().splitlines()
    cols = lines[0].split(",")
    out = []
    for ln in lines[1:]:
        vals = ln.split(",")
        row = {}
        for c, v in zip(cols, vals):
            if c in ("scene_id", "termination"):
                row[c] = v
            elif c in ("rep", "steps", "incident_step"):
                row[c] = int(v)
            elif c in ("excluded", "counted_collision", "counted_offroad", "counted_incident", "failed"):
                row[c] = bool(int(v))
            else:
                row[c] = float(v)
        out.append(row)
    return out


def run_pipeline(cfg: ExperimentConfig, resume: bool = False):
    """pretrain -> collect -> finetune -> evaluate, with stage manifests."""
    run = Run(cfg, resume=resume)
    splits = run.stage_scenarios()
    base = run.stage_pretrain(splits["train"])
    dataset = run.stage_collect(base, splits["train"])
    tuned = run.stage_finetune(base, splits["train"], "final", initial_dataset=dataset)
    report, rows = run.stage_eval(tuned, splits["test"], "final")
    run.manifest.verify()
    return run, report, rows


def run_baselines(cfg: ExperimentConfig, resume: bool = False):
    """Four-way comparison on one base checkpoint with paired eval seeds."""
    run = Run(cfg, resume=resume)
    splits = run.stage_scenarios()
    base = run.stage_pretrain(splits["train"])
    reports = {}
    rows = {}
    dataset = run.stage_collect(base, splits["train"])
    variants = {
        "base": base,
        "continued-bc": run.stage_finetune(
            base, splits["train"], "continued-bc",
            tcfg=replace(cfg.train, mix_expert=1.0),
        ),
        "expert-replay": run.stage_finetune(
            base, splits["train"], "expert-replay", mode="expert"
        ),
        "rollout-sft": run.stage_finetune(
            base, splits["train"], "rollout-sft", initial_dataset=dataset
        ),
    }
    for name, params in variants.items():
        reports[name], rows[name] = run.stage_eval(params, splits["test"], name)
    table = [
        {
            "method": name,
            "driving_score": reports[name].driving_score,
            "driving_score_std": reports[name].stds.get("driving_score", 0.0),
            "collision_rate": reports[name].collision_rate,
            "offroad_rate": reports[name].offroad_rate,
            "distance_mean": reports[name].distance_mean,
            "min_ade": reports[name].min_ade,
        }
        for name in BASELINE_VARIANTS
    ]
    path = run.dir / "reports" / "baselines.csv"
    write_csv(
        path,
        ["method", "driving_score", "driving_score_std", "collision_rate",
         "offroad_rate", "distance_mean", "min_ade"],
        table,
    )
    run.manifest.record_stage("baselines", {"table": path})
    run.manifest.verify()
    return run, reports, rows


def _preseed_cell(parent_dir: Path, cell_cfg: ExperimentConfig) -> None:
    """Copy the parent's scenario/pretrain artifacts into a cell run.

    Only valid when the cell's overrides leave those stages' inputs
    untouched; the cell manifest records the copied artifacts as completed
    so its pipeline resumes past them.
    """
    import shutil

    cell = Run(cell_cfg, resume=False)
    src_scen = parent_dir / "scenarios"
    dst_scen = cell.dir / "scenarios"
    if dst_scen.exists():
        shutil.rmtree(dst_scen)
    shutil.copytree(src_scen, dst_scen)
    cell.manifest.record_stage(
        "scenarios", {s: dst_scen / s for s in ("train", "val", "test")}
    )
    (cell.dir / "checkpoints").mkdir(parents=True, exist_ok=True)
    (cell.dir / "reports").mkdir(parents=True, exist_ok=True)
    shutil.copy2(parent_dir / "checkpoints" / "base.npz", cell.dir / "checkpoints" / "base.npz")
    shutil.copy2(parent_dir / "reports" / "pretrain_log.csv", cell.dir / "reports" / "pretrain_log.csv")
    cell.manifest.record_stage(
        "pretrain",
        {"checkpoint": cell.dir / "checkpoints" / "base.npz",
         "log": cell.dir / "reports" / "pretrain_log.csv"},
    )


def _matrix_cell(args):
    cfg, overrides, resume, preseed_from = args
    cell_cfg = cfg
    label_parts = []
    for path, value in overrides:
        cell_cfg = set_by_path(cell_cfg, path, value)
        label_parts.append(f"{path.split('.')[-1]}={value}")
    label = "_".join(label_parts) if label_parts else "single"
    cell_cfg.name = f"{cfg.name}/cells/{label}"
    cell_dir = Path(cell_cfg.out_dir) / cell_cfg.name
    already = resume and (cell_dir / "manifest.json").exists()
    if preseed_from is not None and not already:
        _preseed_cell(Path(preseed_from), cell_cfg)
        _, report, _ = run_pipeline(cell_cfg, resume=True)
    else:
        _, report, _ = run_pipeline(cell_cfg, resume=already)
    return label, overrides, report


def run_matrix(cfg: ExperimentConfig, axes: dict[str, list], resume: bool = False, jobs: int = 1):
    """Cartesian product of config overrides; one pipeline per cell.

    Cells share the parent's scenario and pretrain artifacts unless an axis
    touches those stages' configuration.
    """
    for path in axes:
        set_by_path(cfg, path, axes[path][0])  # validates before any run
    run = Run(cfg, resume=resume)
    heavy = any(_axis_is_heavy(p) for p in axes)
    preseed_from = None
    if not heavy:
        splits = run.stage_scenarios()
        run.stage_pretrain(splits["train"])
        preseed_from = str(run.dir)
    keys = sorted(axes)
    combos = list(product(*(axes[k] for k in keys))) if keys else [()]
    tasks = [
        (cfg, tuple(zip(keys, combo)), resume, preseed_from)
        for combo in combos
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_matrix_cell, tasks))
    else:
        results = [_matrix_cell(t) for t in tasks]
    rows = []
    for label, overrides, report in results:
        row = {"cell": label}
        for path, value in overrides:
            row[path] = value
        row.update(
            driving_score=report.driving_score,
            collision_rate=report.collision_rate,
            offroad_rate=report.offroad_rate,
            distance_mean=report.distance_mean,
            min_ade=report.min_ade,
        )
        rows.append(row)
    columns = ["cell", *keys, "driving_score", "collision_rate", "offroad_rate",
               "distance_mean", "min_ade"]
    path = run.dir / "reports" / "matrix.csv"
    write_csv(path, columns, rows)
    run.manifest.record_stage("matrix", {"table": path})
    return run, rows
