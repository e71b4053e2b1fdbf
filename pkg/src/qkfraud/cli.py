"""Pipeline orchestration: ``qkf generate|preprocess|select|train|evaluate|
ensemble|report --config <path> [--jobs N] [--seed S] [--out DIR]``.

One JSON config captures a whole experiment; every result file embeds the
config hash and ``report`` refuses to aggregate artifacts from different
hashes.  Exact-mode pipelines are bit-reproducible: nothing in any output
depends on wall-clock time or platform entropy.

Exit codes: 0 ok, 2 config error, 3 missing upstream artifact, 4 data
error, 5 solver convergence failure, 1 anything else.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from . import classical_models as cm
from . import dataset as ds
from . import ensemble as ens
from . import metrics as mt
from . import preprocess as pp
from . import svm as svm_mod
from .feature_map import FeatureMapSpec
from .qfis import QfisConfig, run_qfis
from .quantum_kernel import (
    KernelEvalMode,
    KernelMatrix,
    gram,
    gram_cross,
    load_kernel_matrix,
    save_kernel_matrix,
)

plt.rcParams["svg.hashsalt"] = "qkf"


class ConfigError(ValueError):
    """The experiment config is malformed."""


class MissingArtifactError(FileNotFoundError):
    """An upstream command has not produced its files yet."""


# ---------------------------------------------------------------------------
# config handling

_SCHEMA = {
    "seed": None,
    "out_dir": None,
    "jobs": None,
    "data": {
        "synthetic": {
            "n_genuine": None, "n_fraud": None, "n_numeric": None, "n_categorical": None,
            "n_informative_single": None, "n_informative_pair": None, "noise_sd": None,
            "seed": None,
        },
        "csv": {"path": None, "schema_path": None},
    },
    "preprocess": {
        "correlation_threshold": None,
        "top_categories": None,
        "split": {"mode": None, "train_fraction": None, "seed": None},
        "undersample": {
            "target_genuine_train": None, "target_fraud_train": None,
            "target_genuine_test": None, "target_fraud_test": None, "n_trials": None,
        },
        "scale": {"lo": None, "hi": None},
    },
    "feature_map": {
        "order_of_expansion": None, "depth": None, "entanglement": None, "alpha": None,
        "n_features": None,
    },
    "eval_mode": {
        "kind": None, "n_shots": None, "seed": None, "mitigate": None,
        "noise": {"p01": None, "p10": None},
    },
    "svm": {"C": None, "tol": None},
    "qfis": {
        "target_size": None, "p0": None, "objective": None, "budget_cap": None,
        "allow_over_budget": None, "trial_index": None,
    },
    "classical": {"params": None, "search": None, "n_candidates": None, "k_folds": None},
    "ensemble": {"threshold": None, "meta_kind": None},
    "report": {"roc_weighting": None, "undersampling_scale": None},
}


def _check_keys(obj: dict, schema: dict, path: str) -> None:
    for key, value in obj.items():
        if key not in schema:
            raise ConfigError(f"unknown config key {path}{key!r}")
        sub = schema[key]
        if isinstance(sub, dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config key {path}{key!r} must be an object")
            _check_keys(value, sub, f"{path}{key}.")


def load_config(path) -> dict:
    try:
        cfg = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    _check_keys(cfg, _SCHEMA, "")
    cfg.setdefault("seed", 0)
    cfg.setdefault("jobs", 1)
    return cfg


def config_hash(cfg: dict) -> str:
    canonical = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def _section(cfg: dict, name: str) -> dict:
    if name not in cfg:
        raise ConfigError(f"config is missing the {name!r} section")
    return cfg[name]


def _feature_map_spec(cfg: dict, n_features: int | None = None) -> FeatureMapSpec:
    obj = dict(cfg.get("feature_map", {}))
    obj.setdefault("n_features", n_features or 2)
    if n_features is not None:
        obj["n_features"] = n_features
    return FeatureMapSpec.from_json_dict(obj)


def _eval_mode(cfg: dict) -> KernelEvalMode:
    return KernelEvalMode.from_json_dict(cfg.get("eval_mode", {"kind": "exact"}))


# ---------------------------------------------------------------------------
# artifact I/O helpers

def _write_json(path: Path, payload: dict, cfg_hash: str) -> None:
    payload = {"config_hash": cfg_hash, **payload}
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _read_json(path: Path, cfg_hash: str | None = None) -> dict:
    if not path.exists():
        raise MissingArtifactError(f"missing artifact {path}; run the upstream command first")
    obj = json.loads(path.read_text())
    if cfg_hash is not None and obj.get("config_hash") != cfg_hash:
        raise ConfigError(
            f"artifact {path} was produced by config {obj.get('config_hash')}, "
            f"current config is {cfg_hash}"
        )
    return obj


def _write_csv(path: Path, header: list[str], rows, cfg_hash: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(f"# config_hash={cfg_hash}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _read_result_csv(path: Path, cfg_hash: str | None = None) -> tuple[list[str], list[list[str]]]:
    if not path.exists():
        raise MissingArtifactError(f"missing artifact {path}; run the upstream command first")
    with open(path, newline="") as fh:
        first = fh.readline().strip()
        if cfg_hash is not None and first != f"# config_hash={cfg_hash}":
            raise ConfigError(f"artifact {path} does not match the current config hash")
        reader = csv.reader(fh)
        header = next(reader)
        return header, list(reader)


def _save_figure(fig, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _trial_dir(out: Path, stage: str, trial: int) -> Path:
    return out / stage / f"trial_{trial}"


def _load_trial(out: Path, trial: int) -> tuple[ds.Dataset, ds.Dataset]:
    base = _trial_dir(out, "preprocess", trial)
    train_csv = base / "train.csv"
    if not train_csv.exists():
        raise MissingArtifactError(f"missing {train_csv}; run 'qkf preprocess' first")
    schema = ds.load_schema_sidecar(base / "train.schema.json")
    return ds.load_csv(train_csv, schema), ds.load_csv(base / "test.csv", schema)


def _n_trials(cfg: dict) -> int:
    return _section(cfg, "preprocess")["undersample"]["n_trials"]


# ---------------------------------------------------------------------------
# commands

def cmd_generate(cfg: dict, out: Path) -> None:
    data_cfg = _section(cfg, "data")
    if "synthetic" not in data_cfg:
        raise ConfigError("generate needs data.synthetic in the config")
    syn = ds.SyntheticConfig(**data_cfg["synthetic"])
    data = ds.generate_synthetic(syn)
    out_data = out / "data"
    out_data.mkdir(parents=True, exist_ok=True)
    schema = ds.write_csv(data, out_data / "raw.csv")
    ds.write_schema_sidecar(schema, out_data / "raw.schema.json")
    _write_json(out / "data" / "manifest.json", {
        "rows": len(data),
        "fraud": int(sum(data.labels)),
        "files": ["raw.csv", "raw.schema.json"],
    }, config_hash(cfg))
    print(f"generated {len(data)} rows ({sum(data.labels)} fraud) -> {out_data/'raw.csv'}")


def _load_raw(cfg: dict, out: Path) -> ds.Dataset:
    data_cfg = _section(cfg, "data")
    if "csv" in data_cfg:
        schema = ds.load_schema_sidecar(data_cfg["csv"]["schema_path"])
        return ds.load_csv(data_cfg["csv"]["path"], schema)
    raw = out / "data" / "raw.csv"
    if not raw.exists():
        raise MissingArtifactError(f"missing {raw}; run 'qkf generate' first")
    return ds.load_csv(raw, ds.load_schema_sidecar(out / "data" / "raw.schema.json"))


def cmd_preprocess(cfg: dict, out: Path) -> None:
    pre = _section(cfg, "preprocess")
    cfg_hash = config_hash(cfg)
    data = _load_raw(cfg, out)

    removed: list[str] = []
    n_numeric = sum(1 for k in data.feature_kinds if k == ds.NUMERIC)
    if n_numeric >= 2:
        data, removed = pp.prune_correlated(data, pre.get("correlation_threshold", 0.95))
    data = pp.encode_top_categories(data, pre.get("top_categories", 3))

    split_cfg = pre.get("split", {"mode": "chronological", "train_fraction": 0.6})
    train, test = pp.split(data, pp.SplitSpec(**split_cfg))

    us = pre["undersample"]
    seed = cfg["seed"]
    train_trials = pp.undersample_trials(
        train, us["target_genuine_train"], us["target_fraud_train"], us["n_trials"], seed
    )
    test_trials = pp.undersample_trials(
        test, us["target_genuine_test"], us["target_fraud_test"], us["n_trials"],
        seed + us["n_trials"],
    )

    scale = pre.get("scale", {"lo": -1.0, "hi": 1.0})
    scalers = {}
    for t, (tr, te) in enumerate(zip(train_trials, test_trials)):
        params = pp.fit_scaler(tr, scale["lo"], scale["hi"])
        scalers[str(t)] = json.loads(params.to_json())
        tr_scaled, te_scaled = pp.apply_scaler(params, tr), pp.apply_scaler(params, te)
        base = _trial_dir(out, "preprocess", t)
        base.mkdir(parents=True, exist_ok=True)
        schema = ds.write_csv(tr_scaled, base / "train.csv")
        ds.write_schema_sidecar(schema, base / "train.schema.json")
        ds.write_csv(te_scaled, base / "test.csv")
    _write_json(out / "preprocess" / "manifest.json", {
        "removed_correlated": removed,
        "feature_names": train_trials[0].feature_names,
        "n_trials": us["n_trials"],
        "scalers": scalers,
    }, cfg_hash)
    print(f"preprocess: {us['n_trials']} trials, {len(train_trials[0].feature_names)} features "
          f"({len(removed)} pruned)")


def cmd_select(cfg: dict, out: Path) -> None:
    cfg_hash = config_hash(cfg)
    qf = cfg.get("qfis", {})
    trial = qf.get("trial_index", 0)
    train, test = _load_trial(out, trial)
    qcfg = QfisConfig(
        train=train,
        test=test,
        spec=_feature_map_spec(cfg, n_features=qf.get("p0", 3)),
        target_size=qf.get("target_size", 7),
        p0=qf.get("p0", 3),
        objective=qf.get("objective", "accuracy"),
        C=cfg.get("svm", {}).get("C", 1.0),
        eval_mode=_eval_mode(cfg),
        budget_cap=qf.get("budget_cap", 200_000),
        allow_over_budget=qf.get("allow_over_budget", False),
        jobs=cfg.get("jobs", 1),
    )
    state = run_qfis(qcfg)
    stage_rows = [
        (r.stage, " ".join(str(f) for f in r.features), f"{r.accuracy:.6f}", f"{r.auc:.6f}")
        for r in state.history
    ]
    _write_csv(out / "select" / "history.csv",
               ["stage", "feature_set", "accuracy", "auc"], stage_rows, cfg_hash)
    _write_json(out / "select" / "selection.json", {
        "selected": state.selected,
        "feature_names": [train.feature_names[i] for i in state.selected],
        "stages": [
            {"stage": r.stage, "features": list(r.features),
             "accuracy": r.accuracy, "auc": r.auc}
            for r in state.stage_best()
        ],
        "trial_index": trial,
    }, cfg_hash)
    print(f"selected features {state.selected} "
          f"(stage accuracies: {[round(r.accuracy, 4) for r in state.stage_best()]})")


def _matrix_hash(x: np.ndarray) -> str:
    h = hashlib.sha256()
    h.update(str(x.shape).encode())
    h.update(np.ascontiguousarray(x).tobytes())
    return h.hexdigest()[:16]


def _cached_gram(out, spec, rows, mode, cross_rows=None) -> np.ndarray:
    """Gram (or cross) matrix, cached under (data hash, spec, mode)."""
    key_src = json.dumps({
        "rows": _matrix_hash(rows),
        "cross": None if cross_rows is None else _matrix_hash(cross_rows),
        "spec": spec.to_json_dict(),
        "mode": mode.to_json_dict(),
    }, sort_keys=True)
    key = hashlib.sha256(key_src.encode()).hexdigest()[:24]
    path = out / "cache" / f"{key}.npy"
    if path.exists():
        return load_kernel_matrix(path)
    if cross_rows is None:
        values = gram(spec, rows, mode).values
    else:
        values = gram_cross(spec, cross_rows, rows, mode)
    path.parent.mkdir(parents=True, exist_ok=True)
    save_kernel_matrix(path, values)
    return values


def _classical_params(cfg: dict) -> cm.GbtParams:
    cl = cfg.get("classical", {})
    return cm.GbtParams(**cl.get("params", {}))


def _train_classical(cfg: dict, x, y, seed: int) -> cm.GbtModel:
    cl = cfg.get("classical", {})
    if "search" in cl:
        spec = cm.SearchSpec(
            distributions=cl["search"],
            n_candidates=cl.get("n_candidates", 10),
            k_folds=cl.get("k_folds", 3),
            seed=seed,
        )
        best, _ = cm.randomized_search(x, y, "gbt", spec)
        return cm.train_gbt(x, y, cm.GbtParams(**best), seed)
    return cm.train_gbt(x, y, _classical_params(cfg), seed)


def cmd_train(cfg: dict, out: Path) -> None:
    cfg_hash = config_hash(cfg)
    selection = _read_json(out / "select" / "selection.json", cfg_hash)
    features = [int(f) for f in selection["selected"]]
    mode = _eval_mode(cfg)
    svm_cfg = cfg.get("svm", {})
    for trial in range(_n_trials(cfg)):
        train, _ = _load_trial(out, trial)
        x = train.feature_matrix()
        y = train.label_array()
        spec = _feature_map_spec(cfg, n_features=len(features))
        kernel = KernelMatrix(_cached_gram(out, spec, x[:, features], mode))
        q_model = svm_mod.train(kernel, y * 2 - 1, C=svm_cfg.get("C", 1.0),
                                tol=svm_cfg.get("tol", 1e-3))
        gbt = _train_classical(cfg, x, y.astype(float), seed=cfg["seed"] + trial)
        base = _trial_dir(out, "train", trial)
        _write_json(base / "qsvm.json", {
            "model": q_model.to_json_dict(),
            "feature_map": spec.to_json_dict(),
            "features": features,
        }, cfg_hash)
        _write_json(base / "gbt.json", {
            "model": gbt.to_json_dict(),
            "importance": [float(v) for v in cm.feature_importance(gbt)],
        }, cfg_hash)
    print(f"trained QSVM (features {features}) + GBT on {_n_trials(cfg)} trials")


def _load_models(out: Path, cfg_hash: str, trial: int):
    base = _trial_dir(out, "train", trial)
    q_obj = _read_json(base / "qsvm.json", cfg_hash)
    gbt_obj = _read_json(base / "gbt.json", cfg_hash)
    q_model = svm_mod.SvmModel.from_json_dict(q_obj["model"])
    spec = FeatureMapSpec.from_json_dict(q_obj["feature_map"])
    features = [int(f) for f in q_obj["features"]]
    gbt = cm.GbtModel.from_json_dict(gbt_obj["model"])
    return q_model, spec, features, gbt


def _trial_kpis(labels, scores, predictions, amounts) -> dict:
    conf = mt.confusion_counts(labels, predictions, amounts)
    return {
        "accuracy": mt.accuracy(labels, predictions),
        "auc": mt.auc(labels, scores),
        "hit_rate_count": mt.hit_rate(conf, mt.COUNT),
        "hit_rate_amount": mt.hit_rate(conf, mt.AMOUNT),
        "false_alarm_ratio": mt.false_alarm_ratio(conf),
    }


def cmd_evaluate(cfg: dict, out: Path) -> None:
    cfg_hash = config_hash(cfg)
    mode = _eval_mode(cfg)
    rep = cfg.get("report", {})
    scale_factor = rep.get("undersampling_scale", 1.0)
    weighting = rep.get("roc_weighting", mt.COUNT)
    for trial in range(_n_trials(cfg)):
        train, test = _load_trial(out, trial)
        q_model, spec, features, gbt = _load_models(out, cfg_hash, trial)
        x_tr, x_te = train.feature_matrix(), test.feature_matrix()
        y_te = test.label_array()
        amounts = test.amounts

        cross = _cached_gram(out, spec, x_tr[:, features], mode, cross_rows=x_te[:, features])
        q_scores = svm_mod.decision_scores(q_model, cross)
        c_scores = cm.predict_gbt(gbt, x_te)
        kpis = {
            "qsvm": _trial_kpis(y_te, q_scores, (q_scores >= 0).astype(int), amounts),
            "gbt": _trial_kpis(y_te, c_scores, (c_scores >= 0.5).astype(int), amounts),
        }
        base = _trial_dir(out, "evaluate", trial)
        _write_json(base / "kpis.json", {"kpis": kpis}, cfg_hash)
        _write_csv(base / "scores.csv", ["label", "amount", "qsvm_score", "gbt_score"],
                   [(y, repr(a), repr(float(q)), repr(float(c)))
                    for y, a, q, c in zip(y_te, amounts, q_scores, c_scores)], cfg_hash)
        for name, scores in (("qsvm", q_scores), ("gbt", c_scores)):
            curve = mt.roc_star(y_te, scores, amounts, weighting, scale_factor)
            rows = [(repr(t), repr(r), repr(h)) for t, r, h in
                    zip(curve.thresholds, curve.false_alarm_ratios, curve.hit_rates)]
            _write_csv(base / f"roc_star_{name}.csv",
                       ["threshold", "false_alarm_ratio", "hit_rate"], rows, cfg_hash)
            fig, ax = plt.subplots(figsize=(5, 4))
            finite = [(r, h) for r, h in zip(curve.false_alarm_ratios, curve.hit_rates)
                      if np.isfinite(r)]
            ax.plot([p[0] for p in finite], [p[1] for p in finite], marker=".")
            ax.set_xlabel("false alarm ratio")
            ax.set_ylabel(f"hit rate ({curve.weighting})")
            ax.set_title(f"ROC* {name} trial {trial}")
            _save_figure(fig, base / f"roc_star_{name}.svg")
    print(f"evaluated {_n_trials(cfg)} trials -> {out/'evaluate'}")


def cmd_ensemble(cfg: dict, out: Path) -> None:
    cfg_hash = config_hash(cfg)
    ens_cfg = cfg.get("ensemble", {})
    mode = _eval_mode(cfg)
    for trial in range(_n_trials(cfg)):
        train, test = _load_trial(out, trial)
        q_model, spec, features, gbt = _load_models(out, cfg_hash, trial)
        x_tr, y_tr = train.feature_matrix(), train.label_array()
        x_te, y_te = test.feature_matrix(), test.label_array()

        model, dis = ens.train_ensemble(
            x_tr, y_tr,
            q_features=features, q_spec=spec, c_gbt=gbt,
            c_features=list(range(x_tr.shape[1])),
            q_C=cfg.get("svm", {}).get("C", 1.0),
            q_eval_mode=mode,
            threshold=ens_cfg.get("threshold", 0.5),
            meta_kind=ens_cfg.get("meta_kind", "auto"),
            seed=cfg["seed"] + trial,
        )
        labels, provenance = ens.predict_ensemble(model, x_te)
        q_scores, c_scores = ens.ensemble_scores(model, x_te)
        test_dis = ens.find_disagreements(q_scores, c_scores, y_te, model.threshold)
        scatter = ens.complementarity_scatter(q_scores, c_scores, y_te)

        base = _trial_dir(out, "ensemble", trial)
        _write_json(base / "kpis.json", {
            "kpis": {"ensemble": {
                "accuracy": mt.accuracy(y_te, labels),
                "meta_kind": model.meta.kind,
                "train_disagreement_rate": len(dis) / len(y_tr),
                "test_disagreement_rate": len(test_dis) / len(y_te),
                "meta_resolved": provenance.count(ens.META_RESOLVED),
            }},
        }, cfg_hash)
        _write_json(base / "ensemble.json", {
            "quantum_base": "../train/trial_%d/qsvm.json" % trial,
            "classical_base": "../train/trial_%d/gbt.json" % trial,
            "meta": {"kind": model.meta.kind},
            "threshold": model.threshold,
            "meta_features": model.meta_features,
        }, cfg_hash)
        _write_csv(base / "scatter.csv", ["classical_score", "quantum_score", "label"],
                   [(repr(c), repr(q), y) for c, q, y in scatter], cfg_hash)
        fig, ax = plt.subplots(figsize=(4.5, 4.5))
        points = np.array(scatter)
        for label, color in ((0, "tab:blue"), (1, "tab:red")):
            mask = points[:, 2] == label
            ax.scatter(points[mask, 0], points[mask, 1], s=8, c=color,
                       label="genuine" if label == 0 else "fraud")
        ax.axhline(model.threshold, lw=0.5, color="gray")
        ax.axvline(model.threshold, lw=0.5, color="gray")
        ax.set_xlabel("classical score")
        ax.set_ylabel("quantum score")
        ax.legend()
        _save_figure(fig, base / "scatter.svg")
    print(f"ensemble evaluated on {_n_trials(cfg)} trials -> {out/'ensemble'}")


def cmd_report(cfg: dict, out: Path) -> None:
    cfg_hash = config_hash(cfg)
    n_trials = _n_trials(cfg)
    metric_names = ["accuracy", "auc", "hit_rate_count", "hit_rate_amount", "false_alarm_ratio"]
    per_model: dict[str, dict[str, list[float]]] = {}
    rows = []
    for trial in range(n_trials):
        kpis = _read_json(_trial_dir(out, "evaluate", trial) / "kpis.json", cfg_hash)["kpis"]
        ens_path = _trial_dir(out, "ensemble", trial) / "kpis.json"
        if ens_path.exists():
            kpis = {**kpis, **_read_json(ens_path, cfg_hash)["kpis"]}
        for model_name, values in kpis.items():
            store = per_model.setdefault(model_name, {})
            for metric in metric_names:
                if metric in values:
                    store.setdefault(metric, []).append(values[metric])
            rows.append([trial, model_name] + [
                f"{values[m]:.6f}" if m in values and np.isfinite(values[m]) else
                ("inf" if m in values else "")
                for m in metric_names
            ])
    for model_name in sorted(per_model):
        summary_row = ["average", model_name]
        for metric in metric_names:
            values = [v for v in per_model[model_name].get(metric, []) if np.isfinite(v)]
            summary_row.append(mt.aggregate_trials(values).formatted() if values else "")
        rows.append(summary_row)
    _write_csv(out / "report" / "kpi_table.csv", ["trial", "model"] + metric_names, rows, cfg_hash)

    # accuracy-vs-stage curve and spread from the selection history
    selection = _read_json(out / "select" / "selection.json", cfg_hash)
    _, history = _read_result_csv(out / "select" / "history.csv", cfg_hash)
    stages = sorted({int(r[0]) for r in history})
    by_stage = {s: [float(r[2]) for r in history if int(r[0]) == s] for s in stages}
    stage_rows = [
        (s, f"{max(by_stage[s]):.6f}", f"{np.median(by_stage[s]):.6f}",
         f"{min(by_stage[s]):.6f}", len(by_stage[s]))
        for s in stages
    ]
    _write_csv(out / "report" / "accuracy_vs_stage.csv",
               ["stage", "best_accuracy", "median_accuracy", "worst_accuracy", "n_evaluated"],
               stage_rows, cfg_hash)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.boxplot([by_stage[s] for s in stages], positions=stages, widths=0.6)
    ax.plot(stages, [max(by_stage[s]) for s in stages], marker="o", color="tab:red")
    ax.set_xlabel("selected feature count")
    ax.set_ylabel("test accuracy")
    _save_figure(fig, out / "report" / "accuracy_vs_stage.svg")
    print(f"report written -> {out/'report'/'kpi_table.csv'} "
          f"(selection {selection['selected']}, {len(rows)} table rows)")


# ---------------------------------------------------------------------------

_COMMANDS = {
    "generate": cmd_generate,
    "preprocess": cmd_preprocess,
    "select": cmd_select,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "ensemble": cmd_ensemble,
    "report": cmd_report,
}

_EXIT_CODES = [
    (ConfigError, 2),
    (MissingArtifactError, 3),
    ((ds.CsvParseError, ds.SchemaError, ValueError), 4),
    (svm_mod.ConvergenceError, 5),
]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qkf", description="quantum-kernel fraud detection pipeline"
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="experiment config JSON")
    parser.add_argument("--out", default=None, help="output directory (overrides config)")
    parser.add_argument("--seed", type=int, default=None, help="seed override")
    parser.add_argument("--jobs", type=int, default=None, help="worker threads")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg["seed"] = args.seed
        if args.jobs is not None:
            cfg["jobs"] = args.jobs
        out = Path(args.out or cfg.get("out_dir", "qkf_out"))
        _COMMANDS[args.command](cfg, out)
        return 0
    except Exception as exc:  # noqa: BLE001 - map to exit categories
        for exc_types, code in _EXIT_CODES:
            if isinstance(exc, exc_types):
                print(f"error: {exc}", file=sys.stderr)
                return code
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
