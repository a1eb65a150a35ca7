"""Command-line entry point: discover, assess, criteria, dla, roc, import-hep.

Runs are driven by a JSON config file plus flag overrides, and every
run directory contains a config snapshot sufficient to reproduce it
byte-for-byte.  Seeds must come from the config or flags; wall-clock
seeding is never used.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import criteria as crit
from . import data as datamod
from . import kernels, ocsvm, optimizers
from .genome import (
    GenomeValidationError,
    SearchSpace,
    encode_flat,
    load_genome,
    save_genome,
)
from .pauli import dla_closure

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class ConfigError(ValueError):
    pass


DEFAULT_CONFIG = {
    "dataset": None,
    "n": None,              # defaults to 2 * latent_dim
    "m": 8,
    "b": 10,
    "nu": 0.1,
    "projected": True,
    "engineered_pairs": [],
    "weights": {"validation": 1.0},
    "optimizer": {"kind": "bayesian"},
    "seeds": {"split": 0, "optimizer": 0, "criteria": 0},
    "discovery": {"train_size": 75, "val_size": 75, "balanced": True},
    "assessment": {"train_size": 200, "test_size": 1500, "repeats": 5,
                   "balanced": True},
    "dla_threshold": None,
    "expressivity_samples": 200,
    "output_dir": "runs/run",
}


def load_config(path: str | None, overrides: dict) -> dict:
    config = json.loads(json.dumps(DEFAULT_CONFIG))  # deep copy
    if path is not None:
        try:
            with open(path) as fh:
                user = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from None
        for key, value in user.items():
            if key not in config:
                raise ConfigError(f"unknown config key {key!r}")
            if isinstance(config[key], dict) and isinstance(value, dict):
                config[key].update(value)
            else:
                config[key] = value
    for key, value in overrides.items():
        if value is None:
            continue
        if isinstance(config.get(key), dict) and isinstance(value, dict):
            config[key].update(value)
        else:
            config[key] = value
    if config["dataset"] is None:
        raise ConfigError("config needs a `dataset` path")
    if "split" not in config["seeds"] or "optimizer" not in config["seeds"]:
        raise ConfigError("config needs explicit `seeds.split` and `seeds.optimizer`")
    return config


def _prepare_discovery(config):
    """Load, engineer, split, and scale the dataset for the discovery phase."""
    dataset = datamod.load_csv(config["dataset"])
    split = datamod.make_discovery_split(
        dataset, config["seeds"]["split"], **config["discovery"])
    scaler = datamod.fit_scaler(split.train_X)
    train_X = datamod.apply_scaler(scaler, split.train_X)
    val_X = datamod.apply_scaler(scaler, split.val_X)
    pairs = [tuple(p) for p in config["engineered_pairs"]]
    if pairs:
        train_X = datamod.engineer_features(
            datamod.LabeledDataset(train_X, np.ones(len(train_X), dtype=np.int64),
                                   dataset.latent_dim), pairs).features
        val_X = datamod.engineer_features(
            datamod.LabeledDataset(val_X, split.val_y, dataset.latent_dim),
            pairs).features
    n = config["n"] if config["n"] is not None else 2 * dataset.latent_dim
    space = SearchSpace(n=n, m=config["m"], d=train_X.shape[1], b=config["b"])
    return dataset, split, train_X, val_X, space


def _make_context(config, train_X, val_X, val_y) -> crit.CriterionContext:
    return crit.CriterionContext(
        train_X=train_X, val_X=val_X, val_y=val_y,
        nu=config["nu"], projected=config["projected"],
        dla_threshold=config["dla_threshold"],
        expressivity_samples=config["expressivity_samples"],
        seed=config["seeds"].get("criteria", 0),
    )


def _write_config_snapshot(config, out_dir) -> None:
    with open(os.path.join(out_dir, "config.json"), "w") as fh:
        json.dump(config, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _discover(config) -> int:
    dataset, split, train_X, val_X, space = _prepare_discovery(config)
    context = _make_context(config, train_X, val_X, split.val_y)
    weights = {k: float(v) for k, v in config["weights"].items()}

    def cost_fn(genome):
        return crit.composite_cost(genome, weights, context).cost

    opt_cfg = dict(config["optimizer"])
    kind = opt_cfg.pop("kind")
    trace = optimizers.run_optimizer(
        kind, space, cost_fn, config["seeds"]["optimizer"], **opt_cfg)

    out_dir = config["output_dir"]
    os.makedirs(out_dir, exist_ok=True)
    _write_config_snapshot(config, out_dir)
    optimizers.save_trace(trace, os.path.join(out_dir, "trace.txt"))
    save_genome(trace.best_genome, os.path.join(out_dir, "best.qkg"))
    best_reports = crit.composite_cost(trace.best_genome, weights, context)
    with open(os.path.join(out_dir, "summary.txt"), "w") as fh:
        fh.write(f"optimizer {kind}\n")
        fh.write(f"evaluations {len(trace.evaluations)}\n")
        fh.write(f"best_cost {trace.best_cost!r}\n")
        fh.write("best_flat " + ",".join(str(v) for v in
                                         encode_flat(trace.best_genome)) + "\n")
        for report in best_reports.reports:
            fh.write(f"criterion {report.name} {report.value!r}\n")
        for note in trace.notes:
            fh.write(f"note {note}\n")
    print(f"discovery complete: best cost {trace.best_cost:.6f} "
          f"after {len(trace.evaluations)} evaluations -> {out_dir}/best.qkg")
    return EXIT_OK


def _assess(config, genome_path) -> int:
    genome = load_genome(genome_path)
    dataset = datamod.load_csv(config["dataset"])
    split = datamod.make_assessment_split(
        dataset, config["seeds"]["split"], **config["assessment"])
    scaler = datamod.fit_scaler(split.train_X)
    train_X = datamod.apply_scaler(scaler, split.train_X)
    pairs = [tuple(p) for p in config["engineered_pairs"]]
    if pairs:
        train_X = datamod.engineer_features(
            datamod.LabeledDataset(train_X, np.ones(len(train_X), dtype=np.int64),
                                   dataset.latent_dim), pairs).features

    out_dir = config["output_dir"]
    os.makedirs(out_dir, exist_ok=True)
    _write_config_snapshot(config, out_dir)

    projected = config["projected"]
    K_train = kernels.gram(genome, train_X, projected=projected)
    degenerate = bool(np.max(K_train) - np.min(K_train) < 1e-12)
    model = None
    if not degenerate:
        try:
            model = ocsvm.train_ocsvm(K_train, config["nu"])
        except ocsvm.OcsvmError:
            degenerate = True

    aucs, accuracies = [], []
    lines = []
    for r, (test_X, test_y) in enumerate(zip(split.test_X, split.test_y)):
        if pairs:
            test_X = datamod.engineer_features(
                datamod.LabeledDataset(datamod.apply_scaler(scaler, test_X),
                                       test_y, dataset.latent_dim), pairs).features
        else:
            test_X = datamod.apply_scaler(scaler, test_X)
        if degenerate:
            auc, accuracy = 0.5, 0.5
        else:
            K_cross = kernels.gram(genome, test_X, train_X, projected=projected)
            scores = ocsvm.decision_scores(model, K_cross)
            curve = ocsvm.roc_auc(-scores, test_y)
            ocsvm.save_roc_csv(curve, os.path.join(out_dir, f"roc_{r}.csv"))
            auc = curve.auc
            accuracy = float(np.mean(np.where(scores >= 0, 1, -1) == test_y))
        aucs.append(auc)
        accuracies.append(accuracy)
        lines.append(f"repeat {r} auc {auc!r} accuracy {accuracy!r}\n")

    auc_mean, auc_std = float(np.mean(aucs)), float(np.std(aucs))
    acc_mean, acc_std = float(np.mean(accuracies)), float(np.std(accuracies))
    with open(os.path.join(out_dir, "assessment.txt"), "w") as fh:
        fh.writelines(lines)
        if degenerate:
            fh.write("degenerate 1\n")
        fh.write(f"auc_mean {auc_mean!r}\nauc_std {auc_std!r}\n")
        fh.write(f"accuracy_mean {acc_mean!r}\naccuracy_std {acc_std!r}\n")
    print(f"AUC {auc_mean:.4f} +/- {auc_std:.4f} over {len(aucs)} repeats"
          + (" (degenerate kernel)" if degenerate else ""))
    return EXIT_OK


def _criteria(config, genome_path) -> int:
    genome = load_genome(genome_path)
    _, split, train_X, val_X, _ = _prepare_discovery(config)
    context = _make_context(config, train_X, val_X, split.val_y)
    weights = {k: float(v) for k, v in config["weights"].items()}
    composite = crit.composite_cost(genome, weights, context)
    for report in composite.reports:
        print(f"{report.name} {report.value!r}")
        for key in sorted(report.auxiliary):
            print(f"  {key} {report.auxiliary[key]!r}")
    print(f"cost {composite.cost!r}")
    return EXIT_OK


def _dla(genome_path, threshold) -> int:
    genome = load_genome(genome_path)
    result = dla_closure(crit.gate_generators(genome), threshold)
    print(f"rank {result.rank}")
    print(f"truncated {int(result.truncated)}")
    for word in result.basis:
        print(word.to_label())
    return EXIT_OK


def _roc(scores_path) -> int:
    """Scores file: one `score,label` pair per line, labels SM|BSM; the
    score is an anomaly score (higher = more anomalous)."""
    scores, labels = [], []
    with open(scores_path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                score_text, label_text = line.split(",")
                scores.append(float(score_text))
                labels.append({"SM": datamod.SM, "BSM": datamod.BSM}[label_text.strip()])
            except (ValueError, KeyError):
                raise datamod.DataError(
                    f"{scores_path}:{lineno}: expected `score,SM|BSM`") from None
    curve = ocsvm.roc_auc(np.asarray(scores), np.asarray(labels))
    print(f"auc {curve.auc!r}")
    return EXIT_OK


def _import_hep(args) -> int:
    """Convert the public latent-space arrays into the library's CSV form.

    Accepts .npy arrays or .h5 files (dataset key selectable, default
    `latent_space`) holding shapes (rows, 2, latent) or (rows, 2*latent);
    one file of SM rows and one of BSM rows.
    """
    def load_array(path, key):
        if path.endswith(".npy"):
            return np.load(path)
        import h5py  # optional dependency, used only by this importer

        with h5py.File(path, "r") as fh:
            if key not in fh:
                raise datamod.DataError(
                    f"{path}: no dataset {key!r}; available: {list(fh)}")
            return np.asarray(fh[key])

    arrays = []
    for path, label in ((args.sm, datamod.SM), (args.bsm, datamod.BSM)):
        arr = load_array(path, args.key)
        if arr.ndim == 3:
            arr = arr.reshape(arr.shape[0], -1)
        if arr.ndim != 2 or arr.shape[1] % 2 != 0:
            raise datamod.DataError(
                f"{path}: expected (rows, 2, latent) or (rows, 2*latent), "
                f"got shape {arr.shape}")
        arrays.append((arr, label))
    if arrays[0][0].shape[1] != arrays[1][0].shape[1]:
        raise datamod.DataError("SM and BSM files have different feature counts")
    features = np.concatenate([a for a, _ in arrays])
    labels = np.concatenate([np.full(len(a), lab, dtype=np.int64)
                             for a, lab in arrays])
    dataset = datamod.LabeledDataset(features, labels, features.shape[1] // 2)
    datamod.save_csv(dataset, args.out)
    print(f"wrote {dataset.num_rows} rows ({int(np.sum(labels == datamod.SM))} SM, "
          f"{int(np.sum(labels == datamod.BSM))} BSM) to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qkdisc",
        description="Automatic discovery and assessment of quantum kernels "
                    "for anomaly detection.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_flags(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--dataset", help="override dataset CSV path")
        p.add_argument("--output-dir", help="override output directory")
        p.add_argument("--m", type=int, help="override gate count")
        p.add_argument("--n", type=int, help="override qubit count")

    p = sub.add_parser("discover", help="run kernel discovery")
    add_config_flags(p)

    p = sub.add_parser("assess", help="assess a discovered genome")
    add_config_flags(p)
    p.add_argument("genome", help="path to a .qkg genome file")

    p = sub.add_parser("criteria", help="evaluate criteria for a genome")
    add_config_flags(p)
    p.add_argument("genome", help="path to a .qkg genome file")

    p = sub.add_parser("dla", help="print the DLA closure of a genome")
    p.add_argument("genome", help="path to a .qkg genome file")
    p.add_argument("--threshold", type=int, default=None)

    p = sub.add_parser("roc", help="AUC of a score,label CSV")
    p.add_argument("scores", help="path to score,label lines")

    p = sub.add_parser("import-hep", help="convert latent-space arrays to CSV")
    p.add_argument("--sm", required=True, help="SM (background) array file")
    p.add_argument("--bsm", required=True, help="BSM (signal) array file")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--key", default="latent_space", help="HDF5 dataset key")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "discover":
            config = load_config(args.config, {
                "dataset": args.dataset, "output_dir": args.output_dir,
                "m": args.m, "n": args.n})
            return _discover(config)
        if args.command == "assess":
            config = load_config(args.config, {
                "dataset": args.dataset, "output_dir": args.output_dir,
                "m": args.m, "n": args.n})
            return _assess(config, args.genome)
        if args.command == "criteria":
            config = load_config(args.config, {
                "dataset": args.dataset, "output_dir": args.output_dir,
                "m": args.m, "n": args.n})
            return _criteria(config, args.genome)
        if args.command == "dla":
            return _dla(args.genome, args.threshold)
        if args.command == "roc":
            return _roc(args.scores)
        if args.command == "import-hep":
            return _import_hep(args)
        parser.error(f"unknown command {args.command!r}")
    except (ConfigError, GenomeValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except datamod.DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ocsvm.OcsvmError, crit.CriterionError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
