"""Command-line entry point: ``pavetex <command> [options]``.

Commands: features, train, cv, predict, synth, filter-eval.  Every report is
canonical JSON (sorted keys, fixed indent) carrying ``schema_version``, so
identical inputs, config and seed give byte-identical outputs.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .denoise import METHODS, apply_method, filter_mse
from .errors import FeatureMismatch, PavetexError, StageError
from .features import write_particles_csv, write_pgm
from .gridio import read_depth_map, write_depth_map
from .pipeline import PipelineConfig, load_config, run_features
from .regress.artifact import SCHEMA_VERSION, ModelArtifact, load_artifact, save_artifact
from .regress.dataset import (MODEL_SUBSETS, parse_feature_subset, read_dataset, stratified_split,
                              subset_name, write_dataset, zscore_fit_array)
from .regress.ensemble import MODEL_KINDS, fit_model
from .regress.evaluation import kfold_cv, metrics
from .regress.linear import ols_arrays, vif
from .synth import (FamilyMember, SynthSpec, corpus_plan, default_family, generate_texture,
                    oracle_mtd)

MAP_SUFFIXES = (".pfm", ".csv", ".txt")


class UsageError(Exception):
    """Bad command-line usage detected after parsing; exits with status 2."""


# -- output helpers ------------------------------------------------------------

def _jsonable(obj):
    """Replace non-finite floats by strings so reports stay strict JSON."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isfinite(v):
            return v
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path: Path, obj) -> None:
    path.write_text(dumps(obj), encoding="utf-8")


def report(kind: str, **body) -> dict:
    return {"schema_version": SCHEMA_VERSION, "report": kind, **body}


# -- argument types --------------------------------------------------------------

def feature_subset_arg(text: str) -> tuple:
    try:
        return parse_feature_subset(text, MODEL_SUBSETS)
    except FeatureMismatch as exc:
        raise argparse.ArgumentTypeError(
            f"{exc}; choose one of {', '.join(MODEL_SUBSETS)}") from exc


def build_config(args) -> PipelineConfig:
    cfg = load_config(args.config) if args.config else PipelineConfig()
    overrides = {
        "seed": args.seed,
        "correction.mode": getattr(args, "correction", None),
        "correction.iterations": getattr(args, "ransac_iters", None),
        "correction.threshold": getattr(args, "ransac_threshold", None),
        "filter.window": getattr(args, "window", None),
        "features.threshold": getattr(args, "threshold", None),
        "model.kind": getattr(args, "model", None),
        "model.n_estimators": getattr(args, "n_estimators", None),
        "model.max_depth": getattr(args, "max_depth", None),
        "model.learning_rate": getattr(args, "learning_rate", None),
        "holdout_fraction": getattr(args, "holdout", None),
        "cv_folds": getattr(args, "k", None),
    }
    subset = getattr(args, "features", None)
    if subset is not None:
        overrides["feature_subset"] = subset_name(subset)
    return cfg.with_overrides(overrides)


def out_dir(args) -> Path:
    path = Path(args.out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def collect_maps(inputs) -> list[tuple[str, Path]]:
    """(id, path) pairs: files in argument order, directory contents sorted by name."""
    found = []
    for item in inputs:
        p = Path(item)
        if p.is_dir():
            found.extend(sorted(c for c in p.iterdir() if c.suffix.lower() in MAP_SUFFIXES))
        elif p.exists():
            found.append(p)
        else:
            raise FileNotFoundError(f"input not found: {item}")
    if not found:
        raise UsageError("no depth maps found in the given inputs")
    return [(p.stem, p) for p in found]


def is_grid_file(path: Path) -> bool:
    """True for depth maps (pfm or csv-grid), False for tabular feature CSVs."""
    if path.suffix.lower() == ".pfm":
        return True
    with open(path, "rb") as f:
        first = f.readline().strip()
    if first.startswith(b"#"):
        return True
    try:
        [float(tok) for tok in first.split(b",")]
    except ValueError:
        return False
    return True


# -- features --------------------------------------------------------------------

def _emit_intermediates(dest: Path, sid: str, result) -> dict:
    files = {
        "filtered": f"{sid}.filtered.pfm",
        "corrected": f"{sid}.corrected.pfm",
        "concave_mask": f"{sid}.concave.pgm",
        "particle_mask": f"{sid}.particles.pgm",
        "particles": f"{sid}.particles.csv",
    }
    write_depth_map(result.filtered, dest / files["filtered"])
    write_depth_map(result.corrected, dest / files["corrected"])
    write_pgm(result.concave_mask, dest / files["concave_mask"])
    write_pgm(result.particle_mask, dest / files["particle_mask"])
    write_particles_csv(result.particles, dest / files["particles"])
    return files


def extract_rows(maps, cfg, dest: Path | None = None, emit: bool = False) -> list[dict]:
    rows = []
    for sid, path in maps:
        dmap = _in_stage("read", read_depth_map, path)
        try:
            result = run_features(dmap, cfg)
        except StageError as exc:
            raise StageError(exc.stage, exc.cause, path.name) from exc
        row = {"id": sid, "source": path.name, **result.features.as_dict(), **result.summary()}
        row.pop("features")
        if emit and dest is not None:
            row["intermediates"] = _emit_intermediates(dest, sid, result)
        rows.append(row)
    return rows


def write_feature_csv(path: Path, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["id", "p", "d", "k"])
        for r in rows:
            w.writerow([r["id"], repr(r["p"]), repr(r["d"]), repr(r["k"])])


def cmd_features(args) -> int:
    cfg = build_config(args)
    dest = out_dir(args)
    rows = extract_rows(collect_maps(args.inputs), cfg, dest, args.emit_intermediates)
    write_feature_csv(dest / "features.csv", rows)
    write_json(dest / "features.json", report("features", config=cfg.to_dict(), rows=rows))
    for r in rows:
        print(f"{r['id']}: P={r['p']:.6f} D={r['d']:.6f} K={r['k']:.6f}")
    return 0


# -- train / cv ------------------------------------------------------------------

def _diagnostics(ds, names) -> dict:
    out = {}
    try:
        out["ols"] = ols_arrays(ds.X(names), ds.y, names).to_dict()
    except PavetexError as exc:
        out["ols"] = {"error": f"{type(exc).__name__}: {exc}"}
    if len(names) >= 2:
        out["vif"] = vif(ds, names)
    return out


def _prediction_block(ds, pred) -> dict:
    return {"ids": ds.ids, "labels": ds.y.tolist(), "predictions": [float(v) for v in pred]}


def cmd_train(args) -> int:
    cfg = build_config(args)
    names = parse_feature_subset(cfg.feature_subset, MODEL_SUBSETS)
    ds = _in_stage("read", read_dataset, args.dataset).with_features(names)
    train, holdout = _in_stage("split", stratified_split, ds, cfg.holdout_fraction, cfg.seed)
    scaler = _in_stage("scale", zscore_fit_array, train.X(names), names)
    model = _in_stage("fit", fit_model, cfg.model, scaler.transform(train.X(names)), train.y,
                      cfg.seed)
    artifact = ModelArtifact(cfg.model, scaler, model, cfg.seed,
                             {"dataset": Path(args.dataset).name, "n_train": len(train)})
    train_pred = artifact.predict_dataset(train)
    body = {
        "dataset": Path(args.dataset).name,
        "feature_names": list(names),
        "model": cfg.model.to_dict(),
        "seed": cfg.seed,
        "holdout_fraction": cfg.holdout_fraction,
        "n_train": len(train),
        "n_holdout": len(holdout),
        "train": _prediction_block(train, train_pred),
        "train_metrics": metrics(train.y, train_pred, allow_constant=True).to_dict(),
        "diagnostics": _diagnostics(train, names),
    }
    if len(holdout):
        hold_pred = artifact.predict_dataset(holdout)
        body["holdout"] = _prediction_block(holdout, hold_pred)
        body["holdout_metrics"] = metrics(holdout.y, hold_pred, allow_constant=True).to_dict()
    dest = out_dir(args)
    save_artifact(artifact, dest / "model.json")
    write_json(dest / "train_report.json", report("train", **body))
    summary = body.get("holdout_metrics", body["train_metrics"])
    print(f"trained {cfg.model.kind} on {subset_name(names)}: n_train={len(train)} "
          f"rmse={summary['rmse']:.6f} r2={summary['r2']}")
    return 0


def cmd_cv(args) -> int:
    cfg = build_config(args)
    names = parse_feature_subset(cfg.feature_subset, MODEL_SUBSETS)
    ds = _in_stage("read", read_dataset, args.dataset).with_features(names)
    pool = ds
    if cfg.holdout_fraction and args.holdout is not None:
        pool, _ = _in_stage("split", stratified_split, ds, cfg.holdout_fraction, cfg.seed)
    cv = _in_stage("cv", kfold_cv, pool, cfg.cv_folds, cfg.model, cfg.seed, names)
    body = cv.to_dict()
    body["dataset"] = Path(args.dataset).name
    body["n"] = len(pool)
    write_json(out_dir(args) / "cv_report.json", report("cv", **body))
    means = cv.means()
    print(f"{cfg.cv_folds}-fold CV ({cfg.model.kind}, {subset_name(names)}): "
          f"mean r2={means['r2']} mean rmse={means['rmse']:.6f}")
    return 0


# -- predict ---------------------------------------------------------------------

def _read_feature_rows(path: Path) -> list[tuple[str, dict]]:
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        rows = []
        for i, row in enumerate(reader):
            clean = {k.strip(): (v.strip() if isinstance(v, str) else v)
                     for k, v in row.items() if k is not None}
            rows.append((clean.get("id") or str(i), clean))
    return rows


def cmd_predict(args) -> int:
    artifact = _in_stage("load-model", load_artifact, args.model_path)
    cfg = build_config(args)
    dest = out_dir(args)
    ids, values = [], []
    for item in args.inputs:
        p = Path(item)
        if p.is_dir() or is_grid_file(p):
            rows = extract_rows(collect_maps([p]), cfg, dest, args.emit_intermediates)
            ids.extend(r["id"] for r in rows)
            values.extend({"P": r["p"], "D": r["d"], "K": r["k"]} for r in rows)
        else:
            for sid, row in _read_feature_rows(p):
                ids.append(sid)
                values.append(row)
    pred = _in_stage("predict", artifact.predict_rows, values)
    with open(dest / "predictions.csv", "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["id", "mtd"])
        for sid, v in zip(ids, pred):
            w.writerow([sid, repr(float(v))])
    write_json(dest / "predictions.json", report(
        "predict", model=Path(args.model_path).name, feature_names=list(artifact.feature_names),
        ids=ids, predictions=[float(v) for v in pred]))
    for sid, v in zip(ids, pred):
        print(f"{sid},{float(v)!r}")
    return 0


# -- synth -----------------------------------------------------------------------

def _load_synth_spec(path):
    """Family list and sample count from a synth spec file.

    Accepted shapes: ``{"family": [...], "n_samples": n}`` or a single
    ``{"spec": {...}, "n_samples": n, "name": ...}`` stratum.
    """
    if path is None:
        return default_family(), None
    with open(path, encoding="utf-8") as f:
        d = json.load(f)
    if "family" in d:
        family = [FamilyMember.from_dict(m) for m in d["family"]]
    elif "spec" in d:
        family = [FamilyMember(d.get("name", "synthetic"), SynthSpec.from_dict(d["spec"]),
                               tuple(d.get("n_particles_range", [d["spec"].get("n_particles", 20)] * 2)),
                               float(d.get("tilt_range", 0.0)))]
    else:
        raise ValueError(f"{path}: synth spec needs a 'family' or 'spec' entry")
    return family, d.get("n_samples")


def cmd_synth(args) -> int:
    family, n_spec = _in_stage("spec", _load_synth_spec, args.spec)
    n = args.n if args.n is not None else (n_spec or 4 * len(family))
    cfg = build_config(args)
    dest = out_dir(args)
    maps_dir = dest / "maps"
    maps_dir.mkdir(exist_ok=True)
    suffix = ".pfm" if args.format == "pfm" else ".csv"
    entries, samples = [], []
    for sid, member, spec in _in_stage("spec", corpus_plan, n, family, cfg.seed):
        dmap, truth = _in_stage("generate", generate_texture, spec)
        write_depth_map(dmap, maps_dir / f"{sid}{suffix}")
        write_json(maps_dir / f"{sid}.truth.json",
                   report("ground_truth", id=sid, mixture=member.name, spec=spec.to_dict(),
                          truth=truth.to_dict()))
        entries.append({"id": sid, "mixture": member.name, "map": f"maps/{sid}{suffix}",
                        "oracle_mtd": oracle_mtd(truth),
                        "concave_fraction": truth.concave_fraction})
        if args.dataset:
            from .regress.dataset import LabeledSample
            try:
                fv = run_features(dmap, cfg).features
            except StageError as exc:
                raise StageError(exc.stage, exc.cause, sid) from exc
            samples.append(LabeledSample(sid, member.name, fv, oracle_mtd(truth)))
    write_json(dest / "manifest.json", report(
        "synth", seed=cfg.seed, n_samples=n, family=[m.to_dict() for m in family], samples=entries))
    if args.dataset:
        from .regress.dataset import Dataset
        write_dataset(Dataset.from_samples(samples), dest / "dataset.csv")
    print(f"wrote {n} synthetic map(s) to {maps_dir}")
    return 0


# -- filter-eval -----------------------------------------------------------------

def cmd_filter_eval(args) -> int:
    dmap = _in_stage("read", read_depth_map, args.map)
    reference = _in_stage("read", read_depth_map, args.reference) if args.reference else None
    methods = args.methods.split(",") if args.methods else list(METHODS)
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise UsageError(f"unknown filter method(s) {', '.join(unknown)}; choose from {', '.join(METHODS)}")
    window = args.window if args.window is not None else build_config(args).filter.window
    mse, mse_ref = {}, {}
    for m in methods:
        out = _in_stage("denoise", apply_method, dmap, m, window)
        mse[m] = filter_mse(dmap, out)
        if reference is not None:
            mse_ref[m] = _in_stage("denoise", filter_mse, reference, out)
    body = {"map": Path(args.map).name, "window": window, "mse": mse}
    if reference is not None:
        body["reference"] = Path(args.reference).name
        body["mse_reference"] = mse_ref
    write_json(out_dir(args) / "filter_eval.json", report("filter_eval", **body))
    for m in methods:
        extra = f" reference_mse={mse_ref[m]:.6e}" if reference is not None else ""
        print(f"{m}: mse={mse[m]:.6e}{extra}")
    return 0


# -- parser / main -----------------------------------------------------------------

def _in_stage(stage, fn, *args):
    try:
        return fn(*args)
    except StageError:
        raise
    except (PavetexError, ValueError, KeyError, TypeError) as exc:
        raise StageError(stage, exc) from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON pipeline config; command-line flags override it")
    common.add_argument("--seed", type=int, help="random seed (overrides the config)")
    common.add_argument("--out-dir", default=".", help="directory for outputs (default: .)")
    common.add_argument("--emit-intermediates", action="store_true",
                        help="also write filtered/corrected maps, masks and particle tables")

    pipe = argparse.ArgumentParser(add_help=False)
    pipe.add_argument("--correction", choices=("plane", "surface"))
    pipe.add_argument("--ransac-iters", type=int)
    pipe.add_argument("--ransac-threshold", type=float, help="inlier threshold (default: 2.5 x noise sigma)")
    pipe.add_argument("--window", type=int, help="adaptive filter window (odd)")
    pipe.add_argument("--threshold", type=float, help="concavity threshold on the normalized map")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--features", type=feature_subset_arg,
                       help=f"feature subset, one of {', '.join(MODEL_SUBSETS)}")
    model.add_argument("--model", choices=MODEL_KINDS)
    model.add_argument("--n-estimators", type=int)
    model.add_argument("--max-depth", type=int)
    model.add_argument("--learning-rate", type=float)

    parser = argparse.ArgumentParser(prog="pavetex", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"pavetex {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("features", parents=[common, pipe], help="extract P, D, K from depth maps")
    p.add_argument("inputs", nargs="+", help="depth map files or directories")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("train", parents=[common, model], help="fit a model on a dataset CSV")
    p.add_argument("dataset")
    p.add_argument("--holdout", type=float, help="stratified holdout fraction")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("cv", parents=[common, model], help="stratified k-fold cross-validation")
    p.add_argument("dataset")
    p.add_argument("--k", type=int, help="number of folds")
    p.add_argument("--holdout", type=float,
                   help="hold out this stratified fraction first and cross-validate the rest")
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("predict", parents=[common, pipe], help="predict MTD from features or maps")
    p.add_argument("model_path", metavar="model.json")
    p.add_argument("inputs", nargs="+", help="feature CSVs, depth maps or map directories")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("synth", parents=[common, pipe], help="generate a synthetic corpus")
    p.add_argument("--spec", help="JSON synth spec (default: built-in four-stratum family)")
    p.add_argument("--n", type=int, help="number of samples")
    p.add_argument("--format", choices=("pfm", "csv"), default="pfm")
    p.add_argument("--dataset", action="store_true",
                   help="also run the feature pipeline and write dataset.csv")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("filter-eval", parents=[common], help="compare denoising filters by MSE")
    p.add_argument("map")
    p.add_argument("--reference", help="clean map to score against as well")
    p.add_argument("--methods", help=f"comma list from {','.join(METHODS)}")
    p.add_argument("--window", type=int)
    p.set_defaults(func=cmd_filter_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except StageError as exc:
        where = f" ({exc.item})" if exc.item is not None else ""
        print(f"pavetex {args.command}: error in stage '{exc.stage}'{where}: "
              f"{type(exc.cause).__name__}: {exc.cause}", file=sys.stderr)
    except PavetexError as exc:
        print(f"pavetex {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"pavetex {args.command}: error in stage 'config': {type(exc).__name__}: {exc}",
              file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
