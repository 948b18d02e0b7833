"""Command-line interface.

Subcommands front the library's main procedures::

    lsteeg synth          --config cfg.json --seed N --out data.lsd
    lsteeg train          --config cfg.json --data data.lsd --seed N --out dir/
    lsteeg detect         --ckpt model.lstg --data data.lsd --out dir/
    lsteeg correct        --ckpt model.lstg --data data.lsd --out dir/
    lsteeg analyze-latent --ckpt model.lstg --data data.lsd --out dir/
    lsteeg sweep          --config cfg.json --data data.lsd --seed N --out dir/
    lsteeg eval-psd       --ckpt model.lstg --data data.lsd --out dir/

The JSON config has optional sections ``synth``, ``model``, ``train``,
``split``, ``sweep``, ``analysis`` plus a top-level ``seed``; unknown keys
are rejected. Command-line flags override the config. Every run writes its
fully resolved configuration next to its outputs, and all float output is
printed with 17 significant digits so reruns are byte-identical.

On failure the process exits non-zero after printing a single JSON line
``{"error": <class>, "message": ...}`` to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import checkpoint
from . import dataset as dsio
from .dataset import CLEAN, NOISY, EpochDataset
from .errors import ConfigError, LsteegError
from .latent import (cumulative_activation, interpolate, mads,
                     spectral_activation, temporal_activation, topomap_svg)
from .metrics import roc_auc, select_threshold
from .model import LsteegConfig, build
from .signal import CHANNELS_1020, DEFAULT_BANDS, psd_attenuation, rmse
from .synth import SyntheticSpec, generate_dataset
from .training import (TrainConfig, correct_epochs, detect_scores,
                       evaluate_correction, normalize_epochs, sweep, train)

TOP_LEVEL_KEYS = {"seed", "synth", "model", "train", "split", "sweep", "analysis"}
SPLIT_KEYS = {"fractions"}
SWEEP_KEYS = {"axis", "values"}
ANALYSIS_KEYS = {"k_mads", "interpolation_steps"}


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


# ---------------------------------------------------------------------------
# Config handling
# ---------------------------------------------------------------------------

def _check_keys(section: str, given: dict, allowed: set) -> None:
    unknown = set(given) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {section}: {sorted(unknown)}")


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    _check_keys("config", raw, TOP_LEVEL_KEYS)
    for section, allowed in (
            ("synth", {f.name for f in fields(SyntheticSpec)}),
            ("model", {f.name for f in fields(LsteegConfig)}),
            ("train", {f.name for f in fields(TrainConfig)}),
            ("split", SPLIT_KEYS),
            ("sweep", SWEEP_KEYS),
            ("analysis", ANALYSIS_KEYS)):
        if section in raw:
            if not isinstance(raw[section], dict):
                raise ConfigError(f"config section {section!r} must be an object")
            _check_keys(section, raw[section], allowed)
    return raw


def _synth_spec(cfg: dict) -> SyntheticSpec:
    section = dict(cfg.get("synth", {}))
    if "band_amplitudes" in section:
        section["band_amplitudes"] = {
            k: tuple(v) for k, v in section["band_amplitudes"].items()}
    return SyntheticSpec(**section)


def _model_config(cfg: dict, ds: EpochDataset, seed: int) -> LsteegConfig:
    section = dict(cfg.get("model", {}))
    section.setdefault("n_latent", 64)
    section.setdefault("n_channels", ds.n_channels)
    section.setdefault("n_samples", ds.n_samples)
    section.setdefault("rng_seed", seed)
    mc = LsteegConfig(**section)
    if mc.n_channels != ds.n_channels or mc.n_samples != ds.n_samples:
        raise ConfigError(
            f"model shape ({mc.n_channels}, {mc.n_samples}) does not match "
            f"dataset ({ds.n_channels}, {ds.n_samples})")
    return mc


def _train_config(cfg: dict, seed: int) -> TrainConfig:
    section = dict(cfg.get("train", {}))
    section["seed"] = seed
    return TrainConfig(**section)


def _resolved(command: str, seed: int | None, **parts) -> dict:
    out = {"command": command}
    if seed is not None:
        out["seed"] = seed
    for name, obj in parts.items():
        if obj is None:
            continue
        out[name] = obj.to_dict() if hasattr(obj, "to_dict") else obj
    return out


def _outdir(path: str) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _load_matching(ckpt_path: str, data_path: str):
    model = checkpoint.load(ckpt_path)
    ds = dsio.load(data_path)
    if (model.config.n_channels, model.config.n_samples) != \
            (ds.n_channels, ds.n_samples):
        raise ConfigError(
            f"checkpoint expects ({model.config.n_channels}, "
            f"{model.config.n_samples}) epochs, dataset has "
            f"({ds.n_channels}, {ds.n_samples})")
    return model, ds


def _partition(ds: EpochDataset, name: str) -> EpochDataset:
    part = ds.partition(name)
    if len(part) == 0:
        raise ConfigError(f"dataset has no {name!r} partition")
    return part


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_synth(args) -> None:
    cfg = load_config(args.config)
    spec = _synth_spec(cfg)
    fractions = tuple(cfg.get("split", {}).get("fractions", (0.6, 0.2, 0.2)))
    ds = generate_dataset(spec, args.seed, fractions=fractions)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    dsio.save(ds, out)
    _write_json(out.with_name(out.name + ".config.json"),
                _resolved("synth", args.seed, synth=spec,
                          split={"fractions": list(fractions)}))
    print(f"wrote {out} ({len(ds)} epochs, "
          f"{sum(1 for l in ds.labels if l == NOISY)} noisy)")


def cmd_train(args) -> None:
    cfg = load_config(args.config)
    ds = dsio.load(args.data)
    model_cfg = _model_config(cfg, ds, args.seed)
    train_cfg = _train_config(cfg, args.seed)
    model = build(model_cfg)
    report = train(model, ds, train_cfg)
    out = _outdir(args.out)
    checkpoint.save(model, out / "checkpoint.lstg")
    _write_csv(out / "loss_history.csv", ["epoch", "train_loss", "val_loss"],
               [(k, tr, vl) for k, (tr, vl) in
                enumerate(zip(report.train_loss, report.val_loss))])
    _write_json(out / "summary.json", report.summary_dict())
    _write_json(out / "resolved_config.json",
                _resolved("train", args.seed, model=model_cfg, train=train_cfg))
    print(f"trained {len(report.train_loss)} epochs, "
          f"best val {min(report.val_loss):.17g} at epoch {report.best_epoch}; "
          f"wrote {out / 'checkpoint.lstg'}")


def cmd_detect(args) -> None:
    model, ds = _load_matching(args.ckpt, args.data)
    part = _partition(ds, args.partition)
    scores = detect_scores(model, part.inputs, normalize=args.normalize)
    labels = [l == NOISY for l in part.labels]
    roc = roc_auc(scores, labels)
    sel = select_threshold(roc)
    out = _outdir(args.out)
    _write_csv(out / "scores.csv", ["index", "subject", "label", "score"],
               [(k, part.subject_ids[k], part.labels[k], scores[k])
                for k in range(len(part))])
    _write_csv(out / "roc.csv", ["threshold", "fpr", "tpr"],
               [(roc.thresholds[k], roc.fpr[k + 1], roc.tpr[k + 1])
                for k in range(len(roc.thresholds))])
    _write_json(out / "summary.json", {
        "auc": roc.auc, "threshold": sel.threshold, "tpr": sel.tpr,
        "fpr": sel.fpr, "degenerate_threshold": sel.degenerate,
        "n_epochs": len(part), "partition": args.partition,
        "normalize": args.normalize,
    })
    _write_json(out / "resolved_config.json",
                _resolved("detect", None, ckpt=str(args.ckpt),
                          data=str(args.data), partition=args.partition,
                          normalize=args.normalize))
    print(f"auc={roc.auc:.17g} threshold={sel.threshold:.17g} "
          f"on {len(part)} epochs")


def cmd_correct(args) -> None:
    model, ds = _load_matching(args.ckpt, args.data)
    part = _partition(ds, args.partition)
    corrected = correct_epochs(model, part.inputs, normalize=args.normalize)
    mean, sd, per = evaluate_correction(model, part.inputs, part.targets,
                                        normalize=args.normalize)
    baseline = [rmse(part.inputs[k], part.targets[k]) for k in range(len(part))]
    out = _outdir(args.out)
    dsio.save(EpochDataset(
        inputs=corrected, targets=part.targets, labels=list(part.labels),
        subject_ids=list(part.subject_ids), partitions=list(part.partitions),
        sample_rate=part.sample_rate, spec=part.spec), out / "corrected.lsd")
    _write_csv(out / "rmse.csv", ["index", "rmse_uv", "identity_rmse_uv"],
               [(k, per[k], baseline[k]) for k in range(len(part))])
    _write_json(out / "summary.json", {
        "rmse_mean_uv": mean, "rmse_sd_uv": sd,
        "identity_rmse_mean_uv": float(np.mean(baseline)),
        "n_epochs": len(part), "partition": args.partition,
        "normalize": args.normalize,
    })
    _write_json(out / "resolved_config.json",
                _resolved("correct", None, ckpt=str(args.ckpt),
                          data=str(args.data), partition=args.partition,
                          normalize=args.normalize))
    print(f"rmse {mean:.17g} +- {sd:.17g} uV over {len(part)} epochs")


def cmd_analyze_latent(args) -> None:
    cfg = load_config(args.config)
    analysis = cfg.get("analysis", {})
    k_mads = int(analysis.get("k_mads", 4))
    steps = int(analysis.get("interpolation_steps", 10))
    model, ds = _load_matching(args.ckpt, args.data)
    part = _partition(ds, args.partition)
    epochs = part.inputs
    if args.normalize:
        epochs, _ = normalize_epochs(epochs)

    summary = cumulative_activation(model, epochs)
    k = min(k_mads, model.config.n_latent)
    top = mads(summary, k)
    S = spectral_activation(model, epochs, part.sample_rate)
    out = _outdir(args.out)
    _write_csv(out / "activation.csv", ["dimension", "cumulative_activation"],
               list(enumerate(summary.activation)))
    _write_csv(out / "mads.csv", ["rank", "dimension"],
               [(r, int(d)) for r, d in enumerate(top)])
    band_names = [b.name for b in DEFAULT_BANDS]
    _write_csv(out / "spectral_activation.csv",
               ["dimension", "band", "channel", "value"],
               [(j, band_names[b], CHANNELS_1020[c] if ds.n_channels == 19 else c,
                 S[j, b, c])
                for j in range(S.shape[0])
                for b in range(S.shape[1])
                for c in range(S.shape[2])])
    for d in top:
        alpha = temporal_activation(model, epochs, int(d))
        _write_csv(out / f"temporal_activation_dim{int(d)}.csv",
                   ["channel", "sample", "value"],
                   [(c, s, alpha[c, s]) for c in range(alpha.shape[0])
                    for s in range(alpha.shape[1])])
    if ds.n_channels == 19:
        for d in top:
            for b, name in enumerate(band_names):
                svg = topomap_svg(S[int(d), b], CHANNELS_1020,
                                  title=f"dim {int(d)} {name}")
                (out / f"topomap_dim{int(d)}_{name.lower()}.svg").write_text(
                    svg, encoding="utf-8")
    if len(part) >= 2:
        path = interpolate(model, epochs[0], epochs[1], steps)
        step_mse = [float(np.mean((path[i + 1] - path[i]) ** 2))
                    for i in range(len(path) - 1)]
        _write_csv(out / "interpolation.csv", ["step", "mse_to_next"],
                   list(enumerate(step_mse)))
    _write_json(out / "resolved_config.json",
                _resolved("analyze-latent", None, ckpt=str(args.ckpt),
                          data=str(args.data), partition=args.partition,
                          normalize=args.normalize,
                          analysis={"k_mads": k_mads,
                                    "interpolation_steps": steps}))
    print(f"analyzed {len(part)} epochs; top dimensions {[int(d) for d in top]}")


def cmd_sweep(args) -> None:
    cfg = load_config(args.config)
    section = cfg.get("sweep", {})
    axis = section.get("axis", "n_latent")
    values = section.get("values", [8, 32, 128])
    ds = dsio.load(args.data)
    model_cfg = _model_config(cfg, ds, args.seed)
    train_cfg = _train_config(cfg, args.seed)
    rows = sweep(axis, values, model_cfg, ds, train_cfg)
    out = _outdir(args.out)
    _write_csv(out / "sweep.csv", [axis, "test_mse"], rows)
    _write_json(out / "resolved_config.json",
                _resolved("sweep", args.seed, model=model_cfg, train=train_cfg,
                          sweep={"axis": axis, "values": [int(v) for v in values]}))
    print("\n".join(f"{axis}={v}: test_mse={_fmt(m)}" for v, m in rows))


def _band_mean(freqs, atten, lo, hi):
    sel = (freqs >= lo) & (freqs <= hi)
    return float(atten[sel].mean()) if sel.any() else None


def cmd_eval_psd(args) -> None:
    model, ds = _load_matching(args.ckpt, args.data)
    part = _partition(ds, args.partition)
    outputs = correct_epochs(model, part.inputs, normalize=args.normalize)
    freqs, atten = psd_attenuation(part.inputs, outputs, part.sample_rate)
    out = _outdir(args.out)
    _write_csv(out / "attenuation.csv", ["freq_hz", "attenuation_db"],
               list(zip(freqs, atten)))
    low = _band_mean(freqs, atten, 1.0, 8.0)
    high = _band_mean(freqs, atten, 30.0, 45.0)  # absent below 60 Hz rates
    _write_json(out / "summary.json", {
        "mean_attenuation_db_1_8hz": low,
        "mean_attenuation_db_30_45hz": high,
        "n_epochs": len(part), "partition": args.partition,
        "normalize": args.normalize,
    })
    _write_json(out / "resolved_config.json",
                _resolved("eval-psd", None, ckpt=str(args.ckpt),
                          data=str(args.data), partition=args.partition,
                          normalize=args.normalize))
    print(f"attenuation 1-8 Hz: {low} dB, 30-45 Hz: {high} dB")


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lsteeg",
        description="LSTM autoencoder for EEG artifact detection and correction")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, ckpt=False, data=False, seed=False, config=False):
        if config:
            p.add_argument("--config", help="JSON run configuration")
        if ckpt:
            p.add_argument("--ckpt", required=True, help="model checkpoint (.lstg)")
        if data:
            p.add_argument("--data", required=True, help="dataset file (.lsd)")
        if seed:
            p.add_argument("--seed", type=int, required=True,
                           help="run seed (mandatory for reproducibility)")
        p.add_argument("--out", required=True, help="output file or directory")

    p = sub.add_parser("synth", help="generate a synthetic labeled dataset")
    add_common(p, seed=True, config=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train a model on a dataset")
    add_common(p, data=True, seed=True, config=True)
    p.set_defaults(func=cmd_train)

    for name, func, help_text in (
            ("detect", cmd_detect, "score epochs and compute ROC/AUC"),
            ("correct", cmd_correct, "write corrected epochs and RMSE"),
            ("eval-psd", cmd_eval_psd, "PSD attenuation of reconstructions")):
        p = sub.add_parser(name, help=help_text)
        add_common(p, ckpt=True, data=True)
        p.add_argument("--partition", default="test",
                       choices=["train", "val", "test"])
        p.add_argument("--no-normalize", dest="normalize", action="store_false",
                       help="score raw microvolt epochs instead of z-scored")
        p.set_defaults(func=func)

    p = sub.add_parser("analyze-latent", help="latent-space activation exports")
    add_common(p, ckpt=True, data=True, config=True)
    p.add_argument("--partition", default="test", choices=["train", "val", "test"])
    p.add_argument("--no-normalize", dest="normalize", action="store_false")
    p.set_defaults(func=cmd_analyze_latent)

    p = sub.add_parser("sweep", help="train across a hyperparameter axis")
    add_common(p, data=True, seed=True, config=True)
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except LsteegError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
