"""Command-line pipeline driver.

Subcommands: synth, denoise, train-dict, features, classify-src,
classify-svm, evaluate, pipeline. Every run is reproducible: the same flags
and seed produce byte-identical output files, and --threads only changes how
work is spread over cores, never the result. Exit codes: 0 success, 2
usage/parameter error, 1 runtime failure. Diagnostics go to stderr; reports
go to stdout or the requested files.

A flat JSON config file (--config) supplies fallback values keyed by flag
name (dashes as underscores); explicit flags always win.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .classify import HierarchyConfig, hierarchical_classify
from .denoise import DenoiseConfig, denoise_image
from .dictionary import KsvdConfig, init_overcomplete_dct, save_dictionary, train_ksvd
from .errors import ParameterError
from .features import feature_raster, plan_patch_sizes, save_feature_raster
from .image import NoiseSpec, add_noise, extract_patch_matrix
from .metrics import confusion, kappa, overall_accuracy, report
from .parallel import resolve_threads
from .pgm import load_image, load_label_map, render_label_map, save_image, save_label_map
from .svm import predict_batch, save_svm, train_ovo
from .synth import make_training_mask, synth_mosaic

DEFAULTS = {
    "size": 128,
    "classes": 4,
    "seed": 1,
    "sigma": 10.0,
    "patch_side": 8,
    "atoms": 256,
    "sparsity": 3,
    "iterations": 10,
    "mu": None,
    "gain": 1.15,
    "lambda_mode": "constraint",
    "budget": 60000,
    "resolution": 3,
    "s_large": None,
    "layers": 3,
    "samples_per_class": 64,
    "delta1": 0.35,
    "delta2": 0.05,
    "src_sparsity": 5,
    "bins": 16,
    "levels": 16,
    "svm_c": 1.0,
    "train_per_class": 200,
}


@dataclass(frozen=True)
class PipelineConfig:
    """Flat bag of every pipeline knob; round-trips losslessly through the
    JSON config format."""

    outdir: str
    size: int = DEFAULTS["size"]
    classes: int = DEFAULTS["classes"]
    seed: int = DEFAULTS["seed"]
    sigma: float = DEFAULTS["sigma"]
    patch_side: int = DEFAULTS["patch_side"]
    atoms: int = DEFAULTS["atoms"]
    sparsity: int = DEFAULTS["sparsity"]
    iterations: int = DEFAULTS["iterations"]
    mu: float | None = None
    gain: float = DEFAULTS["gain"]
    lambda_mode: str = DEFAULTS["lambda_mode"]
    budget: int = DEFAULTS["budget"]
    resolution: int = DEFAULTS["resolution"]
    s_large: int | None = None
    layers: int = DEFAULTS["layers"]
    samples_per_class: int = DEFAULTS["samples_per_class"]
    delta1: float = DEFAULTS["delta1"]
    delta2: float = DEFAULTS["delta2"]
    src_sparsity: int = DEFAULTS["src_sparsity"]
    bins: int = DEFAULTS["bins"]
    levels: int = DEFAULTS["levels"]
    svm_c: float = DEFAULTS["svm_c"]
    train_per_class: int = DEFAULTS["train_per_class"]
    input: str | None = None
    truth: str | None = None
    train_mask: str | None = None
    reference: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, values: dict) -> "PipelineConfig":
        return cls(**values)


class Settings:
    """Merged view of parsed flags over config-file fallbacks over
    defaults."""

    def __init__(self, namespace: argparse.Namespace, config: dict):
        self.namespace = namespace
        self.config = config

    def get(self, key: str, default=None):
        value = getattr(self.namespace, key, None)
        if value is None:
            value = self.config.get(key)
        if value is None:
            value = default if default is not None else DEFAULTS.get(key)
        return value

    def require(self, key: str, flag: str):
        value = self.get(key)
        if value is None:
            raise ParameterError(f"{flag} is required")
        return value

    def threads(self) -> int:
        return resolve_threads(self.get("threads"))


def _positive(value, flag: str):
    if value is None or value <= 0:
        raise ParameterError(f"{flag} must be > 0, got {value}")
    return value


def _emit_report(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text + "\n")
    else:
        print(text)


def _score_entries(pred: np.ndarray, truth: np.ndarray, classes: int) -> dict:
    matrix = confusion(pred, truth, classes)
    return {
        "overall_accuracy_pct": overall_accuracy(matrix),
        "kappa": kappa(matrix),
        "confusion": matrix,
        "matched": int(np.trace(matrix)),
        "total": int(matrix.sum()),
    }


def run_synth(
    size: int,
    classes: int,
    seed: int,
    out: str,
    truth_out: str | None = None,
    train_mask_out: str | None = None,
    train_per_class: int = DEFAULTS["train_per_class"],
    noise_sigma: float | None = None,
    noisy_out: str | None = None,
    noise_seed: int | None = None,
) -> None:
    image, truth = synth_mosaic(size, classes, seed)
    save_image(out, image)
    if truth_out:
        save_label_map(truth_out, truth)
    if train_mask_out:
        mask = make_training_mask(truth, train_per_class, seed)
        save_label_map(train_mask_out, mask)
    if noisy_out:
        if noise_sigma is None:
            raise ParameterError("--noise-sigma is required when --noisy is given")
        spec = NoiseSpec(noise_sigma, seed if noise_seed is None else noise_seed)
        save_image(noisy_out, add_noise(image, spec))


def run_denoise(
    input_path: str,
    out: str,
    sigma: float,
    patch_side: int,
    atoms: int,
    sparsity: int,
    iterations: int,
    mu: float | None,
    gain: float,
    lambda_mode: str,
    budget: int,
    seed: int,
    threads: int,
    dict_out: str | None = None,
    reference_path: str | None = None,
) -> dict:
    noisy = load_image(input_path)
    reference = load_image(reference_path) if reference_path else None
    config = DenoiseConfig(
        sigma=sigma,
        patch_side=patch_side,
        atom_count=atoms,
        max_sparsity=sparsity,
        ksvd_iterations=iterations,
        mu=mu,
        lambda_mode=lambda_mode,
        error_gain=gain,
        seed=seed,
        train_patch_budget=budget,
    )
    result = denoise_image(noisy, config, reference=reference, threads=threads)
    save_image(out, result.denoised)
    if dict_out:
        save_dictionary(dict_out, result.dictionary)
    entries = {"objective_trace": result.objective_trace}
    if result.psnr_noisy is not None:
        entries["psnr_noisy_db"] = result.psnr_noisy
        entries["psnr_denoised_db"] = result.psnr_denoised
    return entries


def run_train_dict(
    input_path: str,
    out: str,
    sigma: float,
    patch_side: int,
    atoms: int,
    sparsity: int,
    iterations: int,
    gain: float,
    budget: int,
    seed: int,
    threads: int,
) -> None:
    image = load_image(input_path)
    _, signals = extract_patch_matrix(image, patch_side, stride=1)
    if signals.shape[1] > budget:
        rng = np.random.Generator(np.random.PCG64(seed))
        idx = np.sort(rng.choice(signals.shape[1], size=budget, replace=False))
        signals = signals[:, idx]
    config = KsvdConfig(
        iterations=iterations,
        max_sparsity=sparsity,
        error_bound=patch_side * patch_side * sigma * sigma * gain,
        seed=seed,
    )
    dictionary, _, _ = train_ksvd(signals, config, init_overcomplete_dct(patch_side, atoms), threads)
    save_dictionary(out, dictionary)


def run_features(
    input_path: str,
    out: str,
    size: int,
    bins: int,
    levels: int,
    threads: int,
) -> None:
    image = load_image(input_path)
    raster = feature_raster(image, size, bins=bins, levels=levels, threads=threads)
    save_feature_raster(out, raster)


def run_classify_src(
    input_path: str,
    labels_path: str,
    classes: int,
    out: str,
    resolution: int,
    s_large: int | None,
    layers: int,
    samples_per_class: int,
    delta1: float,
    delta2: float,
    sparsity: int,
    bins: int,
    levels: int,
    seed: int,
    threads: int,
    render_out: str | None = None,
    truth_path: str | None = None,
) -> dict:
    image = load_image(input_path)
    mask = load_label_map(labels_path)
    plan = plan_patch_sizes(resolution, s_large)
    config = HierarchyConfig(
        layers=layers,
        samples_per_class=samples_per_class,
        delta1=delta1,
        delta2=delta2,
        max_sparsity=sparsity,
        seed=seed,
        bins=bins,
        levels=levels,
    )
    result = hierarchical_classify(
        image, mask, config, plan, class_count=classes, threads=threads
    )
    save_label_map(out, result.labels)
    if render_out:
        render_label_map(render_out, result.labels, classes)
    entries = {
        "uncertain_per_layer": [int(m.sum()) for m in result.uncertain_masks],
    }
    if truth_path:
        truth = load_label_map(truth_path)
        entries.update(_score_entries(result.labels, truth, classes))
    return entries


def run_classify_svm(
    input_path: str,
    labels_path: str,
    classes: int,
    out: str,
    window: int | None,
    resolution: int,
    s_large: int | None,
    bins: int,
    levels: int,
    c: float,
    seed: int,
    threads: int,
    model_out: str | None = None,
    render_out: str | None = None,
    truth_path: str | None = None,
) -> dict:
    image = load_image(input_path)
    mask = load_label_map(labels_path)
    if window is None:
        window = plan_patch_sizes(resolution, s_large).s_large
    raster = feature_raster(image, window, bins=bins, levels=levels, threads=threads)
    flat = raster.reshape(-1, raster.shape[2])
    labeled = np.flatnonzero(mask.ravel() >= 0)
    if labeled.size == 0:
        raise ParameterError("training mask has no labeled pixels")
    ensemble = train_ovo(flat[labeled], mask.ravel()[labeled], classes, c, seed=seed)
    predictions = predict_batch(ensemble, flat).reshape(image.shape)
    save_label_map(out, predictions)
    if model_out:
        save_svm(model_out, ensemble)
    if render_out:
        render_label_map(render_out, predictions, classes)
    entries: dict = {"window": window}
    if truth_path:
        truth = load_label_map(truth_path)
        entries.update(_score_entries(predictions, truth, classes))
    return entries


def run_evaluate(pred_path: str, truth_path: str, classes: int) -> dict:
    pred = load_label_map(pred_path)
    truth = load_label_map(truth_path)
    return _score_entries(pred, truth, classes)


def run_pipeline(config: PipelineConfig, threads: int) -> dict:
    """Denoise, extract features, classify both ways, and evaluate; each
    stage reads and writes the same files the standalone subcommands
    would."""
    outdir = Path(config.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    if config.input is None:
        clean_path = str(outdir / "clean.pgm")
        truth_path = str(outdir / "truth.pgm")
        mask_path = str(outdir / "train_mask.pgm")
        noisy_path = str(outdir / "noisy.pgm")
        run_synth(
            config.size,
            config.classes,
            config.seed,
            clean_path,
            truth_out=truth_path,
            train_mask_out=mask_path,
            train_per_class=config.train_per_class,
            noise_sigma=config.sigma,
            noisy_out=noisy_path,
        )
        reference_path: str | None = clean_path
    else:
        noisy_path = config.input
        truth_path = config.truth
        mask_path = config.train_mask
        reference_path = config.reference
        if mask_path is None:
            raise ParameterError("--train-mask is required when --input is given")

    denoised_path = str(outdir / "denoised.pgm")
    entries = run_denoise(
        noisy_path,
        denoised_path,
        sigma=config.sigma,
        patch_side=config.patch_side,
        atoms=config.atoms,
        sparsity=config.sparsity,
        iterations=config.iterations,
        mu=config.mu,
        gain=config.gain,
        lambda_mode=config.lambda_mode,
        budget=config.budget,
        seed=config.seed,
        threads=threads,
        dict_out=str(outdir / "dictionary.ssd"),
        reference_path=reference_path,
    )

    plan = plan_patch_sizes(config.resolution, config.s_large)
    run_features(
        denoised_path,
        str(outdir / "features.bin"),
        size=plan.s_large,
        bins=config.bins,
        levels=config.levels,
        threads=threads,
    )

    src_entries = run_classify_src(
        denoised_path,
        mask_path,
        config.classes,
        str(outdir / "src_map.pgm"),
        resolution=config.resolution,
        s_large=config.s_large,
        layers=config.layers,
        samples_per_class=config.samples_per_class,
        delta1=config.delta1,
        delta2=config.delta2,
        sparsity=config.src_sparsity,
        bins=config.bins,
        levels=config.levels,
        seed=config.seed,
        threads=threads,
        render_out=str(outdir / "src_render.png"),
        truth_path=truth_path,
    )
    entries.update(src_entries)

    svm_entries = run_classify_svm(
        denoised_path,
        mask_path,
        config.classes,
        str(outdir / "svm_map.pgm"),
        window=None,
        resolution=config.resolution,
        s_large=config.s_large,
        bins=config.bins,
        levels=config.levels,
        c=config.svm_c,
        seed=config.seed,
        threads=threads,
        model_out=str(outdir / "svm_model.ssv"),
        render_out=str(outdir / "svm_render.png"),
        truth_path=truth_path,
    )
    for key, value in svm_entries.items():
        if key == "window":
            continue
        entries["svm_" + key.removeprefix("overall_")] = value

    _emit_report(report(entries), str(outdir / "report.json"))
    return entries


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat JSON config file; flags override it")
    common.add_argument("--threads", type=int, help="worker threads (default: all cores)")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="sparsescene",
        description="Patch-based denoising and land-cover classification pipeline.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic texture mosaic")
    p.add_argument("--size", type=int)
    p.add_argument("--classes", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="clean mosaic image (PGM/PNG)")
    p.add_argument("--truth", help="ground-truth label map output")
    p.add_argument("--train-mask", help="partial training-label map output")
    p.add_argument("--train-per-class", type=int)
    p.add_argument("--noisy", help="noisy copy of the mosaic")
    p.add_argument("--noise-sigma", type=float)
    p.add_argument("--noise-seed", type=int)

    p = sub.add_parser("denoise", parents=[common], help="denoise a grayscale image")
    p.add_argument("--input")
    p.add_argument("--out")
    p.add_argument("--sigma", type=float)
    p.add_argument("--patch-side", type=int)
    p.add_argument("--atoms", type=int)
    p.add_argument("--sparsity", type=int)
    p.add_argument("--iterations", type=int)
    p.add_argument("--mu", type=float)
    p.add_argument("--gain", type=float)
    p.add_argument("--lambda-mode", choices=["constraint", "fixed-sparsity"])
    p.add_argument("--budget", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--dict-out", help="save the adapted dictionary")
    p.add_argument("--reference", help="clean reference for PSNR reporting")
    p.add_argument("--report", help="JSON report path (stdout if omitted)")

    p = sub.add_parser("train-dict", parents=[common], help="train a K-SVD dictionary from an image")
    p.add_argument("--input")
    p.add_argument("--out")
    p.add_argument("--sigma", type=float)
    p.add_argument("--patch-side", type=int)
    p.add_argument("--atoms", type=int)
    p.add_argument("--sparsity", type=int)
    p.add_argument("--iterations", type=int)
    p.add_argument("--gain", type=float)
    p.add_argument("--budget", type=int)
    p.add_argument("--seed", type=int)

    p = sub.add_parser("features", parents=[common], help="export the per-pixel feature raster")
    p.add_argument("--input")
    p.add_argument("--out")
    p.add_argument("--window", type=int, help="odd window size")
    p.add_argument("--bins", type=int)
    p.add_argument("--levels", type=int)

    p = sub.add_parser("classify-src", parents=[common], help="hierarchical sparse-representation classification")
    p.add_argument("--input")
    p.add_argument("--labels", help="training-label map (255 = unlabeled)")
    p.add_argument("--classes", type=int)
    p.add_argument("--out")
    p.add_argument("--resolution", type=int)
    p.add_argument("--s-large", type=int)
    p.add_argument("--layers", type=int)
    p.add_argument("--samples-per-class", type=int)
    p.add_argument("--delta1", type=float)
    p.add_argument("--delta2", type=float)
    p.add_argument("--sparsity", type=int, dest="src_sparsity")
    p.add_argument("--bins", type=int)
    p.add_argument("--levels", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--render", help="color PNG rendering of the label map")
    p.add_argument("--truth", help="ground truth for accuracy/kappa in the report")
    p.add_argument("--report")

    p = sub.add_parser("classify-svm", parents=[common], help="linear one-vs-one SVM baseline")
    p.add_argument("--input")
    p.add_argument("--labels")
    p.add_argument("--classes", type=int)
    p.add_argument("--out")
    p.add_argument("--window", type=int)
    p.add_argument("--resolution", type=int)
    p.add_argument("--s-large", type=int)
    p.add_argument("--bins", type=int)
    p.add_argument("--levels", type=int)
    p.add_argument("--c", type=float, dest="svm_c")
    p.add_argument("--seed", type=int)
    p.add_argument("--model-out")
    p.add_argument("--render")
    p.add_argument("--truth")
    p.add_argument("--report")

    p = sub.add_parser("evaluate", parents=[common], help="score a predicted map against ground truth")
    p.add_argument("--pred")
    p.add_argument("--truth")
    p.add_argument("--classes", type=int)
    p.add_argument("--report")

    p = sub.add_parser("pipeline", parents=[common], help="run every stage end to end")
    p.add_argument("--outdir")
    p.add_argument("--input", help="existing (noisy) image; omit to synthesize")
    p.add_argument("--truth")
    p.add_argument("--train-mask")
    p.add_argument("--reference")
    p.add_argument("--size", type=int)
    p.add_argument("--classes", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--sigma", type=float)
    p.add_argument("--patch-side", type=int)
    p.add_argument("--atoms", type=int)
    p.add_argument("--sparsity", type=int)
    p.add_argument("--iterations", type=int)
    p.add_argument("--mu", type=float)
    p.add_argument("--gain", type=float)
    p.add_argument("--lambda-mode", choices=["constraint", "fixed-sparsity"])
    p.add_argument("--budget", type=int)
    p.add_argument("--resolution", type=int)
    p.add_argument("--s-large", type=int)
    p.add_argument("--layers", type=int)
    p.add_argument("--samples-per-class", type=int)
    p.add_argument("--delta1", type=float)
    p.add_argument("--delta2", type=float)
    p.add_argument("--src-sparsity", type=int)
    p.add_argument("--bins", type=int)
    p.add_argument("--levels", type=int)
    p.add_argument("--c", type=float, dest="svm_c")
    p.add_argument("--train-per-class", type=int)

    return parser


def _load_config(path: str) -> dict:
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ParameterError(f"--config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ParameterError(f"--config is not valid JSON: {exc}")
    if not isinstance(raw, dict):
        raise ParameterError("--config must hold a JSON object")
    return {str(k).replace("-", "_"): v for k, v in raw.items()}


def cmd_synth(s: Settings) -> None:
    run_synth(
        size=_positive(s.require("size", "--size"), "--size"),
        classes=s.require("classes", "--classes"),
        seed=s.get("seed"),
        out=s.require("out", "--out"),
        truth_out=s.get("truth"),
        train_mask_out=s.get("train_mask"),
        train_per_class=_positive(s.get("train_per_class"), "--train-per-class"),
        noise_sigma=s.get("noise_sigma"),
        noisy_out=s.get("noisy"),
        noise_seed=s.get("noise_seed"),
    )


def cmd_denoise(s: Settings) -> None:
    sigma = s.require("sigma", "--sigma")
    if sigma <= 0:
        raise ParameterError(f"--sigma must be > 0, got {sigma}")
    entries = run_denoise(
        input_path=s.require("input", "--input"),
        out=s.require("out", "--out"),
        sigma=sigma,
        patch_side=_positive(s.get("patch_side"), "--patch-side"),
        atoms=_positive(s.get("atoms"), "--atoms"),
        sparsity=_positive(s.get("sparsity"), "--sparsity"),
        iterations=_positive(s.get("iterations"), "--iterations"),
        mu=s.get("mu"),
        gain=_positive(s.get("gain"), "--gain"),
        lambda_mode=s.get("lambda_mode"),
        budget=_positive(s.get("budget"), "--budget"),
        seed=s.get("seed"),
        threads=s.threads(),
        dict_out=s.get("dict_out"),
        reference_path=s.get("reference"),
    )
    _emit_report(report(entries), s.get("report"))


def cmd_train_dict(s: Settings) -> None:
    sigma = s.require("sigma", "--sigma")
    if sigma <= 0:
        raise ParameterError(f"--sigma must be > 0, got {sigma}")
    run_train_dict(
        input_path=s.require("input", "--input"),
        out=s.require("out", "--out"),
        sigma=sigma,
        patch_side=_positive(s.get("patch_side"), "--patch-side"),
        atoms=_positive(s.get("atoms"), "--atoms"),
        sparsity=_positive(s.get("sparsity"), "--sparsity"),
        iterations=_positive(s.get("iterations"), "--iterations"),
        gain=_positive(s.get("gain"), "--gain"),
        budget=_positive(s.get("budget"), "--budget"),
        seed=s.get("seed"),
        threads=s.threads(),
    )


def cmd_features(s: Settings) -> None:
    run_features(
        input_path=s.require("input", "--input"),
        out=s.require("out", "--out"),
        size=_positive(s.require("window", "--window"), "--window"),
        bins=_positive(s.get("bins"), "--bins"),
        levels=_positive(s.get("levels"), "--levels"),
        threads=s.threads(),
    )


def cmd_classify_src(s: Settings) -> None:
    entries = run_classify_src(
        input_path=s.require("input", "--input"),
        labels_path=s.require("labels", "--labels"),
        classes=_positive(s.require("classes", "--classes"), "--classes"),
        out=s.require("out", "--out"),
        resolution=_positive(s.get("resolution"), "--resolution"),
        s_large=s.get("s_large"),
        layers=_positive(s.get("layers"), "--layers"),
        samples_per_class=_positive(s.get("samples_per_class"), "--samples-per-class"),
        delta1=s.get("delta1"),
        delta2=s.get("delta2"),
        sparsity=_positive(s.get("src_sparsity"), "--sparsity"),
        bins=_positive(s.get("bins"), "--bins"),
        levels=_positive(s.get("levels"), "--levels"),
        seed=s.get("seed"),
        threads=s.threads(),
        render_out=s.get("render"),
        truth_path=s.get("truth"),
    )
    _emit_report(report(entries), s.get("report"))


def cmd_classify_svm(s: Settings) -> None:
    entries = run_classify_svm(
        input_path=s.require("input", "--input"),
        labels_path=s.require("labels", "--labels"),
        classes=_positive(s.require("classes", "--classes"), "--classes"),
        out=s.require("out", "--out"),
        window=s.get("window"),
        resolution=_positive(s.get("resolution"), "--resolution"),
        s_large=s.get("s_large"),
        bins=_positive(s.get("bins"), "--bins"),
        levels=_positive(s.get("levels"), "--levels"),
        c=_positive(s.get("svm_c"), "--c"),
        seed=s.get("seed"),
        threads=s.threads(),
        model_out=s.get("model_out"),
        render_out=s.get("render"),
        truth_path=s.get("truth"),
    )
    _emit_report(report(entries), s.get("report"))


def cmd_evaluate(s: Settings) -> None:
    entries = run_evaluate(
        pred_path=s.require("pred", "--pred"),
        truth_path=s.require("truth", "--truth"),
        classes=_positive(s.require("classes", "--classes"), "--classes"),
    )
    _emit_report(report(entries), s.get("report"))


def cmd_pipeline(s: Settings) -> None:
    sigma = s.get("sigma")
    if sigma is not None and sigma <= 0:
        raise ParameterError(f"--sigma must be > 0, got {sigma}")
    config = PipelineConfig(
        outdir=s.require("outdir", "--outdir"),
        size=_positive(s.get("size"), "--size"),
        classes=s.get("classes"),
        seed=s.get("seed"),
        sigma=sigma,
        patch_side=_positive(s.get("patch_side"), "--patch-side"),
        atoms=_positive(s.get("atoms"), "--atoms"),
        sparsity=_positive(s.get("sparsity"), "--sparsity"),
        iterations=_positive(s.get("iterations"), "--iterations"),
        mu=s.get("mu"),
        gain=_positive(s.get("gain"), "--gain"),
        lambda_mode=s.get("lambda_mode"),
        budget=_positive(s.get("budget"), "--budget"),
        resolution=_positive(s.get("resolution"), "--resolution"),
        s_large=s.get("s_large"),
        layers=_positive(s.get("layers"), "--layers"),
        samples_per_class=_positive(s.get("samples_per_class"), "--samples-per-class"),
        delta1=s.get("delta1"),
        delta2=s.get("delta2"),
        src_sparsity=_positive(s.get("src_sparsity"), "--src-sparsity"),
        bins=_positive(s.get("bins"), "--bins"),
        levels=_positive(s.get("levels"), "--levels"),
        svm_c=_positive(s.get("svm_c"), "--c"),
        train_per_class=_positive(s.get("train_per_class"), "--train-per-class"),
        input=s.get("input"),
        truth=s.get("truth"),
        train_mask=s.get("train_mask"),
        reference=s.get("reference"),
    )
    run_pipeline(config, s.threads())


HANDLERS = {
    "synth": cmd_synth,
    "denoise": cmd_denoise,
    "train-dict": cmd_train_dict,
    "features": cmd_features,
    "classify-src": cmd_classify_src,
    "classify-svm": cmd_classify_svm,
    "evaluate": cmd_evaluate,
    "pipeline": cmd_pipeline,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        namespace = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    config = {}
    config_path = getattr(namespace, "config", None)
    try:
        if config_path:
            config = _load_config(config_path)
        HANDLERS[namespace.command](Settings(namespace, config))
        return 0
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
