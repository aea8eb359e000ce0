"""Command-line front end.

Subcommands: ``synth``, ``features``, ``eval-kfold``, ``eval-loso`` and
``sodp-plot``. Settings come from an optional ``key = value`` config file
(``#`` starts a comment) and may be overridden by ``--key value`` flags.
CSV data goes to stdout and to ``output_dir``; diagnostics go to stderr.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import logging
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .classifiers import DEFAULT_NEURONS, ClassifierSpec, Dataset
from .errors import (
    BadKError,
    BadWindowIndexError,
    ConfigError,
    RecordTooShortError,
    SodpChfError,
    UnknownSubjectError,
)
from .pipeline import cohort_feature_rows, iter_records, record_windows
from .plot import sodp_svg
from .preprocess import FilterConfig
from .record_io import load_manifest, load_record, read_features, write_features
from .sodp import (
    compute_sodp,
    count_regions,
    extract_features,
    parse_partition_mode,
    quadrants,
    bands,
    region_labels,
    resolve_partition,
)
from .synth import SynthSpec, generate_cohort
from .validation import run_kfold, run_loso

log = logging.getLogger("sodp_chf")

_PATH_KEYS = ("manifest_path", "output_dir", "features_path")


@dataclass(frozen=True)
class RunConfig:
    manifest_path: str = "manifest.csv"
    output_dir: str = "out"
    features_path: str = ""  # empty: compute features from the manifest
    window_s: float = 10.0
    windows_per_record: int = 150
    median1_ms: float = 200.0
    median2_ms: float = 600.0
    notch_hz: float = 60.0
    notch_q: float = 30.0
    partition_mode: str = "adaptive"
    classifier: str = "lda"
    mlp_neurons: str = "9"  # one of 3/5/7/9 or "all"
    mlp_lr: float = 0.1
    mlp_epochs: int = 2000
    k: int = 10
    seed: int = 1

    def __post_init__(self):
        if not self.window_s > 0:
            raise ConfigError("window_s must be positive")
        if self.windows_per_record < 1:
            raise ConfigError("windows_per_record must be positive")
        try:
            parse_partition_mode(self.partition_mode)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.classifier not in ("lda", "nb", "mlp"):
            raise ConfigError(f"classifier must be lda, nb or mlp, got {self.classifier!r}")
        self.neuron_sizes()
        try:
            self.filter_config()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def filter_config(self) -> FilterConfig:
        return FilterConfig(self.median1_ms, self.median2_ms, self.notch_hz, self.notch_q)

    def partition(self):
        return parse_partition_mode(self.partition_mode)

    def neuron_sizes(self) -> tuple[int, ...]:
        text = str(self.mlp_neurons).strip().lower()
        if text == "all":
            return DEFAULT_NEURONS
        try:
            n = int(text)
        except ValueError:
            raise ConfigError(f"mlp_neurons must be an integer or 'all', got {self.mlp_neurons!r}") from None
        if n < 1:
            raise ConfigError("mlp_neurons must be positive")
        return (n,)

    def classifier_spec(self, hidden: int | None = None) -> ClassifierSpec:
        return ClassifierSpec(
            self.classifier,
            hidden if hidden is not None else self.neuron_sizes()[0],
            self.mlp_lr,
            self.mlp_epochs,
            self.seed,
        )


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
_CASTS = {"float": float, "int": int, "str": str}


def _cast(key: str, value: str):
    caster = _CASTS[_FIELD_TYPES[key]]
    try:
        return caster(value.strip())
    except ValueError:
        raise ConfigError(f"bad value for {key}: {value!r}") from None


def parse_config_text(text: str, source="<config>") -> dict:
    values = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(f"{source}:{line_no}: expected 'key = value'")
        if key not in _FIELD_TYPES:
            raise ConfigError(f"{source}:{line_no}: unknown config key {key!r}")
        values[key] = _cast(key, value)
    return values


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    """Defaults, then the config file, then ``overrides``.

    Relative paths in the file resolve against the file's directory.
    """
    values = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        values = parse_config_text(path.read_text(), str(path))
        for key in _PATH_KEYS:
            if values.get(key) and not Path(values[key]).is_absolute():
                values[key] = str(path.parent / values[key])
    for key, value in (overrides or {}).items():
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key {key!r}")
        values[key] = _cast(key, str(value))
    return RunConfig(**values)


# Output helpers -------------------------------------------------------------


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(value, digits=6) -> str:
    return "" if value is None else f"{value:.{digits}f}"


def write_provenance(output: Path, command: str, cfg: RunConfig, inputs: list, extra=None) -> Path:
    """JSON sidecar with the config echo and input/output content hashes."""
    doc = {
        "tool": "sodp-chf",
        "version": __version__,
        "command": command,
        "config": dataclasses.asdict(cfg),
        "inputs": {str(p): _sha256(p) for p in inputs},
        "output": {str(output.name): _sha256(output)},
    }
    if extra:
        doc.update(extra)
    side = output.with_name(output.name + ".provenance.json")
    _write_text(side, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return side


def _manifest_inputs(cfg: RunConfig) -> list:
    manifest = load_manifest(cfg.manifest_path)
    return [Path(cfg.manifest_path)] + [e.path for e in manifest]


def compute_feature_rows(cfg: RunConfig):
    manifest = load_manifest(cfg.manifest_path)
    try:
        return cohort_feature_rows(
            iter_records(manifest),
            cfg.filter_config(),
            cfg.window_s,
            cfg.windows_per_record,
            cfg.partition(),
        )
    except RecordTooShortError as exc:
        raise SodpChfError(f"subject {exc.subject_id}: {exc}") from exc


def _load_dataset(cfg: RunConfig) -> tuple[Dataset, list]:
    if cfg.features_path:
        rows = read_features(cfg.features_path)
        inputs = [Path(cfg.features_path)]
    else:
        rows = compute_feature_rows(cfg)
        inputs = _manifest_inputs(cfg)
    return Dataset.from_rows(rows), inputs


# Commands -------------------------------------------------------------------


def cmd_features(cfg: RunConfig) -> Path:
    rows = compute_feature_rows(cfg)
    path = Path(cfg.output_dir) / "features.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    write_features(rows, path)
    write_provenance(path, "features", cfg, _manifest_inputs(cfg), {"rows": len(rows)})
    log.info("wrote %d feature rows to %s", len(rows), path)
    return path


KFOLD_HEADER = ("classifier", "window_s", "neurons", "sen", "sel", "spe", "acc")


def _window_label(cfg: RunConfig) -> str:
    return f"{cfg.window_s:g}"


def cmd_eval_kfold(cfg: RunConfig, out=None) -> Path:
    out = out or sys.stdout
    if not isinstance(cfg.k, int) or cfg.k < 2:
        raise BadKError(f"k must be at least 2, got {cfg.k}")
    dataset, inputs = _load_dataset(cfg)
    sizes = cfg.neuron_sizes() if cfg.classifier == "mlp" else (None,)
    rows, fold_rows, metrics = [], [], []
    for h in sizes:
        res = run_kfold(dataset, cfg.classifier_spec(h), cfg.k, cfg.seed)
        m = res.metrics
        metrics.append(m)
        rows.append([cfg.classifier, _window_label(cfg), "" if h is None else h,
                     _fmt(m.sen), _fmt(m.sel), _fmt(m.spe), _fmt(m.acc)])
        for i, c in enumerate(res.per_fold):
            fold_rows.append([cfg.classifier, "" if h is None else h, i, c.tp, c.fn, c.tn, c.fp])
    if len(sizes) > 1:
        avg = []
        for attr in ("sen", "sel", "spe", "acc"):
            vals = [getattr(m, attr) for m in metrics if getattr(m, attr) is not None]
            avg.append(_fmt(float(np.mean(vals)) if vals else None))
        rows.append([cfg.classifier, _window_label(cfg), "average", *avg])
    text = _csv_text(KFOLD_HEADER, rows)
    out_dir = Path(cfg.output_dir)
    path = out_dir / "kfold_metrics.csv"
    _write_text(path, text)
    _write_text(out_dir / "kfold_folds.csv",
                _csv_text(("classifier", "neurons", "fold", "tp", "fn", "tn", "fp"), fold_rows))
    write_provenance(path, "eval-kfold", cfg, inputs, {"k": cfg.k, "seed": cfg.seed})
    out.write(text)
    return path


LOSO_HEADER = ("subject_id", "n", "n_chf", "rate", "decision", "correct")


def cmd_eval_loso(cfg: RunConfig, out=None, err=None) -> Path:
    out, err = out or sys.stdout, err or sys.stderr
    sizes = cfg.neuron_sizes()
    if cfg.classifier == "mlp" and len(sizes) != 1:
        raise ConfigError("eval-loso needs a single mlp_neurons value")
    dataset, inputs = _load_dataset(cfg)
    res = run_loso(dataset, cfg.classifier_spec())
    rows = [
        [d.subject_id, d.n_windows, d.n_classified_chf, f"{d.rate:.4f}",
         d.decision.value, "T" if d.correct else "F"]
        for d in res.decisions
    ]
    text = _csv_text(LOSO_HEADER, rows)
    out_dir = Path(cfg.output_dir)
    path = out_dir / "loso_subjects.csv"
    _write_text(path, text)
    neurons = sizes[0] if cfg.classifier == "mlp" else ""
    summary = _csv_text(
        ("classifier", "window_s", "neurons", "subjects", "misclassified", "misclassification_rate"),
        [[cfg.classifier, _window_label(cfg), neurons, len(res.decisions),
          res.n_misclassified, f"{res.misclassification_rate:.4f}"]],
    )
    _write_text(out_dir / "loso_summary.csv", summary)
    write_provenance(path, "eval-loso", cfg, inputs, {
        "subjects": len(res.decisions),
        "misclassified": res.n_misclassified,
    })
    out.write(text)
    err.write(
        f"summary: {res.n_misclassified}/{len(res.decisions)} subjects misclassified, "
        f"misclassification rate {res.misclassification_rate:.4f}\n"
    )
    return path


def cmd_sodp_plot(cfg: RunConfig, subject_id: str, window_index: int, svg_path=None,
                  out=None) -> Path:
    out = out or sys.stdout
    manifest = load_manifest(cfg.manifest_path)
    entry = next((e for e in manifest if e.subject_id == subject_id), None)
    if entry is None:
        raise UnknownSubjectError(subject_id)
    if not 0 <= window_index < cfg.windows_per_record:
        raise BadWindowIndexError(
            f"window index {window_index} outside [0, {cfg.windows_per_record})"
        )
    record = load_record(entry)
    try:
        windows = record_windows(record, cfg.filter_config(), cfg.window_s, window_index + 1)
    except RecordTooShortError:
        raise BadWindowIndexError(
            f"subject {subject_id} has no window {window_index} of {cfg.window_s:g} s"
        ) from None
    window = windows[window_index]
    points = compute_sodp(window)
    partition = resolve_partition(points, cfg.partition())
    q = quadrants(points)
    b = bands(points, partition)
    counts = count_regions(points, partition)
    assert np.array_equal(counts, extract_features(window, cfg.partition()))

    text = _csv_text(
        ("d1", "d2", "quadrant", "band"),
        ([repr(float(p[0])), repr(float(p[1])), int(qq), int(bb)] for p, qq, bb in zip(points, q, b)),
    )
    edges = (0.0, *partition.radii, float("inf"))
    region_rows = [
        [f"f{i + 1:02d}", qq, bb, repr(edges[bb - 1]), repr(edges[bb]), int(counts[i])]
        for i, (qq, bb) in enumerate(region_labels())
    ]
    out_dir = Path(cfg.output_dir)
    stem = f"sodp_{subject_id}_w{window_index}"
    path = out_dir / f"{stem}_points.csv"
    _write_text(path, text)
    _write_text(
        out_dir / f"{stem}_regions.csv",
        _csv_text(("feature", "quadrant", "band", "inner_radius", "outer_radius", "count"), region_rows),
    )
    if svg_path is not None:
        _write_text(Path(svg_path), sodp_svg(points, partition, title=f"{subject_id} window {window_index}"))
    out.write(text)
    return path


def cmd_synth(spec: SynthSpec, out_dir) -> Path:
    manifest = generate_cohort(spec, out_dir)
    path = Path(out_dir) / "manifest.csv"
    log.info("wrote %d synthetic records to %s", len(manifest), out_dir)
    return path


# Argument parsing -----------------------------------------------------------


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value config file")
    for f in fields(RunConfig):
        p.add_argument(f"--{f.name}", f"--{f.name.replace('_', '-')}", dest=f.name, default=None,
                       metavar=f.name.upper())


def _add_synth_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", required=True, help="target directory")
    for f in fields(SynthSpec):
        p.add_argument(f"--{f.name}", f"--{f.name.replace('_', '-')}", dest=f.name, default=None,
                       type=_CASTS[f.type], metavar=f.name.upper())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sodp-chf", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic cohort")
    _add_synth_flags(p)
    for name, help_text in (
        ("features", "extract SODP feature vectors"),
        ("eval-kfold", "window-level k-fold cross-validation"),
        ("eval-loso", "patient-level leave-one-subject-out validation"),
        ("sodp-plot", "dump one window's SODP points"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_config_flags(p)
        if name == "sodp-plot":
            p.add_argument("--subject", required=True)
            p.add_argument("--window", type=int, default=0)
            p.add_argument("--svg", default=None, help="also write an SVG scatter here")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        if args.command == "synth":
            overrides = {f.name: getattr(args, f.name) for f in fields(SynthSpec)
                         if getattr(args, f.name) is not None}
            cmd_synth(SynthSpec(**overrides), args.out)
            return 0
        overrides = {f.name: getattr(args, f.name) for f in fields(RunConfig)
                     if getattr(args, f.name) is not None}
        cfg = load_config(args.config, overrides)
        if args.command == "features":
            cmd_features(cfg)
        elif args.command == "eval-kfold":
            cmd_eval_kfold(cfg)
        elif args.command == "eval-loso":
            cmd_eval_loso(cfg)
        elif args.command == "sodp-plot":
            cmd_sodp_plot(cfg, args.subject, args.window, args.svg)
    except (SodpChfError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
