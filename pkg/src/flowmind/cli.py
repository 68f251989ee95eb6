"""Command-line interface.

Subcommands: ``convert`` (detections to SVG/drawio/pptx), ``layout``
(convert without suppression or recognition), ``eval`` (score predictions
against ground truth), ``synth`` (write a seeded corpus), ``validate``
(parse and report on wire-format files).

Settings resolve in three layers: built-in defaults, then a JSON config
file named by the FLOWMIND_CONFIG environment variable, then command-line
flags.  The effective configuration is echoed in every report.

Exit codes: 0 success, 2 malformed input or pairing error, 3 write failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from flowmind import __version__
from flowmind.export import (
    ExportReport,
    PackageWriteError,
    export_drawio,
    export_pptx,
    export_svg,
)
from flowmind.geometry import ElementClass
from flowmind.ingest import (
    DocumentInput,
    IngestReport,
    MalformedDocument,
    read_document,
)
from flowmind.layout import LayoutConfig
from flowmind.metrics import (
    EvalConfig,
    ImageMismatch,
    connector_corpus_metrics,
    corpus_cer,
    detection_metrics,
    match_detections,
    text_pairs_from_matching,
)
from flowmind.nms import NmsConfig
from flowmind.pipeline import PipelineConfig, convert_document
from flowmind.synth import InvalidConfig, Perturbation, SynthConfig, write_corpus
from flowmind.text import RecognizerFailure, RecognizerSpec

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_WRITE = 3

CONFIG_ENV = "FLOWMIND_CONFIG"

RECOGNIZER_MODES = {
    "echo": "ground_truth_echo",
    "none": "none",
    "command": "external_command",
}

_CONVERT_DEFAULTS: dict[str, object] = {
    "out": ".",
    "formats": "svg,drawio,pptx",
    "dpi": 96.0,
    "nms_iou": 0.5,
    "nms_exempt_text": False,
    "no_nms": False,
    "no_layout": False,
    "recognizer": "echo",
    "recognizer_command": None,
    "literal_iou": False,
    "max_bind_distance": None,
}

_EVAL_DEFAULTS: dict[str, object] = {
    "match_iou": 0.5,
    "score_iou": 0.7,
    "da_iou": 0.8,
    "lenient": False,
    "arrow_unordered": False,
    "out": None,
}

_SYNTH_DEFAULTS: dict[str, object] = {
    "seed": 0,
    "n": 10,
    "grid": "3x4",
    "connector_density": 0.6,
    "bbox_jitter": 0.0,
    "drop_prob": 0.0,
    "duplicate_prob": 0.0,
    "class_confusion_prob": 0.0,
    "keypoint_jitter": 0.0,
}

_ALL_KEYS = (
    set(_CONVERT_DEFAULTS) | set(_EVAL_DEFAULTS) | set(_SYNTH_DEFAULTS)
)


class CliError(Exception):
    def __init__(self, code: int, message: str) -> None:
        super().__init__(message)
        self.code = code


def _load_config_file() -> dict:
    path = os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(EXIT_INPUT, f"cannot read config file {path}: {exc}")
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_INPUT, f"config file {path} is not valid JSON: {exc}")
    if not isinstance(data, dict):
        raise CliError(EXIT_INPUT, f"config file {path} must hold a JSON object")
    for key in data:
        if key not in _ALL_KEYS:
            raise CliError(EXIT_INPUT, f"config file {path}: unknown setting {key!r}")
    return data


def _effective(args: argparse.Namespace, defaults: dict[str, object]) -> dict:
    """defaults < config file < explicitly passed flags."""
    cfg = dict(defaults)
    for key, value in _load_config_file().items():
        if key in cfg:
            cfg[key] = value
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def _parse_formats(raw: object) -> list[str]:
    if isinstance(raw, str):
        parts = [p.strip() for p in raw.split(",") if p.strip()]
    elif isinstance(raw, (list, tuple)):
        parts = [str(p) for p in raw]
    else:
        raise CliError(EXIT_INPUT, f"bad formats value {raw!r}")
    for part in parts:
        if part not in ("svg", "drawio", "pptx"):
            raise CliError(EXIT_INPUT, f"unknown format {part!r}")
    if not parts:
        raise CliError(EXIT_INPUT, "formats must name at least one of svg,drawio,pptx")
    return parts


def _parse_grid(raw: object) -> tuple[int, int]:
    if isinstance(raw, (list, tuple)) and len(raw) == 2:
        return int(raw[0]), int(raw[1])
    if isinstance(raw, str):
        parts = raw.lower().split("x")
        if len(parts) == 2:
            try:
                return int(parts[0]), int(parts[1])
            except ValueError:
                pass
    raise CliError(EXIT_INPUT, f"grid must look like ROWSxCOLS, got {raw!r}")


def _pipeline_config(cfg: dict, *, for_layout_command: bool) -> PipelineConfig:
    mode_alias = str(cfg["recognizer"])
    if mode_alias not in RECOGNIZER_MODES:
        raise CliError(
            EXIT_INPUT,
            f"recognizer must be one of {sorted(RECOGNIZER_MODES)}, got {mode_alias!r}",
        )
    try:
        if for_layout_command:
            nms: Optional[NmsConfig] = None
            recognizer = RecognizerSpec(mode="none")
        else:
            nms = (
                None
                if cfg["no_nms"]
                else NmsConfig(
                    iou_threshold=float(cfg["nms_iou"]),
                    exempt_text=bool(cfg["nms_exempt_text"]),
                )
            )
            recognizer = RecognizerSpec(
                mode=RECOGNIZER_MODES[mode_alias],
                command=cfg["recognizer_command"],
            )
        dpi = float(cfg["dpi"])
        mbd = cfg["max_bind_distance"]
        return PipelineConfig(
            dpi=dpi,
            nms=nms,
            layout=LayoutConfig(dpi=dpi, enabled=not cfg["no_layout"]),
            recognizer=recognizer,
            text_literal_iou=bool(cfg["literal_iou"]),
            max_bind_distance=None if mbd is None else float(mbd),
        )
    except (ValueError, RecognizerFailure) as exc:
        raise CliError(EXIT_INPUT, str(exc))


def _collect_inputs(path_str: str, suffixes: Sequence[str]) -> list[Path]:
    path = Path(path_str)
    if path.is_dir():
        files = sorted(
            p
            for p in path.iterdir()
            if p.is_file()
            and p.suffix in suffixes
            and p.name != "manifest.json"
            and not p.name.endswith(".report.json")
        )
        if not files:
            raise CliError(
                EXIT_INPUT,
                f"no input files with suffix {'/'.join(suffixes)} in {path}",
            )
        return files
    if not path.is_file():
        raise CliError(EXIT_INPUT, f"input not found: {path}")
    return [path]


def _ingest_dict(report: IngestReport) -> dict:
    return {
        "accepted": report.accepted_count,
        "clamped": report.clamped_count,
        "rejected": [{"element": i, "reason": r} for i, r in report.rejected],
        "warnings": [{"element": i, "message": m} for i, m in report.warnings],
    }


def _write_bytes(path: Path, data: bytes) -> None:
    try:
        path.write_bytes(data)
    except OSError as exc:
        raise CliError(EXIT_WRITE, f"cannot write {path}: {exc}")


def _write_text(path: Path, data: str) -> None:
    try:
        path.write_text(data, encoding="utf-8")
    except OSError as exc:
        raise CliError(EXIT_WRITE, f"cannot write {path}: {exc}")


def _convert_one(
    src: Path, out_dir: Path, formats: list[str], pcfg: PipelineConfig
) -> list[str]:
    parsed, ingest = read_document(str(src))
    doc, report = convert_document(parsed, pcfg)
    outputs = []
    stem = src.stem
    exporters = {
        "svg": (export_svg, ".svg"),
        "drawio": (export_drawio, ".drawio"),
        "pptx": (export_pptx, ".pptx"),
    }
    export_warnings = ExportReport.from_doc(doc).warnings
    for fmt in formats:
        exporter, ext = exporters[fmt]
        target = out_dir / f"{stem}{ext}"
        try:
            data = exporter(doc)
        except PackageWriteError as exc:
            raise CliError(EXIT_WRITE, str(exc))
        _write_bytes(target, data)
        outputs.append(target.name)
    full = {
        "file": src.name,
        "outputs": outputs,
        "ingest": _ingest_dict(ingest),
        "export_warnings": list(export_warnings),
        **report.to_dict(),
    }
    _write_text(out_dir / f"{stem}.report.json", json.dumps(full, indent=2) + "\n")
    outputs.append(f"{stem}.report.json")
    return outputs


def _cmd_convert(args: argparse.Namespace, *, for_layout_command: bool) -> int:
    cfg = _effective(args, _CONVERT_DEFAULTS)
    formats = _parse_formats(cfg["formats"])
    pcfg = _pipeline_config(cfg, for_layout_command=for_layout_command)
    files = _collect_inputs(args.input, (".det", ".json"))
    out_dir = Path(str(cfg["out"]))
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(EXIT_WRITE, f"cannot create output directory {out_dir}: {exc}")

    batch = Path(args.input).is_dir()
    failures = 0
    for src in files:
        try:
            outputs = _convert_one(src, out_dir, formats, pcfg)
        except MalformedDocument as exc:
            failures += 1
            print(f"{src}: skipped ({exc})", file=sys.stderr)
            if not batch:
                raise CliError(EXIT_INPUT, f"{src}: {exc}")
            continue
        print(f"{src.name}: wrote {' '.join(outputs)}")
    if batch and failures == len(files):
        raise CliError(EXIT_INPUT, "all input files failed to parse")
    return EXIT_OK


def _read_or_skip(path: Path, ground_truth: bool) -> tuple[DocumentInput, IngestReport]:
    try:
        return read_document(str(path), ground_truth=ground_truth)
    except MalformedDocument as exc:
        raise CliError(EXIT_INPUT, f"{path}: {exc}")


def _eval_pairs(args: argparse.Namespace) -> list[tuple[str, DocumentInput, DocumentInput]]:
    pred_path = Path(args.pred)
    gt_path = Path(args.gt)
    pairs: list[tuple[str, DocumentInput, DocumentInput]] = []
    if pred_path.is_file() and gt_path.is_file():
        pred, _ = _read_or_skip(pred_path, False)
        gt, _ = _read_or_skip(gt_path, True)
        pairs.append((pred_path.stem, pred, gt))
        return pairs
    if not (pred_path.is_dir() and gt_path.is_dir()):
        raise CliError(
            EXIT_INPUT, "--pred and --gt must both be files or both be directories"
        )
    gt_files = sorted(p for p in gt_path.iterdir() if p.suffix == ".gt")
    if not gt_files:
        raise CliError(EXIT_INPUT, f"no .gt files in {gt_path}")
    gt_stems = set()
    for gf in gt_files:
        gt_stems.add(gf.stem)
        det_file = pred_path / f"{gf.stem}.det"
        if not det_file.is_file():
            raise CliError(EXIT_INPUT, f"no prediction for {gf.stem} in {pred_path}")
        pred, _ = _read_or_skip(det_file, False)
        gt, _ = _read_or_skip(gf, True)
        pairs.append((gf.stem, pred, gt))
    for extra in sorted(p for p in pred_path.iterdir() if p.suffix == ".det"):
        if extra.stem not in gt_stems:
            print(f"warning: {extra.name} has no ground truth; ignored", file=sys.stderr)
    return pairs


def _opt(v: Optional[float]) -> Optional[float]:
    return None if v is None else float(v)


def _class_row_dict(row) -> dict:
    return {
        "precision": _opt(row.precision),
        "recall": _opt(row.recall),
        "f1": _opt(row.f1),
        "pred_count": row.pred_count,
        "gt_count": row.gt_count,
    }


def _cmd_eval(args: argparse.Namespace) -> int:
    cfg = _effective(args, _EVAL_DEFAULTS)
    try:
        ecfg = EvalConfig(
            match_iou=float(cfg["match_iou"]),
            score_iou=float(cfg["score_iou"]),
            da_iou=float(cfg["da_iou"]),
            lenient=bool(cfg["lenient"]),
            arrow_ordered=not bool(cfg["arrow_unordered"]),
        )
    except ValueError as exc:
        raise CliError(EXIT_INPUT, str(exc))
    named = _eval_pairs(args)
    try:
        matchings = [match_detections(pred, gt, ecfg) for _, pred, gt in named]
    except ImageMismatch as exc:
        raise CliError(EXIT_INPUT, str(exc))
    det_report = detection_metrics(matchings, ecfg)
    doc_pairs = [(pred, gt) for _, pred, gt in named]
    conn_report = connector_corpus_metrics(doc_pairs, ecfg)
    text_pairs = [
        pair for m in matchings for pair in text_pairs_from_matching(m)
    ]
    cer_report = corpus_cer(text_pairs)

    payload = {
        "config": {
            "match_iou": ecfg.match_iou,
            "score_iou": ecfg.score_iou,
            "da_iou": ecfg.da_iou,
            "lenient": ecfg.lenient,
            "arrow_ordered": ecfg.arrow_ordered,
        },
        "images": [
            {
                "stem": stem,
                "precision": _opt(row.precision),
                "recall": _opt(row.recall),
                "f1": _opt(row.f1),
                "diagram_accurate": row.diagram_accurate,
                "pred_count": row.pred_count,
                "gt_count": row.gt_count,
            }
            for (stem, _p, _g), row in zip(named, det_report.per_image)
        ],
        "detection": {
            "per_class": {
                cls.value: _class_row_dict(row)
                for cls, row in sorted(
                    det_report.per_class.items(), key=lambda kv: kv[0].value
                )
            },
            "macro_precision": _opt(det_report.macro_precision),
            "macro_recall": _opt(det_report.macro_recall),
            "macro_f1": _opt(det_report.macro_f1),
            "weighted_precision": _opt(det_report.weighted_precision),
            "weighted_recall": _opt(det_report.weighted_recall),
            "weighted_f1": _opt(det_report.weighted_f1),
            "diagram_accuracy": _opt(det_report.diagram_accuracy),
        },
        "connections": {
            "per_kind": {
                cls.value: _class_row_dict(row)
                for cls, row in sorted(
                    conn_report.per_kind.items(), key=lambda kv: kv[0].value
                )
            },
            "precision": _opt(conn_report.overall_precision),
            "recall": _opt(conn_report.overall_recall),
            "f1": _opt(conn_report.overall_f1),
        },
        "text": {
            "pairs": len(text_pairs),
            "corpus_cer": cer_report.corpus_cer,
            "mean_cer": (
                sum(cer_report.per_pair) / len(cer_report.per_pair)
                if cer_report.per_pair
                else None
            ),
        },
    }
    rendered = json.dumps(payload, indent=2) + "\n"
    if cfg["out"]:
        _write_text(Path(str(cfg["out"])), rendered)
    if getattr(args, "json", False):
        sys.stdout.write(rendered)
    else:
        sys.stdout.write(_eval_table(payload))
    return EXIT_OK


def _fmt(v: Optional[float]) -> str:
    return "N/A" if v is None else f"{v:.3f}"


def _eval_table(payload: dict) -> str:
    lines = []
    header = f"{'class':<14}{'precision':>10}{'recall':>8}{'f1':>8}{'pred':>6}{'gt':>6}"
    lines.append(header)
    det = payload["detection"]
    for name, row in det["per_class"].items():
        lines.append(
            f"{name:<14}{_fmt(row['precision']):>10}{_fmt(row['recall']):>8}"
            f"{_fmt(row['f1']):>8}{row['pred_count']:>6}{row['gt_count']:>6}"
        )
    lines.append(
        f"{'macro':<14}{_fmt(det['macro_precision']):>10}"
        f"{_fmt(det['macro_recall']):>8}{_fmt(det['macro_f1']):>8}"
    )
    lines.append(
        f"{'weighted':<14}{_fmt(det['weighted_precision']):>10}"
        f"{_fmt(det['weighted_recall']):>8}{_fmt(det['weighted_f1']):>8}"
    )
    lines.append(f"diagram accuracy: {_fmt(det['diagram_accuracy'])}")
    conn = payload["connections"]
    lines.append(
        "connections: "
        f"precision {_fmt(conn['precision'])}, recall {_fmt(conn['recall'])}, "
        f"f1 {_fmt(conn['f1'])}"
    )
    text = payload["text"]
    lines.append(
        f"text: corpus CER {text['corpus_cer']:.3f} over {text['pairs']} pairs"
    )
    return "\n".join(lines) + "\n"


def _cmd_synth(args: argparse.Namespace) -> int:
    cfg = _effective(args, _SYNTH_DEFAULTS)
    rows, cols = _parse_grid(cfg["grid"])
    try:
        scfg = SynthConfig(
            seed=int(cfg["seed"]),
            n_images=int(cfg["n"]),
            grid=(rows, cols),
            connector_density=float(cfg["connector_density"]),
            perturbation=Perturbation(
                bbox_jitter_px=float(cfg["bbox_jitter"]),
                drop_prob=float(cfg["drop_prob"]),
                duplicate_prob=float(cfg["duplicate_prob"]),
                class_confusion_prob=float(cfg["class_confusion_prob"]),
                keypoint_jitter_px=float(cfg["keypoint_jitter"]),
            ),
        )
        scfg.validate()
    except (InvalidConfig, ValueError) as exc:
        raise CliError(EXIT_INPUT, str(exc))
    try:
        stems = write_corpus(scfg, args.out)
    except OSError as exc:
        raise CliError(EXIT_WRITE, f"cannot write corpus to {args.out}: {exc}")
    print(f"wrote {len(stems)} image pairs to {args.out}")
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    suffixes = (".gt",) if args.ground_truth else (".det", ".json")
    files = _collect_inputs(args.input, suffixes)
    for src in files:
        parsed, report = _read_or_skip(src, args.ground_truth)
        print(
            f"{src.name}: ok "
            f"(accepted {report.accepted_count}, clamped {report.clamped_count}, "
            f"rejected {len(report.rejected)}, warnings {len(report.warnings)}, "
            f"image {parsed.image_width}x{parsed.image_height})"
        )
        for idx, reason in report.rejected:
            print(f"  rejected element {idx}: {reason}")
        for idx, message in report.warnings:
            print(f"  warning element {idx}: {message}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flowmind",
        description="Convert hand-drawn diagram detections into editable documents.",
    )
    parser.add_argument("--version", action="version", version=f"flowmind {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_convert_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("input", help="detection file or directory of .det/.json files")
        p.add_argument("--out", help="output directory (default: current directory)")
        p.add_argument("--formats", help="comma-separated: svg,drawio,pptx")
        p.add_argument("--dpi", type=float, help="pixels per inch of the source image")
        p.add_argument(
            "--max-bind-distance",
            dest="max_bind_distance",
            type=float,
            help="max pixel distance for endpoint binding (default: unlimited)",
        )

    convert = sub.add_parser("convert", help="run the full conversion pipeline")
    add_convert_flags(convert)
    convert.add_argument("--nms-iou", dest="nms_iou", type=float, help="suppression IoU threshold")
    convert.add_argument(
        "--nms-exempt-text",
        dest="nms_exempt_text",
        action="store_true",
        default=None,
        help="text blocks neither suppress nor get suppressed",
    )
    convert.add_argument(
        "--no-nms", dest="no_nms", action="store_true", default=None,
        help="skip suppression",
    )
    convert.add_argument(
        "--no-layout", dest="no_layout", action="store_true", default=None,
        help="skip auto-layout",
    )
    convert.add_argument(
        "--recognizer", choices=sorted(RECOGNIZER_MODES), help="text recognizer mode"
    )
    convert.add_argument(
        "--recognizer-command",
        dest="recognizer_command",
        help="external recognizer template with {image} {x0} {y0} {x1} {y1}",
    )
    convert.add_argument(
        "--literal-iou",
        dest="literal_iou",
        action="store_true",
        default=None,
        help="use plain IoU instead of containment for text attachment",
    )

    layout = sub.add_parser(
        "layout", help="convert without suppression or text recognition"
    )
    add_convert_flags(layout)
    layout.add_argument(
        "--no-layout", dest="no_layout", action="store_true", default=None,
        help="skip auto-layout (geometry passes through unchanged)",
    )

    evalp = sub.add_parser("eval", help="score predictions against ground truth")
    evalp.add_argument("--pred", required=True, help="prediction file or directory of .det files")
    evalp.add_argument("--gt", required=True, help="ground-truth file or directory of .gt files")
    evalp.add_argument("--match-iou", dest="match_iou", type=float)
    evalp.add_argument("--score-iou", dest="score_iou", type=float)
    evalp.add_argument("--da-iou", dest="da_iou", type=float)
    evalp.add_argument(
        "--lenient", action="store_true", default=None,
        help="discard matched-but-unscored pairs from both denominators",
    )
    evalp.add_argument(
        "--arrow-unordered",
        dest="arrow_unordered",
        action="store_true",
        default=None,
        help="compare arrow endpoints as unordered sets",
    )
    evalp.add_argument("--out", help="write the structured JSON report to this file")
    evalp.add_argument(
        "--json",
        action="store_true",
        default=False,
        help="print the JSON report to stdout instead of the table",
    )

    synth = sub.add_parser("synth", help="generate a seeded synthetic corpus")
    synth.add_argument("--out", required=True, help="output directory")
    synth.add_argument("--seed", type=int)
    synth.add_argument("--n", type=int, help="number of images")
    synth.add_argument("--grid", help="cell grid as ROWSxCOLS (default 3x4)")
    synth.add_argument("--connector-density", dest="connector_density", type=float)
    synth.add_argument("--bbox-jitter", dest="bbox_jitter", type=float)
    synth.add_argument("--drop-prob", dest="drop_prob", type=float)
    synth.add_argument("--duplicate-prob", dest="duplicate_prob", type=float)
    synth.add_argument(
        "--class-confusion-prob", dest="class_confusion_prob", type=float
    )
    synth.add_argument("--keypoint-jitter", dest="keypoint_jitter", type=float)

    validate = sub.add_parser("validate", help="parse wire-format files and report")
    validate.add_argument("input", help="file or directory")
    validate.add_argument(
        "--ground-truth",
        dest="ground_truth",
        action="store_true",
        default=False,
        help="treat inputs as ground truth (scores optional and ignored)",
    )

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "convert":
            return _cmd_convert(args, for_layout_command=False)
        if args.command == "layout":
            return _cmd_convert(args, for_layout_command=True)
        if args.command == "eval":
            return _cmd_eval(args)
        if args.command == "synth":
            return _cmd_synth(args)
        if args.command == "validate":
            return _cmd_validate(args)
        parser.error(f"unknown command {args.command}")
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
