"""Command-line interface.

Subcommands cover the full deterministic pipeline: score binarization into
segmentations (boundaries), detection metrics (eval), temporal localization
metrics (localize), score-level fusion (fuse), reflection padding of WAV
files (reflect), and synthetic corpus generation (simulate). Outputs are
written once, sorted by utterance id, so repeated runs are byte-identical.
"""

from __future__ import annotations

import argparse
import functools
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import fileio
from .boundary import (
    DEFAULT_BINS,
    ScoreKind,
    ScoreSequence,
    apply_threshold,
    fit_histogram_threshold,
)
from .dsp import reflect_extend
from .fileio import FileFormatError
from .localize import DEFAULT_IOU_THRESHOLDS, DEFAULT_RECALL_BUDGETS, localization_report
from .metrics import (
    DEFAULT_RESOLUTIONS,
    ScoredCorpus,
    ScoredUtterance,
    det_curve,
    evaluate_corpus,
)
from .scoring import AGGREGATION_MODES, fuse
from .simulate import ScenarioConfig, generate
from .timeline import boundaries_to_segments

JOBS_ENV = "SPOOFSEG_JOBS"


def _default_jobs() -> int:
    try:
        return max(1, int(os.environ.get(JOBS_ENV, "1")))
    except ValueError:
        return 1


def _pmap(fn, items, jobs):
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (jobs * 4))))


def _parse_resolutions(text: str):
    out = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        if token in ("utt", "utterance"):
            out.append(None)
        else:
            out.append(float(token))
    if not out:
        raise ValueError("empty resolution list")
    return tuple(out)


def _parse_threshold_policy(text: str):
    if text == "eer":
        return None
    if text.startswith("fixed:"):
        return float(text[len("fixed:"):])
    raise ValueError(f"bad threshold policy {text!r} (use 'eer' or 'fixed:<tau>')")


def _parse_float_list(text: str):
    return tuple(float(v) for v in text.split(",") if v.strip())


def _parse_int_list(text: str):
    return tuple(int(v) for v in text.split(",") if v.strip())


# ---------------------------------------------------------------------------
# boundaries


def _boundaries_worker(item, bins, global_tau):
    utt, values = item
    scores = ScoreSequence(values, ScoreKind.BOUNDARY)
    if global_tau is not None:
        b = apply_threshold(scores, global_tau)
        diag = {"utt_id": utt, "n_scores": int(len(scores)), "tau": global_tau}
    else:
        fit = fit_histogram_threshold(scores, bins)
        b = apply_threshold(scores, fit.tau_star)
        diag = {
            "utt_id": utt,
            "n_scores": int(len(scores)),
            "tau": fit.tau_star,
            "argmin_bin": fit.argmin_bin,
            "degenerate": fit.degenerate,
            "counts": fit.counts.tolist(),
            "edges": fit.edges.tolist(),
        }
    diag["n_boundaries"] = int(b.indicators.sum())
    return utt, boundaries_to_segments(b), diag


def cmd_boundaries(args) -> int:
    scores = fileio.read_scores_tsv(args.scores)
    worker = functools.partial(
        _boundaries_worker, bins=args.bins, global_tau=args.global_threshold
    )
    results = _pmap(worker, sorted(scores.items()), args.jobs)
    segs = {utt: seg for utt, seg, _ in results}
    fileio.write_segmentation_tsv(args.out, segs)
    if args.diagnostics:
        report = {
            "mode": "global" if args.global_threshold is not None else "adaptive",
            "bins": None if args.global_threshold is not None else args.bins,
            "global_threshold": args.global_threshold,
            "utterances": [diag for _, _, diag in results],
        }
        fileio.write_report_json(args.diagnostics, report)
    print(f"wrote {args.out} ({len(segs)} utterances)")
    return 0


# ---------------------------------------------------------------------------
# eval


def _build_corpus(annotations, scores) -> ScoredCorpus:
    missing_scores = sorted(set(annotations) - set(scores))
    extra_scores = sorted(set(scores) - set(annotations))
    if missing_scores or extra_scores:
        parts = []
        if missing_scores:
            parts.append(f"no scores for: {', '.join(missing_scores[:10])}")
        if extra_scores:
            parts.append(f"no annotations for: {', '.join(extra_scores[:10])}")
        raise FileFormatError("utterance sets differ; " + "; ".join(parts))
    bad = [
        f"{utt} ({scores[utt].size} scores vs {annotations[utt].grid.n_frames} frames)"
        for utt in sorted(annotations)
        if scores[utt].size != annotations[utt].grid.n_frames
    ]
    if bad:
        raise FileFormatError("length mismatch for: " + ", ".join(bad[:10]))
    return ScoredCorpus(
        tuple(
            ScoredUtterance(
                utt, annotations[utt], ScoreSequence(scores[utt], ScoreKind.FRAME)
            )
            for utt in sorted(annotations)
        )
    )


def cmd_eval(args) -> int:
    annotations = fileio.read_annotations_tsv(args.annotations)
    scores = fileio.read_scores_tsv(args.scores)
    corpus = _build_corpus(annotations, scores)
    report = evaluate_corpus(
        corpus,
        resolutions=args.resolutions,
        aggregation=args.aggregation,
        coarse_aggregation=args.coarse_aggregation,
        threshold=args.threshold_policy,
    )
    fileio.write_report_json(args.out, report)
    if args.csv:
        fileio.write_report_csv(args.csv, report)
    det_path = args.det or Path(args.out).with_suffix(".det.csv")
    fileio.write_det_csv(det_path, det_curve(corpus))
    print(f"wrote {args.out} and {det_path}")
    return 0


# ---------------------------------------------------------------------------
# localize


def cmd_localize(args) -> int:
    annotations = fileio.read_annotations_tsv(args.annotations)
    regions = fileio.regions_from_annotations(annotations)
    proposals = fileio.read_proposals_tsv(args.proposals)
    report = localization_report(
        proposals, regions, iou_thresholds=args.iou_thresholds, budgets=args.budgets
    )
    fileio.write_report_json(args.out, report)
    if args.csv:
        fileio.write_report_csv(args.csv, report)
    print(f"wrote {args.out}")
    return 0


# ---------------------------------------------------------------------------
# fuse


def cmd_fuse(args) -> int:
    systems = [fileio.read_scores_tsv(path) for path in args.inputs]
    first = systems[0]
    for path, sys_scores in zip(args.inputs[1:], systems[1:]):
        if set(sys_scores) != set(first):
            offender = sorted(set(sys_scores) ^ set(first))[0]
            raise FileFormatError(
                f"{path}: utterance set differs from {args.inputs[0]} "
                f"(first offender: {offender})"
            )
        for utt in first:
            if sys_scores[utt].size != first[utt].size:
                raise FileFormatError(
                    f"{path}: length mismatch for utterance {utt} "
                    f"({sys_scores[utt].size} vs {first[utt].size})"
                )
    fused = {
        utt: fuse(
            [ScoreSequence(s[utt], ScoreKind.FRAME) for s in systems]
        ).values
        for utt in first
    }
    fileio.write_scores_tsv(args.out, fused)
    print(f"wrote {args.out} ({len(fused)} utterances, {len(systems)} systems)")
    return 0


# ---------------------------------------------------------------------------
# reflect


def cmd_reflect(args) -> int:
    w = fileio.read_wav(args.input)
    target = int(round(args.target_seconds * w.sample_rate))
    if target < 1:
        raise ValueError(f"target of {args.target_seconds} s is shorter than one sample")
    fileio.write_wav(args.output, reflect_extend(w, target))
    print(f"wrote {args.output} ({target} samples at {w.sample_rate} Hz)")
    return 0


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as e:
            raise FileFormatError(f"{args.config}: {e}") from None
    if args.seed is not None:
        data["seed"] = args.seed
    cfg = ScenarioConfig.from_dict(data)
    corpus = generate(cfg)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fileio.write_annotations_tsv(
        out / "annotations.tsv", {u.utt_id: u.labels for u in corpus.utterances}
    )
    fileio.write_scores_tsv(
        out / "boundary_scores.tsv",
        {
            u.utt_id: u.boundary_scores.values
            for u in corpus.utterances
            if u.boundary_scores.values.size
        },
    )
    fileio.write_scores_tsv(
        out / "frame_scores.tsv",
        {u.utt_id: u.frame_scores.values for u in corpus.utterances},
    )
    if cfg.with_waveforms:
        wav_dir = out / "wav"
        wav_dir.mkdir(exist_ok=True)
        for u in corpus.utterances:
            fileio.write_wav(wav_dir / f"{u.utt_id}.wav", u.waveform)
    print(f"wrote corpus of {len(corpus.utterances)} utterances to {out}")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spoofseg",
        description="Partial-spoof segmentation, scoring and evaluation toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("boundaries", help="binarize boundary scores into segmentations")
    p.add_argument("--scores", required=True, help="boundary score TSV")
    p.add_argument("--out", required=True, help="output segmentation TSV")
    p.add_argument("--diagnostics", help="optional JSON with per-utterance thresholds")
    p.add_argument("--bins", type=int, default=DEFAULT_BINS,
                   help="histogram bins for adaptive thresholding (default %(default)s)")
    p.add_argument("--global-threshold", type=float, default=None,
                   help="fixed global threshold (overrides adaptive mode)")
    p.add_argument("--jobs", type=int, default=_default_jobs())
    p.set_defaults(func=cmd_boundaries)

    p = sub.add_parser("eval", help="detection metrics against ground truth")
    p.add_argument("--annotations", required=True, help="ground-truth annotation TSV")
    p.add_argument("--scores", required=True, help="frame score TSV")
    p.add_argument("--out", required=True, help="output report JSON")
    p.add_argument("--csv", help="optional flat CSV of the report")
    p.add_argument("--det", help="DET curve CSV (default: report path with .det.csv)")
    p.add_argument("--resolutions", type=_parse_resolutions,
                   default=DEFAULT_RESOLUTIONS, metavar="LIST",
                   help="comma list of seconds and/or 'utt' "
                        "(default 0.02,0.04,0.08,0.16,0.32,0.64,utt)")
    p.add_argument("--aggregation", choices=AGGREGATION_MODES, default="mean",
                   help="frame-to-segment aggregation (default %(default)s)")
    p.add_argument("--coarse-aggregation", choices=AGGREGATION_MODES, default="max",
                   help="score pooling at coarse resolutions (default %(default)s)")
    p.add_argument("--threshold-policy", type=_parse_threshold_policy, default=None,
                   metavar="POLICY", help="'eer' (default) or 'fixed:<tau>' for P/R/F1")
    p.add_argument("--jobs", type=int, default=_default_jobs())
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("localize", help="AP/AR temporal localization metrics")
    p.add_argument("--annotations", required=True, help="ground-truth annotation TSV")
    p.add_argument("--proposals", required=True, help="proposal TSV")
    p.add_argument("--out", required=True, help="output report JSON")
    p.add_argument("--csv", help="optional flat CSV of the report")
    p.add_argument("--iou-thresholds", type=_parse_float_list,
                   default=DEFAULT_IOU_THRESHOLDS, metavar="LIST")
    p.add_argument("--budgets", type=_parse_int_list,
                   default=DEFAULT_RECALL_BUDGETS, metavar="LIST")
    p.set_defaults(func=cmd_localize)

    p = sub.add_parser("fuse", help="average score files element-wise")
    p.add_argument("inputs", nargs="+", help="score TSVs with identical shapes")
    p.add_argument("--out", required=True, help="fused score TSV")
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("reflect", help="reflection-extend a WAV to a target duration")
    p.add_argument("--input", required=True, help="mono 16-bit PCM WAV")
    p.add_argument("--output", required=True)
    p.add_argument("--target-seconds", type=float, required=True)
    p.set_defaults(func=cmd_reflect)

    p = sub.add_parser("simulate", help="generate a synthetic corpus")
    p.add_argument("--config", required=True, help="scenario config JSON")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--jobs", type=int, default=_default_jobs())
    p.set_defaults(func=cmd_simulate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FileFormatError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
