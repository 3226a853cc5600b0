"""File formats: score/annotation/segmentation/proposal TSVs, reports, WAV.

All text formats are UTF-8 with LF line endings, tab-separated fields,
'.' decimal separator, and floats rendered with 9 significant digits, so
outputs diff cleanly and are byte-stable across runs.
"""

from __future__ import annotations

import csv
import json
import wave
from pathlib import Path

import numpy as np

from .dsp import Waveform
from .localize import GroundTruthRegion, LocalizationProposal
from .metrics import DetCurve
from .timeline import (
    FRAME_SECONDS,
    FrameGrid,
    FrameLabelSequence,
    Segmentation,
    labels_to_segments,
)

GRID_SNAP_TOL = 1e-6
LABEL_NAMES = {0: "bonafide", 1: "spoof"}
LABEL_VALUES = {"bonafide": 0, "spoof": 1}


class FileFormatError(ValueError):
    """Malformed input file; message carries path and line number."""


def _fmt(x: float) -> str:
    return format(float(x), ".9g")


def _err(path, lineno, msg) -> FileFormatError:
    return FileFormatError(f"{path}:{lineno}: {msg}")


def _data_lines(path):
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            yield lineno, line


def snap_to_frame(seconds: float, path="<memory>", lineno=0) -> int:
    """Snap a time in seconds to the 20 ms grid within GRID_SNAP_TOL."""
    f = int(round(seconds / FRAME_SECONDS))
    if f < 0 or abs(seconds - f * FRAME_SECONDS) > GRID_SNAP_TOL:
        raise _err(path, lineno, f"time {seconds} is not on the {FRAME_SECONDS} s grid")
    return f


# ---------------------------------------------------------------------------
# score files: one utterance per line, "utt_id v1 v2 v3 ..."


def read_scores_tsv(path) -> dict[str, np.ndarray]:
    out: dict[str, np.ndarray] = {}
    for lineno, line in _data_lines(path):
        parts = line.split()
        if len(parts) < 2:
            raise _err(path, lineno, "expected 'utt_id v1 v2 ...'")
        utt = parts[0]
        if utt in out:
            raise _err(path, lineno, f"duplicate utterance id {utt!r}")
        try:
            values = np.array([float(v) for v in parts[1:]], dtype=np.float64)
        except ValueError as e:
            raise _err(path, lineno, f"bad score value ({e})") from None
        if not np.isfinite(values).all():
            raise _err(path, lineno, "scores must be finite")
        out[utt] = values
    if not out:
        raise FileFormatError(f"{path}: no utterances")
    return out


def write_scores_tsv(path, scores: dict[str, np.ndarray]):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for utt in sorted(scores):
            fh.write(utt + "\t" + " ".join(_fmt(v) for v in scores[utt]) + "\n")


# ---------------------------------------------------------------------------
# annotations: "utt_id start_sec end_sec label", tiling each utterance


def read_annotations_tsv(path) -> dict[str, FrameLabelSequence]:
    records: dict[str, list[tuple[int, int, int, int]]] = {}
    for lineno, line in _data_lines(path):
        parts = line.split()
        if len(parts) != 4:
            raise _err(path, lineno, "expected 'utt_id start end label'")
        utt, start_s, end_s, label_s = parts
        try:
            start, end = float(start_s), float(end_s)
        except ValueError:
            raise _err(path, lineno, f"bad time in {start_s!r}/{end_s!r}") from None
        if label_s not in LABEL_VALUES:
            raise _err(path, lineno, f"unknown label {label_s!r} (bonafide|spoof)")
        fa = snap_to_frame(start, path, lineno)
        fb = snap_to_frame(end, path, lineno)
        if fb <= fa:
            raise _err(path, lineno, f"empty interval [{start}, {end})")
        records.setdefault(utt, []).append((fa, fb, LABEL_VALUES[label_s], lineno))
    if not records:
        raise FileFormatError(f"{path}: no utterances")
    out: dict[str, FrameLabelSequence] = {}
    for utt, recs in records.items():
        recs.sort(key=lambda r: r[0])
        pos = 0
        for fa, fb, _, lineno in recs:
            if fa != pos:
                raise _err(
                    path, lineno,
                    f"utterance {utt!r}: segment starts at frame {fa}, expected {pos} "
                    "(annotations must tile the utterance)",
                )
            pos = fb
        labels = np.empty(pos, dtype=np.uint8)
        for fa, fb, lab, _ in recs:
            labels[fa:fb] = lab
        out[utt] = FrameLabelSequence(FrameGrid(pos), labels)
    return out


def write_annotations_tsv(path, corpus: dict[str, FrameLabelSequence]):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for utt in sorted(corpus):
            for s in labels_to_segments(corpus[utt]).segments:
                fh.write(
                    f"{utt}\t{_fmt(s.start * FRAME_SECONDS)}\t"
                    f"{_fmt(s.end * FRAME_SECONDS)}\t{LABEL_NAMES[s.label]}\n"
                )


# ---------------------------------------------------------------------------
# segmentations: "utt_id start_sec end_sec" (unlabeled candidate segments)


def write_segmentation_tsv(path, segs: dict[str, Segmentation]):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for utt in sorted(segs):
            dur = segs[utt].grid.frame_duration
            for s in segs[utt].segments:
                fh.write(f"{utt}\t{_fmt(s.start * dur)}\t{_fmt(s.end * dur)}\n")


# ---------------------------------------------------------------------------
# localization proposals: "utt_id start_sec end_sec confidence"


def read_proposals_tsv(path) -> list[LocalizationProposal]:
    out = []
    for lineno, line in _data_lines(path):
        parts = line.split()
        if len(parts) != 4:
            raise _err(path, lineno, "expected 'utt_id start end confidence'")
        try:
            start, end, conf = (float(v) for v in parts[1:])
        except ValueError as e:
            raise _err(path, lineno, f"bad number ({e})") from None
        try:
            out.append(LocalizationProposal(parts[0], start, end, conf))
        except ValueError as e:
            raise _err(path, lineno, str(e)) from None
    return out


def write_proposals_tsv(path, proposals):
    rows = sorted(proposals, key=lambda p: (p.utt_id, p.start, p.end))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for p in rows:
            fh.write(f"{p.utt_id}\t{_fmt(p.start)}\t{_fmt(p.end)}\t{_fmt(p.confidence)}\n")


def regions_from_annotations(corpus: dict[str, FrameLabelSequence]) -> list[GroundTruthRegion]:
    regions = []
    for utt in sorted(corpus):
        for s in labels_to_segments(corpus[utt]).segments:
            if s.label == 1:
                regions.append(
                    GroundTruthRegion(utt, s.start * FRAME_SECONDS, s.end * FRAME_SECONDS)
                )
    return regions


# ---------------------------------------------------------------------------
# reports


def write_report_json(path, report: dict):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")


def _flatten(report: dict, prefix="") -> list[tuple[str, object]]:
    rows = []
    for key, value in report.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            rows.extend(_flatten(value, name + "."))
        else:
            rows.append((name, value))
    return rows


def write_report_csv(path, report: dict):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["metric", "value"])
        for name, value in _flatten(report):
            if isinstance(value, float):
                value = _fmt(value)
            elif value is None:
                value = "undefined"
            writer.writerow([name, value])


def write_det_csv(path, curve: DetCurve):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("threshold,far,miss\n")
        for t, far, miss in zip(curve.thresholds, curve.far, curve.miss):
            fh.write(f"{_fmt(t)},{_fmt(far)},{_fmt(miss)}\n")


# ---------------------------------------------------------------------------
# WAV (mono 16-bit PCM only)

_PCM_SCALE = 32768.0


def read_wav(path) -> Waveform:
    with wave.open(str(path), "rb") as fh:
        channels = fh.getnchannels()
        width = fh.getsampwidth()
        comp = fh.getcomptype()
        if comp != "NONE" or channels != 1 or width != 2:
            raise FileFormatError(
                f"{path}: unsupported WAV encoding "
                f"(comptype={comp!r}, channels={channels}, sample_width={width}); "
                "expected mono 16-bit PCM"
            )
        rate = fh.getframerate()
        raw = fh.readframes(fh.getnframes())
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / _PCM_SCALE
    return Waveform(samples, rate)


def write_wav(path, w: Waveform):
    scaled = np.clip(np.rint(w.samples * _PCM_SCALE), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(w.sample_rate)
        fh.writeframes(scaled.tobytes())


def ensure_parent(path):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
