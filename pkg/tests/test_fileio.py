import numpy as np
import pytest

from spoofseg import fileio
from spoofseg.dsp import Waveform
from spoofseg.fileio import FileFormatError
from spoofseg.timeline import FrameGrid, FrameLabelSequence


def test_scores_round_trip_is_byte_stable(tmp_path):
    path = tmp_path / "scores.tsv"
    rng = np.random.default_rng(81)
    data = {
        "b_utt": rng.normal(0, 1, 7),
        "a_utt": rng.uniform(-3, 3, 4),
    }
    fileio.write_scores_tsv(path, data)
    first = path.read_bytes()
    parsed = fileio.read_scores_tsv(path)
    assert list(parsed) == ["a_utt", "b_utt"]  # canonical sort on write
    fileio.write_scores_tsv(path, parsed)
    assert path.read_bytes() == first


def test_scores_reader_errors_carry_line_numbers(tmp_path):
    path = tmp_path / "bad.tsv"
    path.write_text("u1 0.5 0.25\nu2 0.1 oops\n", encoding="utf-8")
    with pytest.raises(FileFormatError, match=r"bad\.tsv:2"):
        fileio.read_scores_tsv(path)
    path.write_text("u1 0.5\nu1 0.25\n", encoding="utf-8")
    with pytest.raises(FileFormatError, match="duplicate"):
        fileio.read_scores_tsv(path)
    path.write_text("", encoding="utf-8")
    with pytest.raises(FileFormatError, match="no utterances"):
        fileio.read_scores_tsv(path)
    path.write_text("u1 inf\n", encoding="utf-8")
    with pytest.raises(FileFormatError, match="finite"):
        fileio.read_scores_tsv(path)


def test_annotations_round_trip(tmp_path):
    path = tmp_path / "ann.tsv"
    corpus = {
        "x": FrameLabelSequence(FrameGrid(5), [0, 0, 1, 1, 0]),
        "y": FrameLabelSequence(FrameGrid(2), [1, 1]),
    }
    fileio.write_annotations_tsv(path, corpus)
    parsed = fileio.read_annotations_tsv(path)
    assert set(parsed) == {"x", "y"}
    assert parsed["x"].labels.tolist() == [0, 0, 1, 1, 0]
    assert parsed["y"].labels.tolist() == [1, 1]
    # byte-stable second pass
    first = path.read_bytes()
    fileio.write_annotations_tsv(path, parsed)
    assert path.read_bytes() == first


def test_annotations_snap_tolerance(tmp_path):
    path = tmp_path / "ann.tsv"
    path.write_text("u\t0\t0.0399999996\tspoof\n", encoding="utf-8")
    parsed = fileio.read_annotations_tsv(path)
    assert parsed["u"].labels.tolist() == [1, 1]
    path.write_text("u\t0\t0.03\tspoof\n", encoding="utf-8")
    with pytest.raises(FileFormatError, match="grid"):
        fileio.read_annotations_tsv(path)


def test_annotations_must_tile(tmp_path):
    path = tmp_path / "ann.tsv"
    path.write_text(
        "u\t0\t0.04\tbonafide\nu\t0.06\t0.1\tspoof\n", encoding="utf-8"
    )
    with pytest.raises(FileFormatError, match="tile"):
        fileio.read_annotations_tsv(path)
    path.write_text("u\t0.02\t0.04\tbonafide\n", encoding="utf-8")
    with pytest.raises(FileFormatError, match="expected 0"):
        fileio.read_annotations_tsv(path)
    path.write_text("u\t0\t0.04\tfake\n", encoding="utf-8")
    with pytest.raises(FileFormatError, match="unknown label"):
        fileio.read_annotations_tsv(path)


def test_regions_from_annotations_merges_split_runs(tmp_path):
    path = tmp_path / "ann.tsv"
    # two adjacent spoof records are one region after canonicalization
    path.write_text(
        "u\t0\t0.04\tspoof\nu\t0.04\t0.08\tspoof\nu\t0.08\t0.1\tbonafide\n",
        encoding="utf-8",
    )
    regions = fileio.regions_from_annotations(fileio.read_annotations_tsv(path))
    assert len(regions) == 1
    assert regions[0].start == 0.0 and regions[0].end == pytest.approx(0.08)


def test_proposals_round_trip(tmp_path):
    path = tmp_path / "p.tsv"
    path.write_text("u2\t0.5\t1.25\t0.75\nu1\t0\t0.5\t0.5\n", encoding="utf-8")
    props = fileio.read_proposals_tsv(path)
    assert len(props) == 2
    fileio.write_proposals_tsv(path, props)
    assert path.read_text(encoding="utf-8") == "u1\t0\t0.5\t0.5\nu2\t0.5\t1.25\t0.75\n"
    # an empty proposal file is legal (zero proposals scores zero recall)
    path.write_text("", encoding="utf-8")
    assert fileio.read_proposals_tsv(path) == []


def test_wav_round_trip_bit_exact(tmp_path):
    path = tmp_path / "t.wav"
    rng = np.random.default_rng(82)
    ints = rng.integers(-32768, 32768, 4000, dtype=np.int64)
    w = Waveform(ints / 32768.0, 16000)
    fileio.write_wav(path, w)
    back = fileio.read_wav(path)
    assert back.sample_rate == 16000
    assert np.array_equal(back.samples, w.samples)
    # write(read(x)) is byte-identical
    first = path.read_bytes()
    fileio.write_wav(path, back)
    assert path.read_bytes() == first


def test_wav_rejects_unsupported_encodings(tmp_path):
    import wave

    path = tmp_path / "stereo.wav"
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(2)
        fh.setsampwidth(2)
        fh.setframerate(8000)
        fh.writeframes(b"\x00\x00\x00\x00")
    with pytest.raises(FileFormatError, match="channels=2"):
        fileio.read_wav(path)
    path8 = tmp_path / "8bit.wav"
    with wave.open(str(path8), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(1)
        fh.setframerate(8000)
        fh.writeframes(b"\x00\x00")
    with pytest.raises(FileFormatError, match="sample_width=1"):
        fileio.read_wav(path8)


def test_report_serialization(tmp_path):
    report = {"a": {"b": 0.25, "c": None}, "d": 3, "e": "detected"}
    jpath = tmp_path / "r.json"
    cpath = tmp_path / "r.csv"
    fileio.write_report_json(jpath, report)
    fileio.write_report_csv(cpath, report)
    import json

    assert json.loads(jpath.read_text(encoding="utf-8")) == report
    lines = cpath.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "metric,value"
    assert "a.b,0.25" in lines
    assert "a.c,undefined" in lines
    assert "d,3" in lines
