"""End-to-end tests for the command-line interface.

Every test drives ``flowmind.cli.main`` in-process with explicit argv lists
and asserts on exit codes, captured stdout/stderr, and the files written.
"""

from __future__ import annotations

import json
import shutil
import zipfile

import pytest

from flowmind.cli import CONFIG_ENV, EXIT_INPUT, EXIT_OK, EXIT_WRITE, main
from flowmind.synth import SynthConfig, write_corpus

SCENE = {
    "image": {"width": 960, "height": 480},
    "elements": [
        {"class": "rectangle", "score": 0.95, "bbox": [100, 100, 260, 200]},
        {"class": "rectangle", "score": 0.9, "bbox": [500, 100, 660, 200]},
        {
            "class": "arrow",
            "score": 0.85,
            "bbox": [260, 140, 500, 160],
            "keypoints": [[260, 150], [500, 150]],
        },
        {"class": "textblock", "score": 0.8, "bbox": [120, 130, 240, 170], "text": "go"},
    ],
}

# Two heavily overlapping rectangles (IoU ~0.88): suppression keeps one.
OVERLAP = {
    "image": {"width": 960, "height": 480},
    "elements": [
        {"class": "rectangle", "score": 0.95, "bbox": [100, 100, 260, 200]},
        {"class": "rectangle", "score": 0.60, "bbox": [110, 100, 270, 200]},
    ],
}


@pytest.fixture(autouse=True)
def _isolate_config_env(monkeypatch):
    monkeypatch.delenv(CONFIG_ENV, raising=False)


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    directory = tmp_path_factory.mktemp("corpus")
    write_corpus(SynthConfig(seed=0, n_images=4), str(directory))
    return directory


def write_json(path, payload):
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


def run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def read_report(out_dir, stem):
    return json.loads((out_dir / f"{stem}.report.json").read_text(encoding="utf-8"))


class TestConvertSingleFile:
    def test_writes_all_formats_and_report(self, tmp_path, capsys):
        src = write_json(tmp_path / "scene.det", SCENE)
        out = tmp_path / "out"
        code, stdout, _ = run(capsys, ["convert", str(src), "--out", str(out)])
        assert code == EXIT_OK
        for name in ("scene.svg", "scene.drawio", "scene.pptx", "scene.report.json"):
            assert (out / name).is_file()
            assert name in stdout

    def test_report_contents(self, tmp_path, capsys):
        src = write_json(tmp_path / "scene.det", SCENE)
        out = tmp_path / "out"
        code, _, _ = run(capsys, ["convert", str(src), "--out", str(out)])
        assert code == EXIT_OK
        rep = read_report(out, "scene")
        assert rep["file"] == "scene.det"
        assert rep["outputs"] == ["scene.svg", "scene.drawio", "scene.pptx"]
        assert rep["ingest"] == {
            "accepted": 4,
            "clamped": 0,
            "rejected": [],
            "warnings": [],
        }
        assert rep["input_elements"] == 4
        assert rep["suppressed"] == 0
        assert rep["shapes"] == 2
        assert rep["connectors"] == 1
        assert rep["free_texts"] == 0
        assert rep["free_endpoints"] == 0
        assert rep["warnings"] == []
        assert rep["export_warnings"] == []
        cfg = rep["config"]
        assert cfg["dpi"] == 96.0
        assert cfg["nms"] == {"iou_threshold": 0.5, "exempt_text": False}
        assert cfg["recognizer"]["mode"] == "ground_truth_echo"
        assert cfg["layout"]["enabled"] is True

    def test_echo_recognizer_labels_appear_in_svg(self, tmp_path, capsys):
        src = write_json(tmp_path / "scene.det", SCENE)
        out = tmp_path / "out"
        code, _, _ = run(capsys, ["convert", str(src), "--out", str(out)])
        assert code == EXIT_OK
        assert b">go<" in (out / "scene.svg").read_bytes()

    def test_formats_subset(self, tmp_path, capsys):
        src = write_json(tmp_path / "scene.det", SCENE)
        out = tmp_path / "out"
        code, _, _ = run(
            capsys, ["convert", str(src), "--out", str(out), "--formats", "svg"]
        )
        assert code == EXIT_OK
        names = {p.name for p in out.iterdir()}
        assert names == {"scene.svg", "scene.report.json"}

    def test_unknown_format_rejected(self, tmp_path, capsys):
        src = write_json(tmp_path / "scene.det", SCENE)
        code, _, err = run(
            capsys, ["convert", str(src), "--out", str(tmp_path), "--formats", "pdf"]
        )
        assert code == EXIT_INPUT
        assert "unknown format" in err

    def test_malformed_single_file_exits_2(self, tmp_path, capsys):
        src = tmp_path / "bad.det"
        src.write_text("this is not json", encoding="utf-8")
        code, _, err = run(capsys, ["convert", str(src), "--out", str(tmp_path)])
        assert code == EXIT_INPUT
        assert "error:" in err

    def test_missing_input_exits_2(self, tmp_path, capsys):
        code, _, err = run(
            capsys, ["convert", str(tmp_path / "nope.det"), "--out", str(tmp_path)]
        )
        assert code == EXIT_INPUT
        assert "input not found" in err

    def test_nonpositive_dpi_exits_2(self, tmp_path, capsys):
        src = write_json(tmp_path / "scene.det", SCENE)
        code, _, err = run(
            capsys, ["convert", str(src), "--out", str(tmp_path), "--dpi", "0"]
        )
        assert code == EXIT_INPUT
        assert "dpi" in err

    def test_external_recognizer_requires_command(self, tmp_path, capsys):
        src = write_json(tmp_path / "scene.det", SCENE)
        code, _, err = run(
            capsys,
            ["convert", str(src), "--out", str(tmp_path), "--recognizer", "command"],
        )
        assert code == EXIT_INPUT
        assert "command" in err

    def test_external_recognizer_without_image_path_reports_problems(
        self, tmp_path, capsys
    ):
        src = write_json(tmp_path / "scene.det", SCENE)
        out = tmp_path / "out"
        code, _, _ = run(
            capsys,
            [
                "convert",
                str(src),
                "--out",
                str(out),
                "--recognizer",
                "command",
                "--recognizer-command",
                "echo {image} {x0} {y0} {x1} {y1}",
            ],
        )
        assert code == EXIT_OK
        rep = read_report(out, "scene")
        assert rep["config"]["recognizer"]["mode"] == "external_command"
        assert any(
            "no image path" in problem["message"]
            for problem in rep["recognizer_problems"]
        )


class TestConvertBatch:
    def test_directory_collects_det_and_json_only(self, tmp_path, capsys):
        src_dir = tmp_path / "in"
        src_dir.mkdir()
        write_json(src_dir / "a.det", SCENE)
        write_json(src_dir / "b.json", OVERLAP)
        write_json(src_dir / "manifest.json", {"config": {}})
        write_json(src_dir / "c.report.json", {"file": "c"})
        (src_dir / "notes.txt").write_text("ignore me", encoding="utf-8")
        out = tmp_path / "out"
        code, stdout, _ = run(capsys, ["convert", str(src_dir), "--out", str(out)])
        assert code == EXIT_OK
        assert (out / "a.svg").is_file()
        assert (out / "b.svg").is_file()
        assert not (out / "manifest.svg").exists()
        assert not (out / "c.svg").exists()
        assert not (out / "notes.svg").exists()
        assert "a.det" in stdout and "b.json" in stdout

    def test_partial_parse_failure_is_skipped(self, tmp_path, capsys):
        src_dir = tmp_path / "in"
        src_dir.mkdir()
        write_json(src_dir / "good.det", SCENE)
        (src_dir / "bad.det").write_text("{broken", encoding="utf-8")
        out = tmp_path / "out"
        code, _, err = run(capsys, ["convert", str(src_dir), "--out", str(out)])
        assert code == EXIT_OK
        assert "skipped" in err
        assert (out / "good.svg").is_file()
        assert not (out / "bad.svg").exists()

    def test_all_files_failing_exits_2(self, tmp_path, capsys):
        src_dir = tmp_path / "in"
        src_dir.mkdir()
        (src_dir / "x.det").write_text("nope", encoding="utf-8")
        (src_dir / "y.det").write_text("also nope", encoding="utf-8")
        code, _, err = run(
            capsys, ["convert", str(src_dir), "--out", str(tmp_path / "out")]
        )
        assert code == EXIT_INPUT
        assert "all input files failed" in err

    def test_empty_directory_exits_2(self, tmp_path, capsys):
        src_dir = tmp_path / "in"
        src_dir.mkdir()
        code, _, err = run(
            capsys, ["convert", str(src_dir), "--out", str(tmp_path / "out")]
        )
        assert code == EXIT_INPUT
        assert "no input files" in err

    def test_converts_synthetic_corpus(self, corpus, tmp_path, capsys):
        out = tmp_path / "out"
        code, _, _ = run(capsys, ["convert", str(corpus), "--out", str(out)])
        assert code == EXIT_OK
        for det in corpus.glob("*.det"):
            assert (out / f"{det.stem}.svg").is_file()
            assert (out / f"{det.stem}.report.json").is_file()
        # .gt files and the manifest are not conversion inputs
        assert not (out / "manifest.report.json").exists()


class TestWriteFailures:
    def test_convert_unwritable_out_dir_exits_3(self, tmp_path, capsys):
        src = write_json(tmp_path / "scene.det", SCENE)
        blocker = tmp_path / "blocker"
        blocker.write_text("a file, not a directory", encoding="utf-8")
        code, _, err = run(
            capsys, ["convert", str(src), "--out", str(blocker / "sub")]
        )
        assert code == EXIT_WRITE
        assert "cannot create output directory" in err

    def test_synth_unwritable_out_dir_exits_3(self, tmp_path, capsys):
        blocker = tmp_path / "blocker"
        blocker.write_text("in the way", encoding="utf-8")
        code, _, err = run(
            capsys, ["synth", "--out", str(blocker / "corpus"), "--n", "1"]
        )
        assert code == EXIT_WRITE

    def test_eval_unwritable_report_exits_3(self, corpus, tmp_path, capsys):
        blocker = tmp_path / "blocker"
        blocker.write_text("in the way", encoding="utf-8")
        code, _, err = run(
            capsys,
            [
                "eval",
                "--pred",
                str(corpus / "img0000.det"),
                "--gt",
                str(corpus / "img0000.gt"),
                "--out",
                str(blocker / "report.json"),
            ],
        )
        assert code == EXIT_WRITE
        assert "cannot write" in err


class TestConfigLayering:
    def test_config_file_overrides_defaults(self, tmp_path, capsys, monkeypatch):
        cfg_file = write_json(tmp_path / "cfg.json", {"dpi": 150.0, "formats": "svg"})
        monkeypatch.setenv(CONFIG_ENV, str(cfg_file))
        src = write_json(tmp_path / "scene.det", SCENE)
        out = tmp_path / "out"
        code, _, _ = run(capsys, ["convert", str(src), "--out", str(out)])
        assert code == EXIT_OK
        rep = read_report(out, "scene")
        assert rep["config"]["dpi"] == 150.0
        assert {p.name for p in out.iterdir()} == {"scene.svg", "scene.report.json"}

    def test_explicit_flag_overrides_config_file(self, tmp_path, capsys, monkeypatch):
        cfg_file = write_json(tmp_path / "cfg.json", {"dpi": 150.0})
        monkeypatch.setenv(CONFIG_ENV, str(cfg_file))
        src = write_json(tmp_path / "scene.det", SCENE)
        out = tmp_path / "out"
        code, _, _ = run(
            capsys, ["convert", str(src), "--out", str(out), "--dpi", "200"]
        )
        assert code == EXIT_OK
        assert read_report(out, "scene")["config"]["dpi"] == 200.0

    def test_boolean_from_config_file(self, tmp_path, capsys, monkeypatch):
        cfg_file = write_json(
            tmp_path / "cfg.json", {"no_layout": True, "no_nms": True}
        )
        monkeypatch.setenv(CONFIG_ENV, str(cfg_file))
        src = write_json(tmp_path / "scene.det", SCENE)
        out = tmp_path / "out"
        code, _, _ = run(capsys, ["convert", str(src), "--out", str(out)])
        assert code == EXIT_OK
        rep = read_report(out, "scene")
        assert rep["config"]["layout"]["enabled"] is False
        assert rep["config"]["nms"] is None

    def test_boolean_flag_overrides_config_file(self, tmp_path, capsys, monkeypatch):
        cfg_file = write_json(tmp_path / "cfg.json", {"no_layout": False})
        monkeypatch.setenv(CONFIG_ENV, str(cfg_file))
        src = write_json(tmp_path / "scene.det", SCENE)
        out = tmp_path / "out"
        code, _, _ = run(
            capsys, ["convert", str(src), "--out", str(out), "--no-layout"]
        )
        assert code == EXIT_OK
        assert read_report(out, "scene")["config"]["layout"]["enabled"] is False

    def test_shared_config_file_feeds_multiple_commands(
        self, tmp_path, capsys, monkeypatch
    ):
        cfg_file = write_json(tmp_path / "cfg.json", {"dpi": 150.0, "seed": 7})
        monkeypatch.setenv(CONFIG_ENV, str(cfg_file))
        src = write_json(tmp_path / "scene.det", SCENE)
        out = tmp_path / "out"
        code, _, _ = run(capsys, ["convert", str(src), "--out", str(out)])
        assert code == EXIT_OK
        assert read_report(out, "scene")["config"]["dpi"] == 150.0
        corpus_dir = tmp_path / "corpus"
        code, _, _ = run(capsys, ["synth", "--out", str(corpus_dir), "--n", "1"])
        assert code == EXIT_OK
        manifest = json.loads(
            (corpus_dir / "manifest.json").read_text(encoding="utf-8")
        )
        assert manifest["config"]["seed"] == 7

    def test_eval_settings_from_config_file(self, corpus, tmp_path, capsys, monkeypatch):
        cfg_file = write_json(tmp_path / "cfg.json", {"match_iou": 0.45})
        monkeypatch.setenv(CONFIG_ENV, str(cfg_file))
        code, stdout, _ = run(
            capsys,
            [
                "eval",
                "--pred",
                str(corpus / "img0000.det"),
                "--gt",
                str(corpus / "img0000.gt"),
                "--json",
            ],
        )
        assert code == EXIT_OK
        assert json.loads(stdout)["config"]["match_iou"] == 0.45

    def test_unknown_key_rejected(self, tmp_path, capsys, monkeypatch):
        cfg_file = write_json(tmp_path / "cfg.json", {"dpi": 96.0, "sharpness": 11})
        monkeypatch.setenv(CONFIG_ENV, str(cfg_file))
        src = write_json(tmp_path / "scene.det", SCENE)
        code, _, err = run(capsys, ["convert", str(src), "--out", str(tmp_path)])
        assert code == EXIT_INPUT
        assert "unknown setting 'sharpness'" in err

    def test_invalid_json_rejected(self, tmp_path, capsys, monkeypatch):
        cfg_file = tmp_path / "cfg.json"
        cfg_file.write_text("{oops", encoding="utf-8")
        monkeypatch.setenv(CONFIG_ENV, str(cfg_file))
        src = write_json(tmp_path / "scene.det", SCENE)
        code, _, err = run(capsys, ["convert", str(src), "--out", str(tmp_path)])
        assert code == EXIT_INPUT
        assert "not valid JSON" in err

    def test_non_object_json_rejected(self, tmp_path, capsys, monkeypatch):
        cfg_file = write_json(tmp_path / "cfg.json", [1, 2, 3])
        monkeypatch.setenv(CONFIG_ENV, str(cfg_file))
        src = write_json(tmp_path / "scene.det", SCENE)
        code, _, err = run(capsys, ["convert", str(src), "--out", str(tmp_path)])
        assert code == EXIT_INPUT
        assert "must hold a JSON object" in err

    def test_missing_config_file_rejected(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv(CONFIG_ENV, str(tmp_path / "absent.json"))
        src = write_json(tmp_path / "scene.det", SCENE)
        code, _, err = run(capsys, ["convert", str(src), "--out", str(tmp_path)])
        assert code == EXIT_INPUT
        assert "cannot read config file" in err

    def test_recognizer_value_from_config_file_is_validated(
        self, tmp_path, capsys, monkeypatch
    ):
        cfg_file = write_json(tmp_path / "cfg.json", {"recognizer": "bogus"})
        monkeypatch.setenv(CONFIG_ENV, str(cfg_file))
        src = write_json(tmp_path / "scene.det", SCENE)
        code, _, err = run(capsys, ["convert", str(src), "--out", str(tmp_path)])
        assert code == EXIT_INPUT
        assert "recognizer must be one of" in err


class TestDeterminism:
    def test_convert_outputs_are_byte_identical(self, tmp_path, capsys):
        src = write_json(tmp_path / "scene.det", SCENE)
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        assert run(capsys, ["convert", str(src), "--out", str(out_a)])[0] == EXIT_OK
        assert run(capsys, ["convert", str(src), "--out", str(out_b)])[0] == EXIT_OK
        for name in ("scene.svg", "scene.drawio", "scene.pptx", "scene.report.json"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_synth_corpora_are_byte_identical(self, tmp_path, capsys):
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        argv = ["synth", "--seed", "3", "--n", "2"]
        assert run(capsys, argv + ["--out", str(out_a)])[0] == EXIT_OK
        assert run(capsys, argv + ["--out", str(out_b)])[0] == EXIT_OK
        names_a = sorted(p.name for p in out_a.iterdir())
        assert names_a == sorted(p.name for p in out_b.iterdir())
        for name in names_a:
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_eval_json_is_deterministic(self, corpus, capsys):
        argv = ["eval", "--pred", str(corpus), "--gt", str(corpus), "--json"]
        first = run(capsys, argv)
        second = run(capsys, argv)
        assert first == second


class TestLayoutCommand:
    def test_layout_skips_suppression_and_recognition(self, tmp_path, capsys):
        src = write_json(tmp_path / "pair.det", OVERLAP)
        out = tmp_path / "out"
        code, _, _ = run(capsys, ["layout", str(src), "--out", str(out)])
        assert code == EXIT_OK
        rep = read_report(out, "pair")
        assert rep["config"]["nms"] is None
        assert rep["config"]["recognizer"]["mode"] == "none"
        assert rep["suppressed"] == 0
        assert rep["shapes"] == 2

    def test_convert_suppresses_the_same_pair(self, tmp_path, capsys):
        src = write_json(tmp_path / "pair.det", OVERLAP)
        out = tmp_path / "out"
        code, _, _ = run(capsys, ["convert", str(src), "--out", str(out)])
        assert code == EXIT_OK
        rep = read_report(out, "pair")
        assert rep["suppressed"] == 1
        assert rep["shapes"] == 1

    def test_layout_leaves_labels_unrecognized(self, tmp_path, capsys):
        src = write_json(tmp_path / "scene.det", SCENE)
        out = tmp_path / "out"
        code, _, _ = run(
            capsys, ["layout", str(src), "--out", str(out), "--formats", "svg"]
        )
        assert code == EXIT_OK
        assert b">go<" not in (out / "scene.svg").read_bytes()

    def test_layout_can_disable_auto_layout(self, tmp_path, capsys):
        src = write_json(tmp_path / "scene.det", SCENE)
        out = tmp_path / "out"
        code, _, _ = run(
            capsys, ["layout", str(src), "--out", str(out), "--no-layout"]
        )
        assert code == EXIT_OK
        assert read_report(out, "scene")["config"]["layout"]["enabled"] is False


class TestEval:
    def test_identity_corpus_table(self, corpus, capsys):
        code, stdout, _ = run(
            capsys, ["eval", "--pred", str(corpus), "--gt", str(corpus)]
        )
        assert code == EXIT_OK
        assert stdout.startswith("class")
        assert "weighted" in stdout
        assert "diagram accuracy: 1.000" in stdout
        assert "corpus CER 0.000" in stdout

    def test_identity_corpus_json(self, corpus, capsys):
        code, stdout, _ = run(
            capsys, ["eval", "--pred", str(corpus), "--gt", str(corpus), "--json"]
        )
        assert code == EXIT_OK
        payload = json.loads(stdout)
        det = payload["detection"]
        assert det["weighted_precision"] == 1.0
        assert det["weighted_recall"] == 1.0
        assert det["weighted_f1"] == 1.0
        assert det["diagram_accuracy"] == 1.0
        assert payload["connections"]["f1"] == 1.0
        assert payload["text"]["corpus_cer"] == 0.0
        assert payload["text"]["pairs"] > 0
        assert len(payload["images"]) == 4
        for row in payload["images"]:
            assert row["f1"] == 1.0
            assert row["diagram_accurate"] is True

    def test_out_writes_json_while_stdout_stays_table(self, corpus, tmp_path, capsys):
        target = tmp_path / "report.json"
        code, stdout, _ = run(
            capsys,
            ["eval", "--pred", str(corpus), "--gt", str(corpus), "--out", str(target)],
        )
        assert code == EXIT_OK
        assert stdout.startswith("class")
        payload = json.loads(target.read_text(encoding="utf-8"))
        assert payload["detection"]["weighted_f1"] == 1.0

    def test_single_file_pair(self, corpus, capsys):
        code, stdout, _ = run(
            capsys,
            [
                "eval",
                "--pred",
                str(corpus / "img0001.det"),
                "--gt",
                str(corpus / "img0001.gt"),
                "--json",
            ],
        )
        assert code == EXIT_OK
        payload = json.loads(stdout)
        assert len(payload["images"]) == 1
        assert payload["images"][0]["stem"] == "img0001"
        assert payload["images"][0]["f1"] == 1.0

    def test_config_flags_echoed(self, corpus, capsys):
        code, stdout, _ = run(
            capsys,
            [
                "eval",
                "--pred",
                str(corpus),
                "--gt",
                str(corpus),
                "--json",
                "--match-iou",
                "0.4",
                "--lenient",
                "--arrow-unordered",
            ],
        )
        assert code == EXIT_OK
        cfg = json.loads(stdout)["config"]
        assert cfg["match_iou"] == 0.4
        assert cfg["lenient"] is True
        assert cfg["arrow_ordered"] is False

    def test_missing_prediction_exits_2(self, corpus, tmp_path, capsys):
        clone = tmp_path / "clone"
        shutil.copytree(corpus, clone)
        (clone / "img0002.det").unlink()
        code, _, err = run(capsys, ["eval", "--pred", str(clone), "--gt", str(clone)])
        assert code == EXIT_INPUT
        assert "no prediction for img0002" in err

    def test_extra_prediction_warns_but_passes(self, corpus, tmp_path, capsys):
        clone = tmp_path / "clone"
        shutil.copytree(corpus, clone)
        shutil.copy(clone / "img0000.det", clone / "img9999.det")
        code, _, err = run(capsys, ["eval", "--pred", str(clone), "--gt", str(clone)])
        assert code == EXIT_OK
        assert "img9999.det has no ground truth" in err

    def test_mixed_file_and_directory_exits_2(self, corpus, capsys):
        code, _, err = run(
            capsys,
            ["eval", "--pred", str(corpus / "img0000.det"), "--gt", str(corpus)],
        )
        assert code == EXIT_INPUT
        assert "both be files or both be directories" in err

    def test_malformed_prediction_exits_2(self, corpus, tmp_path, capsys):
        bad = tmp_path / "bad.det"
        bad.write_text("not json", encoding="utf-8")
        code, _, err = run(
            capsys,
            ["eval", "--pred", str(bad), "--gt", str(corpus / "img0000.gt")],
        )
        assert code == EXIT_INPUT
        assert "error:" in err

    def test_invalid_threshold_exits_2(self, corpus, capsys):
        code, _, err = run(
            capsys,
            [
                "eval",
                "--pred",
                str(corpus),
                "--gt",
                str(corpus),
                "--match-iou",
                "1.5",
            ],
        )
        assert code == EXIT_INPUT

    def test_empty_gt_directory_exits_2(self, tmp_path, capsys):
        pred = tmp_path / "pred"
        gt = tmp_path / "gt"
        pred.mkdir()
        gt.mkdir()
        code, _, err = run(capsys, ["eval", "--pred", str(pred), "--gt", str(gt)])
        assert code == EXIT_INPUT
        assert "no .gt files" in err


class TestSynthCommand:
    def test_writes_corpus(self, tmp_path, capsys):
        out = tmp_path / "corpus"
        code, stdout, _ = run(
            capsys, ["synth", "--out", str(out), "--seed", "1", "--n", "4"]
        )
        assert code == EXIT_OK
        assert "wrote 4 image pairs" in stdout
        names = {p.name for p in out.iterdir()}
        expected = {"manifest.json"}
        for i in range(4):
            expected.add(f"img{i:04d}.gt")
            expected.add(f"img{i:04d}.det")
        assert names == expected

    def test_grid_flag_sets_image_size(self, tmp_path, capsys):
        out = tmp_path / "corpus"
        code, _, _ = run(
            capsys,
            ["synth", "--out", str(out), "--n", "1", "--grid", "2x3"],
        )
        assert code == EXIT_OK
        doc = json.loads((out / "img0000.gt").read_text(encoding="utf-8"))
        assert doc["image"]["width"] == 3 * 320
        assert doc["image"]["height"] == 2 * 260

    def test_bad_grid_exits_2(self, tmp_path, capsys):
        code, _, err = run(
            capsys, ["synth", "--out", str(tmp_path / "c"), "--grid", "abc"]
        )
        assert code == EXIT_INPUT
        assert "grid must look like" in err

    def test_invalid_probability_exits_2(self, tmp_path, capsys):
        code, _, err = run(
            capsys,
            ["synth", "--out", str(tmp_path / "c"), "--drop-prob", "1.5"],
        )
        assert code == EXIT_INPUT

    def test_zero_images(self, tmp_path, capsys):
        out = tmp_path / "corpus"
        code, stdout, _ = run(capsys, ["synth", "--out", str(out), "--n", "0"])
        assert code == EXIT_OK
        assert "wrote 0 image pairs" in stdout
        assert (out / "manifest.json").is_file()

    def test_perturbed_corpus_round_trips_through_eval(self, tmp_path, capsys):
        out = tmp_path / "corpus"
        code, _, _ = run(
            capsys,
            [
                "synth",
                "--out",
                str(out),
                "--seed",
                "5",
                "--n",
                "3",
                "--drop-prob",
                "0.2",
                "--bbox-jitter",
                "2.0",
            ],
        )
        assert code == EXIT_OK
        code, stdout, _ = run(
            capsys, ["eval", "--pred", str(out), "--gt", str(out), "--json"]
        )
        assert code == EXIT_OK
        payload = json.loads(stdout)
        recall = payload["detection"]["weighted_recall"]
        assert recall is not None and recall <= 1.0


class TestValidateCommand:
    def test_single_file(self, tmp_path, capsys):
        src = write_json(tmp_path / "scene.det", SCENE)
        code, stdout, _ = run(capsys, ["validate", str(src)])
        assert code == EXIT_OK
        assert "scene.det: ok" in stdout
        assert "accepted 4" in stdout
        assert "image 960x480" in stdout

    def test_directory_picks_det_files(self, corpus, capsys):
        code, stdout, _ = run(capsys, ["validate", str(corpus)])
        assert code == EXIT_OK
        for i in range(4):
            assert f"img{i:04d}.det: ok" in stdout
        assert ".gt" not in stdout
        assert "manifest" not in stdout

    def test_ground_truth_mode(self, corpus, capsys):
        code, stdout, _ = run(capsys, ["validate", str(corpus), "--ground-truth"])
        assert code == EXIT_OK
        for i in range(4):
            assert f"img{i:04d}.gt: ok" in stdout

    def test_rejected_elements_are_listed(self, tmp_path, capsys):
        doc = {
            "image": SCENE["image"],
            "elements": SCENE["elements"]
            + [
                {"class": "rectangle", "score": 0.5, "bbox": [50, 50, 50, 90]},
                "not an element",
            ],
        }
        src = write_json(tmp_path / "mixed.det", doc)
        code, stdout, _ = run(capsys, ["validate", str(src)])
        assert code == EXIT_OK
        assert "rejected 2" in stdout
        assert "rejected element 4: zero-area bbox" in stdout
        assert "rejected element 5: element is not an object" in stdout

    def test_malformed_file_exits_2(self, tmp_path, capsys):
        src = tmp_path / "bad.det"
        src.write_text("[]", encoding="utf-8")
        code, _, err = run(capsys, ["validate", str(src)])
        assert code == EXIT_INPUT
        assert "top level must be a JSON object" in err


class TestParserBasics:
    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0
        assert capsys.readouterr().out.startswith("flowmind ")

    def test_missing_subcommand_is_a_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2

    def test_pptx_output_is_a_valid_package(self, tmp_path, capsys):
        src = write_json(tmp_path / "scene.det", SCENE)
        out = tmp_path / "out"
        code, _, _ = run(
            capsys, ["convert", str(src), "--out", str(out), "--formats", "pptx"]
        )
        assert code == EXIT_OK
        with zipfile.ZipFile(out / "scene.pptx") as zf:
            assert zf.testzip() is None
