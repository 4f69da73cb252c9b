"""Command line behavior: help texts, exit codes, artifacts, determinism."""
import json
import os
from pathlib import Path

import numpy as np
import pytest

from gfdmkit import PRESET_NAMES, make_preset
from gfdmkit.cli import main
from gfdmkit.iqio import read_grid_csv, read_iq
from gfdmkit.params import config_to_json

GOLDEN = Path(__file__).parent / "golden"

HELP_CASES = [
    ("help_top.txt", ["--help"]),
    ("help_presets.txt", ["presets", "--help"]),
    ("help_synth.txt", ["synth", "--help"]),
    ("help_demod.txt", ["demod", "--help"]),
    ("help_simulate.txt", ["simulate", "--help"]),
    ("help_analyze.txt", ["analyze", "--help"]),
    ("help_guardband.txt", ["guardband", "--help"]),
]


@pytest.fixture(autouse=True)
def fixed_terminal(monkeypatch):
    monkeypatch.setenv("COLUMNS", "80")
    monkeypatch.delenv("GFDM_THREADS", raising=False)


@pytest.mark.parametrize("fname,argv", HELP_CASES)
def test_help_texts_are_stable(fname, argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 0
    assert capsys.readouterr().out == (GOLDEN / fname).read_text()


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert capsys.readouterr().out.startswith("gfdmkit ")


class TestPresetsList:
    def test_one_json_object_per_preset(self, capsys):
        assert main(["presets", "list"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == len(PRESET_NAMES)
        entries = [json.loads(ln) for ln in lines]
        assert [e["name"] for e in entries] == list(PRESET_NAMES)
        ofdm = next(e for e in entries if e["name"] == "ofdm")
        assert ofdm["claims"]["orthogonal"] == "yes"
        assert ofdm["defaults"]["subcarriers"] == 64
        assert ofdm["defaults"]["fingerprint"]

    def test_out_file_and_manifest(self, tmp_path, capsys):
        out = str(tmp_path / "presets.jsonl")
        assert main(["presets", "list", "--out", out]) == 0
        assert open(out).read() == capsys.readouterr().out
        manifest = json.loads(open(f"{out}.manifest.json").read())
        assert manifest["command"].startswith("gfdmkit presets list")
        assert manifest["outputs"] == [out]


class TestSynthDemod:
    def test_round_trip_recovers_the_grid(self, tmp_path):
        iq = str(tmp_path / "a.iq")
        sent_csv = str(tmp_path / "sent.csv")
        est_csv = str(tmp_path / "est.csv")
        assert main(["synth", "--preset", "gfdm", "--random", "7",
                     "--dump-grid", sent_csv, "--out", iq]) == 0
        assert main(["demod", "--preset", "gfdm", "--iq", iq,
                     "--receiver", "zf", "--out", est_csv]) == 0
        v, _ = make_preset("gfdm")
        sent = read_grid_csv(sent_csv, v.grid).symbols
        est = read_grid_csv(est_csv, v.grid).symbols
        assert np.max(np.abs(est - sent)) <= 1e-9

    def test_grid_file_replays_identically(self, tmp_path):
        a, b = str(tmp_path / "a.iq"), str(tmp_path / "b.iq")
        grid_csv = str(tmp_path / "g.csv")
        assert main(["synth", "--preset", "ofdm", "--random", "5",
                     "--dump-grid", grid_csv, "--out", a]) == 0
        assert main(["synth", "--preset", "ofdm", "--data", grid_csv, "--out", b]) == 0
        assert open(a, "rb").read() == open(b, "rb").read()

    def test_offset_mapped_preset_round_trip(self, tmp_path):
        iq = str(tmp_path / "o.iq")
        sent_csv = str(tmp_path / "sent.csv")
        est_csv = str(tmp_path / "est.csv")
        assert main(["synth", "--preset", "fbmc-oqam", "--random", "3",
                     "--dump-grid", sent_csv, "--out", iq]) == 0
        assert main(["demod", "--preset", "fbmc-oqam", "--iq", iq, "--out", est_csv]) == 0
        v, _ = make_preset("fbmc-oqam")
        sent = read_grid_csv(sent_csv, v.grid).symbols
        est = read_grid_csv(est_csv, v.grid).symbols
        assert np.max(np.abs(est - sent)) <= 1e-8

    def test_multi_block_stream_length(self, tmp_path):
        iq = str(tmp_path / "s.iq")
        assert main(["synth", "--preset", "ofdm", "--blocks", "3", "--out", iq]) == 0
        samples, meta = read_iq(iq)
        assert meta["blocks"] == 3 and meta["frame_length"] == 80
        assert samples.size == 3 * 80

    def test_config_file_input(self, tmp_path):
        v, _ = make_preset("gfdm")
        cfg_path = tmp_path / "wf.json"
        cfg_path.write_text(config_to_json(v.config))
        iq = str(tmp_path / "c.iq")
        assert main(["synth", "--config", str(cfg_path), "--out", iq]) == 0
        _, meta = read_iq(iq)
        assert meta["config_fingerprint"] == v.fingerprint

    def test_fingerprint_mismatch_warns_but_proceeds(self, tmp_path, capsys):
        iq = str(tmp_path / "w.iq")
        est = str(tmp_path / "w.csv")
        assert main(["synth", "--preset", "gfdm", "--out", iq]) == 0
        assert main(["demod", "--preset", "gfdm", "--rolloff", "0.4",
                     "--iq", iq, "--out", est]) == 0
        assert "was written for config" in capsys.readouterr().err

    def test_manifest_contents(self, tmp_path):
        iq = str(tmp_path / "m.iq")
        assert main(["synth", "--preset", "ofdm", "--random", "9", "--out", iq]) == 0
        manifest = json.loads(open(f"{iq}.manifest.json").read())
        assert manifest["command"].startswith("gfdmkit synth --preset ofdm")
        assert manifest["seed"] == 9
        assert manifest["outputs"][0] == iq
        assert manifest["wall_time_s"] >= 0
        assert manifest["tool_version"]
        v, _ = make_preset("ofdm")
        assert manifest["config_fingerprint"] == v.fingerprint


class TestExitCodes:
    def test_missing_config_source(self, tmp_path, capsys):
        assert main(["synth", "--out", str(tmp_path / "x.iq")]) == 2
        assert "error presets.incompatible_hint" in capsys.readouterr().err

    def test_bad_hint_for_preset(self, tmp_path, capsys):
        assert main(["synth", "--preset", "ofdm", "--m", "2",
                     "--out", str(tmp_path / "x.iq")]) == 2
        assert "presets.incompatible_hint" in capsys.readouterr().err

    def test_hints_clash_with_config_file(self, tmp_path, capsys):
        v, _ = make_preset("ofdm")
        cfg = tmp_path / "c.json"
        cfg.write_text(config_to_json(v.config))
        assert main(["synth", "--config", str(cfg), "--k", "8",
                     "--out", str(tmp_path / "x.iq")]) == 2

    def test_invalid_config_file(self, tmp_path, capsys):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"schema": "v1", "samples_per_period": 8, "periods": 4,
                                   "subsymbol_spacing": 8, "subcarrier_spacing": 5}))
        assert main(["synth", "--config", str(cfg), "--out", str(tmp_path / "x.iq")]) == 2
        assert "params.invalid_config" in capsys.readouterr().err

    def test_missing_input_file(self, tmp_path, capsys):
        assert main(["synth", "--config", str(tmp_path / "nope.json"),
                     "--out", str(tmp_path / "x.iq")]) == 2
        assert "io.missing_input" in capsys.readouterr().err

    def test_rank_deficient_receiver_is_a_runtime_failure(self, tmp_path, capsys):
        iq = str(tmp_path / "s.iq")
        assert main(["synth", "--preset", "sefdm", "--out", iq]) == 0
        assert main(["demod", "--preset", "sefdm", "--iq", iq,
                     "--receiver", "zf", "--out", str(tmp_path / "s.csv")]) == 3
        assert "modem.rank_deficient" in capsys.readouterr().err

    def test_spectral_null_is_a_runtime_failure(self, tmp_path, capsys):
        taps = tmp_path / "taps.csv"
        taps.write_text("1.0,0.0\n-1.0,0.0\n")
        assert main(["simulate", "--preset", "ofdm", "--channel", str(taps),
                     "--snr", "4", "--trials", "2",
                     "--out", str(tmp_path / "sim")]) == 3
        assert "channel.zero_bin" in capsys.readouterr().err

    def test_mmse_needs_noise_var(self, tmp_path, capsys):
        iq = str(tmp_path / "s.iq")
        assert main(["synth", "--preset", "ofdm", "--out", iq]) == 0
        assert main(["demod", "--preset", "ofdm", "--iq", iq,
                     "--receiver", "mmse", "--out", str(tmp_path / "s.csv")]) == 2

    def test_data_and_blocks_conflict(self, tmp_path):
        grid_csv = tmp_path / "g.csv"
        grid_csv.write_text("k,m,re,im\n0,0,1.0,0.0\n")
        assert main(["synth", "--preset", "ofdm", "--data", str(grid_csv),
                     "--blocks", "2", "--out", str(tmp_path / "x.iq")]) == 2

    def test_unknown_metric(self, tmp_path, capsys):
        assert main(["analyze", "--preset", "ofdm", "--metrics", "evm",
                     "--out", str(tmp_path / "a")]) == 2

    def test_iq_frame_length_mismatch(self, tmp_path, capsys):
        iq = str(tmp_path / "odd.iq")
        np.zeros(14, dtype="<f8").tofile(iq)  # 7 complex samples
        assert main(["demod", "--preset", "ofdm", "--iq", iq,
                     "--out", str(tmp_path / "x.csv")]) == 2
        assert "framing.length_mismatch" in capsys.readouterr().err


class TestSimulate:
    def test_outputs_and_determinism(self, tmp_path):
        base1, base2 = str(tmp_path / "r1"), str(tmp_path / "r2")
        argv = ["simulate", "--preset", "ofdm", "--snr", "0,4", "--trials", "5",
                "--seed", "3"]
        assert main(argv + ["--out", base1]) == 0
        assert main(argv + ["--threads", "4", "--out", base2]) == 0
        assert open(f"{base1}.csv").read() == open(f"{base2}.csv").read()
        r1 = json.loads(open(f"{base1}.json").read())
        r2 = json.loads(open(f"{base2}.json").read())
        assert r1["points"] == r2["points"]
        assert [p["snr_db"] for p in r1["points"]] == [0.0, 4.0]
        for p in r1["points"]:
            assert p["ci_low"] <= p["ser"] <= p["ci_high"]

    def test_thread_cap_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("GFDM_THREADS", "1")
        base = str(tmp_path / "capped")
        assert main(["simulate", "--preset", "ofdm", "--snr", "4", "--trials", "4",
                     "--threads", "16", "--out", base]) == 0
        assert os.path.exists(f"{base}.csv")

    def test_multipath_channel_file(self, tmp_path):
        taps = tmp_path / "taps.csv"
        taps.write_text("re,im\n0.9,0.0\n0.3,0.1\n")
        base = str(tmp_path / "mp")
        assert main(["simulate", "--preset", "ofdm", "--channel", str(taps),
                     "--snr", "inf", "--trials", "3", "--out", base]) == 0
        report = json.loads(open(f"{base}.json").read())
        assert report["points"][0]["errors"] == 0
        manifest = json.loads(open(f"{base}.csv.manifest.json").read())
        assert str(taps) in manifest["inputs"]


class TestAnalyze:
    def test_synthesized_full_report(self, tmp_path):
        base = str(tmp_path / "rep")
        assert main(["analyze", "--preset", "gfdm", "--metrics",
                     "psd,papr,gram,ambiguity,oob", "--blocks", "20",
                     "--out", base]) == 0
        payload = json.loads(open(f"{base}.json").read())
        m = payload["metrics"]
        assert m["oob_db"] < 0
        assert m["gram_max_offdiag"] > 1e-3  # rc pulse is not orthogonal
        assert m["rank"] == 80
        assert payload["ambiguity"]["subcarrier_offsets"] == [-2, -1, 0, 1, 2]
        for suffix in (".psd.csv", ".papr.csv", ".ambiguity.csv"):
            assert os.path.exists(base + suffix)

    def test_iq_only_analysis(self, tmp_path, rng):
        iq = str(tmp_path / "ext.iq")
        x = rng.standard_normal(8192) + 1j * rng.standard_normal(8192)
        from gfdmkit.iqio import write_iq

        write_iq(iq, x)
        base = str(tmp_path / "ext")
        assert main(["analyze", "--iq", iq, "--metrics", "psd,papr",
                     "--segment", "256", "--papr-block", "512", "--out", base]) == 0
        payload = json.loads(open(f"{base}.json").read())
        assert payload["config_fingerprint"] is None
        assert len(payload["metrics"]["psd_power"]) == 256

    def test_config_needing_metric_without_config(self, tmp_path, rng, capsys):
        iq = str(tmp_path / "ext.iq")
        from gfdmkit.iqio import write_iq

        write_iq(iq, rng.standard_normal(2048) * (1 + 0j))
        assert main(["analyze", "--iq", iq, "--metrics", "gram",
                     "--out", str(tmp_path / "x")]) == 2

    def test_inband_restriction(self, tmp_path):
        base = str(tmp_path / "half")
        assert main(["analyze", "--preset", "ofdm", "--metrics", "oob",
                     "--inband", "0:32", "--blocks", "30", "--out", base]) == 0
        payload = json.loads(open(f"{base}.json").read())
        assert -60 < payload["metrics"]["oob_db"] < 0

    def test_bad_inband_range(self, tmp_path):
        assert main(["analyze", "--preset", "ofdm", "--metrics", "oob",
                     "--inband", "32:8", "--out", str(tmp_path / "x")]) == 2


class TestGuardband:
    def test_stdout_report(self, capsys):
        assert main(["guardband", "ofdm", "ofdm", "--guard", "0", "--offset", "0"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["guard_subcarriers"] == 0
        assert payload["leakage_db"] == "-inf" or payload["leakage_db"] < -200

    def test_file_report_with_config_paths(self, tmp_path):
        v, _ = make_preset("gfdm")
        cfg = tmp_path / "wf.json"
        cfg.write_text(config_to_json(v.config))
        out = str(tmp_path / "gb.json")
        assert main(["guardband", str(cfg), "gfdm", "--guard", "1",
                     "--offset", "3", "--out", out]) == 0
        payload = json.loads(open(out).read())
        assert isinstance(payload["leakage_db"], float)
        assert os.path.exists(f"{out}.manifest.json")

    def test_unknown_token(self, capsys):
        assert main(["guardband", "ofdm", "not-a-preset"]) == 2
        assert "presets.incompatible_hint" in capsys.readouterr().err

    def test_overlap_rejected(self, capsys):
        assert main(["guardband", "ofdm", "ofdm", "--guard", "32"]) == 2
        assert "analysis.overlapping_allocations" in capsys.readouterr().err
