import json
from pathlib import Path

import numpy as np
import pytest

from curveflow import (
    Constant,
    IntegratorControls,
    PanYang,
    PowerSum,
    theta_grid,
)
from curveflow.cli import (
    ConfigError,
    InitialCurve,
    OutputPaths,
    RunConfig,
    check,
    emit_config,
    load_initial,
    main,
    parse_config,
    run,
    sweep,
)

MINIMAL = "flow = pan-yang\nmean = 1.0\ncos = 0.0, 0.2\n"


class TestParseConfig:
    def test_minimal_defaults(self):
        cfg = parse_config(MINIMAL)
        assert cfg.flow == PanYang()
        assert cfg.initial.kind == "coeffs"
        assert cfg.initial.mean == 1.0
        assert cfg.initial.cos == (0.0, 0.2)
        assert cfg.controls == IntegratorControls()
        assert cfg.frame_count == 16
        assert cfg.outputs.timeseries == "timeseries.csv"
        assert cfg.outputs.svg is None

    def test_bracketed_lists(self):
        cfg = parse_config("flow = pan-yang\nmean = 1\ncos = [0, 0.2]\nsin = []\n")
        assert cfg.initial.cos == (0.0, 0.2)
        assert cfg.initial.sin == ()

    def test_powersum_flow(self):
        cfg = parse_config("flow = powersum:1,1,0\nmean = 1.0\n")
        assert cfg.flow == PowerSum(terms=((1.0, 1.0, 0.0),))

    def test_const_flow_and_overrides(self):
        text = (
            "flow = const:-1\nmean = 1\ncos = 0, 0.2\n"
            "t_max = 5\nrel_tol = 1e-10\nsample_interval = 0.1\nframe_count = 4\n"
            "svg = anim\n"
        )
        cfg = parse_config(text)
        assert cfg.flow == Constant(c=-1.0)
        assert cfg.controls.t_max == 5.0
        assert cfg.controls.rel_tol == 1e-10
        assert cfg.controls.sample_interval == 0.1
        assert cfg.frame_count == 4
        assert cfg.outputs.svg == "anim"

    def test_comments_and_blank_lines(self):
        cfg = parse_config("# a comment\n\nflow = pan-yang # trailing\nmean = 1.0\n")
        assert cfg.flow == PanYang()

    def test_unknown_flow_named(self):
        with pytest.raises(ConfigError, match="banana"):
            parse_config("flow = banana\nmean = 1.0\n")

    def test_missing_flow(self):
        with pytest.raises(ConfigError, match="flow"):
            parse_config("mean = 1.0\n")

    def test_missing_initial(self):
        with pytest.raises(ConfigError, match="initial source"):
            parse_config("flow = pan-yang\n")

    def test_two_initial_sources(self):
        with pytest.raises(ConfigError, match="exactly one"):
            parse_config("flow = pan-yang\nmean = 1.0\nsamples_file = x.csv\n")

    def test_unknown_key_with_line(self):
        with pytest.raises(ConfigError, match="line 2.*sausage"):
            parse_config("flow = pan-yang\nsausage = 7\nmean = 1\n")

    def test_bad_number_names_field_and_line(self):
        with pytest.raises(ConfigError, match="line 3.*'t_max'"):
            parse_config("flow = pan-yang\nmean = 1\nt_max = soon\n")

    def test_duplicate_key(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config("flow = pan-yang\nflow = lin-tsai\nmean = 1\n")

    def test_frame_count_minimum(self):
        with pytest.raises(ConfigError, match="frame_count"):
            parse_config(MINIMAL + "frame_count = 1\n")

    def test_bad_controls_rejected(self):
        with pytest.raises(ConfigError, match="controls"):
            parse_config(MINIMAL + "rel_tol = -1\n")

    def test_missing_equals(self):
        with pytest.raises(ConfigError, match="key = value"):
            parse_config("flow pan-yang\n")

    def test_cos_requires_inline_mean(self):
        with pytest.raises(ConfigError, match="inline"):
            parse_config("flow = pan-yang\nsamples_file = x.csv\ncos = 0, 1\n")


class TestEmitRoundTrip:
    def test_roundtrip_nondefault(self):
        cfg = RunConfig(
            initial=InitialCurve(kind="coeffs", mean=1.5, cos=(0.1, 0.0), sin=(0.0, -0.2), truncation=32),
            flow=Constant(c=-2.0),
            controls=IntegratorControls(t_max=7.0, rel_tol=1e-10),
            outputs=OutputPaths(timeseries="a.csv", frames="b.jsonl", reports="c.csv", svg="d"),
            frame_count=5,
        )
        assert parse_config(emit_config(cfg)) == cfg

    def test_roundtrip_file_source(self):
        cfg = RunConfig(
            initial=InitialCurve(kind="polygon-file", path="poly.csv", truncation=8),
            flow=PowerSum(terms=((1.0, 1.0, 0.0), (0.5, 0.0, 1.0))),
            controls=IntegratorControls(),
            outputs=OutputPaths(),
            frame_count=16,
        )
        assert parse_config(emit_config(cfg)) == cfg


class TestLoadInitial:
    def test_coeffs_inline(self):
        spec = load_initial(InitialCurve(kind="coeffs", mean=1.0, cos=(0.0, 0.2)), Path("."))
        assert spec.mean == 1.0
        assert spec.cos_coeffs[1] == 0.2

    def test_coeffs_file(self, tmp_path):
        f = tmp_path / "coeffs.csv"
        f.write_text("n,a,b\n0,1.0,0\n2,0.2,0.0\n")
        spec = load_initial(InitialCurve(kind="coeffs-file", path="coeffs.csv"), tmp_path)
        assert spec.mean == 1.0
        assert spec.cos_coeffs[1] == 0.2
        assert spec.truncation == 2

    def test_samples_file(self, tmp_path):
        th = theta_grid(256)
        values = 1.0 + 0.2 * np.cos(2 * th)
        f = tmp_path / "samples.csv"
        f.write_text("\n".join(repr(float(v)) for v in values) + "\n")
        spec = load_initial(
            InitialCurve(kind="samples-file", path="samples.csv", truncation=8), tmp_path
        )
        assert spec.mean == pytest.approx(1.0, abs=1e-12)
        assert spec.cos_coeffs[1] == pytest.approx(0.2, abs=1e-12)

    def test_polygon_file(self, tmp_path):
        verts = [(np.cos(np.pi * k / 3), np.sin(np.pi * k / 3)) for k in range(6)]
        f = tmp_path / "poly.csv"
        f.write_text("\n".join(f"{float(x)!r},{float(y)!r}" for x, y in verts) + "\n")
        spec = load_initial(
            InitialCurve(kind="polygon-file", path="poly.csv", truncation=16), tmp_path
        )
        assert spec.mean == pytest.approx(3.0 / np.pi, abs=1e-5)


def write_config(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestRun:
    def test_converging_run_artifacts(self, tmp_path, capsys):
        cfg = parse_config(
            "flow = pan-yang\nmean = 1\ncos = 0.3, 0.2\nt_max = 3\nsvg = anim\nframe_count = 6\n"
        )
        out = tmp_path / "out"
        assert run(cfg, tmp_path, out) == 0
        verdict = capsys.readouterr().out
        assert "ConvergesToCircle" in verdict
        assert "center=(0.3, 0)" in verdict

        ts = (out / "timeseries.csv").read_text().splitlines()
        assert ts[0] == "t,L,A,ipd,ipr,k_min,k_max,H"
        assert len(ts) == 62  # 61 samples on [0, 3] + header
        assert float(ts[1].split(",")[7]) == pytest.approx(1.0)  # pan-yang H

        frames = (out / "frames.jsonl").read_text().splitlines()
        assert len(frames) == 7  # 6 frames + trailing summary
        first = json.loads(frames[0])
        assert set(first) >= {"t", "L", "A", "ipd", "ipr", "k_min", "k_max", "theta", "x", "y"}
        assert len(first["x"]) == len(first["theta"]) == 256
        summary = json.loads(frames[-1])
        assert summary["outcome"]["kind"] == "converges-to-circle"
        assert summary["outcome"]["center"] == [0.3, 0.0]

        svgs = sorted((out / "anim").glob("frame_*.svg"))
        assert [p.name for p in svgs] == [f"frame_{i:05d}.svg" for i in range(6)]
        assert "<svg" in svgs[0].read_text()

        reports = (out / "reports.csv").read_text().splitlines()
        assert reports[0] == "name,lhs,rhs,slack,satisfied"
        assert all(line.endswith(",true") for line in reports[1:])

    def test_singularity_run_verdict(self, tmp_path, capsys):
        cfg = parse_config("flow = powersum:1,1,0\nmean = 1\ncos = 0, 0.2\nt_max = 5\n")
        assert run(cfg, tmp_path, tmp_path / "out") == 0
        verdict = capsys.readouterr().out
        assert "CurvatureSingularity" in verdict
        assert "t*=0.2237" in verdict

    def test_nonconvex_polygon_rejected(self, tmp_path, capsys):
        (tmp_path / "square.csv").write_text("-1,-1\n1,-1\n1,1\n-1,1\n")
        cfg = parse_config("flow = pan-yang\npolygon_file = square.csv\ntruncation = 16\n")
        assert run(cfg, tmp_path, tmp_path / "out") == 2
        err = capsys.readouterr().err
        assert "fails convexity validation" in err

    def test_deterministic_outputs(self, tmp_path):
        cfg = parse_config("flow = lin-tsai\nmean = 1\ncos = 0, 0.2\nt_max = 2\n")
        a, b = tmp_path / "a", tmp_path / "b"
        assert run(cfg, tmp_path, a) == 0
        assert run(cfg, tmp_path, b) == 0
        for name in ("timeseries.csv", "frames.jsonl", "reports.csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes()


class TestCheck:
    def test_check_passes_and_prints(self, tmp_path, capsys):
        cfg = parse_config(MINIMAL)
        assert check(cfg, tmp_path, tmp_path / "out") == 0
        out = capsys.readouterr().out
        assert "go1," in out and "gage," in out
        assert "go2_equality_case: true" in out
        reports = (tmp_path / "out" / "reports.csv").read_text()
        assert reports.count("true") == 4

    def test_check_rejects_nonconvex(self, tmp_path, capsys):
        cfg = parse_config("flow = pan-yang\nmean = 1\ncos = 0, 0.5\n")
        assert check(cfg, tmp_path) == 2
        assert "convexity" in capsys.readouterr().err


class TestSweep:
    def test_flow_axis(self, tmp_path, capsys):
        cfg = parse_config(MINIMAL + "t_max = 2\n")
        code = sweep(cfg, "flows:pan-yang;lin-tsai;ma-cheng", tmp_path, tmp_path / "out")
        assert code == 0
        lines = (tmp_path / "out" / "sweep.csv").read_text().splitlines()
        assert lines[0].startswith("axis,outcome,event")
        assert len(lines) == 4
        for line in lines[1:]:
            cells = line.split(",")
            assert cells[1] == "converges-to-circle"
            assert cells[9] == "true"  # monotone isoperimetric ratio
            assert cells[10] == ""  # no error

    def test_scale_axis_singularity_times_decrease(self, tmp_path):
        cfg = parse_config("flow = powersum:1,1,0\nmean = 1\ncos = 0, 0.2\nt_max = 5\n")
        assert sweep(cfg, "scale:0.5,1.0,1.5", tmp_path, tmp_path / "out") == 0
        lines = (tmp_path / "out" / "sweep.csv").read_text().splitlines()[1:]
        times = [float(line.split(",")[3]) for line in lines]
        assert all(line.split(",")[2] == "singularity" for line in lines)
        assert times[0] > times[1] > times[2]

    def test_failed_row_recorded_and_sweep_continues(self, tmp_path):
        cfg = parse_config(MINIMAL + "t_max = 1\n")
        assert sweep(cfg, "scale:1.0,3.0", tmp_path, tmp_path / "out") == 0
        lines = (tmp_path / "out" / "sweep.csv").read_text().splitlines()[1:]
        ok, bad = lines
        assert ok.split(",")[10] == ""
        assert "convexity" in bad.split(",")[10]

    def test_empty_axis_rejected(self, tmp_path, capsys):
        cfg = parse_config(MINIMAL)
        assert sweep(cfg, "flows:", tmp_path) == 2
        assert sweep(cfg, "scale:", tmp_path) == 2

    def test_unknown_axis_kind(self, tmp_path):
        cfg = parse_config(MINIMAL)
        assert sweep(cfg, "volume:1,2", tmp_path) == 2


class TestMain:
    def test_run_roundtrip(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path, MINIMAL + "t_max = 1\n")
        code = main(["run", "--config", str(cfg_path), "--out", str(tmp_path / "out")])
        assert code == 0
        assert (tmp_path / "out" / "timeseries.csv").exists()

    def test_missing_config_file(self, tmp_path, capsys):
        assert main(["run", "--config", str(tmp_path / "nope.cfg")]) == 2

    def test_config_error_reported(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path, "flow = banana\nmean = 1\n")
        assert main(["run", "--config", str(cfg_path)]) == 2
        assert "banana" in capsys.readouterr().err

    def test_check_subcommand(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path, MINIMAL)
        assert main(["check", "--config", str(cfg_path), "--out", str(tmp_path / "o")]) == 0

    def test_sweep_subcommand(self, tmp_path):
        cfg_path = write_config(tmp_path, MINIMAL + "t_max = 1\n")
        code = main(
            [
                "sweep",
                "--config",
                str(cfg_path),
                "--axis",
                "flows:pan-yang;const:-1",
                "--out",
                str(tmp_path / "o"),
            ]
        )
        assert code == 0
        assert len((tmp_path / "o" / "sweep.csv").read_text().splitlines()) == 3

    def test_relative_input_resolved_against_config_dir(self, tmp_path, capsys):
        sub = tmp_path / "sub"
        sub.mkdir()
        th = theta_grid(256)
        (sub / "samples.csv").write_text(
            "\n".join(repr(float(v)) for v in 1.0 + 0.1 * np.cos(2 * th)) + "\n"
        )
        cfg_path = write_config(
            sub, "flow = pan-yang\nsamples_file = samples.csv\ntruncation = 8\nt_max = 1\n"
        )
        assert main(["run", "--config", str(cfg_path), "--out", str(tmp_path / "o")]) == 0
