"""Configuration ingestion, run orchestration and artifact emission.

Config files are flat ``key = value`` text; ``#`` starts a comment.
Exactly one initial-curve source must be given:

    mean = 1.0            inline coefficient record (with cos = .., sin = ..)
    coeffs_file = f.csv   rows n,a_n,b_n (row n = 0 carries the mean)
    samples_file = f.csv  one support value per line on a uniform grid
    polygon_file = f.csv  rows x,y of convex counterclockwise vertices

plus ``flow = pan-yang | lin-tsai | ma-cheng | const:<c> |
powersum:<c,p,q>[;<c,p,q>...]``, optional integrator-control overrides
(rel_tol, abs_tol, t_max, length_blowup, length_vanish, area_vanish,
singularity_eps, sample_interval), output paths (timeseries, frames,
reports, svg) and frame_count.

Subcommands:
  run    integrate, classify, write timeseries CSV / frames JSONL /
         optional SVG frames / inequality reports CSV, print the verdict
  sweep  one run per axis value, concurrent, summary CSV
  check  inequality suite on the initial curve only
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import diagnostics
from .flows import NonlocalTerm, evaluate_h, flow_state, format_flow_term, parse_flow_term
from .integrate import (
    IntegratorControls,
    Trajectory,
    describe_outcome,
    integrate,
    outcome_record,
    state_record,
)
from .support import (
    CONVEXITY_EPS,
    ConvexityError,
    SupportSpectrum,
    curve_length,
    curve_position,
    spectrum_from_dict,
    spectrum_from_polygon,
    project_from_samples,
    theta_grid,
    validate_convexity,
)

FRAME_GRID = 256


class ConfigError(ValueError):
    """Malformed run configuration; the message names line and field."""


@dataclass(frozen=True)
class InitialCurve:
    kind: str  # "coeffs" | "coeffs-file" | "samples-file" | "polygon-file"
    mean: float | None = None
    cos: tuple[float, ...] = ()
    sin: tuple[float, ...] = ()
    path: str | None = None
    truncation: int = 64


@dataclass(frozen=True)
class OutputPaths:
    timeseries: str = "timeseries.csv"
    frames: str = "frames.jsonl"
    reports: str = "reports.csv"
    svg: str | None = None


@dataclass(frozen=True)
class RunConfig:
    initial: InitialCurve
    flow: NonlocalTerm
    controls: IntegratorControls
    outputs: OutputPaths
    frame_count: int = 16


_CONTROL_KEYS = (
    "rel_tol",
    "abs_tol",
    "t_max",
    "length_blowup",
    "length_vanish",
    "area_vanish",
    "singularity_eps",
    "sample_interval",
)
_PATH_KEYS = ("timeseries", "frames", "reports", "svg")
_SOURCE_KEYS = ("coeffs_file", "samples_file", "polygon_file")


def _parse_float(value: str, key: str, lineno: int) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"line {lineno}: field {key!r} needs a number, got {value!r}") from None


def _parse_float_list(value: str, key: str, lineno: int) -> tuple[float, ...]:
    body = value.strip()
    if body.startswith("[") and body.endswith("]"):
        body = body[1:-1]
    if not body.strip():
        return ()
    return tuple(_parse_float(part.strip(), key, lineno) for part in body.split(","))


def parse_config(text: str) -> RunConfig:
    """Parse flat key = value config text into a validated RunConfig."""
    raw: dict[str, tuple[str, int]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {body!r}")
        key, _, value = body.partition("=")
        key, value = key.strip(), value.strip().strip('"')
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = (value, lineno)

    known = (
        {"flow", "mean", "cos", "sin", "truncation", "frame_count"}
        | set(_CONTROL_KEYS)
        | set(_PATH_KEYS)
        | set(_SOURCE_KEYS)
    )
    for key, (_, lineno) in raw.items():
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")

    if "flow" not in raw:
        raise ConfigError("missing required key 'flow'")
    flow_text, flow_line = raw["flow"]
    try:
        flow = parse_flow_term(flow_text)
    except ValueError as exc:
        raise ConfigError(f"line {flow_line}: {exc}") from None

    truncation = 64
    if "truncation" in raw:
        value, lineno = raw["truncation"]
        truncation = int(_parse_float(value, "truncation", lineno))
        if truncation < 2:
            raise ConfigError(f"line {lineno}: truncation must be at least 2")

    sources = [k for k in _SOURCE_KEYS if k in raw]
    inline = "mean" in raw
    if inline + len(sources) != 1:
        raise ConfigError(
            "exactly one initial source is required: inline 'mean' (+cos/sin), "
            "coeffs_file, samples_file or polygon_file"
        )
    if not inline and ("cos" in raw or "sin" in raw):
        raise ConfigError("cos/sin coefficients require an inline 'mean'")

    if inline:
        mean_text, mean_line = raw["mean"]
        cos = _parse_float_list(raw["cos"][0], "cos", raw["cos"][1]) if "cos" in raw else ()
        sin = _parse_float_list(raw["sin"][0], "sin", raw["sin"][1]) if "sin" in raw else ()
        initial = InitialCurve(
            kind="coeffs",
            mean=_parse_float(mean_text, "mean", mean_line),
            cos=cos,
            sin=sin,
            truncation=truncation,
        )
    else:
        key = sources[0]
        initial = InitialCurve(
            kind=key.replace("_file", "-file"),
            path=raw[key][0],
            truncation=truncation,
        )

    overrides = {}
    for key in _CONTROL_KEYS:
        if key in raw:
            overrides[key] = _parse_float(raw[key][0], key, raw[key][1])
    try:
        controls = replace(IntegratorControls(), **overrides)
    except ValueError as exc:
        raise ConfigError(f"bad integrator controls: {exc}") from None

    outputs = OutputPaths(
        timeseries=raw.get("timeseries", ("timeseries.csv", 0))[0],
        frames=raw.get("frames", ("frames.jsonl", 0))[0],
        reports=raw.get("reports", ("reports.csv", 0))[0],
        svg=raw["svg"][0] if "svg" in raw else None,
    )

    frame_count = 16
    if "frame_count" in raw:
        value, lineno = raw["frame_count"]
        frame_count = int(_parse_float(value, "frame_count", lineno))
        if frame_count < 2:
            raise ConfigError(f"line {lineno}: frame_count must be at least 2")

    return RunConfig(
        initial=initial, flow=flow, controls=controls, outputs=outputs, frame_count=frame_count
    )


def emit_config(config: RunConfig) -> str:
    """Canonical config text; parse_config round-trips it exactly."""
    lines = [f"flow = {format_flow_term(config.flow)}"]
    ini = config.initial
    if ini.kind == "coeffs":
        lines.append(f"mean = {ini.mean!r}")
        lines.append("cos = " + ", ".join(repr(v) for v in ini.cos))
        lines.append("sin = " + ", ".join(repr(v) for v in ini.sin))
    else:
        lines.append(f"{ini.kind.replace('-file', '_file')} = {ini.path}")
    lines.append(f"truncation = {ini.truncation}")
    for key in _CONTROL_KEYS:
        lines.append(f"{key} = {getattr(config.controls, key)!r}")
    out = config.outputs
    lines.append(f"timeseries = {out.timeseries}")
    lines.append(f"frames = {out.frames}")
    lines.append(f"reports = {out.reports}")
    if out.svg is not None:
        lines.append(f"svg = {out.svg}")
    lines.append(f"frame_count = {config.frame_count}")
    return "\n".join(lines) + "\n"


def _read_rows(path: Path, expected: int, name: str) -> list[list[float]]:
    rows = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        parts = [p.strip() for p in body.split(",")]
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            if lineno == 1:  # header row
                continue
            raise ConfigError(f"{name} line {lineno}: expected numbers, got {body!r}") from None
        if len(rows[-1]) != expected:
            raise ConfigError(f"{name} line {lineno}: expected {expected} columns")
    return rows


def load_initial(initial: InitialCurve, base_dir: Path) -> SupportSpectrum:
    """Materialize the configured initial curve as a spectrum."""
    if initial.kind == "coeffs":
        return spectrum_from_dict(
            {"mean": initial.mean, "cos": list(initial.cos), "sin": list(initial.sin)}
        )
    path = Path(initial.path)
    if not path.is_absolute():
        path = base_dir / path
    if initial.kind == "coeffs-file":
        record = {"mean": 0.0, "cos": [], "sin": []}
        rows = _read_rows(path, 3, "coeffs_file")
        top = max(int(r[0]) for r in rows)
        cos = [0.0] * max(top, 2)
        sin = [0.0] * max(top, 2)
        mean = 0.0
        for n_val, a_val, b_val in rows:
            n = int(n_val)
            if n == 0:
                mean = a_val
            elif n >= 1:
                cos[n - 1] = a_val
                sin[n - 1] = b_val
            else:
                raise ConfigError(f"coeffs_file: negative mode index {n}")
        record.update(mean=mean, cos=cos, sin=sin)
        return spectrum_from_dict(record)
    if initial.kind == "samples-file":
        values = [row[0] for row in _read_rows(path, 1, "samples_file")]
        return project_from_samples(values, initial.truncation)
    if initial.kind == "polygon-file":
        vertices = _read_rows(path, 2, "polygon_file")
        return spectrum_from_polygon(vertices, initial.truncation)
    raise ConfigError(f"unknown initial kind {initial.kind!r}")


def _resolve_out(path_text: str, out_dir: Path | None) -> Path:
    path = Path(path_text)
    if not path.is_absolute() and out_dir is not None:
        path = out_dir / path
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _write_timeseries(path: Path, traj: Trajectory, term: NonlocalTerm) -> None:
    lines = ["t,L,A,ipd,ipr,k_min,k_max,H"]
    for state in traj.states:
        rec = state_record(state)
        h_val = evaluate_h(term, state)
        lines.append(
            f"{rec['t']!r},{rec['L']!r},{rec['A']!r},{rec['ipd']!r},"
            f"{rec['ipr']!r},{rec['k_min']!r},{rec['k_max']!r},{h_val!r}"
        )
    path.write_text("\n".join(lines) + "\n")


def _frame_states(traj: Trajectory, frame_count: int):
    idx = np.unique(np.round(np.linspace(0, len(traj.states) - 1, frame_count)).astype(int))
    return [traj.states[i] for i in idx]


def _write_frames(path: Path, traj: Trajectory, frame_count: int) -> list:
    frames = []
    lines = []
    thetas = theta_grid(FRAME_GRID)
    for state in _frame_states(traj, frame_count):
        samples = curve_position(state.spectrum, thetas)
        frames.append(samples)
        rec = state_record(state)
        rec["theta"] = [float(v) for v in samples.thetas]
        rec["x"] = [float(p[0]) for p in samples.points]
        rec["y"] = [float(p[1]) for p in samples.points]
        lines.append(json.dumps(rec))
    summary = {
        "event": {"kind": traj.event.kind, "t": traj.event.t, "theta": traj.event.theta},
        "outcome": outcome_record(traj.outcome),
    }
    lines.append(json.dumps(summary))
    path.write_text("\n".join(lines) + "\n")
    return frames


def _write_svg_frames(svg_dir: Path, frames) -> None:
    svg_dir.mkdir(parents=True, exist_ok=True)
    all_pts = np.vstack([f.points for f in frames])
    min_x, min_y = all_pts.min(axis=0)
    max_x, max_y = all_pts.max(axis=0)
    pad = 0.1 * max(max_x - min_x, max_y - min_y, 1e-9)
    # SVG y points down; flip and shift the viewBox accordingly.
    vb = (min_x - pad, -(max_y + pad), (max_x - min_x) + 2 * pad, (max_y - min_y) + 2 * pad)
    stroke = 0.004 * max(vb[2], vb[3])
    for i, frame in enumerate(frames):
        pts = " ".join(f"{x:.6f},{-y:.6f}" for x, y in frame.points)
        doc = (
            f'<svg xmlns="http://www.w3.org/2000/svg" '
            f'viewBox="{vb[0]:.6f} {vb[1]:.6f} {vb[2]:.6f} {vb[3]:.6f}">\n'
            f'  <polygon points="{pts}" fill="none" stroke="black" '
            f'stroke-width="{stroke:.6f}"/>\n</svg>\n'
        )
        (svg_dir / f"frame_{i:05d}.svg").write_text(doc)


def _inequality_rows(traj: Trajectory, term: NonlocalTerm) -> list[diagnostics.InequalityReport]:
    rows = []
    for label, state in (("initial", traj.states[0]), ("final", traj.states[-1])):
        rows.append(_tagged(diagnostics.isoperimetric(state), label))
        rows.append(_tagged(diagnostics.go1(state), label))
        go2_report, _ = diagnostics.go2(state)
        rows.append(_tagged(go2_report, label))
        try:
            rows.append(_tagged(diagnostics.gage(state), label))
        except ConvexityError:
            pass
    ratio = diagnostics.ipd_decay_ratio(traj)
    rows.append(diagnostics.build_report("ipd_decay_max_ratio", 1.0, ratio))
    monotone = diagnostics.ipr_monotone(traj, term)
    rows.append(
        diagnostics.InequalityReport(
            name="ipr_monotone",
            lhs=1.0 if monotone else 0.0,
            rhs=1.0,
            slack=0.0 if monotone else -1.0,
            satisfied=monotone,
        )
    )
    return rows


def _tagged(report: diagnostics.InequalityReport, label: str) -> diagnostics.InequalityReport:
    return replace(report, name=f"{report.name}@{label}")


def run(config: RunConfig, base_dir: Path, out_dir: Path | None = None) -> int:
    """Integrate one configured flow and write all artifacts."""
    try:
        spec0 = load_initial(config.initial, base_dir)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    if validate_convexity(spec0) <= CONVEXITY_EPS:
        print("error: initial curve fails convexity validation", file=sys.stderr)
        return 2
    try:
        traj = integrate(spec0, config.flow, config.controls)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        _write_timeseries(_resolve_out(config.outputs.timeseries, out_dir), traj, config.flow)
        frames = _write_frames(_resolve_out(config.outputs.frames, out_dir), traj, config.frame_count)
        if config.outputs.svg is not None:
            _write_svg_frames(_resolve_out(config.outputs.svg, out_dir), frames)
        reports = _inequality_rows(traj, config.flow)
        _resolve_out(config.outputs.reports, out_dir).write_text(
            diagnostics.reports_to_csv(reports)
        )
    except OSError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    print(f"verdict: {describe_outcome(traj.outcome)}")
    return 0


def check(config: RunConfig, base_dir: Path, out_dir: Path | None = None) -> int:
    """Inequality suite on the initial curve only."""
    try:
        spec0 = load_initial(config.initial, base_dir)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    if validate_convexity(spec0) <= CONVEXITY_EPS:
        print("error: initial curve fails convexity validation", file=sys.stderr)
        return 2
    state = flow_state(spec0, 0.0, curve_length(spec0))
    go2_report, equality = diagnostics.go2(state)
    reports = [
        diagnostics.isoperimetric(state),
        diagnostics.go1(state),
        go2_report,
        diagnostics.gage(state),
    ]
    text = diagnostics.reports_to_csv(reports)
    try:
        _resolve_out(config.outputs.reports, out_dir).write_text(text)
    except OSError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    sys.stdout.write(text)
    print(f"go2_equality_case: {str(equality).lower()}")
    return 0 if all(r.satisfied for r in reports) else 1


def _parse_axis(axis: str) -> tuple[str, list]:
    head, sep, rest = axis.partition(":")
    if not sep or not rest.strip():
        raise ConfigError(f"axis must be 'flows:<term>;...' or 'scale:<f>,...', got {axis!r}")
    if head == "flows":
        return "flows", [parse_flow_term(part) for part in rest.split(";")]
    if head == "scale":
        return "scale", [float(part) for part in rest.split(",")]
    raise ConfigError(f"unknown axis kind {head!r}")


def _sweep_one(spec0: SupportSpectrum, config: RunConfig, label: str, term: NonlocalTerm) -> dict:
    row = {"axis": label}
    try:
        traj = integrate(spec0, term, config.controls)
        final = traj.states[-1]
        row.update(
            outcome=outcome_record(traj.outcome)["kind"],
            event=traj.event.kind,
            event_t=repr(traj.event.t),
            final_t=repr(final.t),
            final_L=repr(final.L),
            final_A=repr(final.A),
            final_ipr=repr(final.L**2 / (4.0 * np.pi * final.A)),
            ipd_ratio_max=repr(diagnostics.ipd_decay_ratio(traj)),
            ipr_monotone=str(diagnostics.ipr_monotone(traj, term)).lower(),
            error="",
        )
    except Exception as exc:  # per-row failure; the sweep continues
        row.update(
            outcome="", event="", event_t="", final_t="", final_L="",
            final_A="", final_ipr="", ipd_ratio_max="", ipr_monotone="",
            error=str(exc).replace(",", ";"),
        )
    return row


_SWEEP_COLUMNS = (
    "axis", "outcome", "event", "event_t", "final_t", "final_L",
    "final_A", "final_ipr", "ipd_ratio_max", "ipr_monotone", "error",
)


def sweep(config: RunConfig, axis: str, base_dir: Path, out_dir: Path | None = None) -> int:
    """One integration per axis value; failures are recorded per row."""
    try:
        kind, values = _parse_axis(axis)
        if not values:
            raise ConfigError("axis has no values")
        spec0 = load_initial(config.initial, base_dir)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    jobs = []
    for value in values:
        if kind == "flows":
            jobs.append((format_flow_term(value), spec0, value))
        else:
            scaled = SupportSpectrum(
                mean=spec0.mean,
                cos_coeffs=spec0.cos_coeffs * value,
                sin_coeffs=spec0.sin_coeffs * value,
            )
            jobs.append((repr(value), scaled, config.flow))
    with ThreadPoolExecutor(max_workers=min(8, len(jobs))) as pool:
        rows = list(
            pool.map(lambda job: _sweep_one(job[1], config, job[0], job[2]), jobs)
        )
    lines = [",".join(_SWEEP_COLUMNS)]
    lines.extend(",".join(str(row[c]) for c in _SWEEP_COLUMNS) for row in rows)
    text = "\n".join(lines) + "\n"
    try:
        _resolve_out("sweep.csv", out_dir).write_text(text)
    except OSError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    sys.stdout.write(text)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="curveflow",
        description="Simulate linear nonlocal curvature flows of convex plane curves.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "sweep", "check"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to the run configuration")
        p.add_argument("--out", default=None, help="directory for output artifacts")
        if name == "sweep":
            p.add_argument(
                "--axis", required=True,
                help="'flows:<term>;<term>;...' or 'scale:<f>,<f>,...'",
            )
    args = parser.parse_args(argv)
    config_path = Path(args.config)
    try:
        config = parse_config(config_path.read_text())
    except OSError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    base_dir = config_path.parent
    out_dir = Path(args.out) if args.out is not None else None
    if args.command == "run":
        return run(config, base_dir, out_dir)
    if args.command == "sweep":
        return sweep(config, args.axis, base_dir, out_dir)
    return check(config, base_dir, out_dir)


if __name__ == "__main__":
    sys.exit(main())
