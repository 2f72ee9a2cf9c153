"""Command-line entry points.

Every subcommand is a thin wrapper over the library; `serve` hosts the
gateway service. With --json, failures print one machine-readable JSON
object to stderr and exit nonzero.

Environment overrides: FLOCKSIM_ADDR (serve address, host:port) and
FLOCKSIM_LOG_DIR (default directory for --log outputs).
"""

from __future__ import annotations

import csv
import json
import os
import sys
import warnings
from pathlib import Path

import click

from .classifier import ModelFormatError, TrainConfig, load_model, predict_mode, save_model, train
from .engine import Engine, EngineConfig
from .agents import BoundaryRegion
from .features import build_feature_vector
from .geometry import Vec2
from .agents import AgentKind, AgentState
from .replay import ReplayDivergenceError, ReplayVersionError, verify_log
from .runner import run_scenario
from .scenario import ScenarioError, load_scenario
from .sessionlog import (
    LogFormatError,
    export_training_data,
    gesture_histogram,
    mode_histogram,
    read_log,
)


def _fail(message: str, json_mode: bool, code: int = 1, **extra) -> None:
    if json_mode:
        print(json.dumps({"error": message, **extra}), file=sys.stderr)
    else:
        print(f"error: {message}", file=sys.stderr)
    sys.exit(code)


def _log_destination(path: str | None) -> str | None:
    if path is None:
        return None
    p = Path(path)
    if not p.is_absolute() and os.environ.get("FLOCKSIM_LOG_DIR"):
        p = Path(os.environ["FLOCKSIM_LOG_DIR"]) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return str(p)


@click.group()
def main() -> None:
    """Deterministic flocking simulator with gesture responses, weight
    modes, and a learned mode selector."""


@main.command()
@click.option("--scenario", "scenario_path", required=True, type=click.Path(exists=True))
@click.option("--seconds", type=float, default=None, help="Override run length in seconds.")
@click.option("--ticks", type=int, default=None, help="Override run length in ticks.")
@click.option("--log", "log_path", type=str, default=None, help="Write the session log here.")
@click.option("--full-rate", is_flag=True, help="Log a snapshot every tick (default: every 4th).")
@click.option("--model", "model_path", type=click.Path(exists=True), default=None)
@click.option("--json", "json_mode", is_flag=True, help="Machine-readable errors on stderr.")
def run(scenario_path, seconds, ticks, log_path, full_rate, model_path, json_mode):
    """Execute a scenario headlessly (as fast as possible)."""
    try:
        scenario = load_scenario(scenario_path)
        model = load_model(model_path) if model_path else None
        result = run_scenario(
            scenario,
            seconds=seconds,
            ticks=ticks,
            log_path=_log_destination(log_path),
            full_rate=full_rate,
            model=model,
        )
    except (ScenarioError, ModelFormatError, ValueError) as exc:
        _fail(str(exc), json_mode)
        return
    snap = result.final_snapshot
    click.echo(
        f"{scenario.name}: {result.ticks_executed} ticks "
        f"({snap.sim_time_s:.2f} s), final mode {snap.active_mode.value}"
        + (f", log {result.log_path}" if result.log_path else "")
    )
    if snap.error:
        _fail(f"engine stopped: {snap.error}", json_mode, code=3)


@main.command()
@click.option("--addr", default=None, help="host:port (default 127.0.0.1:8000 or FLOCKSIM_ADDR).")
@click.option("--scenario", "scenario_path", type=click.Path(exists=True), default=None)
@click.option("--state-rate-hz", type=float, default=10.0, show_default=True)
@click.option("--log", "log_path", type=str, default=None, help="Write a live session log.")
@click.option("--model", "model_path", type=click.Path(exists=True), default=None)
@click.option("--ui", "ui_dir", type=click.Path(exists=True), default=None,
              help="Serve a built console UI from this directory.")
@click.option("--json", "json_mode", is_flag=True)
def serve(addr, scenario_path, state_rate_hz, log_path, model_path, ui_dir, json_mode):
    """Host the live gateway (WebSocket protocol + REST)."""
    from .service import serve as serve_app

    addr = addr or os.environ.get("FLOCKSIM_ADDR", "127.0.0.1:8000")
    try:
        host, _, port_text = addr.partition(":")
        port = int(port_text or "8000")
        model = load_model(model_path) if model_path else None
        if scenario_path:
            scenario = load_scenario(scenario_path)
            engine = Engine(scenario.engine_config(), scenario.robots, model=model)
            name = scenario.name
        else:
            boundary = BoundaryRegion(0, 15, 0, 15)
            positions = [Vec2(3 + 2 * i, 4 + (i % 3) * 3) for i in range(6)]
            engine = Engine(EngineConfig(boundary=boundary), positions, model=model)
            name = None
        serve_app(
            engine,
            host=host or "127.0.0.1",
            port=port,
            state_rate_hz=state_rate_hz,
            log_path=_log_destination(log_path),
            scenario_name=name,
            ui_dir=ui_dir,
        )
    except (ScenarioError, ModelFormatError, ValueError) as exc:
        _fail(str(exc), json_mode)


@main.command(name="train")
@click.option("--log-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--model-out", required=True, type=str)
@click.option("--epochs", type=int, default=400, show_default=True)
@click.option("--learning-rate", type=float, default=0.5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--json", "json_mode", is_flag=True)
def train_cmd(log_dir, model_out, epochs, learning_rate, seed, json_mode):
    """Train the mode classifier from choreographer session logs."""
    examples = []
    paths = sorted(Path(log_dir).glob("*.jsonl"))
    for path in paths:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                log = read_log(path)
        except LogFormatError as exc:
            _fail(f"{path}: {exc}", json_mode)
            return
        examples.extend(export_training_data(log))
    if not examples:
        _fail(f"no training examples in {log_dir}", json_mode, code=2)
        return
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        model = train(examples, TrainConfig(epochs=epochs, learning_rate=learning_rate, seed=seed))
    for w in caught:
        click.echo(f"warning: {w.message}", err=True)
    save_model(model, model_out)
    from .classifier import training_accuracy

    click.echo(
        f"trained on {len(examples)} examples from {len(paths)} logs, "
        f"training accuracy {training_accuracy(model, examples):.3f}, saved {model_out}"
    )


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--log", "log_path", required=True, type=click.Path(exists=True))
@click.option("--report", "report_path", type=str, default=None,
              help="Write per-snapshot predictions as JSON.")
@click.option("--json", "json_mode", is_flag=True)
def predict(model_path, log_path, report_path, json_mode):
    """Predict a weight mode for every snapshot in a log."""
    try:
        model = load_model(model_path)
        log = read_log(log_path)
        boundary = BoundaryRegion.from_dict(log.header.config["boundary"])
    except (ModelFormatError, LogFormatError, KeyError, ValueError) as exc:
        _fail(str(exc), json_mode)
        return
    rows = []
    counts: dict[str, int] = {}
    for payload in (r.payload for r in log.records if r.kind.value == "snapshot"):
        agents = [
            AgentState(
                id=a["id"],
                kind=AgentKind(a["kind"]),
                position=Vec2(a["x"], a["y"]),
                velocity=Vec2(a["vx"], a["vy"]),
            )
            for a in payload["agents"]
            if a["kind"] == "robot" or boundary.contains(Vec2(a["x"], a["y"]))
        ]
        if not agents:
            continue
        mode = predict_mode(model, build_feature_vector(agents, boundary))
        rows.append({"tick": payload["tick"], "mode": mode.value})
        counts[mode.value] = counts.get(mode.value, 0) + 1
    if report_path:
        Path(report_path).write_text(json.dumps({"predictions": rows, "counts": counts}, indent=1))
    for mode_value, count in sorted(counts.items(), key=lambda kv: -kv[1]):
        click.echo(f"{mode_value}: {count}")


@main.command()
@click.option("--log", "log_path", required=True, type=click.Path(exists=True))
@click.option("--verify", is_flag=True, help="Re-simulate and check the final state hash.")
@click.option("--json", "json_mode", is_flag=True)
def replay(log_path, verify, json_mode):
    """Replay a session log; with --verify, exit 0 only on a hash match."""
    try:
        log = read_log(log_path)
    except LogFormatError as exc:
        _fail(str(exc), json_mode, code=2)
        return
    if verify:
        try:
            digest = verify_log(log)
        except (ReplayDivergenceError, ReplayVersionError) as exc:
            _fail(str(exc), json_mode, code=4, log=str(log_path))
            return
        click.echo(f"verified: final state hash {digest}")
    else:
        from .replay import replay_log

        count = sum(1 for _ in replay_log(log))
        click.echo(f"replayed {count} snapshots from {log_path}")


@main.command()
@click.option("--log", "log_path", required=True, type=click.Path(exists=True))
@click.option("--mode-hist", "mode_hist_path", type=str, default=None,
              help="Write mode occupancy CSV here.")
@click.option("--gesture-hist", "gesture_hist_path", type=str, default=None,
              help="Write gesture count CSV here.")
@click.option("--json", "json_mode", is_flag=True)
def stats(log_path, mode_hist_path, gesture_hist_path, json_mode):
    """Distribution summaries of a session log."""
    try:
        log = read_log(log_path)
    except LogFormatError as exc:
        _fail(str(exc), json_mode, code=2)
        return
    modes = mode_histogram(log)
    gestures = gesture_histogram(log)
    if mode_hist_path:
        with open(mode_hist_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["mode", "seconds"])
            for mode, seconds in sorted(modes.items(), key=lambda kv: kv[0].value):
                writer.writerow([mode.value, f"{seconds:.6f}"])
    if gesture_hist_path:
        with open(gesture_hist_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["gesture", "count"])
            for gesture, count in sorted(gestures.items(), key=lambda kv: kv[0].value):
                writer.writerow([gesture.value, count])
    click.echo("mode occupancy (s):")
    for mode, seconds in sorted(modes.items(), key=lambda kv: -kv[1]):
        click.echo(f"  {mode.value}: {seconds:.2f}")
    click.echo("gesture onsets:")
    if not gestures:
        click.echo("  (none)")
    for gesture, count in sorted(gestures.items(), key=lambda kv: kv[0].value):
        click.echo(f"  {gesture.value}: {count}")


if __name__ == "__main__":
    main()
