"""Headless execution: drive an engine through a scenario and write the
session log.

Snapshot records are decimated to every 4th tick by default, but a record
is always forced on mode changes, gesture onsets, and the final tick so
histograms and replay verification stay exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .classifier import Model
from .commands import Command
from .engine import Engine, FlockSnapshot
from .scenario import Scenario, TimedCommand
from .sessionlog import LogFooter, LogHeader, LogRecord, LogWriter, RecordKind

SNAPSHOT_DECIMATION = 4


def timeline_schedule(timeline: list[TimedCommand], tick_hz: float) -> list[tuple[int, Command]]:
    """Map command times to the first tick whose start time has reached
    them (tick k starts at (k-1)/tick_hz)."""
    schedule = []
    for item in timeline:
        tick = int(math.ceil(item.time_s * tick_hz - 1e-9)) + 1
        schedule.append((tick, item.command))
    return schedule


@dataclass
class RunResult:
    final_snapshot: FlockSnapshot
    ticks_executed: int
    log_path: str | None


def run_engine(
    engine: Engine,
    n_ticks: int,
    schedule: list[tuple[int, Command]] | None = None,
    writer: LogWriter | None = None,
    full_rate: bool = False,
) -> FlockSnapshot:
    """Execute up to n_ticks, feeding scheduled commands at their ticks.

    A Pause stops tick execution; remaining scheduled commands are then
    applied immediately, in order, so a scripted Start can resume the run.
    Returns the last emitted snapshot.
    """
    schedule = sorted(schedule or [], key=lambda item: item[0])
    idx = 0
    snapshot = engine.latest_snapshot
    if writer is not None:
        writer.write_record(
            LogRecord(tick=snapshot.tick, kind=RecordKind.SNAPSHOT, payload=snapshot.to_dict())
        )
    last_mode = snapshot.active_mode

    while engine.tick < n_ticks:
        if not engine.running:
            if engine.error is not None or idx >= len(schedule):
                break
            _, cmd = schedule[idx]
            idx += 1
            engine.apply_command(cmd)
            continue
        upcoming = engine.tick + 1
        while idx < len(schedule) and schedule[idx][0] <= upcoming:
            engine.apply_command(schedule[idx][1])
            idx += 1
        if not engine.running:
            continue  # a scheduled Pause acts immediately; skip the step
        snapshot = engine.step()
        if writer is not None:
            for record in engine.drain_records():
                writer.write_record(record)
            force = (
                snapshot.active_mode is not last_mode
                or snapshot.gesture_onsets
                or snapshot.tick == n_ticks
                or not engine.running
            )
            if full_rate or force or snapshot.tick % SNAPSHOT_DECIMATION == 0:
                writer.write_record(
                    LogRecord(
                        tick=snapshot.tick,
                        kind=RecordKind.SNAPSHOT,
                        payload=snapshot.to_dict(),
                    )
                )
        else:
            engine.drain_records()
        last_mode = snapshot.active_mode
    return snapshot


def run_scenario(
    scenario: Scenario,
    seconds: float | None = None,
    ticks: int | None = None,
    log_path: str | None = None,
    full_rate: bool = False,
    model: Model | None = None,
    started_at: str | None = None,
) -> RunResult:
    """Run a scenario for the given duration (flag > scenario.duration_s)
    and optionally write the session log.

    started_at defaults to null in the header: headless runs must be
    byte-identical for equal (scenario, seed), so no wall clock is stamped
    unless the caller provides one.
    """
    config = scenario.engine_config()
    if ticks is None:
        duration = seconds if seconds is not None else scenario.duration_s
        if duration is None:
            raise ValueError("no duration: pass seconds/ticks or set scenario.duration_s")
        ticks = int(round(duration * config.tick_hz))
    engine = Engine(config, scenario.robots, model=model)
    schedule = timeline_schedule(scenario.timeline, config.tick_hz)

    writer = LogWriter(log_path) if log_path else None
    try:
        if writer is not None:
            writer.write_header(
                LogHeader(
                    seed=config.seed,
                    config=config.to_dict(),
                    robots=[[p.x, p.y] for p in scenario.robots],
                    scenario=scenario.name,
                    started_at=started_at,
                    model=model.to_dict() if model is not None else None,
                )
            )
        snapshot = run_engine(engine, ticks, schedule, writer, full_rate)
        if writer is not None:
            writer.write_footer(
                LogFooter(final_tick=snapshot.tick, final_state_hash=snapshot.hash())
            )
    finally:
        if writer is not None:
            writer.close()
    return RunResult(final_snapshot=snapshot, ticks_executed=engine.tick, log_path=log_path)
