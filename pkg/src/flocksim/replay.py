"""Re-execute a logged session and check it reached the recorded state.

A log is self-contained: header config + seed + command records rebuild the
engine, and the footer hash must match the re-simulated final snapshot.
Any tampering with a command (or a config field) diverges the trajectory
and fails verification.
"""

from __future__ import annotations

from typing import Iterator

from .classifier import Model
from .commands import command_from_dict
from .engine import Engine, EngineConfig, FlockSnapshot
from .geometry import Vec2
from .sessionlog import RecordKind, SessionLog


class ReplayDivergenceError(RuntimeError):
    """Replayed state does not match the recorded final hash."""


class ReplayVersionError(RuntimeError):
    """Log was produced by an incompatible engine/log version."""


def _engine_from_header(log: SessionLog) -> Engine:
    try:
        config = EngineConfig.from_dict(log.header.config)
        robots = [Vec2(float(p[0]), float(p[1])) for p in log.header.robots]
    except (KeyError, TypeError, ValueError) as exc:
        raise ReplayVersionError(f"header does not describe a valid engine: {exc}") from exc
    model = Model.from_dict(log.header.model) if log.header.model is not None else None
    return Engine(config, robots, model=model)


def replay_log(log: SessionLog) -> Iterator[FlockSnapshot]:
    """Yield the full snapshot sequence (tick 0 through the final tick) of
    the re-executed session."""
    if log.footer is None:
        raise ReplayDivergenceError("log is truncated (no footer); nothing to verify against")
    engine = _engine_from_header(log)
    commands = [
        (rec.tick, command_from_dict(rec.payload))
        for rec in log.by_kind(RecordKind.COMMAND)
    ]
    idx = 0
    yield engine.latest_snapshot
    for tick in range(1, log.footer.final_tick + 1):
        while idx < len(commands) and commands[idx][0] <= tick:
            engine.apply_command(commands[idx][1])
            idx += 1
        if not engine.running:
            # The original run executed this tick; a pause surviving to this
            # point means the command records are inconsistent.
            raise ReplayDivergenceError(f"engine paused at tick {tick} during replay")
        snapshot = engine.step()
        engine.drain_records()
        yield snapshot


def verify_log(log: SessionLog) -> str:
    """Replay and compare against the footer. Returns the verified hash."""
    assert_footer = log.footer
    if assert_footer is None:
        raise ReplayDivergenceError("log is truncated (no footer); cannot verify")
    final: FlockSnapshot | None = None
    for final in replay_log(log):
        pass
    assert final is not None
    got = final.hash()
    if got != assert_footer.final_state_hash:
        raise ReplayDivergenceError(
            f"final state hash mismatch: recorded {assert_footer.final_state_hash}, "
            f"replayed {got}"
        )
    return got
