#!/usr/bin/env python3
"""Regenerate the reference scenarios in scenarios/.

Deterministic output: run it after changing the scenario recipes and
commit the JSON.
"""

from __future__ import annotations

import json
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "scenarios"


def solo_circling() -> dict:
    """One robot chasing the rotating target: pure-rotation gains."""
    table = {
        "default": [0.3, 0.6, 0.2, 0.4, 0.0, 0.0, 1.0],
        "following": [0, 0, 0, 1, 0, 0, 1],
        "linear": [0, 0, 0, 0, 0, 1, 1],
        "circling": [0, 0, 0, 0, 1, 0, 0],
        "cohesion": [1, 0, 0, 0, 0, 0, 1],
        "alignment": [0, 0, 1, 0, 0, 0, 1],
        "separation": [0, 1, 0, 0, 0, 0, 1],
    }
    return {
        "name": "solo_circling",
        "boundary": {"x_min": 0, "x_max": 10, "y_min": 0, "y_max": 10},
        "robots": [[5.0, 5.0]],
        "seed": 11,
        "duration_s": 200.0,
        "config": {"mode_table": table},
        "timeline": [
            {
                "time_s": 0.0,
                "command": {"type": "set_condition", "condition": "fixed", "mode": "circling"},
            }
        ],
    }


def flock_gestures() -> dict:
    """Six robots, one walking human who performs all three gestures."""
    timeline = [
        {"time_s": 0.0, "command": {"type": "add_human", "human_id": 100, "x": 7.5, "y": 12.0}}
    ]
    # walk a slow rectangle: 0.1 m every 0.25 s
    waypoints = [(7.5, 12.0), (11.0, 12.0), (11.0, 4.0), (4.0, 4.0), (4.0, 10.0), (7.5, 10.0)]
    t = 0.5
    x, y = waypoints[0]
    for wx, wy in waypoints[1:]:
        while (x, y) != (wx, wy):
            x += max(-0.1, min(0.1, wx - x))
            y += max(-0.1, min(0.1, wy - y))
            x, y = round(x, 3), round(y, 3)
            timeline.append(
                {
                    "time_s": round(t, 2),
                    "command": {"type": "move_human", "human_id": 100, "x": x, "y": y},
                }
            )
            t += 0.25
    gestures = [
        (8.0, "right_hand_up"),
        (13.0, None),
        (20.0, "left_hand_up"),
        (24.0, None),
        (32.0, "hands_together"),
        (38.0, None),
    ]
    for gt, g in gestures:
        timeline.append(
            {
                "time_s": gt,
                "command": {"type": "set_gesture", "human_id": 100, "gesture": g},
            }
        )
    timeline.append({"time_s": 15.0, "command": {"type": "set_mode", "mode": "following"}})
    timeline.append({"time_s": 30.0, "command": {"type": "set_mode", "mode": "cohesion"}})
    timeline.append({"time_s": 45.0, "command": {"type": "set_mode", "mode": "circling"}})
    timeline.sort(key=lambda e: e["time_s"])
    return {
        "name": "flock_gestures",
        "boundary": {"x_min": 0, "x_max": 15, "y_min": 0, "y_max": 15},
        "robots": [[3.0, 3.0], [5.0, 7.0], [7.0, 3.5], [9.0, 8.0], [11.0, 4.5], [12.0, 11.0]],
        "seed": 23,
        "duration_s": 60.0,
        "timeline": timeline,
    }


def control90() -> dict:
    """The 30 s cohesion/separation/alignment cycle, 90 s."""
    return {
        "name": "control90",
        "boundary": {"x_min": 0, "x_max": 15, "y_min": 0, "y_max": 15},
        "robots": [[4.0, 4.0], [6.0, 8.0], [8.0, 5.0], [10.0, 9.0], [11.0, 5.5], [6.5, 11.0]],
        "seed": 42,
        "duration_s": 90.0,
        "timeline": [
            {"time_s": 0.0, "command": {"type": "set_condition", "condition": "control"}}
        ],
    }


def main() -> None:
    OUT.mkdir(exist_ok=True)
    for recipe in (solo_circling, flock_gestures, control90):
        data = recipe()
        path = OUT / f"{data['name']}.json"
        path.write_text(json.dumps(data, indent=1) + "\n")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
