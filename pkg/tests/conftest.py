"""Shared fixtures and trace-invariant checkers."""

from __future__ import annotations

import json
import pathlib
from collections import deque

import pytest

import tml2

ROOT = pathlib.Path(__file__).resolve().parent.parent
SAMPLES = ROOT / "samples"
GOLDEN = pathlib.Path(__file__).resolve().parent / "golden"

SAMPLE_PATHS = sorted(SAMPLES.glob("*.tml2"))


def read_sample(stem: str) -> str:
    return (SAMPLES / f"{stem}.tml2").read_text(encoding="utf-8")


def parse_sample(stem: str) -> tml2.Model:
    return tml2.parse(read_sample(stem), f"samples/{stem}.tml2")


def validated_sample(stem: str) -> tml2.Model:
    model = parse_sample(stem)
    report = tml2.validate(model)
    assert report.ok, report.render()
    return model


@pytest.fixture
def samples_dir() -> pathlib.Path:
    return SAMPLES


# --- trace invariant checkers -------------------------------------------------


def check_causality_and_conservation(result: tml2.SimulationResult) -> None:
    """Every dispatch pairs FIFO with an earlier send to the same target;
    sends == dispatches + messages still queued at termination."""
    pending: dict[str, deque] = {}
    sends = 0
    dispatches = 0
    for ev in result.trace:
        if ev.kind == "Send":
            sends += 1
            pending.setdefault(ev.detail["to"], deque()).append(ev)
        elif ev.kind == "Dispatch":
            dispatches += 1
            queue = pending.get(ev.instance)
            assert queue, f"dispatch at step {ev.step} with no matching send"
            send_ev = queue.popleft()
            assert send_ev.step < ev.step, (
                f"causality violated: send step {send_ev.step} !< dispatch step {ev.step}"
            )
            assert send_ev.detail["message"] == ev.detail["message"]
            assert send_ev.detail["args"] == ev.detail["args"]
    queued = sum(snap.pending for snap in result.instances)
    assert sends == dispatches + queued
    leftover = sum(len(q) for q in pending.values())
    assert leftover == queued


def check_steps_monotone(result: tml2.SimulationResult) -> None:
    steps = [ev.step for ev in result.trace]
    assert steps == sorted(steps)


def check_states_declared(model: tml2.Model, result: tml2.SimulationResult) -> None:
    for snap in result.instances:
        thing = model.thing(snap.thing)
        assert thing is not None
        if thing.statechart is None:
            assert snap.state is None
        else:
            assert snap.state in {s.name for s in thing.statechart.states}


def trace_as_dicts(result: tml2.SimulationResult) -> list[dict]:
    return [json.loads(line) for line in tml2.trace_to_jsonl(result.trace).splitlines()]
