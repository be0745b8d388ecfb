from __future__ import annotations

from datetime import datetime, timedelta, timezone

import pytest

from genmine import EventInstance, EventLog, Trace, make_net

EPOCH = datetime(2021, 6, 1, tzinfo=timezone.utc)


def trace_from_labels(labels, case_id="c1", start=EPOCH):
    events = tuple(
        EventInstance(lbl, start + timedelta(seconds=i)) for i, lbl in enumerate(labels)
    )
    return Trace(case_id=case_id, events=events)


def log_from_variants(variant_lists):
    traces = tuple(
        trace_from_labels(labels, case_id=f"c{i + 1}") for i, labels in enumerate(variant_lists)
    )
    return EventLog(traces)


@pytest.fixture
def sequence_net_ab():
    """p_src -> a -> p1 -> b -> p_sink"""
    return make_net(
        places=["p_src", "p1", "p_sink"],
        transitions=[("t_a", "a"), ("t_b", "b")],
        arcs=[("p_src", "t_a"), ("t_a", "p1"), ("p1", "t_b"), ("t_b", "p_sink")],
        initial_marking={"p_src": 1},
        final_markings=[{"p_sink": 1}],
    )


@pytest.fixture
def xor_net_abc():
    """a then (b | c)"""
    return make_net(
        places=["p0", "p1", "p2"],
        transitions=[("t_a", "a"), ("t_b", "b"), ("t_c", "c")],
        arcs=[
            ("p0", "t_a"), ("t_a", "p1"),
            ("p1", "t_b"), ("t_b", "p2"),
            ("p1", "t_c"), ("t_c", "p2"),
        ],
        initial_marking={"p0": 1},
        final_markings=[{"p2": 1}],
    )


@pytest.fixture
def silent_skip_net():
    """a then (b | silent skip)"""
    return make_net(
        places=["p0", "p1", "p2"],
        transitions=[("t_a", "a"), ("t_b", "b"), ("t_tau", None)],
        arcs=[
            ("p0", "t_a"), ("t_a", "p1"),
            ("p1", "t_b"), ("t_b", "p2"),
            ("p1", "t_tau"), ("t_tau", "p2"),
        ],
        initial_marking={"p0": 1},
        final_markings=[{"p2": 1}],
    )
