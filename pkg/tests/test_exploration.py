import json

import pytest

from artifact.actors import BehaviorTable, make_state, restore
from artifact.benchmarks import prepare
from artifact.exploration import (
    Engine,
    ExplorationError,
    dedupe_histories,
    explore,
    replay,
    schedule_to_history,
    stateless_time_estimate,
)
from artifact.harness import HarnessConfig
from artifact.history import History
from artifact.schedulers import SchedulerPolicy, make_strategy


def register():
    return prepare("register-correct")


def test_exhaustive_register_terminates():
    state, behavior, h = register()
    rep = explore(state, h, "EX", behavior=behavior)
    assert rep.exhausted
    assert rep.schedule_count == len(rep.depths) < 50_000
    assert rep.incomplete == 0


def test_cutoff_is_respected():
    state, behavior, h = register()
    rep = explore(state, h, "EX", cutoff=17, behavior=behavior)
    assert rep.schedule_count == 17 and not rep.exhausted
    with pytest.raises(ValueError):
        explore(state, h, "EX", cutoff=0, behavior=behavior)


def test_client_messages_are_forced_right_after_their_cause():
    state, behavior, h = register()
    rep = explore(state, h, "EX", cutoff=50, behavior=behavior, keep_schedules=True)
    for sched in rep.schedules:
        entries = sched.entries
        assert [e.index for e in entries] == list(range(1, len(entries) + 1))
        for k, e in enumerate(entries):
            assert e.forced == (e.receiver in sched.clients)
            if e.forced:
                assert entries[k - 1].receiver == e.sender


def test_every_schedule_replays():
    state, behavior, h = register()
    finals = []
    rep = explore(
        state,
        h,
        "IR",
        cutoff=300,
        behavior=behavior,
        keep_schedules=True,
        observer=lambda final, sched: finals.append(final),
    )
    assert len(finals) == rep.schedule_count
    for sched, final in zip(rep.schedules, finals):
        assert replay(state, behavior, sched.entries) == final
        assert not final.pending


def test_replay_rejects_foreign_entries():
    state, behavior, h = register()
    rep = explore(state, h, "EX", cutoff=2, behavior=behavior, keep_schedules=True)
    entries = rep.schedules[0].entries
    with pytest.raises(ExplorationError):
        replay(state, behavior, entries[1:])


def test_history_placement():
    state, behavior, h = register()
    rep = explore(state, h, "EX", cutoff=5, behavior=behavior, keep_schedules=True)
    sched = rep.schedules[0]
    history = schedule_to_history(sched, h)
    assert history.complete and len(history) == 2 * len(sched.clients)
    invs = [e for e in sched.entries if e.sender in sched.clients]
    assert [ev.client for ev in history.events if ev.kind == "inv"] == [e.sender for e in invs]
    writes = [ev for ev in history.events if ev.op == "write" and ev.kind == "res"]
    assert all(ev.ret is None for ev in writes)


def test_snapshots_restore_node_states():
    state, behavior, h = register()
    engine = Engine(state, behavior, h, make_strategy(SchedulerPolicy("EX"), h), cutoff=3)
    engine.explore()
    prefix = []
    for node in engine.stack:
        assert node.explored <= set(node.enabled_seqs) | {-1}
        assert node.state == replay(state, behavior, prefix)
        assert restore(node.snapshot)[0] == node.state
        prefix.extend(node.step)


def test_runaway_system_raises_with_prefix():
    def bounce(local, msg, ctx):
        ctx.send(msg.sender, "Ball")

    state = make_state([(1, "p", {}), (2, "p", {})])
    state.post(1, 2, "Ball")
    h = HarnessConfig("MAP", 0, {}, (), {}, (), {})
    engine = Engine(state, BehaviorTable({"p": {"Ball": bounce}}), h, make_strategy(SchedulerPolicy("EX"), h), max_depth=20)
    with pytest.raises(ExplorationError) as err:
        engine.explore()
    assert len(err.value.prefix) >= 19


def test_action_failure_is_reported_with_prefix():
    def boom(local, msg, ctx):
        ctx.send(99, "Nowhere")

    state = make_state([(1, "p", {})])
    state.post(1, 1, "Go")
    h = HarnessConfig("MAP", 0, {}, (), {}, (), {})
    with pytest.raises(ExplorationError):
        explore(state, h, "EX", behavior=BehaviorTable({"p": {"Go": boom}}))


def test_random_restarts_from_root():
    state, behavior, h = register()
    rep = explore(state, h, "SR", cutoff=300, seed=1, behavior=behavior)
    assert rep.schedule_count == 300
    assert len(rep.complete_histories()) > 10


def test_report_json_and_estimate():
    state, behavior, h = register()
    rep = explore(state, h, "TD", cutoff=20, behavior=behavior, keep_schedules=True)
    doc = json.loads(rep.dumps(include_schedules=True))
    assert doc["schedules"] == 20 and len(doc["schedule_list"]) == 20
    assert stateless_time_estimate(rep) == pytest.approx(sum(rep.depths) * rep.mean_receive_time)
    assert rep.receive_count > 0


def test_dedupe_keeps_first_index():
    a = History.from_ops([("inv", 0, "read", "x"), ("res", 0, 0)])
    b = History.from_ops([("inv", 0, "read", "x"), ("res", 0, 1)])
    out = dedupe_histories([a, b, a, a])
    assert [(u.first_index, u.count) for u in out] == [(1, 3), (2, 1)]


def test_behavior_is_required():
    state, _, h = register()
    with pytest.raises(ValueError):
        explore(state, h, "EX")
