import copy

import pytest

from artifact.actors import (
    ActorError,
    BehaviorTable,
    Payload,
    Receive,
    enabled_receives,
    execute_receive,
    make_state,
    restore,
    snapshot,
)


def counter(local, msg, ctx):
    local["n"] += msg.payload.value
    if msg.payload.params:
        ctx.send(msg.payload.params, "Add", Payload(value=1))


def spawn(local, msg, ctx):
    ctx.create(9, "counter", {"n": 0})
    ctx.send(9, "Add", Payload(value=5))


BEHAVIOR = BehaviorTable({"counter": {"Add": counter, "Spawn": spawn}})


def fresh():
    state = make_state([(1, "counter", {"n": 0}), (2, "counter", {"n": 0})])
    state.post(1, 2, "Add", Payload(value=3, params=1))
    state.post(2, 1, "Add", Payload(value=4))
    return state


def test_enabled_sorted_by_destination_then_seq():
    state = fresh()
    state.post(1, 1, "Add", Payload(value=1))
    assert [(r.destination, r.seq) for r in enabled_receives(state)] == [(1, 2), (1, 3), (2, 1)]


def test_execute_is_pure_and_updates_only_destination():
    state = fresh()
    before = copy.deepcopy(state)
    r = Receive(state.pending[1])
    result = execute_receive(state, r, BEHAVIOR)
    assert state == before
    new = result.new_state
    assert new.agents[2]["n"] == 3
    assert new.agents[1] is state.agents[1]
    assert 1 not in new.pending
    assert [m.name for m in result.emitted] == ["Add"]
    assert result.emitted[0].seq == state.next_seq == 3
    assert new.next_seq == 4


def test_receive_that_is_not_pending():
    state = fresh()
    r = Receive(state.pending[1])
    new = execute_receive(state, r, BEHAVIOR).new_state
    with pytest.raises(ActorError):
        execute_receive(new, r, BEHAVIOR)


def test_missing_action():
    state = fresh()
    state.post(1, 2, "Nope")
    with pytest.raises(ActorError):
        execute_receive(state, Receive(state.pending[3]), BEHAVIOR)


def test_create_agent():
    state = make_state([(1, "counter", {"n": 0})])
    state.post(1, 1, "Spawn")
    new = execute_receive(state, Receive(state.pending[1]), BEHAVIOR).new_state
    assert new.kinds[9] == "counter"
    assert any(m.receiver == 9 for m in new.pending.values())
    assert 9 not in state.agents


def test_unknown_target():
    state = make_state([(1, "counter", {"n": 0})])
    state.post(1, 1, "Add", Payload(value=1, params=7))
    with pytest.raises(ActorError):
        execute_receive(state, Receive(state.pending[1]), BEHAVIOR)


def test_snapshot_round_trip():
    state = fresh()
    snap = snapshot(state)
    for r in enabled_receives(state):
        state = execute_receive(state, r, BEHAVIOR).new_state
    back, _ = restore(snap)
    assert back == fresh()
    back.agents[1]["n"] = 99
    assert restore(snap)[0] == fresh()


def test_clients_absorb_everything():
    state = make_state([(1, "counter", {"n": 0})])
    state.agents[5] = {"index": 0}
    state.kinds[5] = "client"
    state.post(1, 5, "Whatever")
    new = execute_receive(state, Receive(state.pending[1]), BEHAVIOR).new_state
    assert new.agents[5] == {"index": 0} and not new.pending
    assert new.is_client(5) and not new.is_client(1)


def test_agent_ids_positive():
    with pytest.raises(ActorError):
        make_state([(0, "counter", {})])
