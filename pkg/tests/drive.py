"""Drive a system by hand: deliver messages named by (sender, receiver, name)."""

from artifact.actors import Receive, execute_receive
from artifact.exploration import Schedule, ScheduleEntry
from artifact.harness import client_records


def find(state, sender, receiver, name):
    for m in sorted(state.pending.values(), key=lambda m: m.seq):
        if (m.sender, m.receiver, m.name) == (sender, receiver, name):
            return Receive(m)
    raise AssertionError(f"no pending {name} {sender}->{receiver}")


def drive(state, behavior, triples):
    """Returns the final state and the schedule that was run."""
    entries = []
    for i, t in enumerate(triples, start=1):
        r = find(state, *t)
        entries.append(ScheduleEntry(i, r))
        state = execute_receive(state, r, behavior).new_state
    return state, Schedule(tuple(entries), client_records(state))


def drain(state, behavior, names=None):
    """Deliver pending messages oldest first until none (of ``names``) remain."""
    while True:
        todo = [m for m in state.pending.values() if names is None or m.name in names]
        if not todo:
            return state
        m = min(todo, key=lambda m: m.seq)
        state = execute_receive(state, Receive(m), behavior).new_state


def micro_system(n=3, same_agent=False):
    """``n`` pending pings that touch nothing but their own agent's counter."""
    from artifact.actors import BehaviorTable, make_state
    from artifact.harness import HarnessConfig

    def ping(local, msg, ctx):
        local["n"] += 1

    agents = [1] if same_agent else list(range(1, n + 1))
    state = make_state([(a, "sink", {"n": 0}) for a in agents])
    for k in range(n):
        a = agents[0] if same_agent else agents[k]
        state.post(a, a, "Ping")
    harness = HarnessConfig("MAP", 0, {}, (), {}, (), {})
    return state, BehaviorTable({"sink": {"Ping": ping}}), harness
