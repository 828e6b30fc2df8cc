from artifact.history import INV, RES, History, HistoryEvent, dump_history, load_history


def test_from_ops_copies_call_fields():
    h = History.from_ops([("inv", 0, "write", "x", 3), ("res", 0)])
    assert h.events[1] == HistoryEvent(RES, 0, "write", "x", 3, None, 0)
    assert h.complete


def test_incomplete():
    h = History.from_ops([("inv", 0, "read", "x"), ("inv", 1, "read", "x"), ("res", 0, 0)])
    assert not h.complete
    assert len(h) == 3


def test_key_ignores_op_numbering_only_through_fields():
    a = History((HistoryEvent(INV, 0, "read", "x", client=4),))
    b = History((HistoryEvent(INV, 7, "read", "x", client=4),))
    assert a.key() == b.key()


def test_str():
    h = History.from_ops([("inv", 0, "write", "k1", 10), ("res", 0), ("inv", 1, "read", "k1"), ("res", 1, 0)])
    assert str(h) == "inv0(write, k1, 10); res0(); inv1(read, k1); res1(0)"


def test_json_round_trip():
    h = History.from_ops([("inv", 0, "write", "x", 1), ("inv", 1, "read", "x"), ("res", 1, 1), ("res", 0)])
    back, adt, default = load_history(dump_history(h, "MAP", 0))
    assert back == h
    assert (adt, default) == ("MAP", 0)
