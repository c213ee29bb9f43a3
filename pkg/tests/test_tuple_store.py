import random

from tuplechain.model import FieldSchema, Rule, best_rule
from tuplechain.tuple_store import (Entry, TouchCounter, TupleTable,
                                    delete_marker, leave_marker,
                                    obtain_marker, report_hint)

S = FieldSchema((8, 8))


def pk(a, b):
    return S.pack((a, b))


def make_chain_tuples(*masks):
    """Link bare tuples in the given (head..tail) order."""
    tuples = [TupleTable(m) for m in masks]
    prev = None
    for t in tuples:
        t.prev = prev
        if prev is not None:
            prev.next = t
        prev = t
    return tuples


# masks of the running example: t1 < t2 < t3 < t5
T1, T2, T3, T5 = (pk(0x80, 0xC0), pk(0xC0, 0xF0), pk(0xC0, 0xFC),
                  pk(0xF8, 0xFC))


def test_probe_masks_the_key():
    t3 = TupleTable(T3)
    e = Entry(pk(0x00, 0xA8))
    t3.table[e.key] = e
    assert t3.probe(pk(0x20, 0xA8)) is e
    assert TupleTable(T3).probe(pk(0x20, 0xA8)) is None


def test_probe_equals_linear_scan():
    rng = random.Random(3)
    t = TupleTable(pk(0xF0, 0xCC))
    for _ in range(40):
        e = Entry(rng.getrandbits(16) & t.mask)
        t.table.setdefault(e.key, e)
    for _ in range(300):
        key = rng.getrandbits(16)
        scan = [e for e in t.table.values() if e.key == (key & t.mask)]
        got = t.probe(key)
        assert got is (scan[0] if scan else None)


def test_leave_marker_recurses_down_the_chain():
    t1, t2, t3, t5 = make_chain_tuples(T1, T2, T3, T5)
    e1 = Entry(pk(0x20, 0xA8))
    t5.table[e1.key] = e1
    c = TouchCounter()
    k = leave_marker(e1, t5.prev, c)
    assert k.key == pk(0x00, 0xA8) and k is t3.table[pk(0x00, 0xA8)]
    # the marker trail continues into t2 and t1
    assert t2.table[pk(0x00, 0xA0)].key == pk(0x00, 0xA0)
    assert t1.table[pk(0x00, 0x80)].key == pk(0x00, 0x80)
    assert e1.marker is k and e1 in k.owners
    assert k.marker is t2.table[pk(0x00, 0xA0)]
    assert c.marker == 3  # one entry per preceding tuple


def test_leave_marker_at_chain_head():
    (t1,) = make_chain_tuples(T1)
    e = Entry(pk(0x80, 0x40))
    t1.table[e.key] = e
    assert leave_marker(e, t1.prev, TouchCounter()) is None
    assert e.marker is None


def test_marker_entries_bounded_per_rule():
    t1, t2, t3 = make_chain_tuples(T1, T2, T3)
    rng = random.Random(9)
    rules = 0
    for _ in range(25):
        key = rng.getrandbits(16) & t3.mask
        if key in t3.table:
            continue
        e = Entry(key)
        t3.table[key] = e
        leave_marker(e, t3.prev, TouchCounter())
        rules += 1
    # at most (chain length - 1) marker entries per rule
    assert len(t1.table) + len(t2.table) <= rules * 2


def test_hint_reporting_keeps_higher_priority_rule():
    # two markers report r2 and r1 upward; the shared owner has no rule
    # and adopts r2; its own owner holds the still-better r6
    t1, t2, t3, t5 = make_chain_tuples(T1, T2, T3, T5)
    r6 = Rule(pk(0x20, 0xA8), T5, priority=60, rule_id=6)
    e1 = Entry(r6.fields)
    e1.rule = r6
    t5.table[e1.key] = e1
    e2 = leave_marker(e1, t5.prev, TouchCounter())
    e1.hint = best_rule(r6, e2.hint)

    r2 = Rule(pk(0x00, 0xA0), T2, priority=20, rule_id=2)
    e3 = t2.table[pk(0x00, 0xA0)]
    e3.rule = r2
    e3.hint = best_rule(r2, e3.marker.hint)
    report_hint(e3, TouchCounter())

    r1 = Rule(pk(0x00, 0x80), T1, priority=10, rule_id=1)
    e4 = t1.table[pk(0x00, 0x80)]
    e4.rule = e4.hint = r1
    report_hint(e4, TouchCounter())

    assert e2.hint is r2
    assert e1.hint is r6


def test_report_hint_no_owners_is_noop():
    e = Entry(0)
    e.hint = Rule(0, 0, 1, 0)
    c = TouchCounter()
    report_hint(e, c)
    assert c.hint == 0


def test_obtain_marker_is_lookup_only():
    t1, t2 = make_chain_tuples(T1, T2)
    e = Entry(pk(0x40, 0x30))
    t2.table[e.key] = e
    assert obtain_marker(e, t2.prev) is None  # nothing created yet
    assert not t1.table
    k = leave_marker(e, t2.prev, TouchCounter())
    assert obtain_marker(e, t2.prev) is k
    assert obtain_marker(e, t2.prev) is t1.probe(e.key)


def test_delete_marker_tears_down_sole_trail():
    t1, t2, t3 = make_chain_tuples(T1, T2, T3)
    e = Entry(pk(0x40, 0xA8))
    t3.table[e.key] = e
    leave_marker(e, t3.prev, TouchCounter())
    delete_marker(e, t3.prev, TouchCounter())
    del t3.table[e.key]
    assert not t1.table and not t2.table and not t3.table


def test_delete_marker_spares_shared_marker():
    t2, t3 = make_chain_tuples(T2, T3)
    ea = Entry(pk(0x40, 0xA4))
    eb = Entry(pk(0x40, 0xA8))  # same key under t2's mask (0xC0, 0xF0)
    t3.table[ea.key] = ea
    t3.table[eb.key] = eb
    ka = leave_marker(ea, t3.prev, TouchCounter())
    kb = leave_marker(eb, t3.prev, TouchCounter())
    assert ka is kb and len(ka.owners) == 2
    delete_marker(ea, t3.prev, TouchCounter())
    assert ka in t2.table.values() and ka.owners == [eb]


def _full_hint_recompute(tuples):
    """Topological pass from head to tail, the oracle for hint state."""
    want = {}
    for t in tuples:
        for e in t.table.values():
            up = want.get(id(e.marker)) if e.marker is not None else None
            want[id(e)] = best_rule(e.rule, up)
    return want


def test_incremental_hints_match_full_recomputation():
    rng = random.Random(11)
    tuples = make_chain_tuples(T1, T2, T3, T5)
    live = []
    c = TouchCounter()
    for step in range(400):
        if live and rng.random() < 0.4:
            t, e = live.pop(rng.randrange(len(live)))
            if e.owners:
                e.rule = None
                e.hint = e.marker.hint if e.marker else None
                report_hint(e, c)
            else:
                delete_marker(e, t.prev, c)
                del t.table[e.key]
        else:
            t = tuples[rng.randrange(len(tuples))]
            key = rng.getrandbits(16) & t.mask
            e = t.table.get(key)
            if e is None:
                e = Entry(key)
                t.table[key] = e
                leave_marker(e, t.prev, c)
            if e.rule is not None:
                continue
            e.rule = Rule(key, t.mask, rng.randrange(100), step)
            e.hint = best_rule(e.rule, e.marker.hint if e.marker else None)
            report_hint(e, c)
            live.append((t, e))
        if step % 50 == 0:
            want = _full_hint_recompute(tuples)
            for t in tuples:
                for e in t.table.values():
                    assert e.hint == want[id(e)]
