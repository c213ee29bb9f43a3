"""One tuple: a mask plus a hash table of entries, with marker/hint upkeep.

Entries are shared mutable nodes: an entry may simultaneously hold a rule
of its own tuple and act as a marker for entries of the succeeding tuple.
``marker`` is a back-link to the entry's own marker in the preceding
tuple (at most one), ``owners`` lists the entries it is a marker for.
"""

from __future__ import annotations

from .model import Rule, best_rule


class Entry:
    """A hash-table entry: key, optional rule, hint, owner links."""

    __slots__ = ("key", "rule", "hint", "owners", "marker")

    def __init__(self, key: int):
        self.key = key
        self.rule: Rule | None = None
        self.hint: Rule | None = None
        self.owners: list[Entry] = []
        self.marker: Entry | None = None

    def __repr__(self):  # pragma: no cover - debugging aid
        return (f"Entry(key={self.key:#x}, rule={self.rule}, "
                f"hint={self.hint}, owners={len(self.owners)})")


class TouchCounter:
    """Counts entries touched by marker and hint maintenance."""

    __slots__ = ("marker", "hint")

    def __init__(self):
        self.marker = 0
        self.hint = 0

    @property
    def total(self) -> int:
        return self.marker + self.hint

    def reset(self):
        self.marker = 0
        self.hint = 0


class TupleTable:
    """All rules sharing one mask, keyed by their masked field vectors.

    ``prev``/``next`` are the chain-order neighbours (less / more
    specific); they are maintained by the owning chain.
    """

    __slots__ = ("mask", "table", "rule_count", "prev", "next")

    def __init__(self, mask: int):
        self.mask = mask
        self.table: dict[int, Entry] = {}
        self.rule_count = 0
        self.prev: TupleTable | None = None
        self.next: TupleTable | None = None

    @property
    def entry_count(self) -> int:
        return len(self.table)

    def probe(self, key: int) -> Entry | None:
        """One hash probe with the full (unmasked) packet key."""
        return self.table.get(key & self.mask)


def leave_marker(e: Entry, t: TupleTable | None,
                 counter: TouchCounter) -> Entry | None:
    """Find-or-create e's marker in the preceding tuple t, recursively.

    A freshly created marker leaves its own marker further down and
    inherits that marker's hint; e is recorded as an owner either way.
    """
    if t is None:
        return None
    key = e.key & t.mask
    k = t.table.get(key)
    counter.marker += 1
    if k is None:
        k = Entry(key)
        t.table[key] = k
        kk = leave_marker(k, t.prev, counter)
        k.hint = kk.hint if kk is not None else None
    k.owners.append(e)
    e.marker = k
    return k


def obtain_marker(e: Entry, t: TupleTable | None) -> Entry | None:
    """e's existing marker in t, without creating anything."""
    if t is None:
        return None
    return e.marker


def delete_marker(e: Entry, t: TupleTable | None,
                  counter: TouchCounter) -> None:
    """Drop e from its marker's owners; erase markers left ownerless."""
    k = e.marker
    if k is None or t is None:
        return
    counter.marker += 1
    k.owners.remove(e)
    e.marker = None
    if k.rule is None and not k.owners:
        delete_marker(k, t.prev, counter)
        del t.table[k.key]


def report_hint(e: Entry, counter: TouchCounter) -> None:
    """Propagate e's hint to its owners, recursing only on change."""
    stack = [e]
    while stack:
        cur = stack.pop()
        for o in cur.owners:
            counter.hint += 1
            new = best_rule(o.rule, cur.hint)
            if new is not o.hint:
                o.hint = new
                stack.append(o)
