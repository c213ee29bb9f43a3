"""A chain: a strictly ordered tuple sequence searched via a binary tree.

Chain order runs from the least specific mask (head, index 0) to the most
specific (tail).  The search tree is kept perfectly balanced by rebuilding
it whenever the tuple sequence changes; tuple insert/delete is rare
(triggered only by the first rule of a mask or the removal of its last
entry), so the O(m) rebuild is cheap and the height bound is tight.
A node's ``fail`` child covers the less specific side, ``succ`` the more
specific side, so a probe hit descends succ and a miss descends fail.
"""

from __future__ import annotations

import math

from .model import Rule, best_rule, mask_less_than
from .tuple_store import (Entry, TouchCounter, TupleTable, delete_marker,
                          leave_marker, report_hint)


class ChainError(ValueError):
    """Misuse of a chain operation (bad position, non-empty tuple, ...)."""


class DuplicateRuleError(ValueError):
    """A rule with the same fields and mask is already stored."""


class _Node:
    __slots__ = ("tup", "fail", "succ")

    def __init__(self, tup: TupleTable):
        self.tup = tup
        self.fail: _Node | None = None
        self.succ: _Node | None = None


def _build_tree(tuples: list[TupleTable], lo: int, hi: int) -> _Node | None:
    if lo >= hi:
        return None
    mid = (lo + hi) // 2
    node = _Node(tuples[mid])
    node.fail = _build_tree(tuples, lo, mid)
    node.succ = _build_tree(tuples, mid + 1, hi)
    return node


class Chain:
    """One tuple chain with its search tree and maintenance counters."""

    def __init__(self):
        self.tuples: list[TupleTable] = []
        self.root: _Node | None = None
        self.rule_count = 0
        self.touches = TouchCounter()

    @property
    def tuple_count(self) -> int:
        return len(self.tuples)

    # -- structure ---------------------------------------------------

    def _relink(self):
        prev = None
        for t in self.tuples:
            t.prev = prev
            if prev is not None:
                prev.next = t
            prev = t
        if prev is not None:
            prev.next = None
        self.root = _build_tree(self.tuples, 0, len(self.tuples))

    def can_host(self, mask: int) -> int | None:
        """The unique position keeping the chain strictly ordered, if any."""
        j = 0
        n = len(self.tuples)
        while j < n and mask_less_than(self.tuples[j].mask, mask):
            j += 1
        if j < n and not mask_less_than(mask, self.tuples[j].mask):
            return None
        return j

    def insert_tuple(self, t: TupleTable, at: int) -> None:
        """Splice an empty tuple in and re-anchor successor markers."""
        if t.table or t.rule_count:
            raise ChainError("inserted tuple must be empty")
        if at != self.can_host(t.mask):
            raise ChainError(f"position {at} breaks chain order")
        self.tuples.insert(at, t)
        self._relink()
        nxt = t.next
        if nxt is None:
            return
        for e in list(nxt.table.values()):
            old = e.marker
            if old is not None:
                old.owners.remove(e)
                e.marker = None
            leave_marker(e, t, self.touches)
            e.hint = best_rule(e.rule, e.marker.hint)
            report_hint(e, self.touches)
            # The re-left marker trail re-finds the old entries by key,
            # so orphans are not expected; collect defensively anyway.
            if old is not None and old.rule is None and not old.owners:
                delete_marker(old, t.prev.prev if t.prev else None,
                              self.touches)
                del t.prev.table[old.key]

    def remove_tuple(self, t: TupleTable) -> None:
        if t.table or t.rule_count:
            raise ChainError("cannot remove a non-empty tuple")
        self.tuples.remove(t)
        t.prev = t.next = None
        self._relink()

    # -- lookup ------------------------------------------------------

    def lookup(self, key: int) -> tuple[Rule | None, int]:
        """Binary search down the tree; returns (best rule, probes)."""
        node = self.root
        best: Rule | None = None
        probes = 0
        while node is not None:
            t = node.tup
            e = t.table.get(key & t.mask)
            probes += 1
            if e is not None:
                if e.hint is not None:
                    best = best_rule(best, e.hint)
                node = node.succ
            else:
                node = node.fail
        return best, probes

    # -- rule updates ------------------------------------------------

    def insert_rule(self, t: TupleTable, r: Rule) -> None:
        if r.mask != t.mask:
            raise ChainError("rule mask does not match tuple mask")
        e = t.table.get(r.fields)
        if e is None:
            e = Entry(r.fields)
            t.table[r.fields] = e
            leave_marker(e, t.prev, self.touches)
        elif e.rule is not None:
            raise DuplicateRuleError(
                f"entry {r.fields:#x} already holds rule {e.rule.rule_id}")
        e.rule = r
        k = e.marker
        e.hint = best_rule(r, k.hint if k is not None else None)
        report_hint(e, self.touches)
        t.rule_count += 1
        self.rule_count += 1

    def delete_rule(self, t: TupleTable, r: Rule) -> bool:
        """Remove r if present; True on deletion.  The caller is
        responsible for dropping the tuple when its table empties."""
        e = t.table.get(r.fields)
        if e is None or e.rule != r:
            return False
        if not e.owners:
            delete_marker(e, t.prev, self.touches)
            del t.table[e.key]
        else:
            k = e.marker
            e.hint = k.hint if k is not None else None
            e.rule = None
            report_hint(e, self.touches)
        t.rule_count -= 1
        self.rule_count -= 1
        return True

    # -- auditing ----------------------------------------------------

    def probe_bound(self) -> int:
        m = len(self.tuples)
        return 1 + int(math.log2(m)) if m else 0

    def audit(self) -> list[str]:
        """Structural invariant check; returns violations (empty = clean)."""
        out: list[str] = []
        for a, b in zip(self.tuples, self.tuples[1:]):
            if not mask_less_than(a.mask, b.mask):
                out.append(f"chain order broken: {a.mask:#x} !< {b.mask:#x}")
        # prev/next links and tree in-order must agree with the sequence.
        for i, t in enumerate(self.tuples):
            want_prev = self.tuples[i - 1] if i > 0 else None
            want_next = self.tuples[i + 1] if i + 1 < len(self.tuples) else None
            if t.prev is not want_prev or t.next is not want_next:
                out.append(f"prev/next links wrong at position {i}")
        inorder: list[TupleTable] = []

        def walk(n: _Node | None, depth: int) -> int:
            if n is None:
                return 0
            h = 1 + max(walk(n.fail, depth), walk(n.succ, depth))
            return h

        def collect(n: _Node | None):
            if n is None:
                return
            collect(n.fail)
            inorder.append(n.tup)
            collect(n.succ)

        collect(self.root)
        if inorder != self.tuples:
            out.append("tree in-order disagrees with chain order")
        height = walk(self.root, 0)
        if self.tuples and height > 2 * math.log2(len(self.tuples) + 1):
            out.append(f"tree height {height} exceeds balance bound")

        entry_total = 0
        rules_seen = 0
        for t in self.tuples:
            rc = 0
            for key, e in t.table.items():
                entry_total += 1
                if key != e.key or e.key & t.mask != e.key:
                    out.append(f"entry key {e.key:#x} not canonical in "
                               f"tuple {t.mask:#x}")
                if e.rule is None and not e.owners:
                    out.append(f"dead entry {e.key:#x} in tuple {t.mask:#x}")
                if e.rule is not None:
                    rc += 1
                    if e.rule.mask != t.mask or e.rule.fields != e.key:
                        out.append(f"rule {e.rule.rule_id} misfiled")
                if t.prev is not None:
                    k = e.marker
                    if k is None:
                        out.append(f"entry {e.key:#x} lacks a marker")
                    else:
                        if k.key != e.key & t.prev.mask:
                            out.append(f"marker key law broken at {e.key:#x}")
                        if t.prev.table.get(k.key) is not k:
                            out.append(f"marker of {e.key:#x} not in prev")
                        if e not in k.owners:
                            out.append(f"owner symmetry broken at {e.key:#x}")
                elif e.marker is not None:
                    out.append(f"head entry {e.key:#x} has a marker")
                want = best_rule(e.rule,
                                 e.marker.hint if e.marker else None)
                if e.hint != want:
                    out.append(f"hint law broken at {e.key:#x} in tuple "
                               f"{t.mask:#x}")
                for o in e.owners:
                    if o.marker is not e:
                        out.append(f"owner back-link broken at {e.key:#x}")
            if rc != t.rule_count:
                out.append(f"rule_count mismatch in tuple {t.mask:#x}")
            rules_seen += rc
        if rules_seen != self.rule_count:
            out.append("chain rule_count mismatch")
        if self.rule_count and entry_total > self.rule_count * len(self.tuples):
            out.append(f"entry total {entry_total} exceeds space bound "
                       f"{self.rule_count * len(self.tuples)}")
        if self.rule_count == 0 and entry_total:
            out.append("entries present in a rule-free chain")
        owner_links = sum(len(e.owners) for t in self.tuples
                          for e in t.table.values())
        if owner_links > entry_total:
            out.append("owner links exceed entry count")
        return out
