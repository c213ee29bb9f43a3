"""Reference classifiers: exhaustive linear scan and plain tuple search.

The linear scan is the ground-truth oracle everything else is checked
against.  ``linear_lookup_batch`` is a vectorized variant for schemas
that fit 64 bits; it exists only to make large oracle sweeps practical
and is itself spot-checked against the scalar scan.
"""

from __future__ import annotations

import numpy as np

from .model import MatchResult, Rule, best_rule, matches


def linear_lookup(rules, key: int) -> MatchResult:
    best = None
    for r in rules:
        if matches(key, r):
            best = best_rule(best, r)
    return MatchResult(best, len(rules))


def linear_lookup_batch(rules, keys) -> list[tuple[int, int | None]]:
    """(priority, rule_id) per key via numpy; None id marks a miss.

    Requires every value to fit an unsigned 64-bit word and priorities
    in +-2^30; falls back on the scalar scan otherwise.
    """
    rules = list(rules)
    if not rules:
        from .model import MISS_PRIORITY
        return [(MISS_PRIORITY, None) for _ in keys]
    ok = all(0 <= r.fields < 2**64 and 0 <= r.mask < 2**64
             and abs(r.priority) < 2**30 and r.rule_id < 2**32
             for r in rules) and all(0 <= k < 2**64 for k in keys)
    if not ok:
        return [(res.priority, res.rule_id)
                for res in (linear_lookup(rules, k) for k in keys)]
    F = np.array([r.fields for r in rules], dtype=np.uint64)
    M = np.array([r.mask for r in rules], dtype=np.uint64)
    # score packs (priority, smaller-id-wins) into one int64 argmax
    S = (np.array([r.priority for r in rules], dtype=np.int64) << 32) \
        + (0xFFFFFFFF - np.array([r.rule_id for r in rules], dtype=np.int64))
    K = np.array(list(keys), dtype=np.uint64)
    out: list[tuple[int, int | None]] = []
    chunk = max(1, (1 << 24) // max(1, len(rules)))
    from .model import MISS_PRIORITY
    for lo in range(0, len(K), chunk):
        kc = K[lo:lo + chunk]
        hit = (kc[:, None] & M[None, :]) == F[None, :]
        score = np.where(hit, S[None, :], np.int64(-2**62))
        idx = np.argmax(score, axis=1)
        top = score[np.arange(len(kc)), idx]
        for i in range(len(kc)):
            if top[i] == -2**62:
                out.append((MISS_PRIORITY, None))
            else:
                r = rules[idx[i]]
                out.append((r.priority, r.rule_id))
    return out


class LinearClassifier:
    """Exhaustive scan over a flat rule list."""

    def __init__(self, rules=()):
        self.rules: list[Rule] = list(rules)

    def insert(self, r: Rule) -> None:
        self.rules.append(r)

    def remove(self, r: Rule) -> bool:
        try:
            self.rules.remove(r)
            return True
        except ValueError:
            return False

    def lookup(self, key: int) -> MatchResult:
        return linear_lookup(self.rules, key)


class TssClassifier:
    """Plain tuple space search: one probe per tuple, every lookup."""

    def __init__(self, rules=()):
        self.tables: dict[int, dict[int, Rule]] = {}
        self._order: list[int] = []   # mask-sorted for deterministic probes
        for r in rules:
            self.insert(r)

    @property
    def tuple_count(self) -> int:
        return len(self._order)

    def insert(self, r: Rule) -> None:
        tbl = self.tables.get(r.mask)
        if tbl is None:
            tbl = self.tables[r.mask] = {}
            self._order.append(r.mask)
            self._order.sort()
        if r.fields in tbl:
            raise ValueError(f"entry {r.fields:#x} already holds a rule")
        tbl[r.fields] = r

    def remove(self, r: Rule) -> bool:
        tbl = self.tables.get(r.mask)
        if tbl is None or tbl.get(r.fields) != r:
            return False
        del tbl[r.fields]
        if not tbl:
            del self.tables[r.mask]
            self._order.remove(r.mask)
        return True

    def lookup(self, key: int) -> MatchResult:
        best = None
        for mask in self._order:
            r = self.tables[mask].get(key & mask)
            if r is not None:
                best = best_rule(best, r)
        return MatchResult(best, len(self._order))
