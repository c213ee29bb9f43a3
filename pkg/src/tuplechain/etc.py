"""Extended scheme: chains merged into groups behind head tuples.

A group's head mask is the bitwise AND of all member masks, so a packet
that matches any rule of the group necessarily hits the head entry its
rules hashed into.  Each head entry fronts a local chained classifier
over the rules colliding at that key; a head miss skips the whole group.
"""

from __future__ import annotations

from dataclasses import dataclass

from .classifier import TupleChainClassifier
from .graph import PathCover, build_graph, min_path_cover
from .model import FieldSchema, MatchResult, Rule, best_rule, mask_less_than


@dataclass(frozen=True, slots=True)
class GroupPlan:
    head_mask: int
    member_masks: frozenset[int]


def group_chains(pc: PathCover, masks: list[int],
                 min_head_bits: int) -> list[GroupPlan]:
    """Greedily merge the cover's chains into head-tuple groups.

    Merge candidates are ranked by the number of tuple-graph edges
    crossing between the two groups (more crossing = "nearer"), ties by
    the popcount of the merged head mask; a merge is taken only while
    the merged head keeps at least ``min_head_bits`` bits.
    """
    if min_head_bits < 0:
        raise ValueError("min_head_bits must be >= 0")
    g = pc.graph
    idx = {m: i for i, m in enumerate(g.vertices)}
    edges = {(i, j) for i, outs in enumerate(g.adj) for j in outs}
    groups: list[set[int]] = [set(idx[m] for m in path)
                              for path in pc.mask_paths()]

    def head(members: set[int]) -> int:
        out = ~0
        for i in members:
            out &= g.vertices[i]
        return out

    while True:
        best = None
        for a in range(len(groups)):
            for b in range(a + 1, len(groups)):
                merged = head(groups[a] | groups[b])
                if merged.bit_count() < min_head_bits:
                    continue
                cross = sum(1 for i in groups[a] for j in groups[b]
                            if (i, j) in edges or (j, i) in edges)
                score = (cross, merged.bit_count())
                if best is None or score > best[0]:
                    best = (score, a, b)
        if best is None:
            break
        _, a, b = best
        groups[a] |= groups[b]
        del groups[b]
    return [GroupPlan(head(g_), frozenset(g.vertices[i] for i in g_))
            for g_ in groups]


class _HeadEntry:
    __slots__ = ("key", "local")

    def __init__(self, key: int, schema: FieldSchema):
        self.key = key
        self.local = TupleChainClassifier(schema)


class _Group:
    __slots__ = ("head_mask", "member_masks", "head")

    def __init__(self, head_mask: int, member_masks: set[int]):
        self.head_mask = head_mask
        self.member_masks = member_masks
        self.head: dict[int, _HeadEntry] = {}


class EtcClassifier:
    """Group-of-chains classifier with head-tuple filtering."""

    def __init__(self, schema: FieldSchema, min_head_bits: int = 4):
        self.schema = schema
        self.min_head_bits = min_head_bits
        self.groups: list[_Group] = []
        self._mask_to_group: dict[int, _Group] = {}
        self.rule_ids: set[int] = set()

    @property
    def group_count(self) -> int:
        return len(self.groups)

    @classmethod
    def build(cls, schema: FieldSchema, rules: list[Rule],
              min_head_bits: int = 4) -> "EtcClassifier":
        self = cls(schema, min_head_bits)
        if not rules:
            return self
        masks = sorted({r.mask for r in rules})
        pc = min_path_cover(build_graph(masks))
        plans = group_chains(pc, masks, min_head_bits)
        by_group: list[dict[int, list[Rule]]] = []
        for plan in plans:
            grp = _Group(plan.head_mask, set(plan.member_masks))
            self.groups.append(grp)
            for m in plan.member_masks:
                self._mask_to_group[m] = grp
            by_group.append({})
        for r in rules:
            grp = self._mask_to_group[r.mask]
            gi = self.groups.index(grp)
            by_group[gi].setdefault(r.fields & grp.head_mask, []).append(r)
        for grp, buckets in zip(self.groups, by_group):
            for hkey, bucket in buckets.items():
                he = _HeadEntry(hkey, schema)
                he.local = TupleChainClassifier.build(schema, bucket)
                grp.head[hkey] = he
        for r in rules:
            self.rule_ids.add(r.rule_id)
        return self

    # -- lookup ------------------------------------------------------

    def lookup(self, key: int) -> MatchResult:
        best = None
        probes = 0
        for grp in self.groups:
            probes += 1
            he = grp.head.get(key & grp.head_mask)
            if he is None:
                continue
            res = he.local.lookup(key)
            probes += res.probes
            best = best_rule(best, res.rule)
        return MatchResult(best, probes)

    # -- updates -----------------------------------------------------

    def _route(self, r: Rule) -> _Group:
        grp = self._mask_to_group.get(r.mask)
        if grp is not None:
            return grp
        best = None
        for g in self.groups:
            if g.head_mask == r.mask or mask_less_than(g.head_mask, r.mask):
                if best is None or g.head_mask.bit_count() > \
                        best.head_mask.bit_count():
                    best = g
        if best is None:
            best = _Group(r.mask, set())
            self.groups.append(best)
        best.member_masks.add(r.mask)
        self._mask_to_group[r.mask] = best
        return best

    def insert(self, r: Rule) -> None:
        if r.rule_id in self.rule_ids:
            raise ValueError(f"rule id {r.rule_id} already present")
        grp = self._route(r)
        hkey = r.fields & grp.head_mask
        he = grp.head.get(hkey)
        if he is None:
            he = grp.head[hkey] = _HeadEntry(hkey, self.schema)
        he.local.insert(r)
        self.rule_ids.add(r.rule_id)

    def remove(self, r: Rule) -> bool:
        grp = self._mask_to_group.get(r.mask)
        if grp is None:
            return False
        he = grp.head.get(r.fields & grp.head_mask)
        if he is None or not he.local.remove(r):
            return False
        self.rule_ids.discard(r.rule_id)
        if not he.local.chains:
            del grp.head[he.key]
        if not grp.head:
            self.groups.remove(grp)
            for m in list(self._mask_to_group):
                if self._mask_to_group[m] is grp:
                    del self._mask_to_group[m]
        return True

    # -- auditing ----------------------------------------------------

    def audit(self) -> list[str]:
        out = []
        for gi, grp in enumerate(self.groups):
            for m in grp.member_masks:
                if not (grp.head_mask == m
                        or mask_less_than(grp.head_mask, m)):
                    out.append(f"group {gi}: head mask not contained "
                               f"in member {m:#x}")
            for hkey, he in grp.head.items():
                if hkey & grp.head_mask != hkey:
                    out.append(f"group {gi}: head key {hkey:#x} "
                               "not canonical")
                for r in he.local.all_rules():
                    if r.fields & grp.head_mask != hkey:
                        out.append(f"group {gi}: rule {r.rule_id} in "
                                   "wrong head entry")
                    if r.mask not in grp.member_masks:
                        out.append(f"group {gi}: rule {r.rule_id} mask "
                                   "not a member")
                out.extend(f"group {gi}, head {hkey:#x}: {v}"
                           for v in he.local.audit())
        return out

    def all_rules(self) -> list[Rule]:
        return [r for grp in self.groups for he in grp.head.values()
                for r in he.local.all_rules()]

    def memory_bytes(self) -> int:
        key_bytes = (self.schema.total_width + 7) // 8
        total = 0
        for grp in self.groups:
            total += key_bytes + 4 * 8   # head tuple header
            for he in grp.head.values():
                total += key_bytes + 2 * 8
                total += he.local.stats().memory_bytes
        return total
