"""The chained-tuple classifier: registry, chains, lookup and updates.

Construction paths:
  * ``build`` computes a minimum path cover over the masks and lays the
    chains out optimally, inserting rules head-tuple-first so hint
    reporting is amortized.
  * incremental ``insert`` places brand-new tuples greedily: among the
    chains that can host the mask, the one with the fewest tuples wins,
    ties going to the one with fewer rules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .chain import Chain, DuplicateRuleError
from .graph import PathCover, build_graph, min_path_cover
from .model import FieldSchema, MatchResult, Rule, best_rule
from .tuple_store import TupleTable

_PTR = 8  # pointer width of the structural cost model, bytes


@dataclass(frozen=True, slots=True)
class StructureStats:
    rule_count: int
    tuple_count: int
    chain_count: int
    max_chain_rules: int
    max_chain_tuples: int
    chain_tuple_counts: tuple[int, ...]
    entry_total: int
    owner_link_total: int
    memory_bytes: int


class TupleChainClassifier:
    def __init__(self, schema: FieldSchema):
        self.schema = schema
        self.chains: list[Chain] = []
        # mask -> (chain, tuple); at most one live tuple per mask
        self.registry: dict[int, tuple[Chain, TupleTable]] = {}
        self.rule_ids: set[int] = set()

    # -- construction ------------------------------------------------

    @classmethod
    def build(cls, schema: FieldSchema, rules: list[Rule],
              cover: PathCover | None = None) -> "TupleChainClassifier":
        self = cls(schema)
        by_mask: dict[int, list[Rule]] = {}
        for i, r in enumerate(rules):
            if not isinstance(r, Rule):
                raise ValueError(f"rule {i} is not a Rule")
            if r.mask >= (1 << schema.total_width):
                raise ValueError(f"rule {i} does not fit the schema")
            by_mask.setdefault(r.mask, []).append(r)
        masks = list(by_mask)
        if not masks:
            return self
        if cover is None:
            cover = min_path_cover(build_graph(masks))
        else:
            covered = sorted(m for p in cover.mask_paths() for m in p)
            if covered != sorted(masks):
                raise ValueError("cover does not match the rule masks")
        for path in cover.mask_paths():
            chain = Chain()
            chain.tuples = [TupleTable(m) for m in path]
            chain._relink()
            self.chains.append(chain)
            for t in chain.tuples:
                self.registry[t.mask] = (chain, t)
        # Head-first insertion keeps hint reporting cheap: a rule landing
        # in a tuple propagates only to owners inserted later.
        for chain in self.chains:
            for t in chain.tuples:
                for r in by_mask[t.mask]:
                    self._check_id(r)
                    chain.insert_rule(t, r)
                    self.rule_ids.add(r.rule_id)
        return self

    def rebuild(self) -> None:
        """Re-optimize the chain layout from the current rule set."""
        rules = self.all_rules()
        fresh = TupleChainClassifier.build(self.schema, rules)
        self.chains = fresh.chains
        self.registry = fresh.registry
        self.rule_ids = fresh.rule_ids

    def all_rules(self) -> list[Rule]:
        return [e.rule for c in self.chains for t in c.tuples
                for e in t.table.values() if e.rule is not None]

    # -- lookup ------------------------------------------------------

    def lookup(self, key: int) -> MatchResult:
        best: Rule | None = None
        probes = 0
        for chain in self.chains:
            r, p = chain.lookup(key)
            probes += p
            best = best_rule(best, r)
        return MatchResult(best, probes)

    def probe_bound(self) -> int:
        """Per-lookup probe ceiling: sum of binary-search bounds."""
        return sum(c.probe_bound() for c in self.chains)

    def probe_bound_closed_form(self) -> float:
        m = sum(c.tuple_count for c in self.chains)
        l = len(self.chains)
        return l * (1 + math.log2(m / l)) if l else 0.0

    # -- updates -----------------------------------------------------

    def _check_id(self, r: Rule) -> None:
        if r.rule_id in self.rule_ids:
            raise DuplicateRuleError(f"rule id {r.rule_id} already present")

    def insert(self, r: Rule) -> None:
        self._check_id(r)
        hit = self.registry.get(r.mask)
        if hit is None:
            t = TupleTable(r.mask)
            chain = self._place_tuple(t)
            hit = (chain, t)
            self.registry[r.mask] = hit
        chain, t = hit
        chain.insert_rule(t, r)
        self.rule_ids.add(r.rule_id)

    def remove(self, r: Rule) -> bool:
        hit = self.registry.get(r.mask)
        if hit is None:
            return False
        chain, t = hit
        if not chain.delete_rule(t, r):
            return False
        self.rule_ids.discard(r.rule_id)
        # Marker teardown can empty predecessor tuples too; an empty
        # tuple never carries markers for a live successor, so dropping
        # every emptied tuple is safe.
        for tup in [x for x in chain.tuples if not x.table]:
            chain.remove_tuple(tup)
            del self.registry[tup.mask]
        if not chain.tuples:
            self.chains.remove(chain)
        return True

    def _place_tuple(self, t: TupleTable) -> Chain:
        best = None
        for chain in self.chains:
            pos = chain.can_host(t.mask)
            if pos is None:
                continue
            score = (chain.tuple_count, chain.rule_count)
            if best is None or score < best[0]:
                best = (score, chain, pos)
        if best is None:
            chain = Chain()
            self.chains.append(chain)
            chain.insert_tuple(t, 0)
            return chain
        _, chain, pos = best
        chain.insert_tuple(t, pos)
        return chain

    # -- reporting ---------------------------------------------------

    def stats(self) -> StructureStats:
        key_bytes = (self.schema.total_width + 7) // 8
        entry_total = 0
        owner_links = 0
        rule_count = 0
        for c in self.chains:
            for t in c.tuples:
                entry_total += len(t.table)
                for e in t.table.values():
                    owner_links += len(e.owners)
                    if e.rule is not None:
                        rule_count += 1
        tuple_count = sum(c.tuple_count for c in self.chains)
        # C-layout cost model, deliberately allocator-independent:
        # entry = key + rule/hint/marker pointers + owner-list head;
        # owner link = two pointers; rule = fields + mask + pri + id;
        # tree node / tuple: four pointers each plus the hash slot array.
        mem = (entry_total * (key_bytes + 4 * _PTR)
               + owner_links * 2 * _PTR
               + rule_count * (2 * key_bytes + 12)
               + tuple_count * (4 * _PTR + key_bytes)
               + entry_total * int(1.5 * _PTR)   # hash slots at 2/3 load
               + tuple_count * 4 * _PTR)         # tree nodes
        sizes = tuple(c.tuple_count for c in self.chains)
        return StructureStats(
            rule_count=rule_count,
            tuple_count=tuple_count,
            chain_count=len(self.chains),
            max_chain_rules=max((c.rule_count for c in self.chains),
                                default=0),
            max_chain_tuples=max(sizes, default=0),
            chain_tuple_counts=sizes,
            entry_total=entry_total,
            owner_link_total=owner_links,
            memory_bytes=mem,
        )

    def audit(self) -> list[str]:
        out = []
        for i, c in enumerate(self.chains):
            out.extend(f"chain {i}: {v}" for v in c.audit())
        seen: set[int] = set()
        for mask, (chain, t) in self.registry.items():
            if mask in seen:
                out.append(f"mask {mask:#x} registered twice")
            seen.add(mask)
            if t.mask != mask:
                out.append(f"registry mask {mask:#x} points at {t.mask:#x}")
            if chain not in self.chains or t not in chain.tuples:
                out.append(f"registry entry {mask:#x} is stale")
        live = {t.mask for c in self.chains for t in c.tuples}
        for mask in live - seen:
            out.append(f"tuple {mask:#x} not registered")
        ids = {e.rule.rule_id for c in self.chains for t in c.tuples
               for e in t.table.values() if e.rule is not None}
        if ids != self.rule_ids:
            out.append("rule id set out of sync")
        return out
