"""FP-Growth frequent itemset mining over feature-index transactions."""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

from .errors import ConfigError, EmptyResultError

Item = Hashable


@dataclass(frozen=True)
class FrequentItemset:
    items: frozenset
    count: int

    def sorted_items(self) -> tuple:
        return tuple(sorted(self.items))


class _FPNode:
    __slots__ = ("item", "count", "parent", "children")

    def __init__(self, item, parent):
        self.item = item
        self.count = 0
        self.parent = parent
        self.children: dict = {}


def _build_tree(weighted: Sequence[tuple[frozenset, int]], c_min: int):
    """Build an FP-tree; returns (header-table, per-item frequent counts)."""
    counts: Counter = Counter()
    for items, w in weighted:
        for it in items:
            counts[it] += w
    freq = {it: c for it, c in counts.items() if c >= c_min}
    # descending global frequency, ties by ascending item, for a compact tree
    rank = {it: r for r, it in enumerate(sorted(freq, key=lambda it: (-freq[it], it)))}

    root = _FPNode(None, None)
    header: dict = defaultdict(list)
    for items, w in weighted:
        path = sorted((it for it in items if it in freq), key=rank.__getitem__)
        node = root
        for it in path:
            child = node.children.get(it)
            if child is None:
                child = _FPNode(it, node)
                node.children[it] = child
                header[it].append(child)
            child.count += w
            node = child
    return header, freq


def _mine(
    weighted: Sequence[tuple[frozenset, int]],
    c_min: int,
    k_max: int,
    suffix: frozenset,
    out: list[FrequentItemset],
) -> None:
    header, freq = _build_tree(weighted, c_min)
    for item, count in freq.items():
        itemset = suffix | {item}
        out.append(FrequentItemset(items=itemset, count=count))
        if len(itemset) >= k_max:
            continue
        base: list[tuple[frozenset, int]] = []
        for node in header[item]:
            path = []
            cur = node.parent
            while cur is not None and cur.item is not None:
                path.append(cur.item)
                cur = cur.parent
            if path:
                base.append((frozenset(path), node.count))
        if base:
            _mine(base, c_min, k_max, itemset, out)


def fp_growth(
    transactions: Iterable[Iterable[Item]],
    c_min: int,
    k_max: int,
) -> list[FrequentItemset]:
    """Mine all itemsets with support >= c_min and size <= k_max, with exact counts.

    Output order is canonical: size ascending, then count descending, then
    lexicographic item tuples.
    """
    if c_min < 1:
        raise ConfigError(f"c_min must be >= 1, got {c_min}")
    if k_max < 1:
        raise ConfigError(f"k_max must be >= 1, got {k_max}")
    weighted = [(frozenset(t), 1) for t in transactions]
    out: list[FrequentItemset] = []
    if weighted:
        _mine(weighted, c_min, k_max, frozenset(), out)
    out.sort(key=lambda s: (len(s.items), -s.count, s.sorted_items()))
    return out


def pick_feature_set(itemsets: Sequence[FrequentItemset]) -> frozenset:
    """Choose the longest itemset; break ties by count, then lexicographically."""
    if not itemsets:
        raise EmptyResultError("no frequent itemsets to choose from")
    best = min(itemsets, key=lambda s: (-len(s.items), -s.count, s.sorted_items()))
    return best.items
