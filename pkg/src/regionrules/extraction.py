"""Regional rule search: ratio estimation, interval growth, and the rule tree.

The search greedily grows value intervals around peaks of the per-grid
probability ratio (target share over overall share, conditioned on the rules
already chosen) and explores the best candidates breadth-first in a K-branch
tree. All ranking comparisons are exact: counts stay integers and ratios are
:class:`fractions.Fraction`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .binning import GridHistogram, grid_counts, make_grids, merge_grids
from .errors import (
    ConfigError,
    DegenerateFeatureError,
    DomainError,
    EmptyResultError,
    InfeasibleConfigError,
    NoTargetError,
    SchemaError,
    ZeroSupportError,
)
from .tabular import CATEGORICAL, NUMERIC, DataTable, TargetIndicator

_NO_SAMPLE = object()


def _is_missing_value(v) -> bool:
    return v is None or (isinstance(v, float) and math.isnan(v))


# ---------------------------------------------------------------------------
# Rules and their statistics


@dataclass(frozen=True)
class Interval:
    """Closed numeric interval [lo, hi]."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise DomainError(f"interval lo {self.lo} exceeds hi {self.hi}")


@dataclass(frozen=True)
class CategoryEquals:
    token: str


@dataclass(frozen=True)
class Rule:
    """One predicate on one feature (by column index)."""

    feature: int
    predicate: Interval | CategoryEquals

    def sort_key(self):
        if isinstance(self.predicate, Interval):
            return (self.feature, 0, self.predicate.lo, self.predicate.hi)
        return (self.feature, 1, str(self.predicate.token))


@dataclass(frozen=True)
class RuleStats:
    """Exact counts behind a rule set's support/confidence/fitness."""

    support: int
    tp: int
    target_count: int
    table_rows: int
    step_ratios: tuple[Fraction, ...] = ()

    @property
    def confidence(self) -> Fraction:
        if self.support == 0:
            raise ZeroSupportError("confidence undefined at zero support")
        return Fraction(self.tp, self.support)

    @property
    def fitness(self) -> Fraction:
        if self.target_count == 0:
            raise NoTargetError("fitness undefined with an empty target subgroup")
        return Fraction(2 * self.tp - self.support, self.target_count)


@dataclass(frozen=True)
class RuleSet:
    """Conjunction of per-feature rules, kept in extraction order."""

    rules: tuple[Rule, ...]
    stats: RuleStats

    def canonical_key(self):
        return tuple(sorted(r.sort_key() for r in self.rules))


@dataclass(frozen=True)
class ExtractionConfig:
    """Search knobs: support floor, rule-count cap, binning, and branching."""

    min_support: int
    max_rules: int
    n_grids: int = 7
    max_branches: int = 3
    strategy: str = "uniform"
    min_confidence: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if self.min_support < 1:
            raise ConfigError(f"min_support must be >= 1, got {self.min_support}")
        if self.max_rules < 1:
            raise ConfigError(f"max_rules must be >= 1, got {self.max_rules}")
        if self.n_grids < 2:
            raise ConfigError(f"n_grids must be >= 2, got {self.n_grids}")
        if self.max_branches < 1:
            raise ConfigError(f"max_branches must be >= 1, got {self.max_branches}")
        if self.strategy not in ("uniform", "kmeans", "quantile"):
            raise ConfigError(f"unknown binning strategy {self.strategy!r}")
        if not 0.0 <= self.min_confidence <= 1.0:
            raise ConfigError(
                f"min_confidence must be in [0, 1], got {self.min_confidence}"
            )


def rule_mask(table: DataTable, rule: Rule) -> np.ndarray:
    """Rows satisfying the rule; rows missing the feature never satisfy it."""
    col = table.column(rule.feature)
    if isinstance(rule.predicate, Interval):
        if col.kind != NUMERIC:
            raise SchemaError(f"interval rule on non-numeric column {col.name!r}")
        vals = col.values
        return ~np.isnan(vals) & (vals >= rule.predicate.lo) & (vals <= rule.predicate.hi)
    if col.kind != CATEGORICAL:
        raise SchemaError(f"category rule on non-categorical column {col.name!r}")
    return np.array([v == rule.predicate.token for v in col.values], dtype=bool)


def rule_set_mask(table: DataTable, rules: Iterable[Rule]) -> np.ndarray:
    mask = np.ones(table.n_rows, dtype=bool)
    for r in rules:
        mask &= rule_mask(table, r)
    return mask


def _target_flags(target) -> np.ndarray:
    if isinstance(target, TargetIndicator):
        return target.flags
    return np.asarray(target, dtype=bool)


# ---------------------------------------------------------------------------
# Grid ratios, peaks, interval growth


def grid_ratios(hist: GridHistogram) -> list[Fraction]:
    """Per-grid probability ratio (target share over overall share), exactly.

    Empty grids get ratio 0 by convention.
    """
    if hist.condition_target < 1:
        raise NoTargetError("no target rows satisfy the conditioning rules")
    if hist.condition_total < 1:
        raise NoTargetError("no rows satisfy the conditioning rules")
    out = []
    for t, n in zip(hist.target_counts, hist.total_counts):
        if n == 0:
            out.append(Fraction(0))
        else:
            out.append(Fraction(t * hist.condition_total, n * hist.condition_target))
    return out


def find_peaks(ratios: Sequence[Fraction]) -> list[int]:
    """Local maxima with ratio > 1, ordered by ratio descending then index."""
    peaks = []
    g = len(ratios)
    for i, r in enumerate(ratios):
        if r <= 1:
            continue
        if i > 0 and not r > ratios[i - 1]:
            continue
        if i < g - 1 and not r > ratios[i + 1]:
            continue
        peaks.append(i)
    peaks.sort(key=lambda i: (-ratios[i], i))
    return peaks


@dataclass(frozen=True)
class GrownInterval:
    """A contiguous grid range with its combined exact ratio and support."""

    lo_grid: int
    hi_grid: int
    ratio: Fraction
    support: int


def gen_feature_interval(
    hist: GridHistogram, peak: int, min_support: int
) -> GrownInterval | None:
    """Grow an interval from a peak grid by annexing neighbour grids.

    While the interval's support is below ``min_support`` the neighbour with
    the larger ratio is annexed (ties: larger support, then left). Once the
    support is sufficient, a neighbour is annexed only when its ratio exceeds
    both the other neighbour's and the interval's current ratio. Returns
    ``None`` when the final interval still lacks support or its ratio is not
    above 1.
    """
    g = hist.n_grids
    if not 0 <= peak < g:
        raise DomainError(f"peak grid {peak} out of range for {g} grids")
    tc, nc = hist.target_counts, hist.total_counts
    ct, cn = hist.condition_target, hist.condition_total
    ratios = [
        Fraction(t * cn, n * ct) if n else Fraction(0) for t, n in zip(tc, nc)
    ]

    lo = hi = peak
    cur_t, cur_n = tc[peak], nc[peak]

    def cur_ratio() -> Fraction:
        return Fraction(cur_t * cn, cur_n * ct) if cur_n else Fraction(0)

    while cur_n < min_support or cur_ratio() > 1:
        left = lo - 1 if lo > 0 else None
        right = hi + 1 if hi < g - 1 else None
        if left is None and right is None:
            break
        pick = None
        if cur_n < min_support:
            if left is None:
                pick = right
            elif right is None:
                pick = left
            elif ratios[left] != ratios[right]:
                pick = left if ratios[left] > ratios[right] else right
            elif nc[left] != nc[right]:
                pick = left if nc[left] > nc[right] else right
            else:
                pick = left
        else:
            r = cur_ratio()
            if left is None:
                pick = right if ratios[right] > r else None
            elif right is None:
                pick = left if ratios[left] > r else None
            elif ratios[left] > ratios[right] and ratios[left] > r:
                pick = left
            elif ratios[right] > ratios[left] and ratios[right] > r:
                pick = right
            if pick is None:
                break
        cur_t += tc[pick]
        cur_n += nc[pick]
        if pick == left:
            lo = pick
        else:
            hi = pick

    if cur_n < min_support or cur_ratio() <= 1:
        return None
    return GrownInterval(lo_grid=lo, hi_grid=hi, ratio=cur_ratio(), support=cur_n)


# ---------------------------------------------------------------------------
# Candidate rules


@dataclass(frozen=True)
class Candidate:
    """A screened rule with its exact conditioned statistics."""

    rule: Rule
    ratio: Fraction
    support: int
    tp: int

    def _order_key(self):
        if isinstance(self.rule.predicate, Interval):
            start = (0, self.rule.predicate.lo)
        else:
            start = (1, str(self.rule.predicate.token))
        return (-self.ratio, -self.support, self.rule.feature, start)


def _screen_interval(
    feature: int,
    vals: np.ndarray,
    flags: np.ndarray,
    cond: np.ndarray,
    edges: Sequence[float],
    grown: GrownInterval,
    cond_total: int,
    cond_target: int,
    min_support: int,
) -> Candidate | None:
    """Re-evaluate a grown grid range as a closed interval and screen it.

    The emitted rule is the inclusive interval [edges[lo], edges[hi+1]], so
    counts are recomputed from that predicate (they can pick up rows sitting
    exactly on the top edge); the candidate is kept only if it still clears
    the support floor with a ratio above 1. This keeps cached statistics
    identical to any later re-evaluation of the emitted rule.
    """
    lo = float(edges[grown.lo_grid])
    hi = float(edges[grown.hi_grid + 1])
    pm = cond & ~np.isnan(vals) & (vals >= lo) & (vals <= hi)
    n = int(pm.sum())
    tp = int((pm & flags).sum())
    if n < min_support or n == 0:
        return None
    ratio = Fraction(tp * cond_total, n * cond_target)
    if ratio <= 1:
        return None
    return Candidate(
        rule=Rule(feature=feature, predicate=Interval(lo, hi)),
        ratio=ratio,
        support=n,
        tp=tp,
    )


def _numeric_candidates(
    table: DataTable,
    flags: np.ndarray,
    feature: int,
    cond: np.ndarray,
    config: ExtractionConfig,
    sample_value=_NO_SAMPLE,
) -> list[Candidate]:
    col = table.column(feature)
    vals = col.values
    present = ~np.isnan(vals)
    edges = make_grids(
        vals[cond & present], config.n_grids, config.strategy, config.seed
    )
    hist = grid_counts(edges, vals, flags, cond, feature=feature)
    merged = merge_grids(hist)
    ratios = grid_ratios(merged)
    cond_total, cond_target = merged.condition_total, merged.condition_target

    grown: dict[tuple[int, int], GrownInterval] = {}
    for p in find_peaks(ratios):
        res = gen_feature_interval(merged, p, config.min_support)
        if res is not None:
            grown.setdefault((res.lo_grid, res.hi_grid), res)

    if sample_value is not _NO_SAMPLE:
        # force the interval to cover the sample's grid (clamped to the range)
        g = merged.n_grids
        s_grid = int(np.searchsorted(merged.edges, float(sample_value), side="right")) - 1
        s_grid = min(max(s_grid, 0), g - 1)
        covering = {
            k: v for k, v in grown.items() if v.lo_grid <= s_grid <= v.hi_grid
        }
        if covering:
            grown = covering
        else:
            res = gen_feature_interval(merged, s_grid, config.min_support)
            grown = (
                {(res.lo_grid, res.hi_grid): res} if res is not None else {}
            )

    out = []
    for res in grown.values():
        cand = _screen_interval(
            feature,
            vals,
            flags,
            cond,
            merged.edges,
            res,
            cond_total,
            cond_target,
            config.min_support,
        )
        if cand is not None:
            out.append(cand)
    out.sort(key=Candidate._order_key)
    return out[: config.max_branches]


def _categorical_candidates(
    table: DataTable,
    flags: np.ndarray,
    feature: int,
    cond: np.ndarray,
    config: ExtractionConfig,
    sample_value=_NO_SAMPLE,
) -> list[Candidate]:
    col = table.column(feature)
    vals = col.values
    cond_total = int(cond.sum())
    cond_target = int((cond & flags).sum())
    if cond_target < 1:
        raise NoTargetError("no target rows satisfy the conditioning rules")

    tokens = sorted({v for v in vals[cond] if v is not None})
    if sample_value is not _NO_SAMPLE:
        tokens = [t for t in tokens if t == sample_value]

    out = []
    for tok in tokens:
        pm = cond & np.array([v == tok for v in vals], dtype=bool)
        n = int(pm.sum())
        tp = int((pm & flags).sum())
        if n < config.min_support or n == 0:
            continue
        ratio = Fraction(tp * cond_total, n * cond_target)
        if ratio <= 1:
            continue
        out.append(
            Candidate(
                rule=Rule(feature=feature, predicate=CategoryEquals(tok)),
                ratio=ratio,
                support=n,
                tp=tp,
            )
        )
    out.sort(key=Candidate._order_key)
    return out[: config.max_branches]


def get_candidate_rules(
    table: DataTable,
    target,
    feature: int,
    condition_mask,
    config: ExtractionConfig,
    sample_value=_NO_SAMPLE,
) -> list[Candidate]:
    """Up to ``max_branches`` screened rules for one feature, best ratio first.

    Numeric features go through binning, merging, peak detection, and
    interval growth; every category of a categorical feature is its own
    candidate. Candidates must clear the support floor with ratio > 1.
    When ``sample_value`` is given, numeric growth starts from (or keeps
    intervals covering) the sample's grid and categorical candidates are
    restricted to the sample's category.
    """
    flags = _target_flags(target)
    cond = np.asarray(condition_mask, dtype=bool)
    if not cond.any():
        raise ConfigError("condition mask selects no rows")
    col = table.column(feature)
    feature_idx = table.column_index(col.name)
    if col.kind == NUMERIC:
        return _numeric_candidates(table, flags, feature_idx, cond, config, sample_value)
    return _categorical_candidates(table, flags, feature_idx, cond, config, sample_value)


# ---------------------------------------------------------------------------
# Rule-tree search


@dataclass(eq=False)
class RuleTreeNode:
    """One step of the search: the rule taken, rows still in play, and stats."""

    rule: Rule | None
    mask: np.ndarray
    tp: int
    ratio: Fraction | None
    depth: int
    children: list["RuleTreeNode"] = field(default_factory=list)


def _add_rules(
    table: DataTable,
    flags: np.ndarray,
    node: RuleTreeNode,
    remaining: frozenset[int],
    config: ExtractionConfig,
    samples: Mapping[int, object] | None,
) -> None:
    if not remaining or node.depth >= config.max_rules:
        return
    pool: list[Candidate] = []
    for f in sorted(remaining):
        sample_value = samples[f] if samples is not None else _NO_SAMPLE
        try:
            cands = get_candidate_rules(table, flags, f, node.mask, config, sample_value)
        except DegenerateFeatureError:
            continue  # constant within this branch: nothing to split on
        pool.extend(cands)
    pool.sort(key=Candidate._order_key)
    for cand in pool[: config.max_branches]:
        child = RuleTreeNode(
            rule=cand.rule,
            mask=node.mask & rule_mask(table, cand.rule),
            tp=cand.tp,
            ratio=cand.ratio,
            depth=node.depth + 1,
        )
        node.children.append(child)
        _add_rules(
            table,
            flags,
            child,
            remaining - {cand.rule.feature},
            config,
            samples,
        )


def _collect_rule_sets(
    root: RuleTreeNode, target_count: int, table_rows: int
) -> list[RuleSet]:
    out: list[RuleSet] = []

    def walk(node: RuleTreeNode, rules: tuple[Rule, ...], ratios: tuple[Fraction, ...]):
        for child in node.children:
            crules = rules + (child.rule,)
            cratios = ratios + (child.ratio,)
            out.append(
                RuleSet(
                    rules=crules,
                    stats=RuleStats(
                        support=int(child.mask.sum()),
                        tp=child.tp,
                        target_count=target_count,
                        table_rows=table_rows,
                        step_ratios=cratios,
                    ),
                )
            )
            walk(child, crules, cratios)

    walk(root, (), ())
    return out


def _dedupe(rule_sets: list[RuleSet]) -> list[RuleSet]:
    # identical conjunctions reached along different paths carry identical
    # stats (same row mask), so keeping the first is enough
    seen: dict = {}
    for rs in rule_sets:
        seen.setdefault(rs.canonical_key(), rs)
    return list(seen.values())


def _final_order(rs: RuleSet):
    return (-rs.stats.fitness, -rs.stats.confidence, -rs.stats.support, rs.canonical_key())


def build_rule_tree(
    table: DataTable,
    target,
    feature_set: Iterable[int],
    config: ExtractionConfig,
    samples: Mapping[int, object] | None = None,
) -> RuleTreeNode:
    """Run the K-branch search and return the root of the explored tree."""
    flags = _target_flags(target)
    if len(flags) != table.n_rows:
        raise SchemaError("target indicator length does not match the table")
    features = frozenset(int(f) for f in feature_set)
    if not features:
        raise ConfigError("feature set must not be empty")
    for f in features:
        table.column(f)  # raises SchemaError on unknown features
    if config.min_support > table.n_rows:
        raise InfeasibleConfigError(
            f"min_support {config.min_support} exceeds table rows {table.n_rows}"
        )
    target_count = int(flags.sum())
    if target_count == 0:
        raise NoTargetError("target subgroup is empty")
    if samples is not None:
        missing = [f for f in features if f not in samples or _is_missing_value(samples[f])]
        if missing:
            raise ConfigError(f"sample lacks values for features {sorted(missing)}")
        for f in features:
            if table.column(f).kind == NUMERIC:
                try:
                    float(samples[f])
                except (TypeError, ValueError):
                    raise DomainError(
                        f"sample value {samples[f]!r} for numeric feature {f} "
                        "is not a number"
                    ) from None

    root = RuleTreeNode(
        rule=None,
        mask=np.ones(table.n_rows, dtype=bool),
        tp=target_count,
        ratio=None,
        depth=0,
    )
    _add_rules(table, flags, root, features, config, samples)
    return root


def extract_rule_sets(
    table: DataTable,
    target,
    feature_set: Iterable[int],
    config: ExtractionConfig,
) -> list[RuleSet]:
    """All candidate rule sets found by the tree search, best fitness first.

    Every emitted set satisfies the support floor and the rule-count cap;
    equivalent conjunctions reached along different branches are reported
    once.
    """
    flags = _target_flags(target)
    root = build_rule_tree(table, target, feature_set, config)
    sets = _collect_rule_sets(root, int(flags.sum()), table.n_rows)
    sets = _dedupe(sets)
    sets.sort(key=_final_order)
    return sets


def extract_local(
    table: DataTable,
    target,
    feature_set: Iterable[int],
    sample: Mapping[int, object],
    config: ExtractionConfig,
) -> RuleSet | None:
    """Best rule set whose intervals cover the given sample's feature values.

    Numeric interval growth starts from (or keeps intervals covering) the
    grid holding the sample's value, clamped to the boundary grid if the
    value sits outside the observed range; categorical rules must equal the
    sample's category. Returns ``None`` when no valid rules exist.
    """
    flags = _target_flags(target)
    samples = {int(k): v for k, v in sample.items()}
    root = build_rule_tree(table, target, feature_set, config, samples=samples)
    sets = _collect_rule_sets(root, int(flags.sum()), table.n_rows)
    sets = _dedupe(sets)
    if not sets:
        return None
    return select_best(sets, config.min_confidence)


def select_best(rule_sets: Sequence[RuleSet], min_confidence: float) -> RuleSet:
    """Max-fitness rule set among those clearing the confidence floor.

    Falls back to the overall max-fitness set when none qualifies. Ties are
    broken by higher confidence, fewer rules, then larger support.
    """
    if not rule_sets:
        raise EmptyResultError("no rule sets to select from")
    qualifying = [rs for rs in rule_sets if rs.stats.confidence >= min_confidence]
    pool = qualifying if qualifying else list(rule_sets)
    return min(
        pool,
        key=lambda rs: (
            -rs.stats.fitness,
            -rs.stats.confidence,
            len(rs.rules),
            -rs.stats.support,
            rs.canonical_key(),
        ),
    )
