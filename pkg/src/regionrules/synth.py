"""Synthetic multi-mode datasets and an exhaustive small-instance oracle.

The generator plants axis-aligned rectangles of high target purity on a low
background rate; the oracle enumerates every grid-aligned conjunction up to
a tractability guard and is used to cross-check the greedy search.
Randomness comes from ``numpy.random.default_rng`` (PCG64) under a fixed
seed; tests that must survive generator changes load stored CSV fixtures
instead of regenerating.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product

import numpy as np

from .binning import make_grids
from .errors import EmptyResultError, SpecError, TooLargeError
from .extraction import CategoryEquals, Interval, Rule, RuleSet, RuleStats
from .tabular import NUMERIC, DataTable, FeatureColumn, TargetIndicator


@dataclass(frozen=True)
class PlantedMode:
    """One rectangle: per-feature (lo, hi) bounds, inside purity, row weight."""

    bounds: tuple[tuple[float, float], ...]
    purity: float
    weight: float


@dataclass(frozen=True)
class PlantedSpec:
    """Recipe for a planted-rectangle dataset with a Bernoulli background."""

    n_rows: int
    n_features: int
    modes: tuple[PlantedMode, ...]
    background_rate: float = 0.0
    seed: int = 0
    domain: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if self.n_rows < 1:
            raise SpecError("n_rows must be >= 1")
        if not 1 <= self.n_features <= 3:
            raise SpecError("n_features must be between 1 and 3")
        dom = self.domain or tuple((0.0, 1.0) for _ in range(self.n_features))
        if len(dom) != self.n_features:
            raise SpecError("domain must give bounds for every feature")
        for lo, hi in dom:
            if not lo < hi:
                raise SpecError(f"empty domain ({lo}, {hi})")
        object.__setattr__(self, "domain", tuple((float(a), float(b)) for a, b in dom))
        object.__setattr__(self, "modes", tuple(self.modes))
        if not 0.0 <= self.background_rate <= 1.0:
            raise SpecError("background_rate must be in [0, 1]")
        total_weight = 0.0
        for m in self.modes:
            if len(m.bounds) != self.n_features:
                raise SpecError("mode bounds must cover every feature")
            if not 0.0 <= m.purity <= 1.0:
                raise SpecError("purity must be in [0, 1]")
            if not 0.0 <= m.weight <= 1.0:
                raise SpecError("weight must be in [0, 1]")
            total_weight += m.weight
            for (lo, hi), (dlo, dhi) in zip(m.bounds, self.domain):
                if not (dlo <= lo < hi <= dhi):
                    raise SpecError("rectangle must lie inside the feature domain")
        if total_weight > 1.0 + 1e-12:
            raise SpecError("mode weights must sum to at most 1")
        for a, b in combinations(range(len(self.modes)), 2):
            if _rects_overlap(self.modes[a].bounds, self.modes[b].bounds):
                raise SpecError(f"modes {a} and {b} overlap")


def _rects_overlap(a, b) -> bool:
    return all(alo < bhi and blo < ahi for (alo, ahi), (blo, bhi) in zip(a, b))


@dataclass(frozen=True)
class PlantedSummary:
    """Realized occupancy of one planted rectangle."""

    bounds: tuple[tuple[float, float], ...]
    rows_inside: int
    target_inside: int


def gen_synthetic(
    spec: PlantedSpec,
) -> tuple[DataTable, TargetIndicator, tuple[PlantedSummary, ...]]:
    """Draw the dataset described by ``spec``; deterministic under its seed.

    Row positions are uniform within their assigned region (a mode rectangle
    or the whole domain); the target label is Bernoulli with the rectangle's
    purity for points inside a rectangle and the background rate elsewhere.
    """
    rng = np.random.default_rng(spec.seed)
    n, d = spec.n_rows, spec.n_features
    dom = np.asarray(spec.domain, dtype=np.float64)  # (d, 2)

    weights = np.array([m.weight for m in spec.modes], dtype=np.float64)
    cuts = np.cumsum(weights)
    u = rng.random(n)
    assignment = np.searchsorted(cuts, u, side="right")  # len(modes) = background

    lo = np.tile(dom[:, 0], (n, 1))
    hi = np.tile(dom[:, 1], (n, 1))
    for j, mode in enumerate(spec.modes):
        rows = assignment == j
        b = np.asarray(mode.bounds, dtype=np.float64)
        lo[rows] = b[:, 0]
        hi[rows] = b[:, 1]
    coords = lo + rng.random((n, d)) * (hi - lo)

    p_target = np.full(n, spec.background_rate, dtype=np.float64)
    inside_masks = []
    for mode in spec.modes:
        inside = np.ones(n, dtype=bool)
        for f, (blo, bhi) in enumerate(mode.bounds):
            inside &= (coords[:, f] >= blo) & (coords[:, f] <= bhi)
        inside_masks.append(inside)
        p_target[inside] = mode.purity
    flags = rng.random(n) < p_target

    columns = tuple(
        FeatureColumn(name=f"f{f}", kind=NUMERIC, values=coords[:, f]) for f in range(d)
    )
    table = DataTable(columns)
    target = TargetIndicator(flags=flags, target_label="1")
    summaries = tuple(
        PlantedSummary(
            bounds=mode.bounds,
            rows_inside=int(inside.sum()),
            target_inside=int((inside & flags).sum()),
        )
        for mode, inside in zip(spec.modes, inside_masks)
    )
    return table, target, summaries


def brute_force_best(
    table: DataTable,
    target,
    n_g: int,
    l_max: int,
    s_min: int,
    strategy: str = "uniform",
    seed: int = 0,
) -> RuleSet:
    """Exhaustive max-fitness grid-aligned conjunction with support >= s_min.

    Enumerates every contiguous grid interval per numeric feature (grids are
    built once per feature, unconditionally) and every category of
    categorical features, over all feature subsets of size <= l_max. Guarded
    to <= 3 features, n_g <= 8, l_max <= 2.
    """
    from .extraction import _target_flags

    flags = _target_flags(target)
    n_features = len(table.columns)
    if n_features > 3 or n_g > 8 or l_max > 2:
        raise TooLargeError(
            f"guard exceeded: features={n_features} (<=3), n_g={n_g} (<=8), "
            f"l_max={l_max} (<=2)"
        )
    target_count = int(flags.sum())
    if target_count == 0:
        raise EmptyResultError("target subgroup is empty")

    per_feature: list[list[tuple[Rule, np.ndarray]]] = []
    for f, col in enumerate(table.columns):
        options: list[tuple[Rule, np.ndarray]] = []
        if col.kind == NUMERIC:
            vals = col.values
            present = ~np.isnan(vals)
            edges = make_grids(vals[present], n_g, strategy, seed)
            g = len(edges) - 1
            for a in range(g):
                for b in range(a, g):
                    rule = Rule(f, Interval(float(edges[a]), float(edges[b + 1])))
                    mask = present & (vals >= edges[a]) & (vals <= edges[b + 1])
                    options.append((rule, mask))
        else:
            for tok in sorted({v for v in col.values if v is not None}):
                rule = Rule(f, CategoryEquals(tok))
                mask = np.array([v == tok for v in col.values], dtype=bool)
                options.append((rule, mask))
        per_feature.append(options)

    best: tuple | None = None
    for size in range(1, l_max + 1):
        for subset in combinations(range(n_features), size):
            for combo in product(*(per_feature[f] for f in subset)):
                mask = combo[0][1].copy()
                for _, m in combo[1:]:
                    mask &= m
                n = int(mask.sum())
                if n < s_min:
                    continue
                tp = int((mask & flags).sum())
                rules = tuple(r for r, _ in combo)
                key = (
                    -(2 * tp - n),  # max fitness numerator; target_count is constant
                    -n,
                    len(rules),
                    tuple(sorted(r.sort_key() for r in rules)),
                )
                if best is None or key < best[0]:
                    best = (key, rules, n, tp)

    if best is None:
        raise EmptyResultError(f"no conjunction reaches support {s_min}")
    _, rules, n, tp = best
    stats = RuleStats(
        support=n, tp=tp, target_count=target_count, table_rows=table.n_rows
    )
    return RuleSet(rules=rules, stats=stats)
