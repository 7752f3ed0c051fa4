"""Naive reference implementations the real modules are checked against.

Everything here favors obviousness over speed: full cross-product scans,
all-pairs relation tests, scipy for every statistic. Unit and acceptance
tests compare the package's optimized paths to these.
"""
from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction

import numpy as np
from scipy import stats

from insightweaver.tables import Table


# ---------------------------------------------------------------- lattice

def oracle_subspaces(table: Table, max_length: int) -> dict:
    """Locator -> row frozenset by scanning the full value cross-product."""
    dims = table.schema.categorical
    out = {(): frozenset(range(table.row_count))}
    for k in range(1, max_length + 1):
        for combo in itertools.combinations(dims, k):
            pools = [table.label_orders[d] for d in combo]
            for vals in itertools.product(*pools):
                cond = list(zip(combo, vals))
                rows = frozenset(
                    i
                    for i, row in enumerate(table.rows)
                    if all(row[table.schema.index_of(d)] == v for d, v in cond)
                )
                if rows:
                    out[tuple(sorted(cond))] = rows
    return out


def oracle_relation(la: dict, lb: dict) -> tuple | None:
    """('sibling', None) | ('parent_child', parent_dict) | None."""
    if la == lb:
        return None
    if len(la) == len(lb) and set(la) == set(lb):
        if sum(1 for d in la if la[d] != lb[d]) == 1:
            return ("sibling", None)
        return None
    if abs(len(la) - len(lb)) == 1:
        small, big = (la, lb) if len(la) < len(lb) else (lb, la)
        if all(big.get(d) == v for d, v in small.items()):
            return ("parent_child", small)
    return None


def oracle_edges(locators: list[dict]) -> set:
    """All-pairs relation scan; sibling edges keyed by sorted endpoint text."""
    edges = set()
    for i in range(len(locators)):
        for j in range(i + 1, len(locators)):
            rel = oracle_relation(locators[i], locators[j])
            if rel is None:
                continue
            ta = loc_text(locators[i])
            tb = loc_text(locators[j])
            if rel[0] == "sibling":
                edges.add(("sibling",) + tuple(sorted((ta, tb))))
            else:
                parent = loc_text(rel[1])
                child = tb if parent == ta else ta
                edges.add(("parent_child", parent, child))
    return edges


def loc_text(loc: dict) -> str:
    return "&".join(f"{d}={v}" for d, v in sorted(loc.items()))


def oracle_bfs(edges: set, origin: str, step: int, all_nodes: set) -> set:
    """Reachable locator texts within `step` undirected hops of origin."""
    adj: dict[str, set[str]] = {n: set() for n in all_nodes}
    for e in edges:
        if e[0] == "sibling":
            _, a, b = e
        else:
            _, a, b = e
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)
    seen = {origin}
    frontier = {origin}
    for _ in range(step):
        frontier = {m for n in frontier for m in adj.get(n, ())} - seen
        seen |= frontier
    return seen


# ------------------------------------------------------------- detectors

def oracle_robust_z(values: list[float]) -> list[float]:
    arr = np.asarray(values, dtype=float)
    # scale=1: the 1.4826 consistency constant is pinned by the contract,
    # scipy's scale="normal" uses the exact 1/Phi^-1(3/4) instead.
    mad = stats.median_abs_deviation(arr, scale=1)
    if mad > 0:
        return list((arr - np.median(arr)) / (1.4826 * mad))
    z = []
    for i in range(len(arr)):
        rest = np.delete(arr, i)
        mu, sd = rest.mean(), rest.std()
        d = arr[i] - mu
        if sd > 0:
            z.append(d / sd)
        elif d != 0:
            z.append(math.inf if d > 0 else -math.inf)
        else:
            z.append(0.0)
    return z


def oracle_point(labels, values, cfg) -> list[tuple[str, float, str]]:
    out = []
    if len(values) < cfg.min_point_length:
        return out
    absolute = any(v < 0 for v in values)
    basis = [abs(v) for v in values] if absolute else list(values)
    total = sum(basis)
    dominance = False
    if total > 0:
        top = max(range(len(basis)), key=lambda i: (basis[i], -i))
        share = basis[top] / total
        if share >= cfg.dominance_share:
            dominance = True
            out.append(("dominance", min(1.0, share), f"label:{labels[top]}"))
        if not dominance and len(basis) >= 2:
            i1, i2 = sorted(range(len(basis)), key=lambda i: (-basis[i], i))[:2]
            share2 = (basis[i1] + basis[i2]) / total
            if share2 >= cfg.top2_share:
                out.append(
                    ("top2", min(1.0, share2), f"labels:{labels[i1]},{labels[i2]}")
                )
    z = oracle_robust_z(values)
    pos = [i for i in range(len(z)) if z[i] >= cfg.outlier_z]
    if pos:
        i_out = max(pos, key=lambda i: (z[i], -i))
        out.append(("outlier", min(1.0, z[i_out] / 6.0), f"label:{labels[i_out]}"))
    i_min = min(range(len(values)), key=lambda i: (values[i], i))
    lone = values[i_min] < 0 and all(
        values[j] >= 0 for j in range(len(values)) if j != i_min
    )
    z_fired = z[i_min] <= -cfg.outlier_z
    if lone or z_fired:
        floor = min(1.0, cfg.outlier_z / 6.0)
        score = min(1.0, abs(z[i_min]) / 6.0) if z_fired else floor
        if lone:
            score = max(score, floor)
        out.append(("outstanding_negative", score, f"label:{labels[i_min]}"))
    return out


def oracle_shape(labels, values, ordinal, cfg) -> list[tuple[str, float, str]]:
    out = []
    n = len(values)
    arr = np.asarray(values, dtype=float)
    mu = arr.mean() if n else 0.0
    sigma = arr.std() if n else 0.0
    if n >= cfg.min_distribution_length and mu != 0.0:
        cv = sigma / abs(mu)
        if cv <= cfg.evenness_cv:
            out.append(("evenness", max(0.0, 1.0 - cv / cfg.evenness_cv), ""))
    if sigma == 0.0:
        return out
    if ordinal and n >= cfg.min_trend_length:
        r = stats.pearsonr(np.arange(n), arr).statistic
        if abs(r) >= cfg.trend_abs_r:
            direction = "rising" if r > 0 else "falling"
            out.append(("trend", min(1.0, r * r), f"direction:{direction}"))
    if n >= cfg.min_distribution_length:
        g1 = stats.skew(arr, bias=True)
        if abs(g1) >= cfg.skewness_g1:
            tail = "high" if g1 > 0 else "low"
            out.append(("skewness", min(1.0, abs(g1) / 3.0), f"tail:{tail}"))
        g2 = stats.kurtosis(arr, fisher=True, bias=True)
        if g2 >= cfg.kurtosis_g2:
            out.append(("kurtosis", min(1.0, g2 / 5.0), ""))
    return out


def oracle_spearman(a, b) -> float:
    """Rank correlation in exact rational arithmetic.

    Rank data keeps tiny denominators, so the true rho often lands exactly on
    a representable boundary (4/5 on an n=4 series, say). scipy's rank-then-
    corrcoef path can come out an ulp below the correctly rounded value and
    flip a >= threshold decision; exact fractions cannot.
    """

    def avg_ranks(vals):
        order = sorted(range(len(vals)), key=lambda i: vals[i])
        ranks = [Fraction(0)] * len(vals)
        i = 0
        while i < len(vals):
            j = i
            while j + 1 < len(vals) and vals[order[j + 1]] == vals[order[i]]:
                j += 1
            for idx in order[i : j + 1]:
                ranks[idx] = Fraction(i + j, 2) + 1
            i = j + 1
        return ranks

    ra, rb = avg_ranks(a), avg_ranks(b)
    n = len(ra)
    mean = Fraction(sum(ra), n)  # = (n+1)/2 for both series
    da = [r - mean for r in ra]
    db = [r - mean for r in rb]
    s = sum(x * y for x, y in zip(da, db))
    p = sum(x * x for x in da)
    q = sum(y * y for y in db)
    if p == 0 or q == 0:
        return 0.0
    pq = p * q
    root_num = math.isqrt(pq.numerator)
    root_den = math.isqrt(pq.denominator)
    if root_num * root_num == pq.numerator and root_den * root_den == pq.denominator:
        return float(s / Fraction(root_num, root_den))  # correctly rounded
    return float(s) / math.sqrt(float(pq))


def oracle_compound(split_dim, w1, w2, a, b, ordinal, cfg) -> list[tuple[str, float, str]]:
    out = []
    if len(a) < cfg.min_compound_length:
        return out
    av = np.asarray(a, dtype=float)
    bv = np.asarray(b, dtype=float)
    if av.std() == 0 or bv.std() == 0:
        return out
    key = f"split:{split_dim}:{w1}|{w2}"
    r = stats.pearsonr(av, bv).statistic
    itype = "temporal_correlation" if ordinal else "linear_correlation"
    if abs(r) >= cfg.correlation_abs_r:
        out.append((itype, abs(r), key))
        return out
    rho = oracle_spearman(list(a), list(b))
    if abs(rho) >= cfg.dependence_abs_rho:
        out.append(("dependence", abs(rho), key))
    return out


def _naive_series(table: Table, rows, breakdown, measure, agg):
    b = table.schema.index_of(breakdown)
    m = table.schema.index_of(measure)
    groups: dict[str, list[float]] = {}
    for i in sorted(rows):
        groups.setdefault(table.rows[i][b], []).append(table.rows[i][m])
    labels = [v for v in table.label_orders[breakdown] if v in groups]
    fns = {
        "sum": sum,
        "mean": lambda xs: sum(xs) / len(xs),
        "min": min,
        "max": max,
        "count": len,
    }
    return labels, [float(fns[agg](groups[lab])) for lab in labels]


def oracle_extract(table: Table, cfg) -> dict:
    """(loc_text, breakdown, measure, agg, itype, hkey) -> score."""
    measures = cfg.measures if cfg.measures is not None else table.schema.numerical
    out: dict = {}
    for loc_key, rows in oracle_subspaces(table, cfg.max_locator_length).items():
        loc = dict(loc_key)
        text = loc_text(loc)
        breakdowns = sorted(d for d in table.schema.categorical if d not in loc)
        for bd in breakdowns:
            ordinal = table.schema[bd].is_ordinal
            for measure in measures:
                for agg in cfg.aggregates:
                    labels, values = _naive_series(table, rows, bd, measure, agg)
                    hits = oracle_point(labels, values, cfg)
                    hits += oracle_shape(labels, values, ordinal, cfg)
                    hits += _oracle_compound_for_entity(
                        table, rows, loc, bd, measure, agg, ordinal, cfg
                    )
                    for itype, score, hkey in hits:
                        out[(text, bd, measure, agg, itype, hkey)] = score
    return out


def _oracle_compound_for_entity(table, rows, loc, breakdown, measure, agg, ordinal, cfg):
    eligible = []
    for d in sorted(table.schema.categorical):
        if d in loc or d == breakdown:
            continue
        d_idx = table.schema.index_of(d)
        if len({table.rows[i][d_idx] for i in rows}) >= 2:
            eligible.append(d)
    if not eligible:
        return []
    hits = []
    for d in eligible if cfg.compound_all_pairs else eligible[:1]:
        d_idx = table.schema.index_of(d)
        subs = []
        for w in table.label_orders[d]:
            wrows = [i for i in rows if table.rows[i][d_idx] == w]
            if not wrows:
                continue
            labels, values = _naive_series(table, wrows, breakdown, measure, agg)
            subs.append((w, dict(zip(labels, values)), sum(abs(v) for v in values)))
        if len(subs) < 2:
            continue
        subs.sort(key=lambda t: (-t[2], t[0]))
        (w1, s1, _), (w2, s2, _) = subs[0], subs[1]
        common = [lab for lab in table.label_orders[breakdown] if lab in s1 and lab in s2]
        if len(common) < cfg.min_compound_length:
            continue
        a = [s1[lab] for lab in common]
        b = [s2[lab] for lab in common]
        hits += oracle_compound(d, w1, w2, a, b, ordinal, cfg)
    return hits


# ------------------------------------------------------------ generators

SEASONS = ("Spring", "Summer", "Autumn", "Winter")


def random_csv(seed: int, max_dims: int = 3, max_card: int = 4, max_rows: int = 200):
    """Random small table as (csv_text, hints_dict_or_None)."""
    rng = random.Random(seed)
    n_dims = rng.randint(1, max_dims)
    cards = [rng.randint(2, max_card) for _ in range(n_dims)]
    dims = [f"D{i}" for i in range(n_dims)]
    n_measures = rng.choice([1, 1, 2])
    measures = [f"M{i}" for i in range(n_measures)]
    n_rows = rng.randint(5, max_rows)

    ordinal_dim = rng.random() < 0.4
    hints = None
    if ordinal_dim:
        order = [f"D0v{j}" for j in range(cards[0])]
        rng.shuffle(order)
        hints = {
            "columns": [
                {"name": "D0", "kind": "categorical", "ordinal_order": order}
            ]
        }

    style = rng.choice(["uniform", "spiky", "blocky", "signed"])
    lines = [",".join(dims + measures)]
    for _ in range(n_rows):
        cells = [f"{d}v{rng.randrange(cards[k])}" for k, d in enumerate(dims)]
        for _m in measures:
            if style == "uniform":
                v = rng.randint(90, 110)
            elif style == "spiky":
                v = rng.choice([1, 1, 1, 2, 500, 1000])
            elif style == "blocky":
                v = rng.choice([10, 10, 10, 10, 10, 250])
            else:
                v = rng.randint(-50, 200)
            cells.append(str(v))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n", hints


def oracle_tally(samples: list[set[int]], m: int) -> tuple[list[int], bool]:
    """Majority vote over parsed sample sets; (chosen candidate numbers, fallback)."""
    votes: dict[int, int] = {}
    for s in samples:
        for n in s:
            votes[n] = votes.get(n, 0) + 1
    majority = math.ceil(m / 2)
    chosen = sorted((n for n, v in votes.items() if v >= majority),
                    key=lambda n: (-votes[n], n))
    if chosen:
        return chosen, False
    if not votes:
        return [], True
    best = sorted(votes, key=lambda n: (-votes[n], n))[0]
    return [best], True
