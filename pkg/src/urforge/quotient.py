"""Quotients at a block maximum: the short-distance equivalence, the
minimum-distance metric on classes, representative lifting, deletion of
small balls, and lifting copies through the quotient.

With r the maximum of a block, two points are equivalent when their
distance is at most r.  Transitivity is arithmetic: the distance set
has no member in (r, 2r], so chains cannot escape.  Cross-class
distances then exceed 2r, and the minimum distance between classes
turns the class set into a metric space over a new, smaller distance
set.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable, Optional, Sequence

from .builder import Approximant, Embedding, copy_check_space, grown_realizer, realize
from .distset import DistanceSet, blocks, is_universal
from .errors import BudgetExceededError, NonUniversalError, UrforgeError
from .space import Space, TypeFn, enumerate_katetov, is_katetov, orbit

Accept = Callable[[Approximant, int], bool]


@dataclass(frozen=True)
class Partition:
    """The classes of the short-distance equivalence at threshold r."""

    r: Fraction
    classes: tuple[tuple[int, ...], ...]

    def class_of(self, point: int) -> int:
        for i, members in enumerate(self.classes):
            if point in members:
                return i
        raise KeyError(point)

    def __len__(self) -> int:
        return len(self.classes)

    def to_json(self) -> dict:
        return {"r": str(self.r), "classes": [list(c) for c in self.classes]}


@dataclass(frozen=True)
class QuotientSpace:
    """The metric space of classes under the minimum cross distance."""

    space: Space
    members: tuple[tuple[int, ...], ...]

    def to_json(self) -> dict:
        data = self.space.to_json()
        data["classes"] = [list(c) for c in self.members]
        return data


def classes(s: Space, r: Fraction) -> Partition:
    """Partition by distance at most r, verifying the equivalence axioms.

    Fails with a witness triple when transitivity breaks (which cannot
    happen when r is the maximum of a block of the distance set), and
    when some cross-class distance fails to exceed 2r.
    """
    r = Fraction(r)
    parent = list(range(s.n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(s.n):
        for j in range(i):
            if s.dist(i, j) <= r:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for p in range(s.n):
        groups.setdefault(find(p), []).append(p)
    members = tuple(tuple(sorted(g)) for g in sorted(groups.values()))
    for group in members:
        for a in group:
            for b in group:
                if a < b and s.dist(a, b) > r:
                    c = _chain_witness(s, r, a, b, group)
                    raise UrforgeError(
                        f"threshold {r} is not an equivalence: "
                        f"d({a},{b})={s.dist(a, b)} > {r} but {a},{b} are "
                        f"chained through {c}"
                    )
    for gi, group in enumerate(members):
        for gj in range(gi):
            for a in group:
                for b in members[gj]:
                    if s.dist(a, b) <= 2 * r:
                        raise UrforgeError(
                            f"cross-class distance d({a},{b})={s.dist(a, b)} "
                            f"not above {2 * r}; {r} is not a block maximum here"
                        )
    return Partition(r, members)


def _chain_witness(s: Space, r: Fraction, a: int, b: int, group) -> tuple[int, int, int]:
    for c in group:
        if c not in (a, b) and s.dist(a, c) <= r and s.dist(c, b) <= r:
            return (a, c, b)
    return (a, a, b)


def quotient_space(s: Space, p: Partition) -> QuotientSpace:
    """Classes under the minimum cross distance, as a metric space.

    The realized minima form the quotient's distance set.
    """
    k = len(p.classes)
    table = [[Fraction(0)] * k for _ in range(k)]
    for i in range(k):
        for j in range(i):
            val = min(
                s.dist(a, b) for a in p.classes[i] for b in p.classes[j]
            )
            table[i][j] = table[j][i] = val
    values = {Fraction(0)}
    for i in range(k):
        for j in range(i):
            values.add(table[i][j])
    dmin = DistanceSet(values)
    return QuotientSpace(Space.from_matrix(dmin, table), p.classes)


def class_stats(
    s: Space, p: Partition, i: int, j: int
) -> tuple[Fraction, Fraction]:
    """Minimum and maximum cross distances between two distinct classes.

    The minimum must exceed twice the threshold (hard error otherwise);
    a spread above the threshold only warns, since finite snapshots may
    miss realizations.
    """
    if i == j:
        raise ValueError("class_stats requires distinct classes")
    values = [s.dist(a, b) for a in p.classes[i] for b in p.classes[j]]
    lo, hi = min(values), max(values)
    if lo <= 2 * p.r:
        raise UrforgeError(f"cross minimum {lo} not above {2 * p.r}")
    if hi - lo > p.r:
        warnings.warn(
            f"cross spread {hi - lo} exceeds {p.r} between classes {i},{j}; "
            "the space is not saturated enough",
            stacklevel=2,
        )
    return lo, hi


def lift_representatives(
    a: Approximant,
    p: Partition,
    chosen: Sequence[int],
    max_grow: Optional[int] = None,
) -> tuple[Approximant, list[int]]:
    """Pick one member per chosen class realizing all pairwise minima.

    Built inductively: each new representative realizes a type whose
    values at the earlier representatives are the exact cross minima and
    whose value into its own class keeps it there.  Grows the space when
    no existing point fits.
    """
    if len(set(chosen)) != len(chosen):
        raise ValueError("chosen classes must be pairwise distinct")
    reps: list[int] = []
    space = a.space
    for idx, ci in enumerate(chosen):
        group = p.classes[ci]
        if idx == 0:
            reps.append(group[0])
            continue
        minima = {
            reps[k]: min(
                space.dist(x, y) for x in p.classes[chosen[k]] for y in group
            )
            for k in range(idx)
        }
        placed = None
        for b in group:
            if all(space.dist(b, rep) == m for rep, m in minima.items()):
                placed = b
                break
        if placed is None:
            pin_values = [v for v in a.D.members if 0 < v <= p.r]
            t = None
            for b in group:
                for sval in reversed(pin_values):
                    cand = TypeFn.of(minima | {b: sval})
                    if is_katetov(cand, space):
                        t = cand
                        break
                if t is not None:
                    break
            if t is None:
                raise UrforgeError(
                    f"cannot pin a representative into class {ci}; "
                    "the space is not saturated enough"
                )
            a, placed = grown_realizer(a, t, max_grow=max_grow)
            space = a.space
        reps.append(placed)
    return a, reps


def drop_near_ball(
    a: Approximant,
    center: int,
    m: Fraction,
    prefix: int,
    fixed: Iterable[int] = (),
    max_grow: Optional[int] = None,
    accept: Optional[Accept] = None,
) -> tuple[Approximant, Embedding]:
    """Embed a prefix into the complement of the open m-ball around a point.

    m must be the maximum of the first block.  Points outside the ball
    prefer to stay put; points inside it (the center included) are
    re-realized at distance at least m, using the value m itself for
    class mates of the center.  ``accept`` optionally filters every
    relocated or grown image.
    """
    m = Fraction(m)
    if blocks(a.D)[0].max != m:
        raise ValueError(f"{m} is not the maximum of the first block")
    fixed_set = set(fixed)
    for f in fixed_set:
        if a.space.dist(f, center) < m:
            raise ValueError(f"fixed point {f} lies inside the ball")
    mapping: dict[int, int] = {}
    order = sorted(set(range(prefix)) | fixed_set)
    for v in order:
        if v in fixed_set:
            mapping[v] = v
            continue
        t = TypeFn.of({img: a.space.dist(v, x) for x, img in mapping.items()})
        image = None
        pool: list[int] = []
        if t.points:
            candidates = orbit(t, a.space)
            if v in candidates:
                pool.append(v)
            pool.extend(c for c in candidates if c != v)
        else:
            pool = [v] + [c for c in a.space.points() if c != v]
        taken = set(mapping.values())
        for c in pool:
            if c in taken or a.space.dist(c, center) < m:
                continue
            if accept is None or accept(a, c):
                image = c
                break
        if image is None:
            a, image = _grow_off_ball(a, t, center, m, accept, max_grow)
        mapping[v] = image
    emb = Embedding.of(mapping)
    emb.check(a.space)
    return a, emb


def _grow_off_ball(
    a: Approximant,
    t: TypeFn,
    center: int,
    m: Fraction,
    accept: Optional[Accept],
    max_grow: Optional[int],
) -> tuple[Approximant, int]:
    """Grow a realizer of t pinned at least m away from the center."""
    D = a.D
    pin = None
    for value in D.members:
        if value < m:
            continue
        cand = t.extended(center, value) if center not in t.points else None
        if cand is not None and is_katetov(cand, a.space):
            pin = cand
            break
    if pin is None:
        raise UrforgeError(
            f"no admissible distance at least {m} from the ball center"
        )
    return grown_realizer(a, pin, accept=accept, max_grow=max_grow)


def quotient_distance_set(D: DistanceSet) -> DistanceSet:
    """Distances of the saturated quotient, computed empirically.

    Grows an approximant that realizes every above-gap value, drives
    every cross-class minimum down to its floor (no member within the
    first-block maximum below it), quotients, and collects the minima.
    The result is checked to be universal.
    """
    parts = blocks(D)
    if len(parts) < 2:
        raise ValueError("quotient distance set requires at least two blocks")
    m = parts[0].max
    a = Approximant(Space.single_point(D))
    for d in D.members:
        if d > 2 * m:
            a, _ = realize(a, TypeFn.of({0: d}))
    changed = True
    while changed:
        changed = False
        part = classes(a.space, m)
        k = len(part.classes)
        for i in range(k):
            for j in range(i):
                pair = min(
                    ((a.space.dist(x, y), x, y)
                     for x in part.classes[i] for y in part.classes[j]),
                )
                d, x, y = pair
                lower = [e for e in D.members if d - m <= e < d]
                if not lower:
                    continue
                e = max(lower)
                pin = min(v for v in D.members if 0 < v <= m and v >= d - e)
                a, _ = realize(a, TypeFn.of({x: e, y: pin}))
                changed = True
    part = classes(a.space, m)
    q = quotient_space(a.space, part)
    result = q.space.distance_values()
    ok, witness = is_universal(result)
    if not ok:
        raise NonUniversalError(
            f"quotient distance set {result.format()} is not universal", witness
        )
    return result


def lift_copy(
    a: Approximant,
    p: Partition,
    chosen: Sequence[int],
    depth: int,
    max_grow: Optional[int] = None,
    accept: Optional[Accept] = None,
) -> tuple[Approximant, tuple[int, ...]]:
    """Union the chosen classes and make it pass the ambient copy check.

    The chosen classes must already pass the copy check inside the
    quotient at the given depth.  Missing ambient realizations are grown
    inside the union: a type of small rank stays in its forced class,
    anything else is pinned into the first class that admits it.
    ``accept`` filters grown points (the indivisibility game uses it to
    keep classes monochromatic).
    """
    chosen = sorted(set(chosen))
    q = quotient_space(a.space, p)
    if not copy_check_space(q.space, chosen, depth):
        raise UrforgeError("quotient copy-check failure")
    union = set()
    for c in chosen:
        union.update(p.classes[c])
    anchors = {c: p.classes[c][0] for c in chosen}
    m = p.r
    head = sorted(union)[: max(depth, 0)]
    for size in range(len(head) + 1):
        for dom in combinations(head, size):
            for t in enumerate_katetov(a.space, dom):
                if any(y in union for y in orbit(t, a.space)):
                    continue
                if not t.points:
                    continue
                a, grown = _grow_inside_union(
                    a, t, m, anchors, union, accept, max_grow
                )
                union.add(grown)
    result = tuple(sorted(union))
    if not copy_check_space(a.space, result, depth):
        raise UrforgeError("ambient copy check failed after growth")
    return a, result


def _grow_inside_union(
    a: Approximant,
    t: TypeFn,
    m: Fraction,
    anchors: dict[int, int],
    union: set[int],
    accept: Optional[Accept],
    max_grow: Optional[int],
) -> tuple[Approximant, int]:
    if t.rank <= m:
        # the realizer is forced into the class of the small-valued point
        return grown_realizer(a, t, accept=accept, max_grow=max_grow)
    for ci, anchor in sorted(anchors.items()):
        if anchor in t.points:
            continue
        for pin in (v for v in reversed(a.D.members) if 0 < v <= m):
            cand = t.extended(anchor, pin)
            if is_katetov(cand, a.space):
                try:
                    return grown_realizer(a, cand, accept=accept, max_grow=max_grow)
                except BudgetExceededError:
                    break
    raise BudgetExceededError(
        "no chosen class admits the required realization", blocking=t
    )
