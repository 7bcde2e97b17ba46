"""The orbit calculus: distance ranges between types over a common
domain, metric amalgamation of orbit families, relocation of orbit
members into extended orbits, and levelled index metrics.

Throughout, a "family" is a sequence of Katetov functions sharing one
domain.  The distance range between two such functions is an interval
of the distance set computed purely from their values; realized
distances between their orbits always land inside it, and saturation
makes the endpoints attained.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .builder import Approximant, Embedding, avoid, grown_realizer
from .distset import DistanceSet, blocks
from .errors import UrforgeError
from .space import Space, TypeFn, is_katetov, orbit

LevellingPolicy = Callable[[int, int], Fraction]


@dataclass(frozen=True)
class RangeResult:
    """A contiguous run of distance-set members between two orbits."""

    values: tuple[Fraction, ...]

    @property
    def min(self) -> Fraction:
        return self.values[0]

    @property
    def max(self) -> Fraction:
        return self.values[-1]

    def __contains__(self, value) -> bool:
        return Fraction(value) in self.values


def distance_range(D: DistanceSet, s: TypeFn, t: TypeFn) -> RangeResult:
    """Members m with max|s-t| <= m <= min(s+t), over a common domain.

    This is the exact set of distances realizable between a point of
    orb(s) and a point of orb(t) in the limit space.  Equal functions
    therefore yield 0 up to twice their rank.
    """
    if s.points != t.points:
        raise ValueError("distance_range requires equal domains")
    if not s.points:
        raise ValueError("distance_range requires a nonempty domain")
    lo = max(abs(a - b) for a, b in zip(s.values, t.values))
    hi = min(a + b for a, b in zip(s.values, t.values))
    vals = tuple(m for m in D.members if lo <= m <= hi)
    if not vals:
        raise UrforgeError(
            f"no distance-set member in [{lo},{hi}]; the set is not universal"
        )
    return RangeResult(vals)


@dataclass(frozen=True)
class IndexMetric:
    """A symmetric distance table over the index set of a family."""

    table: tuple[tuple[Fraction, ...], ...]

    @classmethod
    def of(cls, rows: Sequence[Sequence]) -> "IndexMetric":
        return cls(tuple(tuple(Fraction(v) for v in row) for row in rows))

    @property
    def size(self) -> int:
        return len(self.table)

    def value(self, i: int, j: int) -> Fraction:
        return self.table[i][j]

    def check(self, strict: bool = True) -> None:
        """Raise unless symmetric with zero diagonal and metric triangles.

        With ``strict`` a zero off the diagonal is rejected; relaxed mode
        admits the pseudometric produced by duplicated family members.
        """
        n = self.size
        for i in range(n):
            if len(self.table[i]) != n:
                raise ValueError("index metric must be square")
            if self.table[i][i] != 0:
                raise ValueError(f"nonzero diagonal at {i}")
            for j in range(i):
                if self.table[i][j] != self.table[j][i]:
                    raise ValueError(f"asymmetric at ({i},{j})")
                if self.table[i][j] < 0:
                    raise ValueError(f"negative entry at ({i},{j})")
                if strict and self.table[i][j] == 0:
                    raise ValueError(f"zero off-diagonal at ({i},{j})")
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    if self.table[i][j] > self.table[i][k] + self.table[k][j]:
                        raise ValueError(f"triangle violated at ({i},{j},{k})")

    def is_metric(self, strict: bool = True) -> bool:
        try:
            self.check(strict)
            return True
        except ValueError:
            return False

    def to_json(self) -> list[list[str]]:
        return [[str(v) for v in row] for row in self.table]


def _validate_family(
    D: DistanceSet, base: Space, family: Sequence[TypeFn]
) -> tuple[int, ...]:
    if not family:
        raise ValueError("family must not be empty")
    dom = family[0].points
    for i, t in enumerate(family):
        if t.points != dom:
            raise ValueError(f"family member {i} has a different domain")
        if not is_katetov(t, base):
            raise ValueError(f"family member {i} is not Katetov")
    return dom


def amalgamate(base: Space, family: Sequence[TypeFn], idx: IndexMetric) -> Space:
    """Amalgamate a family of one-point extensions over a common domain.

    The result is the graph on the domain plus one fresh point per index,
    with prescribed distances between the fresh points.  Whenever every
    prescribed distance lies inside the pairwise distance range the
    result is metric; this is checked before returning.
    """
    dom = _validate_family(base.D, base, family)
    s = len(family)
    if idx.size != s:
        raise ValueError("index metric size must match the family")
    idx.check(strict=True)
    for i in range(s):
        for j in range(i + 1, s):
            rng = distance_range(base.D, family[i], family[j])
            if idx.value(i, j) not in rng:
                raise ValueError(
                    f"index distance {idx.value(i, j)} for pair ({i},{j}) "
                    f"outside range {rng.values}"
                )
    k = len(dom)
    n = k + s
    dist = [[Fraction(0)] * n for _ in range(n)]
    for a in range(k):
        for b in range(k):
            dist[a][b] = base.dist(dom[a], dom[b])
    for i in range(s):
        for a in range(k):
            dist[k + i][a] = dist[a][k + i] = family[i].value(dom[a])
        for j in range(s):
            if i != j:
                dist[k + i][k + j] = idx.value(i, j)
    out = Space.from_matrix(base.D, dist)
    return Space(base.D, out._rows, parent_ids=dom + tuple(-1 for _ in range(s)))


def realize_family(
    a: Approximant,
    family: Sequence[TypeFn],
    idx: IndexMetric,
    anchor: Optional[tuple[int, int]] = None,
    preferred: Optional[Mapping[int, int]] = None,
    max_grow: Optional[int] = None,
    accept=None,
) -> tuple[Approximant, list[int]]:
    """Find points w_i in orb(family[i]) at the prescribed distances.

    ``anchor`` pins w_k to a given orbit point; ``preferred`` suggests a
    candidate to try first per index.  The space grows as needed.
    """
    dom = _validate_family(a.D, a.space, family)
    if idx.size != len(family):
        raise ValueError("index metric size must match the family")
    idx.check(strict=True)
    assigned: dict[int, int] = {}
    if anchor is not None:
        k, v = anchor
        if v not in orbit(family[k], a.space):
            raise ValueError(f"anchor point {v} does not realize family member {k}")
        assigned[k] = v
    budget_left = max_grow
    for i in range(len(family)):
        if i in assigned:
            continue
        want = dict(family[i].items())
        for j, w in assigned.items():
            want[w] = idx.value(i, j)
        t = TypeFn.of(want)
        if not is_katetov(t, a.space):
            raise UrforgeError(
                f"induced type for index {i} is not Katetov; "
                "prescribed distances are inconsistent"
            )
        before = a.n
        hint = preferred.get(i) if preferred else None
        a, p = grown_realizer(
            a, t, accept=accept, prefer_first=hint, max_grow=budget_left
        )
        if budget_left is not None:
            budget_left -= a.n - before
        assigned[i] = p
    return a, [assigned[i] for i in range(len(family))]


def shrink_step(
    a: Approximant,
    fixed: Iterable[int],
    extra: Iterable[int],
    region: Iterable[int],
    T: Sequence[TypeFn],
    ext: Mapping[TypeFn, TypeFn],
    max_grow: Optional[int] = None,
    accept=None,
) -> tuple[Approximant, Embedding]:
    """Re-embed a region so orbit members land in extended orbits.

    ``fixed`` (the common domain A) stays pointwise; every region point
    realizing some t in T is sent into orb(ext(t)).  Preconditions: the
    extensions share the domain A + ``extra`` and preserve all pairwise
    distance ranges.
    """
    A = tuple(sorted(set(fixed)))
    B = tuple(sorted(set(extra)))
    R = tuple(sorted(set(region)))
    if set(A) & set(B) or set(A) & set(R) or set(B) & set(R):
        raise ValueError("fixed, extra and region sets must be pairwise disjoint")
    if len(set(T)) != len(T):
        raise ValueError("type functions in T must be pairwise distinct")
    AB = tuple(sorted(set(A) | set(B)))
    for t in T:
        if t.points != A:
            raise ValueError("every T member must have the fixed set as domain")
        e = ext[t]
        if e.points != AB:
            raise ValueError("every extension must have domain A union B")
        if not e.extends(t):
            raise ValueError("an extension does not extend its base function")
    tl = list(T)
    for i in range(len(tl)):
        for j in range(i, len(tl)):
            before = distance_range(a.D, tl[i], tl[j]).values
            after = distance_range(a.D, ext[tl[i]], ext[tl[j]]).values
            if before != after:
                raise ValueError(
                    f"distance range not preserved for pair ({i},{j}): "
                    f"{before} vs {after}"
                )

    # orbit members in the region, each with its unique witness function
    hits: list[tuple[int, TypeFn]] = []
    for y in R:
        for t in T:
            if y in orbit(t, a.space):
                hits.append((y, t))
                break
    mapping: dict[int, int] = {x: x for x in AB}
    if hits:
        table = [
            [a.space.dist(y1, y2) for y2, _ in hits] for y1, _ in hits
        ]
        idx = IndexMetric.of(table)
        for i, (y1, t1) in enumerate(hits):
            for j in range(i + 1, len(hits)):
                y2, t2 = hits[j]
                if idx.value(i, j) not in distance_range(a.D, t1, t2):
                    raise AssertionError(
                        "realized distance escapes the range formula"
                    )
        a, points = realize_family(
            a,
            [ext[t] for _, t in hits],
            idx,
            preferred={i: y for i, (y, _) in enumerate(hits)},
            max_grow=max_grow,
            accept=accept,
        )
        for (y, _), w in zip(hits, points):
            mapping[y] = w
    placed = {y for y, _ in hits}
    for y in R:
        if y in placed:
            continue
        t = TypeFn.of({img: a.space.dist(y, x) for x, img in mapping.items()})
        a, p = grown_realizer(
            a,
            t,
            accept=accept,
            forbid=set(mapping.values()) - set(t.points),
            prefer_first=y,
            max_grow=max_grow,
        )
        mapping[y] = p
    emb = Embedding.of({x: mapping[x] for x in set(A) | set(R)})
    emb.check(a.space)
    return a, emb


def reduce(
    a: Approximant,
    pairs: Sequence[tuple[TypeFn, TypeFn]],
    prefix: int,
    max_grow: Optional[int] = None,
    accept=None,
) -> tuple[Approximant, Embedding]:
    """Embed a prefix so each orb(t_i) lands inside orb(s_i).

    Each pair consists of a function t_i over a common domain A and an
    extension s_i over A plus a common extra set B, with all pairwise
    distance ranges preserved.  The embedding fixes A pointwise and is
    defined on the first ``prefix`` points; it composes an avoidance of
    B with one relocation step along the enumeration.
    """
    if not pairs:
        raise ValueError("at least one pair is required")
    A = pairs[0][0].points
    AB = pairs[0][1].points
    B = tuple(sorted(set(AB) - set(A)))
    T = []
    ext: dict[TypeFn, TypeFn] = {}
    for t, s in pairs:
        if t.points != A or s.points != AB:
            raise ValueError("pairs must share the domains A and A union B")
        if not s.extends(t):
            raise ValueError("each s_i must extend its t_i")
        T.append(t)
        ext[t] = s
    if len(set(T)) != len(T):
        raise ValueError("the t_i must be pairwise distinct")
    tl = list(T)
    for i in range(len(tl)):
        for j in range(i, len(tl)):
            if (
                distance_range(a.D, tl[i], tl[j]).values
                != distance_range(a.D, ext[tl[i]], ext[tl[j]]).values
            ):
                raise ValueError(f"distance range not preserved for pair ({i},{j})")

    a, beta = avoid(a, A, B, prefix, max_grow=max_grow, accept=accept)
    region = tuple(sorted(set(beta.image) - set(A)))
    a, gamma = shrink_step(a, A, B, region, T, ext, max_grow=max_grow, accept=accept)
    alpha = beta.then(gamma)
    alpha.check(a.space)
    return a, alpha


def min_distance_matrix(D: DistanceSet, family: Sequence[TypeFn]) -> IndexMetric:
    """Pairwise least realizable distances; zero between equal functions.

    The triangle inequality always holds on the result and is checked.
    """
    if not family:
        raise ValueError("family must not be empty")
    dom = family[0].points
    if any(t.points != dom for t in family):
        raise ValueError("family members must share a domain")
    if not dom:
        raise ValueError("family domain must be nonempty")
    s = len(family)
    table = [[Fraction(0)] * s for _ in range(s)]
    for i in range(s):
        for j in range(i + 1, s):
            lo = max(
                abs(x - y) for x, y in zip(family[i].values, family[j].values)
            )
            val = min(m for m in D.members if m >= lo)
            table[i][j] = table[j][i] = val
    out = IndexMetric.of(table)
    out.check(strict=False)
    return out


def constant_policy(value: Fraction) -> LevellingPolicy:
    value = Fraction(value)
    return lambda i, j: value


def r_levelling(
    D: DistanceSet,
    family: Sequence[TypeFn],
    r: Fraction,
    policy: LevellingPolicy,
) -> IndexMetric:
    """Index metric equal to the pairwise minimum above r and a policy
    choice from {predecessor(r), r} below it.

    Requires r to sit in the first block above its minimum.  The result
    is checked to be metric and to move by at most the pairwise minimum
    (at most the block minimum between duplicated functions).
    """
    r = Fraction(r)
    first = blocks(D)[0]
    if r not in first.members or r == first.min:
        raise ValueError(
            f"levelling needs r in the first block above its minimum, got {r}"
        )
    below = D.predecessor(r)
    dmin = min_distance_matrix(D, family)
    s = len(family)
    table = [[Fraction(0)] * s for _ in range(s)]
    for i in range(s):
        for j in range(i + 1, s):
            base = dmin.value(i, j)
            if base >= r:
                chosen = base
            else:
                chosen = Fraction(policy(i, j))
                if chosen not in (below, r):
                    raise ValueError(
                        f"policy must choose {below} or {r}, got {chosen}"
                    )
            table[i][j] = table[j][i] = chosen
    out = IndexMetric.of(table)
    out.check(strict=True)
    block_min = first.min
    for k in range(s):
        for i in range(s):
            for j in range(s):
                if len({i, j, k}) < 3:
                    continue
                gap = abs(out.value(k, i) - out.value(k, j))
                bound = block_min if family[i] == family[j] else dmin.value(i, j)
                if gap > bound:
                    raise AssertionError(
                        f"levelling moved by {gap} > {bound} at ({k},{i},{j})"
                    )
    return out


def levelled_realization(
    a: Approximant,
    family: Sequence[TypeFn],
    r: Fraction,
    policy: LevellingPolicy,
    anchor_point: int,
    max_grow: Optional[int] = None,
    accept=None,
) -> tuple[Approximant, list[int]]:
    """Realize a levelled family with the last member pinned to a point.

    The last family member duplicates an earlier one; all members past
    index 0 must have rank r or its predecessor.  The realized points
    carry the levelled distances and inherit its stability: distances
    from any w_k to two distinct members differ by at most their
    pairwise minimum.
    """
    if not family:
        raise ValueError("family must not be empty")
    r = Fraction(r)
    below = a.D.predecessor(r)
    last = len(family) - 1
    if len(family) > 1:
        if family[last] not in family[:last]:
            raise ValueError("the last family member must duplicate an earlier one")
        if len(set(family[:last])) != last:
            raise ValueError("members before the last must be pairwise distinct")
        for i in range(1, len(family)):
            if family[i].rank not in (r, below):
                raise ValueError(
                    f"family member {i} has rank {family[i].rank}, "
                    f"need {r} or {below}"
                )
        idx = r_levelling(a.D, family, r, policy)
        for i in range(len(family)):
            for j in range(i + 1, len(family)):
                if idx.value(i, j) not in distance_range(a.D, family[i], family[j]):
                    raise ValueError(
                        f"levelled distance for ({i},{j}) is not realizable"
                    )
    else:
        idx = IndexMetric.of([[0]])
    a, points = realize_family(
        a, family, idx, anchor=(last, anchor_point), max_grow=max_grow, accept=accept
    )
    dmin = min_distance_matrix(a.D, family)
    for k in range(last):
        for i in range(last):
            for j in range(last):
                if len({i, j, k}) < 3 or family[i] == family[j]:
                    continue
                gap = abs(
                    a.space.dist(points[k], points[i])
                    - a.space.dist(points[k], points[j])
                )
                if gap > dmin.value(i, j):
                    raise AssertionError(
                        f"realized points moved by {gap} > {dmin.value(i, j)}"
                    )
    return a, points
