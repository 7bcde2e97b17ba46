"""Growing finite approximants of the countable homogeneous limit space.

An approximant is a finite metric space grown by a fair scheduler that
realizes one-point types over ever longer prefixes of the enumeration.
Saturation of a prefix (every admissible type over it realized) is the
measurable progress the rest of the package relies on: partial
isometries extend, points can be relocated off finite obstacles, and a
subset can be certified to contain a copy prefix.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable, Iterator, Optional

from .distset import DistanceSet, is_universal
from .errors import BudgetExceededError, NonUniversalError
from .space import Space, TypeFn, enumerate_katetov, extend, orbit


@dataclass(frozen=True)
class Embedding:
    """An injective, distance-preserving map given by (source, target) pairs."""

    pairs: tuple[tuple[int, int], ...]

    @classmethod
    def of(cls, mapping) -> "Embedding":
        return cls(tuple(sorted(dict(mapping).items())))

    @classmethod
    def identity(cls, points: Iterable[int]) -> "Embedding":
        return cls(tuple((p, p) for p in sorted(set(points))))

    def as_dict(self) -> dict[int, int]:
        return dict(self.pairs)

    def map(self, point: int) -> int:
        for s, t in self.pairs:
            if s == point:
                return t
        raise KeyError(point)

    @property
    def sources(self) -> tuple[int, ...]:
        return tuple(s for s, _ in self.pairs)

    @property
    def image(self) -> tuple[int, ...]:
        return tuple(t for _, t in self.pairs)

    def then(self, later: "Embedding") -> "Embedding":
        """Compose: first apply self, then ``later``."""
        after = later.as_dict()
        return Embedding(tuple((s, after[t]) for s, t in self.pairs))

    def check(self, source: Space, target: Optional[Space] = None) -> None:
        """Raise unless injective and distance-preserving."""
        target = target if target is not None else source
        images = [t for _, t in self.pairs]
        if len(set(images)) != len(images):
            raise ValueError("embedding is not injective")
        for (a, fa), (b, fb) in combinations(self.pairs, 2):
            if source.dist(a, b) != target.dist(fa, fb):
                raise ValueError(
                    f"embedding not distance-preserving on ({a},{b}): "
                    f"{source.dist(a, b)} vs {target.dist(fa, fb)}"
                )

    def is_valid(self, source: Space, target: Optional[Space] = None) -> bool:
        try:
            self.check(source, target)
            return True
        except ValueError:
            return False

    def to_json(self) -> list[list[int]]:
        return [[s, t] for s, t in self.pairs]


@dataclass(frozen=True)
class Approximant:
    """A finite prefix of the limit space, reproducible from (D, n, seed).

    ``schedule`` records how many fair rounds have completed, so growth
    can resume the canonical construction sequence.
    """

    space: Space
    seed: int = 0
    schedule: int = 1

    @property
    def D(self) -> DistanceSet:
        return self.space.D

    @property
    def n(self) -> int:
        return self.space.n

    def to_json(self) -> dict:
        data = self.space.to_json()
        data["seed"] = self.seed
        return data


@dataclass(frozen=True)
class SaturationCertificate:
    """Audit trail for a saturation level: every type checked, with its
    realizing point."""

    level: int
    checks: tuple[tuple[TypeFn, int], ...]

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "checks": [
                {"fn": fn.to_json(), "realizer": point} for fn, point in self.checks
            ],
        }


def realize(a: Approximant, t: TypeFn, prefer: str = "least") -> tuple[Approximant, int]:
    """Adjoin a fresh point realizing t (deterministic completion)."""
    sp, p = extend(a.space, t, prefer=prefer)
    return Approximant(sp, a.seed, a.schedule), p


def _round_functions(space: Space, k: int) -> Iterator[TypeFn]:
    """Katetov functions whose domain has maximum index k-1, in canonical
    order: subsets by ascending bitmask, then values lexicographically."""
    base = k - 1
    for mask in range(1 << base):
        dom = [i for i in range(base) if (mask >> i) & 1] + [base]
        yield from enumerate_katetov(space, dom)


def _prefix_functions(space: Space, k: int) -> Iterator[TypeFn]:
    """Katetov functions with nonempty domain inside the first k points."""
    for kk in range(1, k + 1):
        yield from _round_functions(space, kk)


def build(D: DistanceSet, n: int, seed: int = 0) -> Approximant:
    """Grow an n-point approximant of the limit space over D.

    The schedule is fair: round k realizes every still-unrealized type
    over the first k points before round k+1 begins, so saturation grows
    without bound as n does.  The construction is deterministic; the
    seed is carried for downstream consumers that permute generic
    choices.
    """
    ok, witness = is_universal(D)
    if not ok:
        raise NonUniversalError(f"{D.format()} is not universal", witness)
    if n < 1:
        raise ValueError("n must be at least 1")
    sp = Space.single_point(D)
    k = 1
    while sp.n < n:
        for t in _round_functions(sp, k):
            if not orbit(t, sp):
                sp, _ = extend(sp, t)
                if sp.n == n:
                    return Approximant(sp, seed, k)
        if k < sp.n:
            k += 1
    return Approximant(sp, seed, k)


def saturation_level(a: Approximant) -> tuple[int, SaturationCertificate]:
    """Largest k such that every type over the first k points is realized.

    The certificate lists each (type, realizer) pair checked on the way.
    """
    sp = a.space
    checks: list[tuple[TypeFn, int]] = []
    level = 0
    for k in range(1, sp.n + 1):
        round_checks = []
        for t in _round_functions(sp, k):
            realizers = orbit(t, sp)
            if not realizers:
                return level, SaturationCertificate(level, tuple(checks))
            round_checks.append((t, realizers[0]))
        checks.extend(round_checks)
        level = k
    return level, SaturationCertificate(level, tuple(checks))


def saturate(a: Approximant, k: int, max_grow: Optional[int] = None) -> Approximant:
    """Extend until every type over the first k points is realized.

    Idempotent; the point count added is bounded by the number of types
    over the prefix.  ``max_grow`` caps the added points.
    """
    sp = a.space
    added = 0
    for kk in range(1, k + 1):
        # completing round kk-1 guarantees at least kk points exist
        for t in _round_functions(sp, kk):
            if not orbit(t, sp):
                if max_grow is not None and added >= max_grow:
                    raise BudgetExceededError(
                        f"saturation to level {k} exceeded budget {max_grow}",
                        blocking=t,
                    )
                sp, _ = extend(sp, t)
                added += 1
    return Approximant(sp, a.seed, max(a.schedule, k))


def grown_realizer(
    a: Approximant,
    t: TypeFn,
    accept: Optional[Callable[[Approximant, int], bool]] = None,
    forbid: Iterable[int] = (),
    prefer_first: Optional[int] = None,
    max_grow: Optional[int] = None,
    prefer: str = "least",
) -> tuple[Approximant, int]:
    """Find or grow a point realizing t, subject to an acceptance filter.

    Existing realizers are scanned in enumeration order (after trying
    ``prefer_first`` when given); fresh realizations are then grown one
    at a time until the filter accepts one or the budget runs out.
    """
    banned = set(forbid)
    candidates = orbit(t, a.space)
    ordered: list[int] = []
    if prefer_first is not None and prefer_first in candidates:
        ordered.append(prefer_first)
    ordered.extend(c for c in candidates if c != prefer_first)
    for c in ordered:
        if c in banned:
            continue
        if accept is None or accept(a, c):
            return a, c
    grown = 0
    while max_grow is None or grown < max_grow:
        a, p = realize(a, t, prefer=prefer)
        grown += 1
        if p not in banned and (accept is None or accept(a, p)):
            return a, p
    raise BudgetExceededError(
        f"no acceptable realizer within budget {max_grow}", blocking=t
    )


def extend_isometry(
    source: Approximant,
    target: Approximant,
    partial: Embedding,
    upto: int,
    max_grow: Optional[int] = None,
) -> tuple[Approximant, Embedding]:
    """Extend a partial isometry to the first ``upto`` source points.

    The target grows on demand; the policy maps each next point to the
    least-index realizer of its induced type.  A budget failure carries
    the blocking type function.
    """
    partial.check(source.space, target.space)
    mapping = partial.as_dict()
    added = 0
    for v in range(upto):
        if v in mapping:
            continue
        t = TypeFn.of(
            {img: source.space.dist(v, x) for x, img in mapping.items()}
        )
        realizers = orbit(t, target.space) if t.points else tuple(target.space.points())
        image = None
        taken = set(mapping.values())
        for c in realizers:
            if c not in taken:
                image = c
                break
        if image is None:
            if not t.points:
                raise BudgetExceededError("target space is empty", blocking=t)
            if max_grow is not None and added >= max_grow:
                raise BudgetExceededError(
                    f"isometry extension exceeded budget {max_grow}", blocking=t
                )
            target, image = realize(target, t)
            added += 1
        mapping[v] = image
    emb = Embedding.of(mapping)
    emb.check(source.space, target.space)
    return target, emb


def avoid(
    a: Approximant,
    fixed: Iterable[int],
    removed: Iterable[int],
    upto: int,
    max_grow: Optional[int] = None,
    accept: Optional[Callable[["Approximant", int], bool]] = None,
) -> tuple[Approximant, Embedding]:
    """Embed the first ``upto`` points into the space minus ``removed``,
    pointwise fixing ``fixed``.

    Points map to themselves whenever admissible, so with nothing
    removed the result is the identity.
    """
    fixed_set = set(fixed)
    removed_set = set(removed)
    if fixed_set & removed_set:
        raise ValueError("fixed and removed sets must be disjoint")
    mapping: dict[int, int] = {}
    added = 0
    order = sorted(set(range(upto)) | fixed_set)
    for v in order:
        if v in fixed_set:
            mapping[v] = v
            continue
        t = TypeFn.of({img: a.space.dist(v, x) for x, img in mapping.items()})
        image = None
        if t.points:
            candidates = orbit(t, a.space)
            pool = [v] if v in candidates else []
            pool.extend(c for c in candidates if c != v)
        else:
            pool = [v] + [c for c in a.space.points() if c != v]
        taken = set(mapping.values())
        for c in pool:
            if c in removed_set or c in taken:
                continue
            if accept is not None and not accept(a, c):
                continue
            image = c
            break
        if image is None:
            remaining = None if max_grow is None else max_grow - added
            before = a.n
            a, image = grown_realizer(
                a, t, accept=accept, forbid=removed_set | taken, max_grow=remaining
            )
            added += a.n - before
        mapping[v] = image
    emb = Embedding.of(mapping)
    emb.check(a.space)
    return a, emb


def copy_check_space(s: Space, points: Iterable[int], depth: int) -> bool:
    """Finite copy criterion on a bare space.

    True iff every Katetov function whose domain lies in the first
    ``depth`` enumerated elements of the subset has a realizer inside
    the subset.
    """
    subset = sorted(set(points))
    if not subset:
        return False
    members = set(subset)
    head = subset[: max(depth, 0)]
    for size in range(len(head) + 1):
        for dom in combinations(head, size):
            for t in enumerate_katetov(s, dom):
                if not any(y in members for y in orbit(t, s)):
                    return False
    return True


def copy_check(a: Approximant, points: Iterable[int], depth: int) -> bool:
    return copy_check_space(a.space, points, depth)
