"""Finite edge-labelled complete graphs and metric spaces over a distance set.

Points are identified by their enumeration index 0..n-1.  Distances are
stored internally as codes into the owning :class:`DistanceSet`, in a
lower-triangular layout whose rows are shared structurally between a
space and its one-point extensions, so growing by one point costs O(n).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from .distset import Dist, DistanceSet, bit_indices
from .errors import CompletionError

Rows = tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class TypeFn:
    """A partial map from points to positive distances.

    ``points`` is strictly increasing and ``values`` is parallel to it.
    Instances are immutable and hashable so they can serve as dictionary
    keys and set members.
    """

    points: tuple[int, ...]
    values: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.points) != len(self.values):
            raise ValueError("points and values must have equal length")
        if any(a >= b for a, b in zip(self.points, self.points[1:])):
            raise ValueError("points must be strictly increasing")
        if any(v <= 0 for v in self.values):
            raise ValueError("type function values must be positive")

    @classmethod
    def of(cls, mapping: Mapping[int, Dist] | Iterable[tuple[int, Dist]]) -> "TypeFn":
        items = sorted(dict(mapping).items())
        return cls(tuple(p for p, _ in items), tuple(Fraction(v) for _, v in items))

    @property
    def domain(self) -> tuple[int, ...]:
        return self.points

    def __len__(self) -> int:
        return len(self.points)

    def items(self) -> Iterator[tuple[int, Fraction]]:
        return zip(self.points, self.values)

    def value(self, point: int) -> Fraction:
        i = self.points.index(point)
        return self.values[i]

    @property
    def rank(self) -> Fraction:
        if not self.values:
            raise ValueError("rank undefined for empty domain")
        return min(self.values)

    def extended(self, point: int, value: Dist) -> "TypeFn":
        if point in self.points:
            raise ValueError(f"point {point} already in domain")
        return TypeFn.of(dict(self.items()) | {point: Fraction(value)})

    def restricted(self, points: Iterable[int]) -> "TypeFn":
        keep = set(points)
        return TypeFn.of({p: v for p, v in self.items() if p in keep})

    def extends(self, other: "TypeFn") -> bool:
        mine = dict(self.items())
        return all(mine.get(p) == v for p, v in other.items())

    def to_json(self) -> dict:
        return {
            "points": list(self.points),
            "values": [str(v) for v in self.values],
        }

    @classmethod
    def from_json(cls, data: dict) -> "TypeFn":
        return cls(
            tuple(int(p) for p in data["points"]),
            tuple(Fraction(v) for v in data["values"]),
        )


def rank(t: TypeFn) -> Fraction:
    """Minimum value of a type function; undefined on an empty domain."""
    return t.rank


class DGraph:
    """A symmetric complete graph with edge labels in a distance set.

    The label is zero exactly on the diagonal.  Not necessarily metric;
    see :class:`Space` for the metric refinement.
    """

    __slots__ = ("D", "n", "_rows", "parent_ids")

    def __init__(self, D: DistanceSet, rows: Rows, parent_ids=None):
        self.D = D
        self.n = len(rows)
        self._rows = rows
        # original point ids when this graph was carved out of another
        self.parent_ids: Optional[tuple[int, ...]] = parent_ids

    @classmethod
    def from_matrix(cls, D: DistanceSet, dist: Sequence[Sequence]) -> "DGraph":
        n = len(dist)
        rows = []
        for i in range(n):
            if len(dist[i]) != n:
                raise ValueError("distance matrix must be square")
            row = []
            for j in range(i):
                a = Fraction(dist[i][j])
                if Fraction(dist[j][i]) != a:
                    raise ValueError(f"matrix not symmetric at ({i},{j})")
                if a == 0:
                    raise ValueError(f"off-diagonal zero at ({i},{j})")
                row.append(D.code_of(a))
            if Fraction(dist[i][i]) != 0:
                raise ValueError(f"nonzero diagonal at {i}")
            rows.append(tuple(row))
        return cls(D, tuple(rows))

    @classmethod
    def single_point(cls, D: DistanceSet) -> "DGraph":
        return cls(D, ((),))

    def points(self) -> range:
        return range(self.n)

    def code(self, i: int, j: int) -> int:
        if i == j:
            return 0
        if i < j:
            i, j = j, i
        return self._rows[i][j]

    def dist(self, i: int, j: int) -> Fraction:
        return self.D.value_of(self.code(i, j))

    def row_codes(self, i: int) -> tuple[int, ...]:
        return self._rows[i]

    def distance_values(self) -> DistanceSet:
        """The distances actually realized, as a distance set (with 0)."""
        seen = {0}
        for i in range(self.n):
            seen.update(self._rows[i])
        return DistanceSet(self.D.value_of(c) for c in seen)

    def is_metric(self) -> bool:
        rows, D = self._rows, self.D
        for k in range(self.n):
            row_k = rows[k]
            for j in range(k):
                mask_row = D._between[row_k[j]]
                for i in range(j):
                    if not (mask_row[row_k[i]] >> rows[j][i]) & 1:
                        return False
        return True

    def violating_triple(self) -> Optional[tuple[int, int, int]]:
        for k in range(self.n):
            for j in range(k):
                for i in range(j):
                    if not self.D.triangle_ok(self.code(i, j), self.code(i, k), self.code(j, k)):
                        return (i, j, k)
        return None

    def to_json(self) -> dict:
        return {
            "D": self.D.to_json(),
            "n": self.n,
            "dist": [
                [str(self.dist(i, j)) for j in range(self.n)] for i in range(self.n)
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "DGraph":
        D = DistanceSet(data["D"])
        return cls.from_matrix(D, data["dist"])

    def to_dot(self, name: str = "space") -> str:
        lines = [f"graph {name} {{"]
        for i in range(self.n):
            lines.append(f'  v{i} [label="v{i}"];')
        for i in range(self.n):
            for j in range(i):
                lines.append(f'  v{j} -- v{i} [label="{self.dist(i, j)}"];')
        lines.append("}")
        return "\n".join(lines)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, DGraph)
            and self.D == other.D
            and self._rows == other._rows
        )

    def __hash__(self) -> int:
        return hash((self.D, self._rows))

    def __repr__(self) -> str:
        return f"<{type(self).__name__} n={self.n} D={self.D.format()}>"


class Space(DGraph):
    """A metric DGraph: every triangle satisfies the triangle inequality.

    Construction through :meth:`from_matrix` or :meth:`from_json` checks
    metricity exhaustively.  Internal growth paths use :func:`extend`,
    which checks exactly the triangles involving the new point, which is
    sufficient by induction.
    """

    @classmethod
    def from_matrix(cls, D: DistanceSet, dist: Sequence[Sequence]) -> "Space":
        g = super().from_matrix(D, dist)
        sp = cls(D, g._rows)
        bad = sp.violating_triple()
        if bad is not None:
            raise ValueError(f"not metric: triangle {bad} violates the inequality")
        return sp

    @classmethod
    def from_json(cls, data: dict) -> "Space":
        D = DistanceSet(data["D"])
        return cls.from_matrix(D, data["dist"])

    @classmethod
    def single_point(cls, D: DistanceSet) -> "Space":
        return cls(D, ((),))

    @classmethod
    def empty(cls, D: DistanceSet) -> "Space":
        return cls(D, ())

    def restrict(self, points: Iterable[int]) -> "Space":
        """Induced subspace, re-indexed in enumeration order.

        The original ids are retained on ``parent_ids``.
        """
        ids = tuple(sorted(set(points)))
        for p in ids:
            if not 0 <= p < self.n:
                raise ValueError(f"point {p} not in space")
        rows = tuple(
            tuple(self.code(ids[i], ids[j]) for j in range(i)) for i in range(len(ids))
        )
        return Space(self.D, rows, parent_ids=ids)


def is_metric(g: DGraph) -> bool:
    """Exhaustive triangle-inequality check over all triples."""
    return g.is_metric()


def restrict(s: Space, points: Iterable[int]) -> Space:
    return s.restrict(points)


def is_katetov(t: TypeFn, s: Space) -> bool:
    """Whether adjoining a new point at the given distances stays metric.

    Checked through |t(x) - t(y)| <= d(x,y) <= t(x) + t(y) over the pairs
    of the domain; triangles inside the domain are already metric.
    """
    codes = [(p, s.D.code_of(v)) for p, v in t.items()]
    D = s.D
    for a in range(len(codes)):
        pa, ca = codes[a]
        for b in range(a):
            pb, cb = codes[b]
            if not D.triangle_ok(s.code(pa, pb), ca, cb):
                return False
    return True


def orbit(t: TypeFn, s: Space) -> tuple[int, ...]:
    """All points realizing t: outside the domain, at exactly the given
    distances.  An empty domain is realized by every point."""
    if not t.points:
        return tuple(s.points())
    codes = [(p, s.D.code_of(v)) for p, v in t.items()]
    dom = set(t.points)
    out = []
    for y in s.points():
        if y in dom:
            continue
        if all(s.code(y, p) == c for p, c in codes):
            out.append(y)
    return tuple(out)


def enumerate_katetov(s: Space, points: Iterable[int]) -> list[TypeFn]:
    """All Katetov functions with exactly the given domain.

    Results are ordered lexicographically by value tuple (in member
    order), which the backtracking order below produces directly.
    """
    dom = tuple(sorted(set(points)))
    for p in dom:
        if not 0 <= p < s.n:
            raise ValueError(f"point {p} not in space")
    D = s.D
    if not dom:
        return [TypeFn((), ())]
    out: list[TypeFn] = []
    k = len(dom)
    chosen = [0] * k

    def descend(i: int):
        if i == k:
            out.append(
                TypeFn(dom, tuple(D.value_of(c) for c in chosen))
            )
            return
        mask = D.positive_mask
        for j in range(i):
            mask &= D.between_mask(chosen[j], s.code(dom[i], dom[j]))
            if not mask:
                return
        for c in bit_indices(mask):
            chosen[i] = c
            descend(i + 1)

    descend(0)
    return out


def extend(s: Space, t: TypeFn, prefer: str = "least") -> tuple[Space, int]:
    """Adjoin one fresh point realizing t.

    The type function is completed over the points outside its domain:
    in enumeration order each outside point receives the least (or, with
    ``prefer="greatest"``, the greatest) member of the distance set
    consistent with all distances fixed so far.  For universal distance
    sets such a completion always exists; when none does a
    :class:`CompletionError` is raised.
    """
    if not is_katetov(t, s):
        raise ValueError("type function is not Katetov over the space")
    D = s.D
    n = s.n
    codes: list[int] = [-1] * n
    fixed: list[int] = []
    for p, v in t.items():
        codes[p] = D.code_of(v)
        fixed.append(p)
    pick_last = prefer == "greatest"
    for z in range(n):
        if codes[z] >= 0:
            continue
        mask = D.positive_mask
        for x in fixed:
            mask &= D.between_mask(codes[x], s.code(z, x))
            if not mask:
                raise CompletionError(
                    f"no admissible completion at point {z}; "
                    "the distance set is not universal"
                )
        codes[z] = mask.bit_length() - 1 if pick_last else (mask & -mask).bit_length() - 1
        fixed.append(z)
    new_row = tuple(codes)
    return Space(D, s._rows + (new_row,)), n
