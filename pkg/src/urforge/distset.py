"""Finite distance sets with exact rational arithmetic.

A distance set is a finite set of non-negative rationals containing 0.
This module decides universality (whether a countable homogeneous metric
space with exactly these distances exists) through the four-values
condition, and decomposes universal sets into blocks separated by
factor-two gaps.

All arithmetic is exact; no floats appear anywhere.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Optional

from .errors import NonUniversalError

Dist = Fraction


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as an exact distance")


def bit_indices(mask: int) -> Iterator[int]:
    """Yield the positions of set bits, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class DistanceSet:
    """A strictly sorted finite set of non-negative rationals containing 0.

    Distances are also addressable by *code*, their index in the sorted
    member tuple.  The constructor precomputes, for every pair of codes
    (i, j), the bitmask of codes k whose value lies in the closed interval
    [|m_i - m_j|, m_i + m_j].  A triangle with side codes (x, y, z) is
    metric exactly when bit x is set in the mask for (y, z), which makes
    exhaustive triangle scans cheap.
    """

    __slots__ = ("members", "_code", "_between", "positive_mask")

    def __init__(self, values: Iterable):
        members = sorted({_as_fraction(v) for v in values})
        if not members:
            raise ValueError("distance set must not be empty")
        if members[0] < 0:
            raise ValueError("distances must be non-negative")
        if members[0] != 0:
            raise ValueError("distance set must contain 0")
        self.members: tuple[Fraction, ...] = tuple(members)
        self._code = {v: i for i, v in enumerate(self.members)}
        m = len(self.members)
        self.positive_mask = (1 << m) - 2  # every code except 0
        between = []
        for a in self.members:
            row = []
            for b in self.members:
                lo, hi = abs(a - b), a + b
                mask = 0
                for k, c in enumerate(self.members):
                    if lo <= c <= hi:
                        mask |= 1 << k
                row.append(mask)
            between.append(tuple(row))
        self._between = tuple(between)

    # -- basic container behaviour -------------------------------------

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[Fraction]:
        return iter(self.members)

    def __contains__(self, value) -> bool:
        return _as_fraction(value) in self._code

    def __eq__(self, other) -> bool:
        return isinstance(other, DistanceSet) and self.members == other.members

    def __hash__(self) -> int:
        return hash(self.members)

    def __repr__(self) -> str:
        return f"DistanceSet({self.format()!r})"

    # -- parsing and formatting ----------------------------------------

    @classmethod
    def parse(cls, text: str) -> "DistanceSet":
        """Parse a comma-separated rational list such as ``0,1,5/2,4``.

        A JSON array (of numbers or strings) is accepted as well.
        """
        text = text.strip()
        if text.startswith("["):
            items = json.loads(text)
            return cls(items)
        parts = [p for p in (s.strip() for s in text.split(",")) if p]
        if not parts:
            raise ValueError("empty distance list")
        return cls(parts)

    def format(self) -> str:
        return ",".join(str(v) for v in self.members)

    def to_json(self) -> list[str]:
        return [str(v) for v in self.members]

    # -- code-level accessors --------------------------------------------

    def code_of(self, value: Fraction) -> int:
        try:
            return self._code[value]
        except KeyError:
            raise ValueError(f"{value} is not a member of {self.format()}") from None

    def value_of(self, code: int) -> Fraction:
        return self.members[code]

    def between_mask(self, i: int, j: int) -> int:
        """Codes k with |m_i - m_j| <= m_k <= m_i + m_j, as a bitmask."""
        return self._between[i][j]

    def triangle_ok(self, i: int, j: int, k: int) -> bool:
        return bool((self._between[j][k] >> i) & 1)

    # -- order operations -------------------------------------------------

    @property
    def max(self) -> Fraction:
        return self.members[-1]

    @property
    def positives(self) -> tuple[Fraction, ...]:
        return self.members[1:]

    @property
    def min_positive(self) -> Fraction:
        if len(self.members) < 2:
            raise ValueError("no positive distances")
        return self.members[1]

    def canonicalize(self) -> tuple["DistanceSet", Fraction]:
        """Scale so the least positive member becomes 1.

        Returns the scaled set and the scale factor; the original set is
        the canonical set multiplied by the scale.  Universality is
        invariant under positive scaling.
        """
        scale = self.min_positive
        return DistanceSet(v / scale for v in self.members), scale

    def predecessor(self, r: Fraction) -> Fraction:
        """Largest member strictly below r (r need not be a member)."""
        r = _as_fraction(r)
        if r <= 0:
            raise ValueError("predecessor requires r > 0")
        best = self.members[0]
        for v in self.members:
            if v >= r:
                break
            best = v
        return best

    def successor(self, r: Fraction) -> Fraction:
        """Smallest member strictly above r, with successor(max) = max."""
        r = _as_fraction(r)
        if r > self.max:
            raise ValueError(f"successor undefined above max {self.max}")
        if r == self.max:
            return r
        for v in self.members:
            if v > r:
                return v
        raise AssertionError("unreachable: r < max implies a successor exists")

    def is_jump(self, r: Fraction) -> bool:
        """Whether successor(r) > 2r for the member r > 0.

        Under the successor(max) = max rule the maximum is never a jump
        by this arithmetic.
        """
        r = _as_fraction(r)
        if r not in self._code:
            raise ValueError(f"{r} is not a member of {self.format()}")
        if r <= 0:
            raise ValueError("is_jump requires a positive member")
        return self.successor(r) > 2 * r


@dataclass(frozen=True)
class Block:
    """A maximal run of consecutive members bridgeable by the run minimum."""

    members: tuple[Fraction, ...]

    @property
    def min(self) -> Fraction:
        return self.members[0]

    @property
    def max(self) -> Fraction:
        return self.members[-1]

    def __iter__(self) -> Iterator[Fraction]:
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class UniversalityWitness:
    """Two metric triangles over a shared edge that cannot be amalgamated.

    The triangles are (a0, b, c) and (a1, b, c) with the shared edge
    distance delta(b, c); ``left`` holds (delta(a0,b), delta(a0,c)) and
    ``right`` holds (delta(a1,b), delta(a1,c)).  ``admissible`` lists the
    positive distances t that would make the combined four-point graph
    metric with delta(a0,a1) = t; for a genuine witness it is empty.
    """

    shared: Fraction
    left: tuple[Fraction, Fraction]
    right: tuple[Fraction, Fraction]
    admissible: tuple[Fraction, ...] = field(default=())

    def holds(self, dset: DistanceSet) -> bool:
        """Re-derive the witness property from scratch."""
        w = self.shared
        p0, q0 = self.left
        p1, q1 = self.right
        for side in (w, p0, q0, p1, q1):
            if side not in dset:
                return False
        for p, q in (self.left, self.right):
            if p <= 0 or q <= 0:
                return False
            if not (abs(p - q) <= w <= p + q):
                return False
        lo = max(abs(p0 - p1), abs(q0 - q1))
        hi = min(p0 + p1, q0 + q1)
        found = tuple(t for t in dset.positives if lo <= t <= hi)
        return found == () and self.admissible == ()

    def to_json(self) -> dict:
        return {
            "shared": str(self.shared),
            "left": [str(v) for v in self.left],
            "right": [str(v) for v in self.right],
            "admissible": [str(v) for v in self.admissible],
        }


def is_universal(dset: DistanceSet) -> tuple[bool, Optional[UniversalityWitness]]:
    """Decide universality via the four-values condition.

    For every pair of metric triangles sharing an edge (the degenerate
    shared edge of length 0 included), some positive member t must
    complete the four-point graph to a metric one.  Returns the
    lexicographically least failing pair of edge tuples as a witness
    when the answer is negative.
    """
    m = len(dset.members)
    pos = dset.positive_mask
    for w in range(m):
        # all (p, q) with both positive and the triangle (w, p, q) metric
        tris = [
            (p, q)
            for p in range(1, m)
            for q in range(1, m)
            if dset.triangle_ok(w, p, q)
        ]
        for idx, (p0, q0) in enumerate(tris):
            for p1, q1 in tris[idx:]:
                if not (dset.between_mask(p0, p1) & dset.between_mask(q0, q1) & pos):
                    member = dset.value_of
                    witness = UniversalityWitness(
                        shared=member(w),
                        left=(member(p0), member(q0)),
                        right=(member(p1), member(q1)),
                    )
                    return False, witness
    return True, None


def jumps(dset: DistanceSet) -> tuple[Fraction, ...]:
    """All positive members r with successor(r) > 2r."""
    return tuple(r for r in dset.positives if dset.is_jump(r))


def blocks(dset: DistanceSet) -> list[Block]:
    """Decompose a universal set's positive part into blocks.

    Greedy: a block starts at the least unused positive member b0 and
    absorbs successive members while each step stays within b0 of the
    previous member.  For universal sets this produces a partition whose
    consecutive blocks are separated by more than a factor of two; both
    facts are verified before returning.
    """
    ok, witness = is_universal(dset)
    if not ok:
        raise NonUniversalError("blocks undefined for non-universal sets", witness)
    positives = dset.positives
    if not positives:
        raise ValueError("no positive distances")
    out: list[Block] = []
    current = [positives[0]]
    for nxt in positives[1:]:
        if current[-1] + current[0] >= nxt:
            current.append(nxt)
        else:
            out.append(Block(tuple(current)))
            current = [nxt]
    out.append(Block(tuple(current)))
    _check_block_conditions(dset, out)
    return out


def _check_block_conditions(dset: DistanceSet, parts: list[Block]) -> None:
    """Verify the block axioms and the separation facts exactly."""
    for block in parts:
        b0 = block.min
        prev = dset.predecessor(b0)
        if not b0 > prev + prev:
            raise AssertionError(f"block start {b0} not past twice its predecessor")
        for a, b in zip(block.members, block.members[1:]):
            if dset.successor(a) != b:
                raise AssertionError(f"block members {a},{b} not consecutive")
            if not a + b0 >= b:
                raise AssertionError(f"block step {a}->{b} exceeds minimum {b0}")
    for left, right in zip(parts, parts[1:]):
        if not 2 * left.max < right.min:
            raise AssertionError(
                f"blocks {left.members} and {right.members} not gap-separated"
            )


def first_block_max(dset: DistanceSet) -> Fraction:
    return blocks(dset)[0].max
