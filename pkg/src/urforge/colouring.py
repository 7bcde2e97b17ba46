"""Deterministic two-colourings of points.

A colouring is a pure function of (point id, distance profile to all
earlier points, seed), memoized on first query.  The profile of a point
never changes once the point exists, because spaces only grow by
appending, so replays with the same strategy and seed reproduce every
colour bit-exactly, in any process.
"""

from __future__ import annotations

import hashlib
from typing import Mapping, Optional

from .space import Space

KNOWN_STRATEGIES = ("const:0", "const:1", "parity", "profile-hash", "random:<seed>", "table")


def _hash_bit(*parts: str) -> int:
    digest = hashlib.sha256("|".join(parts).encode()).digest()
    return digest[0] & 1


class Colouring:
    """A named strategy with a stable memo of assigned colours.

    Strategies:

    - ``const:0`` / ``const:1``: one colour everywhere.
    - ``parity``: the point id modulo 2.
    - ``profile-hash``: a hash bit of the distance profile.
    - ``random:SEED``: a hash bit of (seed, id, profile).
    - ``table``: explicit id -> colour mapping (unlisted ids get 0).
    """

    def __init__(self, spec: str, table: Optional[Mapping[int, int]] = None):
        self.spec = spec
        self.memo: dict[int, int] = {}
        if spec == "table":
            if table is None:
                raise ValueError("table colouring requires a table")
            self.table = {int(k): int(v) for k, v in table.items()}
        else:
            self.table = None
            self._check_spec(spec)

    @staticmethod
    def _check_spec(spec: str) -> None:
        if spec in ("const:0", "const:1", "parity", "profile-hash"):
            return
        if spec.startswith("random:"):
            int(spec.split(":", 1)[1])
            return
        raise ValueError(f"unknown colouring strategy {spec!r}")

    @staticmethod
    def profile(space: Space, point: int) -> tuple[str, ...]:
        return tuple(str(space.dist(point, j)) for j in range(point))

    def compute(self, space: Space, point: int) -> int:
        spec = self.spec
        if spec == "const:0":
            return 0
        if spec == "const:1":
            return 1
        if spec == "parity":
            return point % 2
        profile = ",".join(self.profile(space, point))
        if spec == "profile-hash":
            return _hash_bit(profile)
        if spec.startswith("random:"):
            seed = spec.split(":", 1)[1]
            return _hash_bit(seed, str(point), profile)
        if spec == "table":
            return self.table.get(point, 0)
        raise ValueError(f"unknown colouring strategy {spec!r}")

    def colour(self, space: Space, point: int) -> int:
        if point not in self.memo:
            if not 0 <= point < space.n:
                raise ValueError(f"point {point} does not exist yet")
            self.memo[point] = self.compute(space, point)
        return self.memo[point]

    def snapshot(self) -> dict[int, int]:
        return dict(self.memo)

    @classmethod
    def parse(cls, name: str, table: Optional[Mapping[int, int]] = None) -> "Colouring":
        return cls(name, table=table)

    def __repr__(self) -> str:
        return f"Colouring({self.spec!r})"
