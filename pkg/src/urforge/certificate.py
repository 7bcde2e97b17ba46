"""Serializable certificates whose claims replay from raw data alone.

A certificate carries the induced subspace on every point it mentions,
the claimed colours of those points, and a list of checks.  The
verifier re-derives each check from the embedded matrix and colour
table; it shares no state with the code that produced the certificate.
A content digest over the payload makes any single-field tamper
detectable even when it happens to preserve the semantic checks.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from typing import Iterable, Optional

from .builder import copy_check_space
from .distset import DistanceSet
from .space import Space, TypeFn, orbit

FORMAT = "urforge.certificate/1"


def _canonical(payload: dict) -> bytes:
    clean = {k: v for k, v in payload.items() if k not in ("digest", "created")}
    return json.dumps(clean, sort_keys=True, separators=(",", ":")).encode()


def payload_digest(payload: dict) -> str:
    return hashlib.sha256(_canonical(payload)).hexdigest()


@dataclass
class Certificate:
    """A finished construction plus the checks that validate it."""

    payload: dict

    @property
    def kind(self) -> str:
        return self.payload["kind"]

    def to_json(self, timestamp: bool = True, indent: int = 2) -> str:
        data = dict(self.payload)
        data["digest"] = payload_digest(data)
        if timestamp:
            data["created"] = datetime.now(timezone.utc).isoformat()
        else:
            data.pop("created", None)
        return json.dumps(data, sort_keys=True, indent=indent) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Certificate":
        return cls(json.loads(text))


def make_certificate(
    kind: str,
    space: Space,
    ids: Iterable[int],
    colours: dict[int, int],
    strategy: str,
    seed: int,
    checks: list[dict],
    params: Optional[dict] = None,
) -> Certificate:
    """Bundle the induced subspace on ``ids`` with checks stated in
    certificate-local indices.

    ``colours`` and the point lists inside ``checks`` are given in
    ambient ids; they are translated to local indices here.
    """
    order = tuple(sorted(set(ids)))
    local = {amb: i for i, amb in enumerate(order)}
    sub = space.restrict(order)

    def tr_points(pts):
        return [local[p] for p in pts]

    def tr_fn(fn: TypeFn):
        return {
            "points": [local[p] for p in fn.points],
            "values": [str(v) for v in fn.values],
        }

    out_checks = []
    for chk in checks:
        item = {"check": chk["check"]}
        for key, value in chk.items():
            if key == "check":
                continue
            if key in ("points", "fixed"):
                item[key] = tr_points(value)
            elif key == "pairs":
                item[key] = [[local[s], local[t]] for s, t in value]
            elif key == "fn":
                item[key] = tr_fn(value)
            elif key == "classes":
                item[key] = [tr_points(c) for c in value]
            else:
                item[key] = value
        out_checks.append(item)

    payload = {
        "format": FORMAT,
        "kind": kind,
        "distance_set": space.D.to_json(),
        "strategy": strategy,
        "seed": seed,
        "ids": list(order),
        "space": {
            "n": sub.n,
            "dist": [[str(sub.dist(i, j)) for j in range(sub.n)] for i in range(sub.n)],
        },
        "colours": {str(local[p]): int(c) for p, c in colours.items() if p in local},
        "params": params or {},
        "checks": out_checks,
    }
    return Certificate(payload)


class _Rejector(Exception):
    pass


def _need(cond: bool, message: str) -> None:
    if not cond:
        raise _Rejector(message)


def verify_certificate(cert: Certificate | dict | str) -> tuple[bool, str]:
    """Replay every claim from the serialized data alone.

    Returns (True, "ok") or (False, first failing check).  The digest is
    checked first; the space is then validated (symmetry, membership in
    the distance set, all triangle inequalities) before the listed
    checks run.
    """
    if isinstance(cert, str):
        cert = Certificate.from_json(cert)
    elif isinstance(cert, dict):
        cert = Certificate(cert)
    payload = cert.payload
    try:
        _need(payload.get("format") == FORMAT, "unknown certificate format")
        _need("digest" in payload, "missing digest")
        _need(
            payload["digest"] == payload_digest(payload),
            "digest mismatch: certificate was modified",
        )
        D = DistanceSet(payload["distance_set"])
        raw = payload["space"]
        _need(raw["n"] == len(raw["dist"]), "space size mismatch")
        try:
            sub = Space.from_matrix(D, raw["dist"])
        except (ValueError, KeyError) as exc:
            raise _Rejector(f"space invalid: {exc}")
        colours = {int(k): int(v) for k, v in payload["colours"].items()}
        for chk in payload["checks"]:
            _run_check(chk, sub, colours)
    except _Rejector as stop:
        return False, str(stop)
    return True, "ok"


def _colour_of(colours: dict[int, int], point: int) -> int:
    if point not in colours:
        raise _Rejector(f"no colour recorded for point {point}")
    return colours[point]


def _run_check(chk: dict, sub: Space, colours: dict[int, int]) -> None:
    kind = chk["check"]
    if kind == "space-valid":
        # metricity already checked during load; nothing further
        return
    if kind == "min-count":
        pts = set(chk["points"])
        _need(
            len(pts) >= chk["at_least"],
            f"min-count: {len(pts)} < {chk['at_least']}",
        )
        return
    if kind == "monochromatic":
        want = chk["colour"]
        for p in chk["points"]:
            _need(
                _colour_of(colours, p) == want,
                f"monochromatic: point {p} has colour {_colour_of(colours, p)}, "
                f"expected {want}",
            )
        return
    if kind == "in-orbit":
        fn = TypeFn.from_json(chk["fn"])
        members = orbit(fn, sub)
        for p in chk["points"]:
            _need(p in members, f"in-orbit: point {p} does not realize the type")
        return
    if kind == "orbit-monochromatic":
        fn = TypeFn.from_json(chk["fn"])
        members = orbit(fn, sub)
        want = chk["colour"]
        for p in members:
            _need(
                _colour_of(colours, p) == want,
                f"orbit-monochromatic: realizer {p} has colour "
                f"{_colour_of(colours, p)}, expected {want}",
            )
        _need(
            len(members) >= chk.get("at_least", 0),
            f"orbit-monochromatic: only {len(members)} realizers, "
            f"need {chk.get('at_least', 0)}",
        )
        return
    if kind == "copy-check":
        _need(
            copy_check_space(sub, chk["points"], chk["depth"]),
            "copy-check failed",
        )
        return
    if kind == "embedding":
        pairs = [(int(s), int(t)) for s, t in chk["pairs"]]
        images = [t for _, t in pairs]
        _need(len(set(images)) == len(images), "embedding not injective")
        for i, (a, fa) in enumerate(pairs):
            for b, fb in pairs[:i]:
                _need(
                    sub.dist(a, b) == sub.dist(fa, fb),
                    f"embedding not distance-preserving on ({a},{b})",
                )
        fixed = set(chk.get("fixed", []))
        for s, t in pairs:
            if s in fixed:
                _need(s == t, f"embedding moves fixed point {s}")
        return
    if kind == "classes-monochromatic":
        r = Fraction(chk["r"])
        groups = [list(c) for c in chk["classes"]]
        wants = chk["colours"]
        _need(len(groups) == len(wants), "class/colour length mismatch")
        for gi, group in enumerate(groups):
            for a in group:
                for b in group:
                    if a < b:
                        _need(
                            sub.dist(a, b) <= r,
                            f"class {gi}: d({a},{b}) > {r}",
                        )
            for a in group:
                _need(
                    _colour_of(colours, a) == wants[gi],
                    f"class {gi}: point {a} has colour {_colour_of(colours, a)}, "
                    f"expected {wants[gi]}",
                )
        for gi, group in enumerate(groups):
            for gj in range(gi):
                for a in group:
                    for b in groups[gj]:
                        _need(
                            sub.dist(a, b) > r,
                            f"classes {gi},{gj} not separated at ({a},{b})",
                        )
        return
    raise _Rejector(f"unknown check kind {kind!r}")
