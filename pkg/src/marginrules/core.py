"""Candidates, voters, rankings (strict weak orders) and profiles.

Candidates are plain strings; their alphabetic order is Python's string
order. A ranking is stored as an ordered tuple of indifference classes, so a
linear order is a ranking whose classes are all singletons.
"""

from __future__ import annotations

import enum
import functools
import itertools
import json
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from .errors import (
    CandidateMismatchError,
    EmptyRestrictionError,
    NotAdjacentError,
    NotATieError,
    OverlapOrGapError,
    VoterCollisionError,
)

TOP = "top"
BOTTOM = "bottom"
_STAR_ORDER = {TOP: 0, BOTTOM: 1}


# --------------------------------------------------------------------------
# Voter identities
# --------------------------------------------------------------------------


@functools.total_ordering
class VoterId:
    """Common ordering for voter identities.

    All natural ids precede all designated ids, which precede reserved ids.
    """

    __slots__ = ()

    def sort_key(self) -> tuple:
        raise NotImplementedError

    def __lt__(self, other):
        if not isinstance(other, VoterId):
            return NotImplemented
        return self.sort_key() < other.sort_key()


@dataclass(frozen=True, eq=True, slots=True)
class Natural(VoterId):
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("natural voter ids are non-negative")

    def sort_key(self):
        return (0, self.n)

    def __str__(self):
        return str(self.n)


@dataclass(frozen=True, eq=True, slots=True)
class Designated(VoterId):
    """The voter v(ab, star, k) of a Debord profile."""

    pair: tuple[str, str]
    star: str
    k: int

    def __post_init__(self):
        a, b = self.pair
        if a == b:
            raise ValueError("designated pair needs two distinct candidates")
        if self.star not in _STAR_ORDER:
            raise ValueError(f"star must be {TOP!r} or {BOTTOM!r}")
        if self.k < 1:
            raise ValueError("k must be positive")

    def sort_key(self):
        return (1, self.pair, _STAR_ORDER[self.star], self.k)

    def __str__(self):
        return f"v({self.pair[0]}{self.pair[1]},{self.star},{self.k})"


@dataclass(frozen=True, eq=True, slots=True)
class Reserved(VoterId):
    """A fixed identity outside the natural and designated ranges.

    Used for the held-out ballot of an odd-size canonical form, so that the
    form depends on nothing but the margins of the source profile.
    """

    label: str

    def sort_key(self):
        return (2, self.label)

    def __str__(self):
        return f"reserved:{self.label}"


HELD_OUT = Reserved("held-out")


def voter_to_json(v: VoterId):
    if isinstance(v, Natural):
        return v.n
    if isinstance(v, Designated):
        return {"pair": list(v.pair), "star": v.star, "k": v.k}
    return {"reserved": v.label}


def voter_from_json(obj) -> VoterId:
    if isinstance(obj, int):
        return Natural(obj)
    if "reserved" in obj:
        return Reserved(obj["reserved"])
    return Designated(tuple(obj["pair"]), obj["star"], obj["k"])


def fresh_naturals(used: Iterable[VoterId], count: int) -> list[Natural]:
    """The `count` least natural ids not in `used`."""
    taken = {v.n for v in used if isinstance(v, Natural)}
    out = []
    n = 0
    while len(out) < count:
        if n not in taken:
            out.append(Natural(n))
        n += 1
    return out


# --------------------------------------------------------------------------
# Rankings
# --------------------------------------------------------------------------


class Domain(enum.IntEnum):
    """Profile domains, ordered from most to least specific."""

    LINEAR = 0
    LOBI = 1
    SWO = 2


@dataclass(frozen=True)
class Ranking:
    """A strict weak order as a sequence of indifference classes, best first."""

    classes: tuple[frozenset, ...]

    @cached_property
    def scope(self) -> frozenset:
        return frozenset().union(*self.classes)

    @cached_property
    def position(self) -> dict:
        return {c: i for i, cls in enumerate(self.classes) for c in cls}

    def above(self, x, y) -> bool:
        pos = self.position
        return pos[x] < pos[y]

    def is_linear(self) -> bool:
        return all(len(c) == 1 for c in self.classes)

    def is_lobi(self) -> bool:
        return all(len(c) == 1 for c in self.classes[:-1])

    def domain(self) -> Domain:
        if self.is_linear():
            return Domain.LINEAR
        if self.is_lobi():
            return Domain.LOBI
        return Domain.SWO

    def ties(self) -> list[frozenset]:
        return [c for c in self.classes if len(c) > 1]

    def pairs(self) -> frozenset:
        """The relation itself: every (x, y) with x strictly above y."""
        return frozenset(
            (x, y)
            for i, hi in enumerate(self.classes)
            for lo in self.classes[i + 1:]
            for x in hi
            for y in lo
        )

    def reverse(self) -> Ranking:
        return Ranking(tuple(reversed(self.classes)))

    def restrict(self, subset) -> Ranking:
        subset = frozenset(subset)
        return Ranking(tuple(c & subset for c in self.classes if c & subset))

    def immediately_above(self, x, y) -> bool:
        """x and y sit alone in adjacent classes, x first."""
        pos = self.position
        i, j = pos[x], pos[y]
        return j == i + 1 and len(self.classes[i]) == 1 and len(self.classes[j]) == 1

    def top(self):
        """The unique top candidate, or None when the top class is a tie."""
        if self.classes and len(self.classes[0]) == 1:
            return next(iter(self.classes[0]))
        return None

    def bottom(self):
        if self.classes and len(self.classes[-1]) == 1:
            return next(iter(self.classes[-1]))
        return None

    def __str__(self):
        return ">".join("~".join(sorted(c)) for c in self.classes)

    def __repr__(self):
        return f"Ranking({str(self)!r})"

    @classmethod
    def parse(cls, text: str, scope=None) -> Ranking:
        """Parse ``"b>a~c"``. Empty text is the all-tied ranking of `scope`."""
        text = text.strip()
        if not text:
            if not scope:
                raise OverlapOrGapError("empty ranking needs an explicit scope")
            return make_ranking([set(scope)], scope)
        classes = [
            {c.strip() for c in part.split("~") if c.strip()}
            for part in text.split(">")
        ]
        if scope is None:
            scope = set().union(*classes)
        return make_ranking(classes, scope)


def make_ranking(classes: Sequence[Iterable], scope: Iterable) -> Ranking:
    scope = frozenset(scope)
    frozen = tuple(frozenset(c) for c in classes)
    seen: set = set()
    for c in frozen:
        if not c:
            raise OverlapOrGapError("indifference classes must be nonempty")
        if seen & c:
            raise OverlapOrGapError(f"candidates {sorted(seen & c)} appear twice")
        seen |= c
    if seen != scope:
        raise OverlapOrGapError(
            f"classes cover {sorted(seen)} but scope is {sorted(scope)}"
        )
    return Ranking(frozen)


def linear(*candidates) -> Ranking:
    """Linear ranking from candidates listed best first."""
    if len(candidates) == 1 and not isinstance(candidates[0], str):
        candidates = tuple(candidates[0])
    return make_ranking([{c} for c in candidates], candidates)


def alphabetic(scope) -> Ranking:
    return linear(sorted(scope))


def indifferent(scope) -> Ranking:
    return make_ranking([set(scope)], scope)


def flip_adjacent(r: Ranking, x, y) -> Ranking:
    """Swap x and y where x is immediately above y.

    Works on any ranking in which x and y are singleton classes next to each
    other, which includes every linear order.
    """
    if x not in r.position or y not in r.position or not r.immediately_above(x, y):
        raise NotAdjacentError(f"{x} is not immediately above {y} in {r}")
    classes = list(r.classes)
    i = r.position[x]
    classes[i], classes[i + 1] = classes[i + 1], classes[i]
    return Ranking(tuple(classes))


def reverse(r: Ranking) -> Ranking:
    return r.reverse()


def break_tie_in(r: Ranking, tie, order: Sequence) -> Ranking:
    """Replace the indifference class `tie` by the singleton sequence `order`."""
    tie = frozenset(tie)
    if len(tie) < 2 or tie not in r.classes:
        raise NotATieError(f"{sorted(tie)} is not a tie in {r}")
    if frozenset(order) != tie or len(order) != len(tie):
        raise NotATieError("linearization must order exactly the tied candidates")
    out = []
    for c in r.classes:
        if c == tie:
            out.extend(frozenset([x]) for x in order)
        else:
            out.append(c)
    return Ranking(tuple(out))


def all_linear_orders(scope) -> Iterable[Ranking]:
    for perm in itertools.permutations(sorted(scope)):
        yield linear(perm)


def all_weak_orders(scope) -> Iterable[Ranking]:
    """Every strict weak order on `scope` (ordered set partitions)."""
    items = sorted(scope)

    def ordered_partitions(rest):
        if not rest:
            yield ()
            return
        rest = list(rest)
        # choose the first class as any nonempty subset
        for size in range(1, len(rest) + 1):
            for first in itertools.combinations(rest, size):
                remaining = [c for c in rest if c not in first]
                for tail in ordered_partitions(remaining):
                    yield (frozenset(first),) + tail

    for classes in ordered_partitions(items):
        yield Ranking(classes)


# --------------------------------------------------------------------------
# Profiles
# --------------------------------------------------------------------------


class Profile:
    """A finite map from voters to rankings over a fixed candidate set.

    Instances are immutable. Empty profiles exist only when `allow_empty` is
    passed, which the canonical-form machinery does; voting rules reject them.
    """

    def __init__(self, candidates, ballots: Mapping[VoterId, Ranking], allow_empty=False):
        cands = frozenset(candidates)
        if not cands:
            raise CandidateMismatchError("a profile needs at least one candidate")
        if not ballots and not allow_empty:
            raise VoterCollisionError("a profile needs at least one voter")
        for v, r in ballots.items():
            if not isinstance(v, VoterId):
                raise TypeError(f"voter ids must be VoterId, got {v!r}")
            if r.scope != cands:
                raise CandidateMismatchError(
                    f"ballot of voter {v} ranks {sorted(r.scope)}, expected {sorted(cands)}"
                )
        self._candidates = cands
        self._voters = tuple(sorted(ballots, key=lambda v: v.sort_key()))
        self._ballots = MappingProxyType({v: ballots[v] for v in self._voters})

    @property
    def candidates(self) -> frozenset:
        return self._candidates

    @property
    def ballots(self) -> Mapping[VoterId, Ranking]:
        return self._ballots

    @property
    def voters(self) -> tuple:
        return self._voters

    def __len__(self):
        return len(self._voters)

    def __getitem__(self, v):
        return self._ballots[v]

    def __contains__(self, v):
        return v in self._ballots

    def __iter__(self):
        return iter(self._voters)

    def __eq__(self, other):
        if not isinstance(other, Profile):
            return NotImplemented
        return self._candidates == other._candidates and dict(self._ballots) == dict(other._ballots)

    def __hash__(self):
        return hash((self._candidates, frozenset(self._ballots.items())))

    def __repr__(self):
        body = ", ".join(f"{v}: {r}" for v, r in self._ballots.items())
        return f"Profile({{{body}}})"

    @cached_property
    def counts(self) -> Counter:
        """Multiset of ballots."""
        return Counter(self._ballots.values())

    def replace(self, updates: Mapping[VoterId, Ranking] = (), remove=(), allow_empty=None) -> Profile:
        ballots = dict(self._ballots)
        for v in remove:
            del ballots[v]
        ballots.update(updates)
        if allow_empty is None:
            allow_empty = not self._ballots or not ballots
        return Profile(self._candidates, ballots, allow_empty=allow_empty)

    def sub_profile(self, voters) -> Profile:
        return Profile(self._candidates, {v: self._ballots[v] for v in voters}, allow_empty=True)

    def is_empty(self) -> bool:
        return not self._voters

    @classmethod
    def from_rankings(cls, rankings: Iterable, candidates=None) -> Profile:
        """Profile with voters Natural(0), Natural(1), ... in the given order."""
        parsed = [r if isinstance(r, Ranking) else Ranking.parse(r, candidates) for r in rankings]
        if candidates is None:
            candidates = parsed[0].scope
        return cls(candidates, {Natural(i): r for i, r in enumerate(parsed)})

    @classmethod
    def from_counts(cls, groups: Iterable[tuple[int, object]], candidates=None) -> Profile:
        """Profile from ``[(count, ranking), ...]``; voters numbered in order."""
        rankings = []
        for count, r in groups:
            if not isinstance(r, Ranking):
                r = Ranking.parse(r, candidates)
            rankings.extend([r] * count)
        return cls.from_rankings(rankings, candidates)

    def to_json(self) -> dict:
        return {
            "candidates": sorted(self._candidates),
            "ballots": [
                {"voter": voter_to_json(v), "ranking": str(r)}
                for v, r in self._ballots.items()
            ],
        }

    @classmethod
    def from_json(cls, obj) -> Profile:
        cands = obj["candidates"]
        ballots = {
            voter_from_json(b["voter"]): Ranking.parse(b["ranking"], cands)
            for b in obj["ballots"]
        }
        return cls(cands, ballots, allow_empty=True)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=1)


def disjoint_union(p: Profile, q: Profile) -> Profile:
    if p.candidates != q.candidates:
        raise CandidateMismatchError("profiles range over different candidates")
    shared = set(p.voters) & set(q.voters)
    if shared:
        raise VoterCollisionError(f"voters {sorted(shared)} occur in both profiles")
    ballots = dict(p.ballots)
    ballots.update(q.ballots)
    return Profile(p.candidates, ballots, allow_empty=True)


def double(p: Profile) -> Profile:
    """p plus a copy of p on the |V| alphabetically least unused voter ids."""
    fresh = fresh_naturals(p.voters, len(p))
    copy = {new: p[old] for old, new in zip(p.voters, fresh)}
    ballots = dict(p.ballots)
    ballots.update(copy)
    return Profile(p.candidates, ballots, allow_empty=True)


def copy_map(p: Profile) -> dict:
    """Original voter -> its twin in ``double(p)``."""
    return dict(zip(p.voters, fresh_naturals(p.voters, len(p))))


def restrict(p: Profile, subset) -> Profile:
    """Restrict every ballot to `subset`; fully tied results are kept."""
    subset = frozenset(subset)
    if not subset or not subset <= p.candidates:
        raise EmptyRestrictionError(
            f"restriction set {sorted(subset)} must be a nonempty subset of the candidates"
        )
    cache: dict = {}
    ballots = {}
    for v, r in p.ballots.items():
        if r not in cache:
            cache[r] = r.restrict(subset)
        ballots[v] = cache[r]
    return Profile(subset, ballots, allow_empty=p.is_empty())


def classify_domain(p: Profile) -> Domain:
    return max((r.domain() for r in p.counts), default=Domain.LINEAR)
