"""Pairwise counts: support, margins, head-to-head info, graphs, Smith set."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Mapping

from .core import Profile
from .errors import ScopeMismatchError


def _ordered_pairs(candidates):
    cs = sorted(candidates)
    return [(x, y) for x in cs for y in cs if x != y]


@dataclass(frozen=True)
class SupportMatrix:
    """``counts[(x, y)]`` voters rank x strictly above y; `n` voters in total."""

    candidates: tuple
    counts: Mapping
    n: int

    def __getitem__(self, pair):
        x, y = pair
        if x == y:
            return 0
        return self.counts[(x, y)]

    def _key(self):
        return (self.candidates, tuple(sorted(self.counts.items())), self.n)

    def __eq__(self, other):
        if not isinstance(other, SupportMatrix):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def same_counts(self, other: SupportMatrix) -> bool:
        """Equality of the counting function alone, ignoring voter totals."""
        return self.candidates == other.candidates and dict(self.counts) == dict(other.counts)

    def scaled(self, factor: int) -> SupportMatrix:
        return SupportMatrix(
            self.candidates, {k: v * factor for k, v in self.counts.items()}, self.n * factor
        )


@dataclass(frozen=True)
class MarginMatrix:
    """Antisymmetric integer matrix over a candidate set."""

    candidates: tuple
    entries: Mapping

    def __post_init__(self):
        for (x, y), v in self.entries.items():
            if self.entries.get((y, x)) != -v:
                raise ValueError(f"margin matrix not antisymmetric at {(x, y)}")

    @classmethod
    def from_upper(cls, candidates, values: Mapping) -> MarginMatrix:
        """Build from ``{(x, y): m}`` given for one orientation of each pair.

        Pairs not mentioned get margin 0.
        """
        cs = tuple(sorted(candidates))
        entries = {p: 0 for p in _ordered_pairs(cs)}
        for (x, y), v in values.items():
            entries[(x, y)] = v
            entries[(y, x)] = -v
        return cls(cs, entries)

    @classmethod
    def zero(cls, candidates) -> MarginMatrix:
        return cls.from_upper(candidates, {})

    def __getitem__(self, pair):
        x, y = pair
        if x == y:
            return 0
        return self.entries[(x, y)]

    def _key(self):
        return (self.candidates, tuple(sorted(self.entries.items())))

    def __eq__(self, other):
        if not isinstance(other, MarginMatrix):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __sub__(self, other):
        return matrix_subtract(self, other)

    def __add__(self, other):
        if self.candidates != other.candidates:
            raise ScopeMismatchError("margin matrices over different candidates")
        return MarginMatrix(self.candidates, {k: v + other.entries[k] for k, v in self.entries.items()})

    def scaled(self, factor: int) -> MarginMatrix:
        return MarginMatrix(self.candidates, {k: v * factor for k, v in self.entries.items()})

    def is_zero(self) -> bool:
        return not any(self.entries.values())

    def all_even(self) -> bool:
        return all(v % 2 == 0 for v in self.entries.values())

    def positive_entries(self):
        return [(x, y, v) for (x, y), v in sorted(self.entries.items()) if v > 0]

    def to_json(self) -> dict:
        return {
            "candidates": list(self.candidates),
            "margins": [[x, y, v] for (x, y), v in sorted(self.entries.items()) if v > 0],
        }

    def digest(self) -> str:
        """Short stable hash, used for move-trace snapshots."""
        raw = json.dumps([list(self.candidates), sorted(self.entries.items())])
        return hashlib.sha256(raw.encode()).hexdigest()[:16]


def matrix_subtract(m: MarginMatrix, m2: MarginMatrix) -> MarginMatrix:
    if m.candidates != m2.candidates:
        raise ScopeMismatchError(
            f"cannot subtract a matrix over {list(m2.candidates)} from one over {list(m.candidates)}"
        )
    return MarginMatrix(m.candidates, {k: v - m2.entries[k] for k, v in m.entries.items()})


def support(p: Profile) -> SupportMatrix:
    cands = tuple(sorted(p.candidates))
    counts = {pair: 0 for pair in _ordered_pairs(cands)}
    # tally per distinct ballot, weighted by multiplicity
    for r, w in p.counts.items():
        classes = r.classes
        for i, hi in enumerate(classes):
            for lo in classes[i + 1:]:
                for x in hi:
                    for y in lo:
                        counts[(x, y)] += w
    return SupportMatrix(cands, counts, len(p))


def margins_from_support(s: SupportMatrix) -> MarginMatrix:
    return MarginMatrix(s.candidates, {(x, y): c - s.counts[(y, x)] for (x, y), c in s.counts.items()})


def margins(p: Profile) -> MarginMatrix:
    return margins_from_support(support(p))


@dataclass(frozen=True)
class H2HInfo:
    support: SupportMatrix
    n: int

    def __post_init__(self):
        if self.support.n != self.n:
            raise ValueError("voter count disagrees with the support matrix")


def h2h_info(p: Profile) -> H2HInfo:
    s = support(p)
    return H2HInfo(s, s.n)


# --------------------------------------------------------------------------
# Graphs
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class WeightedDigraph:
    nodes: tuple
    edges: tuple  # (source, target, weight), sorted

    def weight(self, x, y):
        for a, b, w in self.edges:
            if (a, b) == (x, y):
                return w
        return None

    def edge_dict(self) -> dict:
        return {(a, b): w for a, b, w in self.edges}

    def to_dot(self, name="G") -> str:
        lines = [f"digraph {name} {{"]
        for n in self.nodes:
            lines.append(f'  "{n}" [label="{n}"];')
        for a, b, w in self.edges:
            lines.append(f'  "{a}" -> "{b}" [label="{w}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def margin_graph(p: Profile) -> WeightedDigraph:
    m = margins(p)
    return WeightedDigraph(m.candidates, tuple(m.positive_entries()))


def winning_votes_graph(p: Profile) -> WeightedDigraph:
    s = support(p)
    edges = tuple(
        (x, y, c) for (x, y), c in sorted(s.counts.items()) if c > s.counts[(y, x)]
    )
    return WeightedDigraph(s.candidates, edges)


# --------------------------------------------------------------------------
# Condorcet / Smith
# --------------------------------------------------------------------------


def condorcet_winner_of(m: MarginMatrix):
    for x in m.candidates:
        if all(m[x, y] > 0 for y in m.candidates if y != x):
            return x
    return None


def condorcet_winner(p: Profile):
    return condorcet_winner_of(margins(p))


def smith_set_of(m: MarginMatrix) -> frozenset:
    cands = m.candidates
    wins = {x: sum(1 for y in cands if m[x, y] > 0) for x in cands}
    order = sorted(cands, key=lambda x: (-wins[x], x))
    # Smith members out-win every outsider, so the set is a prefix of `order`.
    for k in range(1, len(order) + 1):
        inside, outside = order[:k], order[k:]
        if all(m[x, y] > 0 for x in inside for y in outside):
            return frozenset(inside)
    return frozenset(order)


def smith_set(p: Profile) -> frozenset:
    return smith_set_of(margins(p))
