"""Ballots as binary relations with side noncomparability.

A truncated ballot can be read as leaving the unranked candidates
noncomparable to everything rather than tied at the bottom. Ballots are then
arbitrary relations R on X (x R y reads "x at least as good as y") and a
profile is summarized by three counting functions: strict preference,
indifference and noncomparability.
"""

from __future__ import annotations

import enum
import itertools
import random
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Callable, Mapping, Sequence

from .core import Natural, Profile, Ranking, VoterId, all_weak_orders, fresh_naturals, make_ranking
from .errors import (
    DomainError,
    MarginMismatchError,
    OutOfDomainError,
    ParseError,
    PreconditionError,
    SelfReversalError,
)
from .margins import MarginMatrix


class RelDomain(enum.IntEnum):
    LOSN = 0
    WOSN = 1
    OTHER = 2


# --------------------------------------------------------------------------
# Relations
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PrefRelation:
    scope: frozenset
    pairs: frozenset

    def __post_init__(self):
        for x, y in self.pairs:
            if x not in self.scope or y not in self.scope:
                raise ValueError(f"pair {(x, y)} leaves the scope")

    def weak(self, x, y) -> bool:
        return (x, y) in self.pairs

    def strict(self, x, y) -> bool:
        return (x, y) in self.pairs and (y, x) not in self.pairs

    def indifferent(self, x, y) -> bool:
        return (x, y) in self.pairs and (y, x) in self.pairs

    def noncomparable(self, x, y) -> bool:
        return (x, y) not in self.pairs and (y, x) not in self.pairs

    def _distinct_pairs(self):
        return [(x, y) for x in self.scope for y in self.scope if x != y]

    def P(self) -> frozenset:
        return frozenset(p for p in self._distinct_pairs() if self.strict(*p))

    def I(self) -> frozenset:  # noqa: E743
        return frozenset(p for p in self._distinct_pairs() if self.indifferent(*p))

    def N(self) -> frozenset:
        return frozenset(p for p in self._distinct_pairs() if self.noncomparable(*p))

    def reverse(self) -> PrefRelation:
        return PrefRelation(self.scope, frozenset((y, x) for x, y in self.pairs))

    def is_self_reversing(self) -> bool:
        return self.reverse() == self

    def is_reflexive(self) -> bool:
        return all((x, x) in self.pairs for x in self.scope)

    def is_transitive(self) -> bool:
        succ: dict = {}
        for x, y in self.pairs:
            succ.setdefault(x, set()).add(y)
        return all(
            (x, z) in self.pairs
            for x, y in self.pairs
            for z in succ.get(y, ())
        )

    @classmethod
    def from_ranking(cls, ranked: Ranking | None, scope) -> PrefRelation:
        """Reflexive relation ranking `ranked` weakly; everything else noncomparable."""
        scope = frozenset(scope)
        pairs = {(x, x) for x in scope}
        if ranked is not None:
            pos = ranked.position
            pairs |= {(x, y) for x in pos for y in pos if pos[x] <= pos[y]}
        return cls(scope, frozenset(pairs))

    @classmethod
    def blank(cls, scope) -> PrefRelation:
        return cls.from_ranking(None, scope)

    @classmethod
    def strict_pair(cls, x, y, scope) -> PrefRelation:
        """The relation whose only strict preference is x over y."""
        return cls.from_ranking(make_ranking([{x}, {y}], {x, y}), scope)

    @classmethod
    def tie_pair(cls, x, y, scope) -> PrefRelation:
        """Identity plus x and y indifferent."""
        return cls.from_ranking(make_ranking([{x, y}], {x, y}), scope)

    @classmethod
    def parse(cls, text: str, scope) -> PrefRelation:
        """``"a>b~c | unranked: d,e"``; the unranked part may be omitted."""
        scope = frozenset(scope)
        head, _, tail = text.partition("|")
        head = head.strip()
        ranked = Ranking.parse(head) if head else None
        if tail:
            label, _, names = tail.partition(":")
            if label.strip() != "unranked":
                raise ParseError(f"expected 'unranked:' after '|', got {tail.strip()!r}")
            listed = {c.strip() for c in names.split(",") if c.strip()}
            covered = (ranked.scope if ranked else frozenset()) | listed
            if covered != scope:
                raise ParseError(f"ballot covers {sorted(covered)}, expected {sorted(scope)}")
        if ranked is not None and not ranked.scope <= scope:
            raise ParseError(f"ranked candidates {sorted(ranked.scope - scope)} are unknown")
        return cls.from_ranking(ranked, scope)

    def __str__(self):
        side = side_class(self)
        ranked = ranked_classes(self) if classify_rel(self) != RelDomain.OTHER else None
        if ranked is None:
            return "{" + ", ".join(f"{x}R{y}" for x, y in sorted(self.pairs) if x != y) + "}"
        head = ">".join("~".join(sorted(c)) for c in ranked)
        return f"{head} | unranked: {','.join(sorted(side))}" if side else head


def side_class(r: PrefRelation) -> frozenset:
    """Candidates noncomparable to every other candidate."""
    return frozenset(
        x for x in r.scope
        if all(r.noncomparable(x, y) for y in r.scope if y != x)
    )


def classify_rel(r: PrefRelation) -> RelDomain:
    if not (r.is_reflexive() and r.is_transitive()):
        return RelDomain.OTHER
    ranked = sorted(r.scope - side_class(r))
    pairs = [(x, y) for x, y in itertools.combinations(ranked, 2)]
    if all(r.strict(x, y) or r.strict(y, x) for x, y in pairs):
        return RelDomain.LOSN
    if all(r.weak(x, y) or r.weak(y, x) for x, y in pairs):
        return RelDomain.WOSN
    return RelDomain.OTHER


def ranked_classes(r: PrefRelation) -> list[frozenset]:
    """Indifference classes of the ranked part, best first (WOSN only)."""
    if classify_rel(r) == RelDomain.OTHER:
        raise DomainError("relation is neither LOSN nor WOSN")
    ranked = r.scope - side_class(r)
    below = {x: sum(1 for y in ranked if r.weak(x, y)) for x in ranked}
    classes: dict = {}
    for x in ranked:
        classes.setdefault(below[x], set()).add(x)
    return [frozenset(classes[k]) for k in sorted(classes, reverse=True)]


# --------------------------------------------------------------------------
# Profiles and counts
# --------------------------------------------------------------------------


class RelProfile:
    def __init__(self, candidates, ballots: Mapping[VoterId, PrefRelation]):
        cands = frozenset(candidates)
        if not ballots:
            raise PreconditionError("a relation profile needs at least one voter")
        for v, r in ballots.items():
            if r.scope != cands:
                raise ValueError(f"ballot of voter {v} has the wrong scope")
        self._candidates = cands
        self._voters = tuple(sorted(ballots))
        self._ballots = MappingProxyType({v: ballots[v] for v in self._voters})

    @property
    def candidates(self) -> frozenset:
        return self._candidates

    @property
    def ballots(self):
        return self._ballots

    @property
    def voters(self) -> tuple:
        return self._voters

    def __len__(self):
        return len(self._voters)

    def __getitem__(self, v):
        return self._ballots[v]

    def __eq__(self, other):
        if not isinstance(other, RelProfile):
            return NotImplemented
        return self._candidates == other._candidates and dict(self._ballots) == dict(other._ballots)

    def __hash__(self):
        return hash((self._candidates, frozenset(self._ballots.items())))

    def __repr__(self):
        return "RelProfile({" + ", ".join(f"{v}: {r}" for v, r in self._ballots.items()) + "})"

    @cached_property
    def counts(self):
        out: dict = {}
        for r in self._ballots.values():
            out[r] = out.get(r, 0) + 1
        return out

    def replace(self, updates: Mapping = (), remove=()) -> RelProfile:
        ballots = dict(self._ballots)
        for v in remove:
            del ballots[v]
        ballots.update(updates)
        return RelProfile(self._candidates, ballots)

    def add(self, *relations: PrefRelation) -> RelProfile:
        fresh = fresh_naturals(self._voters, len(relations))
        return self.replace(dict(zip(fresh, relations)))

    def domain(self) -> RelDomain:
        return max((classify_rel(r) for r in self.counts), default=RelDomain.LOSN)

    @classmethod
    def from_texts(cls, texts: Sequence[str], candidates) -> RelProfile:
        return cls(candidates, {Natural(i): PrefRelation.parse(t, candidates) for i, t in enumerate(texts)})

    @classmethod
    def from_profile(cls, p: Profile) -> RelProfile:
        """Embed complete rankings: no side class, ties become indifference."""
        return cls(p.candidates, {v: PrefRelation.from_ranking(r, p.candidates) for v, r in p.ballots.items()})

    def to_json(self) -> dict:
        return {
            "candidates": sorted(self._candidates),
            "ballots": [{"voter": str(v), "relation": str(r)} for v, r in self._ballots.items()],
        }


@dataclass(frozen=True)
class TripleCounts:
    candidates: tuple
    P: Mapping
    I: Mapping  # noqa: E741
    N: Mapping
    n: int

    def _key(self):
        return (self.candidates, tuple(sorted(self.P.items())), tuple(sorted(self.I.items())),
                tuple(sorted(self.N.items())), self.n)

    def __eq__(self, other):
        if not isinstance(other, TripleCounts):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())


def triple_counts(rp: RelProfile) -> TripleCounts:
    cs = tuple(sorted(rp.candidates))
    pairs = [(x, y) for x in cs for y in cs if x != y]
    P = dict.fromkeys(pairs, 0)
    I = dict.fromkeys(pairs, 0)  # noqa: E741
    N = dict.fromkeys(pairs, 0)
    for r, w in rp.counts.items():
        for x, y in pairs:
            if r.strict(x, y):
                P[(x, y)] += w
            elif r.indifferent(x, y):
                I[(x, y)] += w
            elif r.noncomparable(x, y):
                N[(x, y)] += w
    return TripleCounts(cs, P, I, N, len(rp))


def rel_margins(rp: RelProfile) -> MarginMatrix:
    t = triple_counts(rp)
    return MarginMatrix(t.candidates, {(x, y): c - t.P[(y, x)] for (x, y), c in t.P.items()})


# --------------------------------------------------------------------------
# Moves on relation profiles
# --------------------------------------------------------------------------


def comparable_compensation(rp: RelProfile, i: VoterId, j: VoterId, order: Sequence) -> RelProfile:
    """i puts its side class on top ordered by `order`; j puts it at the bottom reversed."""
    r = rp[i]
    if i == j or rp[j] != r:
        raise PreconditionError(f"voters {i} and {j} must submit the same ballot")
    side = side_class(r)
    if not side:
        raise PreconditionError(f"voter {i} has an empty side class")
    if frozenset(order) != side or len(order) != len(side):
        raise PreconditionError("the linear order must cover exactly the side class")
    classes = ranked_classes(r)
    on_top = make_ranking([{s} for s in order] + classes, rp.candidates)
    below = make_ranking(classes + [{s} for s in reversed(order)], rp.candidates)
    return rp.replace({
        i: PrefRelation.from_ranking(on_top, rp.candidates),
        j: PrefRelation.from_ranking(below, rp.candidates),
    })


def add_blank_voter(rp: RelProfile) -> RelProfile:
    return rp.add(PrefRelation.blank(rp.candidates))


def add_self_reversing_voter(rp: RelProfile, r: PrefRelation) -> RelProfile:
    if not r.is_self_reversing():
        raise SelfReversalError(f"ballot {r} differs from its reverse")
    return rp.add(r)


def add_relation_reversal_pair(rp: RelProfile, r: PrefRelation) -> RelProfile:
    return rp.add(r, r.reverse())


def double_rel(rp: RelProfile) -> RelProfile:
    return rp.add(*(rp[v] for v in rp.voters))


def self_reversal_replay(rp: RelProfile, r: PrefRelation) -> list[RelProfile]:
    """Adding a self-reversing ballot as double, add it twice, then halve.

    Returns the four stages. Added twice, the ballot is a reversal pair of
    itself; the last stage equals ``add_self_reversing_voter(rp, r)``.
    """
    if not r.is_self_reversing():
        raise SelfReversalError(f"ballot {r} differs from its reverse")
    doubled = double_rel(rp)
    with_pair = add_relation_reversal_pair(doubled, r)
    halved = add_self_reversing_voter(rp, r)
    if double_rel(halved).counts != with_pair.counts:
        raise AssertionError("halving does not invert doubling")
    return [rp, doubled, with_pair, halved]


def equalize_rel(rp: RelProfile, rp2: RelProfile, domain: RelDomain) -> tuple[RelProfile, RelProfile]:
    """Extend margin-equal relation profiles to ones with equal triple counts."""
    if domain == RelDomain.OTHER:
        raise DomainError("equalization is defined for LOSN and WOSN")
    for q in (rp, rp2):
        if q.domain() > domain:
            raise DomainError(f"profile is not {domain.name}")
    if rp.candidates != rp2.candidates or rel_margins(rp) != rel_margins(rp2):
        raise MarginMismatchError("profiles must have equal margins")
    cs = sorted(rp.candidates)
    t, t2 = triple_counts(rp), triple_counts(rp2)
    q, q2 = rp, rp2
    for ai, x in enumerate(cs):
        for y in cs[ai + 1:]:
            n = t.P[(x, y)] - t2.P[(x, y)]
            pair = (PrefRelation.strict_pair(x, y, cs), PrefRelation.strict_pair(y, x, cs))
            if n > 0:
                q2 = q2.add(*pair * n)
            elif n < 0:
                q = q.add(*pair * -n)
    if domain == RelDomain.WOSN:
        t, t2 = triple_counts(q), triple_counts(q2)
        for ai, x in enumerate(cs):
            for y in cs[ai + 1:]:
                n = t.I[(x, y)] - t2.I[(x, y)]
                tie = PrefRelation.tie_pair(x, y, cs)
                if n > 0:
                    q2 = q2.add(*[tie] * n)
                elif n < 0:
                    q = q.add(*[tie] * -n)
    gap = len(q2) - len(q)
    blank = PrefRelation.blank(cs)
    if gap > 0:
        q = q.add(*[blank] * gap)
    elif gap < 0:
        q2 = q2.add(*[blank] * -gap)
    return q, q2


# --------------------------------------------------------------------------
# Enumeration and sampling
# --------------------------------------------------------------------------


def all_relations(scope, domain: RelDomain = RelDomain.WOSN):
    """Every LOSN (or WOSN) relation on `scope`, each listed once."""
    scope = frozenset(scope)
    seen = set()
    for size in range(0, len(scope) + 1):
        for ranked in itertools.combinations(sorted(scope), size):
            orders = all_weak_orders(ranked) if ranked else [None]
            for order in orders:
                if order is not None and domain == RelDomain.LOSN and not order.is_linear():
                    continue
                r = PrefRelation.from_ranking(order, scope)
                if r not in seen:
                    seen.add(r)
                    yield r


def random_relation(rng: random.Random, scope, domain: RelDomain = RelDomain.WOSN) -> PrefRelation:
    items = sorted(scope)
    k = rng.randint(0, len(items))
    ranked = rng.sample(items, k)
    if not ranked:
        return PrefRelation.blank(scope)
    classes = [[ranked[0]]]
    for c in ranked[1:]:
        if domain == RelDomain.WOSN and rng.random() < 0.35:
            classes[-1].append(c)
        else:
            classes.append([c])
    return PrefRelation.from_ranking(make_ranking(classes, ranked), scope)


def random_rel_profile(rng: random.Random, scope, n: int, domain: RelDomain = RelDomain.WOSN) -> RelProfile:
    return RelProfile(scope, {Natural(i): random_relation(rng, scope, domain) for i in range(n)})


def rel_margin_equal_variant(rp: RelProfile, rng: random.Random) -> RelProfile:
    """Margin-equal variant via relabelling, reversal pairs and self-reversing ballots."""
    domain = rp.domain()
    q = rp
    for _ in range(rng.randint(1, 3)):
        move = rng.randrange(3)
        if move == 0:
            rels = [q[v] for v in q.voters]
            rng.shuffle(rels)
            q = RelProfile(q.candidates, dict(zip(q.voters, rels)))
        elif move == 1:
            q = add_relation_reversal_pair(q, random_relation(rng, q.candidates, domain))
        else:
            cs = sorted(q.candidates)
            if domain == RelDomain.WOSN and len(cs) >= 2:
                x, y = rng.sample(cs, 2)
                q = q.add(PrefRelation.tie_pair(x, y, cs))
            else:
                q = add_blank_voter(q)
    return q


# --------------------------------------------------------------------------
# Rules on relation profiles and relation axiom checks
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RelRule:
    name: str
    func: Callable[[RelProfile], frozenset]
    margin_based: bool = False

    def __call__(self, rp: RelProfile) -> frozenset:
        if rp.domain() == RelDomain.OTHER:
            raise DomainError(f"{self.name} needs LOSN or WOSN ballots")
        return self.func(rp)


def _argmin(scores):
    best = min(scores.values())
    return frozenset(c for c, s in scores.items() if s == best)


def _rel_minimax(rp: RelProfile) -> frozenset:
    m = rel_margins(rp)
    return _argmin({x: max(m[y, x] for y in m.candidates) for x in m.candidates})


def _rel_minimax_wv(rp: RelProfile) -> frozenset:
    t = triple_counts(rp)
    return _argmin({x: max([0] + [t.P[(y, x)] for y in t.candidates if y != x]) for x in t.candidates})


def _rel_copeland(rp: RelProfile) -> frozenset:
    m = rel_margins(rp)
    cs = m.candidates
    score = {x: sum((m[x, y] > 0) - (m[x, y] < 0) for y in cs) for x in cs}
    best = max(score.values())
    return frozenset(c for c, s in score.items() if s == best)


def _rel_pareto(rp: RelProfile) -> frozenset:
    cs = sorted(rp.candidates)
    rels = list(rp.counts)
    dominated = {x for x in cs for y in cs if y != x and all(r.strict(y, x) for r in rels)}
    return frozenset(cs) - dominated


REL_RULES: dict[str, RelRule] = {
    r.name: r
    for r in [
        RelRule("minimax-margins", _rel_minimax, margin_based=True),
        RelRule("copeland", _rel_copeland, margin_based=True),
        RelRule("minimax-wv", _rel_minimax_wv),
        RelRule("pareto", _rel_pareto),
    ]
}

REL_AXIOMS = (
    "comparable-compensation",
    "neutral-blankness",
    "neutral-self-reversal",
    "nonlinear-neutral-reversal",
    "homogeneity",
)


def _self_reversing_ballots(scope) -> list[PrefRelation]:
    cs = sorted(scope)
    out = [PrefRelation.blank(cs)]
    for size in range(2, len(cs) + 1):
        for tied in itertools.combinations(cs, size):
            out.append(PrefRelation.from_ranking(make_ranking([set(tied)], tied), cs))
    return out


def rel_scenarios(axiom: str, rp: RelProfile, domain: RelDomain = RelDomain.WOSN):
    """(before, after) pairs instantiating a relation axiom on `rp`."""
    cs = rp.candidates
    if axiom == "comparable-compensation":
        groups: dict = {}
        for v, r in rp.ballots.items():
            if side_class(r):
                groups.setdefault(r, []).append(v)
        for r in sorted(groups, key=str):
            vs = groups[r]
            if len(vs) >= 2:
                for order in itertools.islice(itertools.permutations(sorted(side_class(r))), 6):
                    yield rp, comparable_compensation(rp, vs[0], vs[1], order)
    elif axiom == "neutral-blankness":
        yield rp, add_blank_voter(rp)
    elif axiom == "neutral-self-reversal":
        for r in _self_reversing_ballots(cs):
            if classify_rel(r) <= domain:
                yield rp, add_self_reversing_voter(rp, r)
    elif axiom == "nonlinear-neutral-reversal":
        for r in itertools.islice(all_relations(cs, domain), 80):
            yield rp, add_relation_reversal_pair(rp, r)
    elif axiom == "homogeneity":
        yield rp, double_rel(rp)
    else:
        raise KeyError(f"unknown relation axiom {axiom!r}; known: {', '.join(REL_AXIOMS)}")


@dataclass
class RelAxiomReport:
    axiom: str
    rule: str
    tried: int = 0
    skipped: int = 0
    witnesses: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.witnesses

    def to_json(self) -> dict:
        return {
            "axiom": self.axiom,
            "rule": self.rule,
            "tried": self.tried,
            "skipped": self.skipped,
            "witnesses": [
                {"before": a.to_json(), "after": [b.to_json()], "outputs": [sorted(oa), sorted(ob)]}
                for a, b, oa, ob in self.witnesses
            ],
        }


def check_rel_axiom(rule: RelRule, axiom: str, pool, budget: int = 1000,
                    domain: RelDomain = RelDomain.WOSN) -> RelAxiomReport:
    report = RelAxiomReport(axiom, rule.name)
    for rp in pool:
        for before, after in rel_scenarios(axiom, rp, domain):
            if report.tried >= budget:
                return report
            try:
                outs = rule(before), rule(after)
            except OutOfDomainError:
                report.skipped += 1
                continue
            report.tried += 1
            if outs[0] != outs[1]:
                report.witnesses.append((before, after) + outs)
    return report
