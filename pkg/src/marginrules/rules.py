"""Voting rules returning winner sets, plus the contrived counterexample rules.

Every rule is a pure function of a profile. Rules raise
:class:`~marginrules.errors.DomainError` on profiles outside their domain and
IRV raises :class:`~marginrules.errors.TieAmbiguous` when an elimination round
is tied. Axiom checkers skip the former and compare the latter as an output
(see :meth:`VotingRule.outcome`).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Mapping

from .core import Domain, Profile, classify_domain
from .errors import DomainError, TieAmbiguous
from .margins import margins, support


def _argmax(scores: Mapping) -> frozenset:
    best = max(scores.values())
    return frozenset(c for c, s in scores.items() if s == best)


def _argmin(scores: Mapping) -> frozenset:
    best = min(scores.values())
    return frozenset(c for c, s in scores.items() if s == best)


def minimax_margins(p: Profile) -> frozenset:
    m = margins(p)
    # y == x contributes M(x, x) = 0 to the max
    return _argmin({x: max(m[y, x] for y in m.candidates) for x in m.candidates})


def minimax_winning_votes(p: Profile) -> frozenset:
    s = support(p)
    return _argmin({x: max(s[y, x] for y in s.candidates) for x in s.candidates})


def copeland(p: Profile) -> frozenset:
    m = margins(p)
    cs = m.candidates
    return _argmax({
        x: sum(1 for y in cs if m[x, y] > 0) - sum(1 for y in cs if m[x, y] < 0)
        for x in cs
    })


def first_place_counts(counts: Mapping, remaining) -> Counter:
    """Singleton-top tallies among `remaining`; tied or empty tops count for nobody."""
    remaining = frozenset(remaining)
    tally = Counter({c: 0 for c in remaining})
    for r, w in counts.items():
        for cls in r.classes:
            live = cls & remaining
            if live:
                if len(live) == 1:
                    tally[next(iter(live))] += w
                break
    return tally


def irv_rounds(candidates, counts: Mapping) -> tuple[list, object]:
    """Elimination order and winner of an instant-runoff count.

    `counts` maps rankings to multiplicities. Raises TieAmbiguous when the
    fewest-votes candidate of some round is not unique.
    """
    remaining = set(candidates)
    eliminated = []
    while len(remaining) > 1:
        tally = first_place_counts(counts, remaining)
        low = min(tally.values())
        losers = sorted(c for c in remaining if tally[c] == low)
        if len(losers) > 1:
            raise TieAmbiguous(
                f"tie for fewest first-place votes among {losers} "
                f"after eliminating {eliminated}"
            )
        remaining.discard(losers[0])
        eliminated.append(losers[0])
    return eliminated, next(iter(remaining))


def irv(p: Profile) -> frozenset:
    _, winner = irv_rounds(p.candidates, p.counts)
    return frozenset([winner])


def plurality(p: Profile) -> frozenset:
    return _argmax(first_place_counts(p.counts, p.candidates))


def borda_linear(p: Profile) -> frozenset:
    if classify_domain(p) != Domain.LINEAR:
        raise DomainError("standard Borda needs linear ballots")
    return borda_swo(p)


def borda_swo(p: Profile) -> frozenset:
    """Each ballot gives a candidate one point per candidate strictly below it."""
    scores = Counter({c: 0 for c in p.candidates})
    for r, w in p.counts.items():
        below = len(p.candidates)
        for cls in r.classes:
            below -= len(cls)
            for c in cls:
                scores[c] += w * below
    return _argmax(scores)


def pareto(p: Profile) -> frozenset:
    ballots = list(p.counts)
    cs = sorted(p.candidates)
    dominated = {
        x for x in cs for y in cs
        if y != x and all(r.above(y, x) for r in ballots)
    }
    return frozenset(cs) - dominated


def positive_negative(p: Profile) -> frozenset:
    scores = Counter({c: 0 for c in p.candidates})
    for r, w in p.counts.items():
        if len(r.classes) < 2:
            continue
        top, bottom = r.top(), r.bottom()
        if top is not None:
            scores[top] += w
        if bottom is not None:
            scores[bottom] -= w
    return _argmax(scores)


# --------------------------------------------------------------------------
# Counterexample rules
# --------------------------------------------------------------------------


def _has_opposed_adjacent_pair(p: Profile) -> bool:
    adjacent = {}
    for v, r in p.ballots.items():
        for a, b in zip(r.classes, r.classes[1:]):
            adjacent.setdefault((next(iter(a)), next(iter(b))), set()).add(v)
    # one voter cannot hold both orientations, so a hit means two voters
    return any((y, x) in adjacent for (x, y) in adjacent)


def hybrid_pc_rule(p: Profile) -> frozenset:
    """Borda when two voters hold opposite adjacent pairs, else Plurality."""
    if classify_domain(p) != Domain.LINEAR:
        raise DomainError("hybrid rule is defined on linear profiles")
    if _has_opposed_adjacent_pair(p):
        return borda_linear(p)
    return plurality(p)


def tie_or_last_rule(p: Profile) -> frozenset:
    """All candidates if some ballot has a tie or two ballots differ at the bottom."""
    if any(r.ties() for r in p.counts):
        return frozenset(p.candidates)
    if len({r.bottom() for r in p.counts}) > 1:
        return frozenset(p.candidates)
    return plurality(p)


def threshold_rule(p: Profile, threshold: int = 3) -> frozenset:
    """Minimax while every positive margin is strictly below `threshold`, else Copeland."""
    m = margins(p)
    if all(v < threshold for v in m.entries.values()):
        return minimax_margins(p)
    return copeland(p)


def even_odd_rule(p: Profile) -> frozenset:
    return minimax_margins(p) if len(p) % 2 == 0 else copeland(p)


def block_congruence_rule(p: Profile) -> frozenset:
    """Pick by k = |V| mod |X|! (k in 1..|X|!): even k Minimax, odd k Copeland."""
    block = math.factorial(len(p.candidates))
    k = len(p) % block or block
    return minimax_margins(p) if k % 2 == 0 else copeland(p)


# --------------------------------------------------------------------------
# Registry
# --------------------------------------------------------------------------


TIE_AMBIGUOUS = "TieAmbiguous"


def output_to_json(out):
    return sorted(out) if isinstance(out, frozenset) else out


@dataclass(frozen=True)
class VotingRule:
    name: str
    domain: Domain
    func: Callable[[Profile], frozenset]
    margin_based: bool = False

    def __call__(self, p: Profile) -> frozenset:
        if p.is_empty():
            raise DomainError(f"{self.name} needs at least one voter")
        d = classify_domain(p)
        if d > self.domain:
            raise DomainError(f"{self.name} is defined on {self.domain.name} profiles, got {d.name}")
        return self.func(p)

    def outcome(self, p: Profile):
        """Winner set, or the TIE_AMBIGUOUS marker; DomainError still propagates.

        Axiom checkers compare outcomes by equality, so an ambiguous count is
        an output like any other.
        """
        try:
            return self(p)
        except TieAmbiguous:
            return TIE_AMBIGUOUS

    def __repr__(self):
        return f"VotingRule({self.name!r})"


RULES: dict[str, VotingRule] = {
    r.name: r
    for r in [
        VotingRule("minimax-margins", Domain.SWO, minimax_margins, margin_based=True),
        VotingRule("minimax-wv", Domain.SWO, minimax_winning_votes),
        VotingRule("copeland", Domain.SWO, copeland, margin_based=True),
        VotingRule("irv", Domain.LOBI, irv),
        VotingRule("plurality", Domain.LOBI, plurality),
        VotingRule("borda", Domain.LINEAR, borda_linear, margin_based=True),
        VotingRule("borda-swo", Domain.SWO, borda_swo),
        VotingRule("pareto", Domain.SWO, pareto),
        VotingRule("positive-negative", Domain.SWO, positive_negative),
    ]
}

FIXTURE_RULES: dict[str, VotingRule] = {
    r.name: r
    for r in [
        VotingRule("hybrid-pc", Domain.LINEAR, hybrid_pc_rule),
        VotingRule("tie-or-last", Domain.LOBI, tie_or_last_rule),
        VotingRule("threshold", Domain.SWO, threshold_rule, margin_based=True),
        VotingRule("even-odd", Domain.SWO, even_odd_rule),
        VotingRule("block-congruence", Domain.SWO, block_congruence_rule),
    ]
}


def fixture_rules() -> dict[str, VotingRule]:
    return dict(FIXTURE_RULES)


def all_rules() -> dict[str, VotingRule]:
    return {**RULES, **FIXTURE_RULES}


def get_rule(name: str) -> VotingRule:
    try:
        return all_rules()[name]
    except KeyError:
        raise KeyError(f"unknown rule {name!r}; known: {', '.join(sorted(all_rules()))}") from None
