"""Axiom moves, scenario generation and violation-witness search.

A *move* is one elementary profile transformation sanctioned by an axiom. A
*scenario* instantiates an axiom's antecedent: a before/after pair for the
invariance axioms, or a triple ``(P, P^I, P^J)`` for Preferential Equality.
:func:`check_axiom` evaluates a rule on a stream of scenarios and records every
scenario whose outputs differ. Finding no witness within a budget is evidence,
never proof, that the rule satisfies the axiom.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .core import (
    Domain,
    Profile,
    Ranking,
    VoterId,
    all_linear_orders,
    all_weak_orders,
    break_tie_in,
    double,
    flip_adjacent,
    fresh_naturals,
    indifferent,
    voter_from_json,
    voter_to_json,
)
from .errors import (
    CandidateMismatchError,
    DomainMismatchError,
    NotAdjacentError,
    NotReversalPairError,
    OutOfDomainError,
)
from .margins import h2h_info, margins, support
from .rules import VotingRule, output_to_json
from .sampling import candidates as candidate_names
from .sampling import random_profile

# --------------------------------------------------------------------------
# Moves
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Move:
    """One elementary transformation together with the axiom that sanctions it."""

    kind: str
    axiom: str
    voters: tuple = ()
    pair: tuple | None = None
    rankings: tuple = ()
    tie: frozenset | None = None
    order: tuple = ()

    def to_json(self) -> dict:
        out = {"kind": self.kind, "axiom": self.axiom, "voters": [voter_to_json(v) for v in self.voters]}
        if self.pair is not None:
            out["pair"] = list(self.pair)
        if self.rankings:
            out["rankings"] = [str(r) for r in self.rankings]
        if self.tie is not None:
            out["tie"] = sorted(self.tie)
        if self.order:
            out["order"] = list(self.order)
        return out

    @classmethod
    def from_json(cls, obj: dict, candidates) -> Move:
        tie = obj.get("tie")
        return cls(
            obj["kind"],
            obj["axiom"],
            tuple(voter_from_json(v) for v in obj.get("voters", ())),
            tuple(obj["pair"]) if "pair" in obj else None,
            tuple(Ranking.parse(r, candidates) for r in obj.get("rankings", ())),
            frozenset(tie) if tie is not None else None,
            tuple(obj.get("order", ())),
        )


def preferential_switch(p: Profile, i: VoterId, x, y) -> Profile:
    """Voter i, who has x immediately above y, switches to y immediately above x."""
    return p.replace({i: flip_adjacent(p[i], x, y)})


def coalition_switch(p: Profile, coalition: Iterable[VoterId], x, y) -> Profile:
    updates = {}
    for i in coalition:
        try:
            updates[i] = flip_adjacent(p[i], x, y)
        except NotAdjacentError:
            raise NotAdjacentError(f"voter {i} does not rank {x} immediately above {y}") from None
    if not updates:
        return p
    return p.replace(updates)


def add_reversal_pair(p: Profile, r: Ranking, voters: Sequence[VoterId] | None = None) -> Profile:
    """Add two fresh voters submitting r and its reverse."""
    if r.scope != p.candidates:
        raise CandidateMismatchError("ranking does not cover the profile's candidates")
    if voters is None:
        voters = fresh_naturals(p.voters, 2)
    u, w = voters
    return p.replace({u: r, w: r.reverse()})


def remove_reversal_pair(p: Profile, i: VoterId, j: VoterId) -> Profile:
    if i == j or p[i].reverse() != p[j]:
        raise NotReversalPairError(f"voters {i} and {j} do not submit reversed rankings")
    return p.replace(remove=(i, j), allow_empty=True)


def break_tie(p: Profile, i: VoterId, tie, order: Sequence) -> Profile:
    return p.replace({i: break_tie_in(p[i], tie, order)})


def tiebreaking_compensation(p: Profile, i: VoterId, j: VoterId, tie, order: Sequence) -> Profile:
    """i breaks the tie by `order`, j by its reverse."""
    return p.replace({
        i: break_tie_in(p[i], tie, order),
        j: break_tie_in(p[j], tie, tuple(reversed(order))),
    })


def add_indifferent_voter(p: Profile) -> Profile:
    (v,) = fresh_naturals(p.voters, 1)
    return p.replace({v: indifferent(p.candidates)})


def add_block(p: Profile) -> Profile:
    """Add one fresh voter for every linear order of the candidates."""
    orders = list(all_linear_orders(p.candidates))
    fresh = fresh_naturals(p.voters, len(orders))
    return p.replace(dict(zip(fresh, orders)))


def apply_move(p: Profile, move: Move) -> Profile:
    """Replay a recorded move."""
    k = move.kind
    if k == "PreferentialSwitch" or k == "CoalitionSwitch":
        return coalition_switch(p, move.voters, *move.pair)
    if k == "PreferentialCompensation":
        i, j = move.voters
        x, y = move.pair
        return p.replace({i: flip_adjacent(p[i], x, y), j: flip_adjacent(p[j], y, x)})
    if k == "AddReversalPair":
        r, r_inv = move.rankings
        if r.reverse() != r_inv:
            raise NotReversalPairError("recorded rankings are not mutual reverses")
        return add_reversal_pair(p, r, move.voters)
    if k == "RemoveReversalPair":
        return remove_reversal_pair(p, *move.voters)
    if k == "BreakTie":
        return break_tie(p, move.voters[0], move.tie, move.order)
    if k == "TiebreakingCompensation":
        return tiebreaking_compensation(p, *move.voters, move.tie, move.order)
    if k == "Double":
        return double(p)
    if k == "AddIndifferentVoter":
        return add_indifferent_voter(p)
    if k == "AddBlock":
        return add_block(p)
    raise ValueError(f"unknown move kind {k!r}")


# --------------------------------------------------------------------------
# Scenarios
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Scenario:
    axiom: str
    before: Profile
    after: tuple  # one profile, or two for equal-effect axioms
    moves: tuple = ()

    @property
    def equal_effect(self) -> bool:
        return len(self.after) == 2

    def compared(self) -> tuple:
        return self.after if self.equal_effect else (self.before, self.after[0])


@dataclass
class Witness:
    scenario: Scenario
    outputs: tuple

    def to_json(self) -> dict:
        s = self.scenario
        return {
            "before": s.before.to_json(),
            "after": [a.to_json() for a in s.after],
            "moves": [m.to_json() for m in s.moves],
            "outputs": [output_to_json(o) for o in self.outputs],
        }


@dataclass
class AxiomReport:
    axiom: str
    rule: str
    tried: int = 0
    skipped: int = 0
    witnesses: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        """No witness among the scenarios tried (not a proof of the axiom)."""
        return not self.witnesses

    def to_json(self) -> dict:
        return {
            "axiom": self.axiom,
            "rule": self.rule,
            "tried": self.tried,
            "skipped": self.skipped,
            "witnesses": [w.to_json() for w in self.witnesses],
        }


def _ordered_pairs(cands):
    cs = sorted(cands)
    return [(x, y) for x in cs for y in cs if x != y]


def _adjacent_groups(p: Profile, x, y) -> list[list]:
    """Voters with x immediately above y, grouped by identical ballot."""
    groups: dict = {}
    for v, r in p.ballots.items():
        if r.immediately_above(x, y):
            groups.setdefault(r, []).append(v)
    return [groups[r] for r in sorted(groups, key=str)]


def _group_pairs(groups, s):
    """Disjoint size-s coalitions from two groups (distinct groups first)."""
    for a, b in itertools.combinations(range(len(groups)), 2):
        if len(groups[a]) >= s and len(groups[b]) >= s:
            yield groups[a][:s], groups[b][:s]
    for g in groups:
        if len(g) >= 2 * s:
            yield g[:s], g[s:2 * s]


def _pe_scenarios(p: Profile, max_coalition: int) -> Iterator[Scenario]:
    for s in range(1, max_coalition + 1):
        for x, y in _ordered_pairs(p.candidates):
            for I, J in _group_pairs(_adjacent_groups(p, x, y), s):
                mi = Move("CoalitionSwitch", "preferential-equality", tuple(I), (x, y))
                mj = Move("CoalitionSwitch", "preferential-equality", tuple(J), (x, y))
                yield Scenario(
                    "preferential-equality", p,
                    (coalition_switch(p, I, x, y), coalition_switch(p, J, x, y)),
                    (mi, mj),
                )


def _pc_scenarios(p: Profile, max_coalition: int) -> Iterator[Scenario]:
    cs = sorted(p.candidates)
    for s in range(1, max_coalition + 1):
        for x, y in itertools.combinations(cs, 2):
            xy = [g for g in _adjacent_groups(p, x, y) if len(g) >= s]
            yx = [g for g in _adjacent_groups(p, y, x) if len(g) >= s]
            for gi, gj in itertools.product(xy, yx):
                I, J = gi[:s], gj[:s]
                after = coalition_switch(coalition_switch(p, I, x, y), J, y, x)
                moves = tuple(
                    Move("PreferentialCompensation", "preferential-compensation", (i, j), (x, y))
                    for i, j in zip(I, J)
                )
                yield Scenario("preferential-compensation", p, (after,), moves)


def _sample_orders(orders: list, limit: int, rng) -> list:
    if len(orders) <= limit:
        return orders
    if rng is None:
        return orders[:limit]
    return rng.sample(orders, limit)


def _reversal_pairs_present(p: Profile, linear_only: bool):
    seen = set()
    for i, j in itertools.combinations(p.voters, 2):
        if i in seen or j in seen:
            continue
        ri = p[i]
        if linear_only and not ri.is_linear():
            continue
        if ri.reverse() == p[j]:
            seen.update((i, j))
            yield i, j


def _nr_scenarios(p: Profile, rng=None, limit=24) -> Iterator[Scenario]:
    orders = _sample_orders(list(itertools.islice(all_linear_orders(p.candidates), 720)), limit, rng)
    for r in orders:
        after = add_reversal_pair(p, r)
        vs = tuple(v for v in after.voters if v not in p)
        yield Scenario("neutral-reversal", p, (after,),
                       (Move("AddReversalPair", "neutral-reversal", vs, rankings=(r, r.reverse())),))
    for i, j in _reversal_pairs_present(p, linear_only=True):
        if len(p) > 2:
            yield Scenario("neutral-reversal", p, (remove_reversal_pair(p, i, j),),
                           (Move("RemoveReversalPair", "neutral-reversal", (i, j)),))


def _nnr_scenarios(p: Profile, rng=None, limit=24) -> Iterator[Scenario]:
    if len(p.candidates) <= 4:
        orders = list(all_weak_orders(p.candidates))
        orders = _sample_orders(orders, 75, rng)
    else:
        orders = _sample_orders(list(itertools.islice(all_weak_orders(p.candidates), 2000)), limit, rng)
    for r in orders:
        after = add_reversal_pair(p, r)
        vs = tuple(v for v in after.voters if v not in p)
        yield Scenario("nonlinear-neutral-reversal", p, (after,),
                       (Move("AddReversalPair", "nonlinear-neutral-reversal", vs, rankings=(r, r.reverse())),))


def _linearizations(tie, limit=6):
    items = sorted(tie)
    return list(itertools.islice(itertools.permutations(items), limit))


def _tc_scenarios(p: Profile, pure: bool) -> Iterator[Scenario]:
    name = "pure-tiebreaking-compensation" if pure else "tiebreaking-compensation"
    groups: dict = {}
    for v, r in p.ballots.items():
        if r.ties():
            groups.setdefault(r, []).append(v)
    ordered = [groups[r] for r in sorted(groups, key=str)]
    pairs = [(g[0], g[1]) for g in ordered if len(g) >= 2]
    if not pure:
        pairs += [(a[0], b[0]) for a, b in itertools.combinations(ordered, 2)]
    for i, j in pairs:
        common = set(p[i].ties()) & set(p[j].ties())
        for tie in sorted(common, key=sorted):
            for order in _linearizations(tie):
                yield Scenario(
                    name, p, (tiebreaking_compensation(p, i, j, tie, order),),
                    (Move("TiebreakingCompensation", name, (i, j), tie=tie, order=order),),
                )


def _homogeneity_scenarios(p: Profile) -> Iterator[Scenario]:
    yield Scenario("homogeneity", p, (double(p),), (Move("Double", "homogeneity"),))


def _ni_scenarios(p: Profile) -> Iterator[Scenario]:
    yield Scenario("neutral-indifference", p, (add_indifferent_voter(p),),
                   (Move("AddIndifferentVoter", "neutral-indifference"),))


def _block_scenarios(p: Profile) -> Iterator[Scenario]:
    if len(p.candidates) <= 5:
        yield Scenario("block-invariance", p, (add_block(p),), (Move("AddBlock", "block-invariance"),))


@dataclass(frozen=True)
class AxiomSpec:
    name: str
    needs_ties: bool
    description: str


AXIOMS: dict[str, AxiomSpec] = {
    a.name: a
    for a in [
        AxiomSpec("preferential-equality", False,
                  "equal-size coalitions making the same adjacent switch have the same effect"),
        AxiomSpec("preferential-compensation", False,
                  "opposite adjacent switches by two coalitions leave the outcome unchanged"),
        AxiomSpec("neutral-reversal", False, "adding a reversed pair of linear orders"),
        AxiomSpec("tiebreaking-compensation", True, "two voters break a common tie oppositely"),
        AxiomSpec("pure-tiebreaking-compensation", True,
                  "two voters with identical ballots break a tie oppositely"),
        AxiomSpec("homogeneity", False, "doubling every ballot"),
        AxiomSpec("nonlinear-neutral-reversal", True, "adding a reversed pair of strict weak orders"),
        AxiomSpec("neutral-indifference", True, "adding one fully indifferent voter"),
        AxiomSpec("block-invariance", False, "adding one copy of every linear order"),
    ]
}


def scenarios_for(axiom: str, p: Profile, rng=None, max_coalition: int = 3) -> Iterator[Scenario]:
    if axiom == "preferential-equality":
        return _pe_scenarios(p, max_coalition)
    if axiom == "preferential-compensation":
        return _pc_scenarios(p, max_coalition)
    if axiom == "neutral-reversal":
        return _nr_scenarios(p, rng)
    if axiom == "tiebreaking-compensation":
        return _tc_scenarios(p, pure=False)
    if axiom == "pure-tiebreaking-compensation":
        return _tc_scenarios(p, pure=True)
    if axiom == "homogeneity":
        return _homogeneity_scenarios(p)
    if axiom == "nonlinear-neutral-reversal":
        return _nnr_scenarios(p, rng)
    if axiom == "neutral-indifference":
        return _ni_scenarios(p)
    if axiom == "block-invariance":
        return _block_scenarios(p)
    raise KeyError(f"unknown axiom {axiom!r}; known: {', '.join(AXIOMS)}")


def _round_robin(iterators: list) -> Iterator:
    live = list(iterators)
    while live:
        still = []
        for it in live:
            try:
                yield next(it)
            except StopIteration:
                continue
            still.append(it)
        live = still


def _seeded_profiles(seed: int, domain: Domain, max_candidates=4, max_voters=6) -> Iterator[Profile]:
    rng = random.Random(seed)
    domains = [d for d in Domain if d <= domain]
    for n in itertools.count():
        d = domains[n % len(domains)]
        k = rng.randint(2, max_candidates)
        yield random_profile(rng, candidate_names(k), rng.randint(1, max_voters), d)


def scenario_stream(axiom: str, source=None, seed: int = 0, domain: Domain = Domain.SWO,
                    max_coalition: int = 3, per_profile: int = 8) -> Iterator[Scenario]:
    """Deterministic scenario stream.

    With a pool (`source` a list of profiles) every profile contributes its
    scenarios in round-robin order. Without one, seeded random profiles in
    `domain` each contribute up to `per_profile` shuffled scenarios.
    """
    if source is not None:
        return _round_robin([scenarios_for(axiom, p, None, max_coalition) for p in source])

    def generated():
        rng = random.Random(seed ^ 0x5EED)
        for p in _seeded_profiles(seed, domain):
            batch = list(itertools.islice(scenarios_for(axiom, p, rng, max_coalition), 200))
            rng.shuffle(batch)
            yield from batch[:per_profile]

    return generated()


def evaluate_scenario(rule: VotingRule, scenario: Scenario):
    """The two outcomes to compare, or None when a profile is outside dom(rule)."""
    try:
        return tuple(rule.outcome(q) for q in scenario.compared())
    except OutOfDomainError:
        return None


def check_axiom(rule: VotingRule, axiom: str, source=None, budget: int = 1000, seed: int = 0,
                max_coalition: int = 3, stop_at_first: bool = False) -> AxiomReport:
    """Search for witnesses that `rule` violates `axiom`.

    `source` is a list of profiles, or None for seeded random profiles drawn
    from the rule's domain. At most `budget` scenarios are evaluated.
    """
    spec = AXIOMS.get(axiom)
    if spec is None:
        raise KeyError(f"unknown axiom {axiom!r}; known: {', '.join(AXIOMS)}")
    if spec.needs_ties and rule.domain == Domain.LINEAR:
        raise DomainMismatchError(f"{axiom} needs ballots with ties; {rule.name} is linear-only")
    report = AxiomReport(axiom, rule.name)
    stream = scenario_stream(axiom, source, seed, rule.domain, max_coalition)
    attempts = 0
    for scenario in stream:
        if report.tried >= budget or attempts >= 20 * budget:
            break
        attempts += 1
        outputs = evaluate_scenario(rule, scenario)
        if outputs is None:
            report.skipped += 1
            continue
        report.tried += 1
        if outputs[0] != outputs[1]:
            report.witnesses.append(Witness(scenario, outputs))
            if stop_at_first:
                break
    return report


# --------------------------------------------------------------------------
# Invariance classification
# --------------------------------------------------------------------------

LEVELS = ("margin-based", "head-to-head", "C2")


def _invariance_keys(p: Profile):
    s = support(p)
    return {
        "margin-based": margins(p),
        "head-to-head": h2h_info(p),
        "C2": (s.candidates, tuple(sorted(s.counts.items()))),
    }


@dataclass
class InvarianceReport:
    rule: str
    evaluated: int
    counterexamples: dict

    def holds(self, level: str) -> bool:
        return not self.counterexamples[level]

    def to_json(self) -> dict:
        return {
            "rule": self.rule,
            "evaluated": self.evaluated,
            "levels": {
                level: {
                    "passed": not pairs,
                    "counterexamples": [
                        {"profiles": [a.to_json(), b.to_json()],
                         "outputs": [output_to_json(oa), output_to_json(ob)]}
                        for a, b, oa, ob in pairs[:5]
                    ],
                    "count": len(pairs),
                }
                for level, pairs in self.counterexamples.items()
            },
        }


def classify_invariance(rule: VotingRule, pool: Iterable[Profile]) -> InvarianceReport:
    """Compare outputs on profiles sharing margins / (support, n) / support."""
    groups = {level: {} for level in LEVELS}
    evaluated = 0
    for p in pool:
        try:
            out = rule.outcome(p)
        except OutOfDomainError:
            continue
        evaluated += 1
        for level, key in _invariance_keys(p).items():
            groups[level].setdefault(key, []).append((p, out))
    counterexamples = {level: [] for level in LEVELS}
    for level in LEVELS:
        for members in groups[level].values():
            ref, ref_out = members[0]
            for q, out in members[1:]:
                if out != ref_out:
                    counterexamples[level].append((ref, q, ref_out, out))
    return InvarianceReport(rule.name, evaluated, counterexamples)


def invariance_pool(seed: int = 0, bases: int = 40, variants: int = 3) -> list[Profile]:
    """Profiles grouped into margin-equal, head-to-head-equal and support-equal families."""
    from .canonical import equalize_h2h, margin_equal_variant

    rng = random.Random(seed)
    pool: list[Profile] = []
    domains = list(Domain)
    for n in range(bases):
        d = domains[n % len(domains)]
        base = random_profile(rng, candidate_names(rng.randint(2, 4)), rng.randint(1, 6), d)
        pool.append(base)
        pool.append(add_indifferent_voter(base))
        for _ in range(variants):
            other = margin_equal_variant(base, rng)
            pool.append(other)
            q, q2 = equalize_h2h(base, other)
            pool.extend([q, q2])
    return pool


def standard_pool(seed: int = 0, random_count: int = 60) -> list[Profile]:
    """Bundled fixtures followed by seeded random profiles across all domains."""
    from .fixtures import load_fixture_profiles
    from .sampling import random_profiles

    pool = list(load_fixture_profiles(small_only=True).values())
    per = random_count // 3
    for offset, d in enumerate(Domain):
        pool.extend(random_profiles(seed + offset, per, d))
    return pool


__all__ = [
    "AXIOMS", "AxiomReport", "Move", "Scenario", "Witness", "add_block", "add_indifferent_voter",
    "add_reversal_pair", "apply_move", "break_tie", "check_axiom", "classify_invariance",
    "coalition_switch", "invariance_pool", "preferential_switch", "remove_reversal_pair",
    "scenario_stream", "standard_pool", "tiebreaking_compensation",
]

