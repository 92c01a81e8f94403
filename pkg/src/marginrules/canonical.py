"""Margin-determined normal forms.

A McGarvey pair isolates a +2 margin on one ordered pair. A Debord profile
realizes an even margin matrix with designated McGarvey voters. Every
linear profile can be carried, using only reversal-pair additions/removals
and compensated adjacent switches, onto a canonical form that depends on its
margins alone; :func:`canonicalize_linear` records that move sequence.
"""

from __future__ import annotations

import functools
import json
import random
from dataclasses import dataclass, field

from .axioms import Move, apply_move, tiebreaking_compensation
from .core import (
    BOTTOM,
    HELD_OUT,
    TOP,
    Designated,
    Domain,
    Natural,
    Profile,
    Ranking,
    alphabetic,
    break_tie_in,
    classify_domain,
    copy_map,
    double,
    flip_adjacent,
    fresh_naturals,
    indifferent,
    make_ranking,
    voter_to_json,
)
from .errors import (
    DomainError,
    InvariantBreach,
    MarginMismatchError,
    OddMarginError,
    VoterCollisionError,
)
from .margins import MarginMatrix, margins, support
from .sampling import random_ranking

NR = "neutral-reversal"
PC = "preferential-compensation"
TC = "tiebreaking-compensation"

# --------------------------------------------------------------------------
# McGarvey pairs and Debord profiles
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class McGarveyPair:
    pair: tuple
    top: Ranking
    bottom: Ranking


@functools.lru_cache(maxsize=None)
def _mcgarvey(a, b, scope: frozenset) -> McGarveyPair:
    rest = sorted(scope - {a, b})
    top = make_ranking([{a}, {b}] + [{c} for c in rest], scope)
    bottom = make_ranking([{c} for c in reversed(rest)] + [{a}, {b}], scope)
    return McGarveyPair((a, b), top, bottom)


def mcgarvey_pair(a, b, scope) -> McGarveyPair:
    """G_top = a>b>L and G_bottom = L^-1>a>b with L alphabetic on the rest."""
    scope = frozenset(scope)
    if a == b or a not in scope or b not in scope:
        raise ValueError(f"need two distinct candidates of the scope, got {a!r}, {b!r}")
    return _mcgarvey(a, b, scope)


def designated_ballot(v: Designated, scope) -> Ranking:
    g = mcgarvey_pair(*v.pair, scope)
    return g.top if v.star == TOP else g.bottom


def debord(m: MarginMatrix) -> Profile:
    """The Debord profile of an even margin matrix (possibly empty)."""
    if not m.all_even():
        odd = [(x, y) for (x, y), v in sorted(m.entries.items()) if v % 2]
        raise OddMarginError(f"margins must all be even; odd at {odd[0]}")
    scope = frozenset(m.candidates)
    ballots = {}
    for a, b, v in m.positive_entries():
        g = mcgarvey_pair(a, b, scope)
        for k in range(1, v // 2 + 1):
            ballots[Designated((a, b), TOP, k)] = g.top
            ballots[Designated((a, b), BOTTOM, k)] = g.bottom
    return Profile(scope, ballots, allow_empty=True)


def is_debord_form(p: Profile) -> tuple[bool, list[str]]:
    """Check the four normal-form conditions; returns (ok, diagnostics)."""
    problems = []
    present = set()
    for v, r in p.ballots.items():
        if not isinstance(v, Designated):
            problems.append(f"voter {v} is not designated")
            continue
        if not set(v.pair) <= p.candidates:
            problems.append(f"voter {v} names candidates outside the profile")
            continue
        if r != designated_ballot(v, p.candidates):
            problems.append(f"voter {v} does not submit its McGarvey ballot")
        present.add((v.pair, v.star, v.k))
    for pair, star, k in sorted(present):
        other = BOTTOM if star == TOP else TOP
        if (pair, other, k) not in present:
            problems.append(f"v({''.join(pair)},{star},{k}) has no {other} partner")
        if k > 1 and (pair, star, k - 1) not in present:
            problems.append(f"v({''.join(pair)},{star},{k}) present without k={k - 1}")
    pairs = {pair for pair, _, _ in present}
    for a, b in sorted(pairs):
        if a < b and (b, a) in pairs:
            problems.append(f"designated voters for both {a}{b} and {b}{a}")
    return not problems, problems


# --------------------------------------------------------------------------
# Move traces
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class TraceStep:
    move: Move
    digest: str  # margins after the move


@dataclass
class MoveTrace:
    steps: list = field(default_factory=list)

    def record(self, move: Move, p: Profile) -> None:
        self.steps.append(TraceStep(move, margins(p).digest()))

    def __len__(self):
        return len(self.steps)

    def to_jsonl(self) -> str:
        lines = [
            json.dumps({"step": n, "move": s.move.to_json(), "margins": s.digest}, sort_keys=True)
            for n, s in enumerate(self.steps)
        ]
        return "".join(line + "\n" for line in lines)

    @classmethod
    def from_jsonl(cls, text: str, candidates) -> MoveTrace:
        steps = []
        for line in text.splitlines():
            if line.strip():
                obj = json.loads(line)
                steps.append(TraceStep(Move.from_json(obj["move"], candidates), obj["margins"]))
        return cls(steps)


def audit_trace(source: Profile, trace: MoveTrace) -> Profile:
    """Replay `trace` from `source`, recounting margins at every step.

    Every move must preserve the margins, except Double which doubles them.
    Returns the final profile; raises InvariantBreach on any mismatch.
    """
    current = source
    m = margins(source)
    for n, step in enumerate(trace.steps):
        current = apply_move(current, step.move)
        m2 = margins(current)
        expected = m.scaled(2) if step.move.kind == "Double" else m
        if m2 != expected:
            raise InvariantBreach(f"step {n} ({step.move.kind}) changed the margins")
        if m2.digest() != step.digest:
            raise InvariantBreach(f"step {n} ({step.move.kind}) does not match its recorded snapshot")
        m = m2
    return current


# --------------------------------------------------------------------------
# Canonicalization of linear profiles
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CanonicalForm:
    held_out: tuple | None  # (VoterId, Ranking) when the source has odd size
    debord_part: Profile

    def to_profile(self) -> Profile:
        ballots = dict(self.debord_part.ballots)
        if self.held_out is not None:
            v, r = self.held_out
            ballots[v] = r
        return Profile(self.debord_part.candidates, ballots, allow_empty=True)

    def to_json(self) -> dict:
        held = None
        if self.held_out is not None:
            held = {"voter": voter_to_json(self.held_out[0]), "ranking": str(self.held_out[1])}
        return {"held_out": held, "debord_part": self.debord_part.to_json()}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=1) + "\n"


class _Canonicalizer:
    """Mutable state of one canonicalization run: profile, trace, k counters."""

    def __init__(self, p: Profile):
        self.p = p
        self.trace = MoveTrace()
        self.next_k: dict = {}
        self.scope = p.candidates

    def do(self, move: Move) -> None:
        self.p = apply_move(self.p, move)
        self.trace.record(move, self.p)

    def compensated_flip(self, i, x, y) -> None:
        """Voter i switches x>y to y>x, compensated by a fresh McGarvey xy pair."""
        k = self.next_k.get((x, y), 1)
        self.next_k[(x, y)] = k + 1
        vt, vb = Designated((x, y), TOP, k), Designated((x, y), BOTTOM, k)
        g_yx = mcgarvey_pair(y, x, self.scope).top  # y>x>L, reverse is L^-1>x>y
        self.do(Move("AddReversalPair", NR, (vt, vb), rankings=(g_yx, g_yx.reverse())))
        # vt moves y>x>L to x>y>L while i moves x>y to y>x
        self.do(Move("PreferentialCompensation", PC, (i, vt), (x, y)))

    def make_reversal(self, i, j) -> None:
        target = {c: n for n, c in enumerate(reversed([next(iter(c)) for c in self.p[j].classes]))}
        while True:
            cur = [next(iter(c)) for c in self.p[i].classes]
            for t in range(len(cur) - 1):
                if target[cur[t]] > target[cur[t + 1]]:
                    self.compensated_flip(i, cur[t], cur[t + 1])
                    break
            else:
                break
        self.do(Move("RemoveReversalPair", NR, (i, j)))

    def purge_quadruples(self) -> None:
        cs = sorted(self.scope)
        for a in cs:
            for b in cs:
                if a >= b:
                    continue
                while True:
                    kab = self._largest_k(a, b)
                    kba = self._largest_k(b, a)
                    if not kab or not kba:
                        break
                    self.do(Move("RemoveReversalPair", NR,
                                 (Designated((a, b), TOP, kab), Designated((b, a), BOTTOM, kba))))
                    self.do(Move("RemoveReversalPair", NR,
                                 (Designated((a, b), BOTTOM, kab), Designated((b, a), TOP, kba))))

    def _largest_k(self, a, b) -> int:
        ks = [v.k for v in self.p.voters
              if isinstance(v, Designated) and v.pair == (a, b) and v.star == TOP]
        return max(ks, default=0)


def canonicalize_linear(p: Profile) -> tuple[CanonicalForm, MoveTrace]:
    """Carry a linear profile to its margin-determined canonical form."""
    if classify_domain(p) != Domain.LINEAR:
        raise DomainError("canonicalization needs a linear profile")
    if not all(isinstance(v, Natural) for v in p.voters):
        raise VoterCollisionError("source voters must carry natural ids")
    run = _Canonicalizer(p)
    held = None
    if len(p) % 2:
        b0 = alphabetic(p.candidates)
        (fresh,) = fresh_naturals(p.voters, 1)
        run.do(Move("AddReversalPair", NR, (HELD_OUT, fresh), rankings=(b0, b0.reverse())))
        held = (HELD_OUT, b0)
    naturals = [v for v in run.p.voters if isinstance(v, Natural)]
    for i, j in zip(naturals[0::2], naturals[1::2]):
        run.make_reversal(i, j)
    run.purge_quadruples()
    rest = run.p.replace(remove=[HELD_OUT] if held else (), allow_empty=True)
    form = CanonicalForm(held, rest)
    ok, problems = is_debord_form(rest)
    if not ok:
        raise InvariantBreach("canonical part is not in normal form: " + "; ".join(problems))
    return form, run.trace


def canonical_form_of_margins(m: MarginMatrix, n_voters: int) -> CanonicalForm:
    """The form that :func:`canonicalize_linear` reaches, computed from margins alone."""
    if n_voters % 2 == 0:
        return CanonicalForm(None, debord(m))
    b0 = alphabetic(m.candidates)
    single = margins(Profile(m.candidates, {HELD_OUT: b0}))
    return CanonicalForm((HELD_OUT, b0), debord(m - single))


# --------------------------------------------------------------------------
# Tie linearization
# --------------------------------------------------------------------------


def linearize_ties(p: Profile) -> tuple[Profile, MoveTrace]:
    """Double once, then break every tie of each voter and its copy oppositely.

    The result is linear with margins exactly twice those of `p`; an already
    linear profile is returned unchanged with an empty trace.
    """
    trace = MoveTrace()
    if classify_domain(p) == Domain.LINEAR:
        return p, trace
    twins = copy_map(p)
    q = double(p)
    trace.record(Move("Double", "homogeneity"), q)
    for v in p.voters:
        for tie in p[v].ties():
            order = tuple(sorted(tie))
            move = Move("TiebreakingCompensation", TC, (v, twins[v]), tie=tie, order=order)
            q = tiebreaking_compensation(q, v, twins[v], tie, order)
            trace.record(move, q)
    return q, trace


# --------------------------------------------------------------------------
# Head-to-head equalization
# --------------------------------------------------------------------------


def _add_pairs(p: Profile, r: Ranking, count: int) -> Profile:
    if count <= 0:
        return p
    fresh = fresh_naturals(p.voters, 2 * count)
    updates = {}
    for k in range(count):
        updates[fresh[2 * k]] = r
        updates[fresh[2 * k + 1]] = r.reverse()
    return p.replace(updates)


def equalize_h2h(p: Profile, p2: Profile) -> tuple[Profile, Profile]:
    """Extend two margin-equal profiles to ones with equal (support, n)."""
    if p.candidates != p2.candidates or margins(p) != margins(p2):
        raise MarginMismatchError("profiles must have equal margin matrices")
    s, s2 = support(p), support(p2)
    cs = sorted(p.candidates)
    q, q2 = p, p2
    for ai, a in enumerate(cs):
        for b in cs[ai + 1:]:
            d = s2[a, b] - s[a, b]
            if d == 0:
                continue
            rest = [c for c in cs if c not in (a, b)]
            sep = make_ranking([{a}, {b}] + ([set(rest)] if rest else []), cs)
            joint = make_ranking([{a, b}] + ([set(rest)] if rest else []), cs)
            if d > 0:
                q, q2 = _add_pairs(q, sep, d), _add_pairs(q2, joint, d)
            else:
                q, q2 = _add_pairs(q, joint, -d), _add_pairs(q2, sep, -d)
    gap = len(q2) - len(q)
    blank = indifferent(cs)
    if gap > 0:
        q = q.replace(dict.fromkeys(fresh_naturals(q.voters, gap), blank))
    elif gap < 0:
        q2 = q2.replace(dict.fromkeys(fresh_naturals(q2.voters, -gap), blank))
    return q, q2


# --------------------------------------------------------------------------
# Margin-equal variants, for invariance pools and property tests
# --------------------------------------------------------------------------


def _opposed_adjacent(p: Profile, rng):
    options = []
    for i in p.voters:
        r = p[i]
        for a, b in zip(r.classes, r.classes[1:]):
            if len(a) == 1 and len(b) == 1:
                x, y = next(iter(a)), next(iter(b))
                options.append((i, x, y))
    rng.shuffle(options)
    for i, x, y in options:
        for j in p.voters:
            if j != i and p[j].position.get(y) is not None and p[j].immediately_above(y, x):
                return i, j, x, y
    return None


def margin_equal_variant(p: Profile, rng: random.Random, linear_only: bool = False,
                         max_voters: int | None = None) -> Profile:
    """A random profile with the same margins, reached by sanctioned moves.

    Moves used: relabelling voters, compensated opposite adjacent switches,
    opposite tie-breaking, and reversal-pair insertion. With `linear_only`
    every intermediate profile stays linear.
    """
    q = p
    domain = Domain.LINEAR if linear_only else classify_domain(p)
    for _ in range(rng.randint(1, 3)):
        choice = rng.randrange(4)
        if choice == 0:
            rankings = [q[v] for v in q.voters]
            rng.shuffle(rankings)
            q = Profile(q.candidates, dict(zip(q.voters, rankings)))
        elif choice == 1:
            hit = _opposed_adjacent(q, rng)
            if hit:
                i, j, x, y = hit
                q = q.replace({i: flip_adjacent(q[i], x, y), j: flip_adjacent(q[j], y, x)})
        elif choice == 2 and not linear_only:
            tied = [(v, t) for v in q.voters for t in q[v].ties()]
            if tied:
                v, tie = rng.choice(tied)
                partners = [w for w in q.voters if w != v and tie in q[w].ties()]
                if partners:
                    w = rng.choice(partners)
                    order = sorted(tie)
                    rng.shuffle(order)
                    q = q.replace({v: break_tie_in(q[v], tie, order),
                                   w: break_tie_in(q[w], tie, order[::-1])})
        else:
            if max_voters is None or len(q) + 2 <= max_voters:
                r = random_ranking(rng, q.candidates, domain)
                if domain == Domain.LOBI and not r.reverse().is_lobi():
                    r = random_ranking(rng, q.candidates, Domain.LINEAR)
                fresh = fresh_naturals(q.voters, 2)
                q = q.replace({fresh[0]: r, fresh[1]: r.reverse()})
    return q
