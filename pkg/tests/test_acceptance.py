"""One test per acceptance criterion, with the stated tolerances and time limits."""

import itertools
import random
import time
from collections import Counter

from marginrules.axioms import AXIOMS, check_axiom, classify_invariance, coalition_switch, invariance_pool, standard_pool
from marginrules.canonical import (
    audit_trace,
    canonicalize_linear,
    debord,
    equalize_h2h,
    margin_equal_variant,
)
from marginrules.core import Domain, Profile, Ranking
from marginrules.data import scan_irv_violations, scan_minimax_divergence
from marginrules.fixtures import FIXTURE_FILES, fixture_text, load_fixture_profile
from marginrules.margins import MarginMatrix, h2h_info, margin_graph, margins, winning_votes_graph
from marginrules.noncomp import RelDomain, equalize_rel, random_rel_profile, rel_margin_equal_variant, rel_margins, triple_counts
from marginrules.rules import RULES, get_rule
from marginrules.sampling import random_profile

from conftest import prof


class Clock:
    def __init__(self, limit):
        self.limit = limit

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        if exc[0] is None:
            assert self.elapsed < self.limit, f"took {self.elapsed:.2f}s, limit {self.limit}s"


def _edges(graph):
    return {(x, y): w for x, y, w in graph.edges}


def _tally_margins(p):
    """Independent margin count: class positions of each distinct ballot, times its multiplicity."""
    cs = sorted(p.candidates)
    m = {(x, y): 0 for x in cs for y in cs if x != y}
    for ballot, count in Counter(p.ballots.values()).items():
        rank = {c: depth for depth, cls in enumerate(ballot.classes) for c in cls}
        for x, y in m:
            if rank[x] < rank[y]:
                m[x, y] += count
            elif rank[x] > rank[y]:
                m[x, y] -= count
    return m


def _multiset(p):
    return Counter(str(p[v]) for v in p.voters)


def test_fig1_margins_and_minimax_winners(fig1):
    with Clock(1.0):
        p = load_fixture_profile("fig1")
        assert _edges(margin_graph(p)) == {("a", "b"): 3, ("b", "c"): 1, ("c", "a"): 2}
        assert _edges(winning_votes_graph(p)) == {("a", "b"): 6, ("b", "c"): 5, ("c", "a"): 4}
        assert RULES["minimax-margins"](p) == {"c"}
        assert RULES["minimax-wv"](p) == {"a"}


def test_city_fixtures_graphs_and_winners():
    with Clock(1.0):
        govan = load_fixture_profile("govan")
        mpls = load_fixture_profile("minneapolis")
        assert sorted(_edges(margin_graph(govan)).values()) == [21, 86, 602]
        assert sorted(_edges(margin_graph(mpls)).values()) == [15, 73, 225]
        assert _edges(winning_votes_graph(govan)) == {
            ("Dornan", "Flanagan"): 2992, ("Flanagan", "Hunter"): 3654, ("Hunter", "Dornan"): 3578}
        assert sorted(_edges(winning_votes_graph(mpls)).values()) == [3708, 4054, 4324]
        assert (RULES["minimax-margins"](govan), RULES["minimax-wv"](govan)) == ({"Dornan"}, {"Flanagan"})
        assert (RULES["minimax-margins"](mpls), RULES["minimax-wv"](mpls)) == ({"Arab"}, {"Worlobah"})


def test_intro_irv_coalition_switches(intro):
    irv = RULES["irv"]
    dem = [v for v in intro.voters if str(intro[v]) == "D>R>M"]
    rep = [v for v in intro.voters if str(intro[v]) == "R>M>D"][:len(dem)]
    assert len(dem) == 3 * len(intro) // 100
    assert irv(intro) == {"R"}
    assert irv(coalition_switch(intro, dem, "R", "M")) == {"R"}
    assert irv(coalition_switch(intro, rep, "R", "M")) == {"M"}
    report = check_axiom(irv, "preferential-equality", source=[intro], budget=500)
    assert any({frozenset(o) for o in w.outputs} == {frozenset("R"), frozenset("M")}
               and len(w.scenario.moves[0].voters) == 3 and set(w.scenario.moves[0].pair) == {"R", "M"}
               for w in report.witnesses)


EX211_TABLE = {
    "b>a>c>d": 2, "d>c>b>a": 2, "b>d>a>c": 1, "c>a>b>d": 3, "d>b>c>a": 2, "c>b>a>d": 1,
    "d>a>c>b": 1, "d>a>b>c": 2, "c>b>d>a": 2, "d>c>a>b": 1, "b>a>d>c": 1,
}


def test_ex211_pair_shares_audited_canonical_form(ex211p, ex211q):
    with Clock(1.0):
        fp, tp = canonicalize_linear(ex211p)
        fq, tq = canonicalize_linear(ex211q)
        assert fp == fq
        assert fp.held_out is None
        assert fp.debord_part.ballots == debord(margins(ex211p)).ballots
        assert _multiset(fp.debord_part) == EX211_TABLE and len(fp.debord_part) == 18
        # audit_trace recounts margins after every step and raises on a mismatch
        assert audit_trace(ex211p, tp) == fp.to_profile()
        assert audit_trace(ex211q, tq) == fq.to_profile()


def test_debord_realizes_every_small_even_matrix():
    checked = 0
    with Clock(30.0):
        for k in (2, 3, 4):
            cs = "abcd"[:k]
            pairs = list(itertools.combinations(cs, 2))
            for values in itertools.product(range(-6, 7, 2), repeat=len(pairs)):
                m = dict(zip(pairs, values))
                d = debord(MarginMatrix.from_upper(cs, m))
                if not any(values):
                    assert d.is_empty()
                else:
                    got = _tally_margins(d)
                    assert all(got[x, y] == v for (x, y), v in m.items())
                checked += 1
    assert checked == 7 + 7 ** 3 + 7 ** 6


def test_canonical_form_is_margin_determined():
    rng = random.Random(2012)
    with Clock(60.0):
        for _ in range(500):
            k, n = rng.randint(2, 4), rng.randint(1, 8)
            p = random_profile(rng, "abcd"[:k], n)
            q = margin_equal_variant(p, rng, linear_only=True, max_voters=8)
            assert margins(q) == margins(p) and len(q) <= 8
            assert canonicalize_linear(p)[0] == canonicalize_linear(q)[0]
        unequal = 0
        while unequal < 500:
            k = rng.randint(2, 4)
            p = random_profile(rng, "abcd"[:k], rng.randint(1, 8))
            q = random_profile(rng, "abcd"[:k], rng.randint(1, 8))
            if margins(p) == margins(q):
                continue
            assert canonicalize_linear(p)[0] != canonicalize_linear(q)[0]
            unequal += 1


def test_equalization_properties():
    rng = random.Random(45)
    with Clock(60.0):
        for _ in range(500):
            k = rng.randint(2, 4)
            domain = rng.choice([Domain.LINEAR, Domain.LOBI, Domain.SWO])
            p = random_profile(rng, "abcd"[:k], rng.randint(1, 6), domain)
            p2 = margin_equal_variant(p, rng)
            q, q2 = equalize_h2h(p, p2)
            assert h2h_info(q) == h2h_info(q2)
            assert margins(q) == margins(p) == margins(q2)
        for _ in range(500):
            k = rng.randint(2, 4)
            domain = rng.choice([RelDomain.LOSN, RelDomain.WOSN])
            rp = random_rel_profile(rng, "abcd"[:k], rng.randint(1, 5), domain)
            rp2 = rel_margin_equal_variant(rp, rng)
            q, q2 = equalize_rel(rp, rp2, domain)
            assert triple_counts(q) == triple_counts(q2)
            assert rel_margins(q) == rel_margins(rp) == rel_margins(q2)


def test_fig1_opposite_tiebreaks_split_minimax_variants(fig1):
    tied = [v for v in fig1.voters if str(fig1[v]) == "b>a~c"][:2]
    q = fig1.replace({tied[0]: Ranking.parse("b>a>c", "abc"), tied[1]: Ranking.parse("b>c>a", "abc")})
    assert margins(q) == margins(fig1)
    assert RULES["minimax-wv"](fig1) == {"a"} and RULES["minimax-wv"](q) == {"a", "c"}
    assert RULES["minimax-margins"](fig1) == RULES["minimax-margins"](q) == {"c"}


def _position_scores(p):
    return {x: sum(sum(1 for y in p.candidates if p[v].above(x, y)) for v in p.voters) for x in p.candidates}


def test_borda_swo_nonlinear_reversal_witness():
    base = prof("b>a>c")
    after = prof("b>a>c", "a>b~c", "b~c>a")
    assert margins(after) == margins(base)
    for p, expected in ((base, {"b"}), (after, {"a", "b"})):
        scores = _position_scores(p)
        assert {x for x, s in scores.items() if s == max(scores.values())} == expected
        assert RULES["borda-swo"](p) == expected
    nnr = check_axiom(RULES["borda-swo"], "nonlinear-neutral-reversal", source=[base], budget=100)
    assert {frozenset(map(frozenset, w.outputs)) for w in nnr.witnesses} >= {frozenset([frozenset("b"), frozenset("ab")])}
    pool = [base] + standard_pool(seed=0)
    nr = check_axiom(RULES["borda-swo"], "neutral-reversal", source=pool, budget=2000)
    assert nr.tried > 0 and nr.passed


def test_invariance_classification():
    with Clock(120.0):
        for name in ("minimax-margins", "copeland"):
            for axiom in sorted(AXIOMS):
                report = check_axiom(RULES[name], axiom, budget=1000, seed=0)
                assert report.passed, (name, axiom)
        for name in ("irv", "plurality"):
            for axiom in ("neutral-reversal", "preferential-equality"):
                assert check_axiom(RULES[name], axiom, budget=1000, seed=0).witnesses, (name, axiom)
        for axiom in ("neutral-reversal", "neutral-indifference"):
            assert check_axiom(RULES["pareto"], axiom, budget=1000, seed=0).witnesses, axiom
        pn = get_rule("positive-negative")
        pe = check_axiom(pn, "preferential-equality", source=[prof("x>y>z>w", "z>x>y>w")], budget=500)
        assert {frozenset(map(frozenset, w.outputs)) for w in pe.witnesses} == {
            frozenset([frozenset("yz"), frozenset("xz")])}
        for axiom in ("neutral-reversal", "nonlinear-neutral-reversal", "neutral-indifference"):
            assert check_axiom(pn, axiom, budget=1000, seed=0).passed, axiom
        report = classify_invariance(get_rule("even-odd"), invariance_pool(seed=0, bases=40))
        assert not report.holds("margin-based")
        pair = report.to_json()["levels"]["margin-based"]["counterexamples"][0]
        before, after = (Profile.from_json(obj) for obj in pair["profiles"])
        assert margins(before) == margins(after) and pair["outputs"][0] != pair["outputs"][1]


def test_scan_substitute_on_fixtures():
    items = [(name, fixture_text(name)) for name in sorted(FIXTURE_FILES)]
    mm = scan_minimax_divergence(items)
    hits = {d["name"] for d in mm.details if d.get("different")}
    assert hits == {"fig1", "govan", "minneapolis"}
    assert (mm.conditioned, mm.hits) == (5, 3)
    fig1 = next(d for d in mm.details if d["name"] == "fig1")
    assert (fig1["margins_winners"], fig1["wv_winners"]) == (["c"], ["a"])
    ir = scan_irv_violations(items, budget=3)
    intro = next(d for d in ir.details if d["name"] == "intro")
    assert intro["pev"]["pair"] == ["R", "M"] and intro["pev"]["size"] == 3
    assert ir.hits == 1
    for workers in (1, 2, 4):
        assert scan_minimax_divergence(items, workers=workers).dumps() == mm.dumps()
        assert scan_irv_violations(items, budget=3, workers=workers).dumps() == ir.dumps()
