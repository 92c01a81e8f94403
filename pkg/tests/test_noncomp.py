import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from marginrules.core import Domain, Natural
from marginrules.errors import (
    DomainError,
    MarginMismatchError,
    ParseError,
    PreconditionError,
    SelfReversalError,
)
from marginrules.margins import margins, support
from marginrules.noncomp import (
    REL_AXIOMS,
    REL_RULES,
    PrefRelation,
    RelDomain,
    RelProfile,
    add_blank_voter,
    add_self_reversing_voter,
    all_relations,
    check_rel_axiom,
    classify_rel,
    comparable_compensation,
    double_rel,
    equalize_rel,
    random_rel_profile,
    rel_margin_equal_variant,
    rel_margins,
    rel_scenarios,
    self_reversal_replay,
    side_class,
    triple_counts,
)

from conftest import profiles

SCOPE = "abcd"


def rel(text, scope=SCOPE):
    return PrefRelation.parse(text, scope)


@st.composite
def arbitrary_relations(draw, scope=SCOPE):
    pairs = [(x, y) for x in scope for y in scope]
    return PrefRelation(frozenset(scope), frozenset(draw(st.sets(st.sampled_from(pairs)))))


@given(arbitrary_relations())
def test_pin_partition(r):
    P, I, N = r.P(), r.I(), r.N()
    distinct = {(x, y) for x in SCOPE for y in SCOPE if x != y}
    P_inv = {(y, x) for x, y in P}
    assert not (P & P_inv) and not (P & I) and not (P & N) and not (I & N)
    assert P | P_inv | I | N == distinct
    assert I == {(y, x) for x, y in I} and N == {(y, x) for x, y in N}


def test_side_class_examples():
    assert side_class(rel("a>b | unranked: c,d")) == {"c", "d"}
    assert side_class(rel("a>b>c>d")) == frozenset()
    assert side_class(PrefRelation.blank(SCOPE)) == set(SCOPE)
    # a lone ranked candidate carries no comparisons at all
    assert side_class(rel("a | unranked: b,c,d")) == set(SCOPE)


def test_classify_rel_examples():
    assert classify_rel(rel("a>b>c | unranked: d")) == RelDomain.LOSN
    assert classify_rel(rel("a~b>c | unranked: d")) == RelDomain.WOSN
    cyclic = PrefRelation(frozenset("abc"), frozenset({("a", "a"), ("b", "b"), ("c", "c"),
                                                       ("a", "b"), ("b", "c"), ("c", "a")}))
    assert classify_rel(cyclic) == RelDomain.OTHER


def test_parse_and_print():
    r = rel("a~b>c | unranked: d")
    assert str(r) == "a~b>c | unranked: d"
    assert PrefRelation.parse(str(r), SCOPE) == r
    with pytest.raises(ParseError):
        rel("a>b | unranked: c")
    with pytest.raises(ParseError):
        rel("a>b | skipped: c,d")


def test_triple_count_examples():
    rp = RelProfile("ab", {Natural(0): rel("a>b", "ab"), Natural(1): PrefRelation.blank("ab")})
    t = triple_counts(rp)
    assert (t.P[("a", "b")], t.I[("a", "b")], t.N[("a", "b")], t.n) == (1, 0, 1, 2)
    rp = RelProfile(SCOPE, {Natural(0): PrefRelation.tie_pair("a", "b", SCOPE)})
    t = triple_counts(rp)
    assert t.I[("a", "b")] == 1 and not any(t.P.values())
    assert sum(t.I.values()) == 2  # (a,b) and (b,a)


@given(profiles(domain=Domain.LINEAR))
def test_linear_relations_match_support(p):
    t = triple_counts(RelProfile.from_profile(p))
    assert not any(t.N.values())
    assert t.P == dict(support(p).counts)


@given(profiles(domain=Domain.LOBI))
def test_lobi_embedding_preserves_counts(p):
    rp = RelProfile.from_profile(p)
    t = triple_counts(rp)
    assert all(side_class(rp[v]) == frozenset() for v in rp.voters)
    assert rp.domain() <= RelDomain.WOSN
    assert t.P == dict(support(p).counts)
    assert not any(t.N.values())
    assert rel_margins(rp) == margins(p)
    for (x, y), c in t.I.items():
        assert c == sum(1 for v in p.voters if not p[v].above(x, y) and not p[v].above(y, x))


@given(st.data())
def test_count_identity(data):
    rp = random_rel_profile(random.Random(data.draw(st.integers(0, 10 ** 6))), SCOPE,
                            data.draw(st.integers(1, 6)))
    t = triple_counts(rp)
    for x, y in itertools.permutations(SCOPE, 2):
        assert t.P[(x, y)] + t.P[(y, x)] + t.I[(x, y)] + t.N[(x, y)] == t.n
        assert t.I[(x, y)] == t.I[(y, x)] and t.N[(x, y)] == t.N[(y, x)]


# -- moves -------------------------------------------------------------------------


def test_comparable_compensation_example():
    r = rel("a>b | unranked: c,d")
    rp = RelProfile(SCOPE, {Natural(0): r, Natural(1): r})
    q = comparable_compensation(rp, Natural(0), Natural(1), ("c", "d"))
    assert str(q[Natural(0)]) == "c>d>a>b"
    assert str(q[Natural(1)]) == "a>b>d>c"
    assert rel_margins(q) == rel_margins(rp)
    other = RelProfile(SCOPE, {Natural(0): r, Natural(1): rel("b>a | unranked: c,d")})
    with pytest.raises(PreconditionError):
        comparable_compensation(other, Natural(0), Natural(1), ("c", "d"))
    full = RelProfile(SCOPE, {Natural(0): rel("a>b>c>d"), Natural(1): rel("a>b>c>d")})
    with pytest.raises(PreconditionError):
        comparable_compensation(full, Natural(0), Natural(1), ())


def test_self_reversing_voters():
    rp = RelProfile(SCOPE, {Natural(0): rel("a>b>c>d")})
    q = add_self_reversing_voter(rp, PrefRelation.tie_pair("a", "b", SCOPE))
    assert len(q) == 2 and rel_margins(q) == rel_margins(rp)
    with pytest.raises(SelfReversalError):
        add_self_reversing_voter(rp, rel("a>b | unranked: c,d"))
    blank = PrefRelation.blank(SCOPE)
    assert blank.is_self_reversing()
    blank_added = add_blank_voter(rp)
    assert blank_added in {after for _, after in rel_scenarios("neutral-self-reversal", rp)}


def test_self_reversal_replay():
    rp = RelProfile(SCOPE, {Natural(0): rel("a>b>c | unranked: d"), Natural(1): rel("d>c | unranked: a,b")})
    r = PrefRelation.tie_pair("c", "d", SCOPE)
    stages = self_reversal_replay(rp, r)
    assert stages[0] == rp and stages[3] == add_self_reversing_voter(rp, r)
    m = rel_margins(rp)
    assert [rel_margins(s) for s in stages] == [m, m.scaled(2), m.scaled(2), m]
    assert double_rel(stages[3]).counts == stages[2].counts


# -- equalization ---------------------------------------------------------------------


def test_equalize_examples():
    a_b = rel("a>b", "ab")
    blank = PrefRelation.blank("ab")
    q, q2 = equalize_rel(RelProfile("ab", {Natural(0): a_b}),
                         RelProfile("ab", {Natural(0): a_b, Natural(1): blank}), RelDomain.LOSN)
    assert q.counts == q2.counts
    assert q.counts[blank] == 1

    rp = RelProfile.from_texts(["a>b", "b>a"], "ab")
    rp2 = RelProfile.from_texts(["a~b", "a~b"], "ab")
    q, q2 = equalize_rel(rp, rp2, RelDomain.WOSN)
    tie = PrefRelation.tie_pair("a", "b", "ab")
    assert q.counts[tie] == 2
    assert q2.counts[a_b] == 1 and q2.counts[rel("b>a", "ab")] == 1
    assert triple_counts(q) == triple_counts(q2)

    with pytest.raises(MarginMismatchError):
        equalize_rel(RelProfile.from_texts(["a>b"], "ab"), RelProfile.from_texts(["b>a"], "ab"), RelDomain.LOSN)
    with pytest.raises(DomainError):
        equalize_rel(rp, rp2, RelDomain.LOSN)


@pytest.mark.parametrize("domain", [RelDomain.LOSN, RelDomain.WOSN])
@given(seed=st.integers(0, 10 ** 6), k=st.integers(2, 4), n=st.integers(1, 5))
def test_equalize_properties(domain, seed, k, n):
    rng = random.Random(seed)
    scope = SCOPE[:k]
    rp = random_rel_profile(rng, scope, n, domain)
    rp2 = rel_margin_equal_variant(rp, rng)
    assert rp2.domain() <= domain
    q, q2 = equalize_rel(rp, rp2, domain)
    assert triple_counts(q) == triple_counts(q2)
    assert rel_margins(q) == rel_margins(rp) == rel_margins(q2)


def test_enumeration_counts():
    # ranked parts of size 0 and 1 both give the blank ballot; then 3 pairs and 1 triple
    losn = list(all_relations("abc", RelDomain.LOSN))
    assert len(losn) == 1 + 3 * 2 + 6
    wosn = list(all_relations("abc", RelDomain.WOSN))
    assert len(wosn) == 1 + 3 * 3 + 13
    assert len(set(wosn)) == len(wosn)


# -- rules and relation axioms ----------------------------------------------------------


@pytest.fixture(scope="module")
def rel_pool():
    rng = random.Random(7)
    pool = [random_rel_profile(rng, SCOPE[:rng.randint(2, 4)], rng.randint(1, 5)) for _ in range(40)]
    r = rel("a>b | unranked: c,d")
    pool.append(RelProfile(SCOPE, {Natural(0): r, Natural(1): r, Natural(2): rel("c>a>b>d")}))
    return pool


@pytest.mark.parametrize("axiom", REL_AXIOMS)
@pytest.mark.parametrize("rule", ["minimax-margins", "copeland"])
def test_margin_rules_pass_relation_axioms(rule, axiom, rel_pool):
    report = check_rel_axiom(REL_RULES[rule], axiom, rel_pool, budget=2000)
    assert report.tried > 0 and report.passed


def test_pareto_fails_blankness(rel_pool):
    report = check_rel_axiom(REL_RULES["pareto"], "neutral-blankness", rel_pool)
    assert not report.passed


def test_wv_passes_self_reversal(rel_pool):
    assert check_rel_axiom(REL_RULES["minimax-wv"], "neutral-self-reversal", rel_pool, budget=3000).passed


@pytest.mark.parametrize("name", sorted(REL_RULES))
def test_self_reversal_via_replay(name, rel_pool):
    """Every self-reversal witness shows up as a homogeneity or reversal-pair witness in the replay."""
    rule = REL_RULES[name]
    cs_pool = [rp for rp in rel_pool if len(rp.candidates) == 4]
    for rp in cs_pool:
        for _, after in rel_scenarios("neutral-self-reversal", rp):
            added = after[after.voters[-1]]
            stages = self_reversal_replay(rp, added)
            out = [rule(s) for s in stages]
            if out[0] != out[3]:
                homog = out[0] != out[1] or out[3] != rule(double_rel(stages[3]))
                reversal = out[1] != out[2]
                assert homog or reversal


def test_relation_rules_reject_other():
    cyclic = PrefRelation(frozenset("abc"), frozenset({("a", "a"), ("b", "b"), ("c", "c"),
                                                       ("a", "b"), ("b", "c"), ("c", "a")}))
    with pytest.raises(DomainError):
        REL_RULES["copeland"](RelProfile("abc", {Natural(0): cyclic}))


def test_json_shape():
    rp = RelProfile.from_texts(["a>b | unranked: c"], "abc")
    obj = rp.to_json()
    assert obj["candidates"] == ["a", "b", "c"]
