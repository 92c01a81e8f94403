import itertools

import pytest
from hypothesis import strategies as st

from marginrules.core import Domain, Natural, Profile, Ranking
from marginrules.fixtures import load_fixture_profile

NAMES = "abcd"


@st.composite
def rankings(draw, scope, domain=Domain.SWO):
    items = draw(st.permutations(sorted(scope)))
    if domain == Domain.LINEAR:
        return Ranking(tuple(frozenset([c]) for c in items))
    if domain == Domain.LOBI:
        cut = draw(st.integers(1, len(items)))
        return Ranking(tuple(frozenset([c]) for c in items[:cut - 1]) + (frozenset(items[cut - 1:]),))
    cuts = draw(st.lists(st.booleans(), min_size=len(items) - 1, max_size=len(items) - 1))
    classes, cur = [], [items[0]]
    for c, cut in zip(items[1:], cuts):
        if cut:
            classes.append(frozenset(cur))
            cur = [c]
        else:
            cur.append(c)
    classes.append(frozenset(cur))
    return Ranking(tuple(classes))


@st.composite
def profiles(draw, domain=Domain.SWO, min_candidates=2, max_candidates=4, min_voters=1, max_voters=6):
    k = draw(st.integers(min_candidates, max_candidates))
    scope = NAMES[:k]
    n = draw(st.integers(min_voters, max_voters))
    ballots = {Natural(i): draw(rankings(scope, domain)) for i in range(n)}
    return Profile(scope, ballots)


def prof(*texts):
    return Profile.from_rankings(texts)


@pytest.fixture(scope="session")
def fig1():
    return load_fixture_profile("fig1")


@pytest.fixture(scope="session")
def govan():
    return load_fixture_profile("govan")


@pytest.fixture(scope="session")
def minneapolis():
    return load_fixture_profile("minneapolis")


@pytest.fixture(scope="session")
def intro():
    return load_fixture_profile("intro")


@pytest.fixture(scope="session")
def ex211p():
    return load_fixture_profile("ex211p")


@pytest.fixture(scope="session")
def ex211q():
    return load_fixture_profile("ex211q")


# -- acceptance summary -------------------------------------------------------

_ACCEPTANCE: dict = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _ACCEPTANCE[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, outcome in _ACCEPTANCE.items():
        name = nodeid.split("::")[-1]
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")


def brute_support(p):
    """Per-voter pairwise tally straight from class positions."""
    out = {}
    for x, y in itertools.permutations(sorted(p.candidates), 2):
        n = 0
        for v in p.voters:
            classes = p[v].classes
            ix = next(i for i, c in enumerate(classes) if x in c)
            iy = next(i for i, c in enumerate(classes) if y in c)
            n += ix < iy
        out[(x, y)] = n
    return out
