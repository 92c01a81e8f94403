"""Seeded random rankings and profiles for scenario pools and property tests."""

from __future__ import annotations

import random

from .core import Domain, Natural, Profile, Ranking

CANDIDATE_NAMES = "abcdefgh"


def candidates(k: int) -> tuple:
    return tuple(CANDIDATE_NAMES[:k])


def random_ranking(rng: random.Random, scope, domain: Domain = Domain.LINEAR) -> Ranking:
    items = sorted(scope)
    rng.shuffle(items)
    if domain == Domain.LINEAR or len(items) < 2:
        return Ranking(tuple(frozenset([c]) for c in items))
    if domain == Domain.LOBI:
        cut = rng.randint(1, len(items))
        head = [frozenset([c]) for c in items[:cut - 1]]
        return Ranking(tuple(head + [frozenset(items[cut - 1:])]))
    classes = []
    current = [items[0]]
    for c in items[1:]:
        if rng.random() < 0.4:
            current.append(c)
        else:
            classes.append(frozenset(current))
            current = [c]
    classes.append(frozenset(current))
    return Ranking(tuple(classes))


def random_profile(rng: random.Random, scope, n_voters: int, domain: Domain = Domain.LINEAR) -> Profile:
    return Profile(
        scope,
        {Natural(i): random_ranking(rng, scope, domain) for i in range(n_voters)},
    )


def random_profiles(seed: int, count: int, domain: Domain = Domain.LINEAR,
                    max_candidates: int = 4, max_voters: int = 6):
    """A reproducible list of small profiles with 2..max_candidates candidates."""
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        k = rng.randint(2, max_candidates)
        n = rng.randint(1, max_voters)
        out.append(random_profile(rng, candidates(k), n, domain))
    return out
