"""Bundled example elections.

Six small files ship with the package: a three-voter-type profile with ties
(``fig1``), two real-election Smith-set restrictions (``govan`` and
``minneapolis``), the three-candidate IRV example (``intro``) and two
margin-equal four-candidate linear profiles (``ex211p``, ``ex211q``).
"""

from __future__ import annotations

from importlib import resources

from .core import Profile

FIXTURE_FILES = {
    "fig1": "fig1.toi",
    "govan": "govan.toi",
    "minneapolis": "minneapolis.soi",
    "intro": "intro.soi",
    "ex211p": "ex211p.soi",
    "ex211q": "ex211q.soi",
}

SMALL = ("fig1", "intro", "ex211p", "ex211q")


def fixture_text(name: str) -> str:
    try:
        filename = FIXTURE_FILES[name]
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(FIXTURE_FILES)}") from None
    return resources.files("marginrules").joinpath("fixtures", filename).read_text(encoding="utf-8")


def fixture_path(name: str):
    return resources.files("marginrules").joinpath("fixtures", FIXTURE_FILES[name])


def load_fixture_election(name: str):
    from .data import parse_election

    return parse_election(fixture_text(name), name)


def load_fixture_profile(name: str) -> Profile:
    from .data import to_lobi

    return to_lobi(load_fixture_election(name))


def load_fixture_profiles(small_only: bool = False) -> dict[str, Profile]:
    names = SMALL if small_only else tuple(FIXTURE_FILES)
    return {n: load_fixture_profile(n) for n in names}
