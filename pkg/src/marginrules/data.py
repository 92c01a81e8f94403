"""Ranked-ballot files and the two empirical scans.

Files follow the PrefLib soi/toi layout. Both the current commented-header
form (``# ALTERNATIVE NAME 1: a``) and the legacy numeric header are
accepted. A ballot line is ``count: i,j,{k,l}`` where braces mark a tie.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable

from .core import Natural, Profile, Ranking, make_ranking, restrict
from .errors import DuplicateCandidateError, ParseError, TieAmbiguous, ToLosnTieError
from .margins import condorcet_winner
from .noncomp import PrefRelation, RelDomain, RelProfile
from .rules import first_place_counts, irv_rounds, minimax_margins, minimax_winning_votes


@dataclass
class RawElection:
    name: str
    candidate_names: dict  # index -> name
    ballot_groups: list  # (count, tuple of frozensets of indices)

    def __post_init__(self):
        for count, groups in self.ballot_groups:
            if count <= 0:
                raise ParseError(f"ballot counts must be positive, got {count}")
            seen: set = set()
            for g in groups:
                if seen & g:
                    raise DuplicateCandidateError(f"candidate {sorted(seen & g)[0]} listed twice")
                seen |= g
                unknown = g - set(self.candidate_names)
                if unknown:
                    raise ParseError(f"unknown candidate index {sorted(unknown)[0]}")

    @property
    def voter_count(self) -> int:
        return sum(c for c, _ in self.ballot_groups)

    def has_ties(self) -> bool:
        return any(len(g) > 1 for _, groups in self.ballot_groups for g in groups)

    def _key(self):
        return (dict(self.candidate_names), [(c, tuple(groups)) for c, groups in self.ballot_groups])

    def same_content(self, other: RawElection) -> bool:
        return self._key() == other._key()


# --------------------------------------------------------------------------
# Parsing
# --------------------------------------------------------------------------


def _parse_groups(body: str, line_no: int) -> tuple:
    groups = []
    seen: set = set()
    token = ""
    brace: list | None = None

    def take(tok):
        tok = tok.strip()
        if not tok:
            return None
        try:
            idx = int(tok)
        except ValueError:
            raise ParseError(f"bad candidate index {tok!r}", line_no) from None
        if idx in seen:
            raise DuplicateCandidateError(f"candidate {idx} listed twice", line_no)
        seen.add(idx)
        return idx

    for ch in body + ",":
        if ch == "{":
            if brace is not None or token.strip():
                raise ParseError("unexpected '{'", line_no)
            brace = []
        elif ch == "}":
            if brace is None:
                raise ParseError("unmatched '}'", line_no)
            idx = take(token)
            if idx is not None:
                brace.append(idx)
            if not brace:
                raise ParseError("empty tie group", line_no)
            groups.append(frozenset(brace))
            brace, token = None, ""
        elif ch == ",":
            if brace is not None:
                idx = take(token)
                if idx is None:
                    raise ParseError("empty entry inside braces", line_no)
                brace.append(idx)
            else:
                idx = take(token)
                if idx is not None:
                    groups.append(frozenset([idx]))
            token = ""
        else:
            token += ch
    if brace is not None:
        raise ParseError("unclosed '{'", line_no)
    return tuple(groups)


def _parse_count(text: str, line_no: int) -> int:
    try:
        count = int(text.strip())
    except ValueError:
        raise ParseError(f"bad ballot count {text.strip()!r}", line_no) from None
    if count <= 0:
        raise ParseError(f"ballot count must be positive, got {count}", line_no)
    return count


def _check_indices(groups, names, line_no):
    for g in groups:
        for idx in g:
            if idx not in names:
                raise ParseError(f"candidate index {idx} out of range", line_no)


def parse_election(text: str, name: str = "election") -> RawElection:
    lines = text.splitlines()
    if any(line.startswith("#") for line in lines):
        return _parse_commented(lines, name)
    return _parse_legacy(lines, name)


def _parse_commented(lines, name) -> RawElection:
    names: dict = {}
    ballots = []
    declared = None
    for no, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            key = key.strip().upper()
            if key.startswith("ALTERNATIVE NAME"):
                try:
                    idx = int(key.split()[-1])
                except ValueError:
                    raise ParseError(f"bad alternative header {line!r}", no) from None
                value = value.strip()
                if idx in names:
                    raise DuplicateCandidateError(f"alternative {idx} declared twice", no)
                if value in names.values():
                    raise DuplicateCandidateError(f"candidate name {value!r} used twice", no)
                names[idx] = value
            elif key == "NUMBER ALTERNATIVES":
                declared = int(value)
            elif key == "TITLE" and value.strip() and name == "election":
                name = value.strip()
            continue
        count_text, sep, body = line.partition(":")
        if not sep:
            raise ParseError("ballot lines look like 'count: i,j,{k,l}'", no)
        count = _parse_count(count_text, no)
        groups = _parse_groups(body, no)
        _check_indices(groups, names, no)
        ballots.append((count, groups))
    if declared is not None and declared != len(names):
        raise ParseError(f"header declares {declared} alternatives, names given for {len(names)}")
    if not names:
        raise ParseError("no candidates declared")
    return RawElection(name, names, ballots)


def _parse_legacy(lines, name) -> RawElection:
    rows = [(no, line.strip()) for no, line in enumerate(lines, 1) if line.strip()]
    if not rows:
        raise ParseError("empty file")
    no, first = rows[0]
    try:
        m = int(first)
    except ValueError:
        raise ParseError("expected the number of candidates", no) from None
    names: dict = {}
    for no, line in rows[1:m + 1]:
        idx_text, sep, cname = line.partition(",")
        if not sep:
            raise ParseError("expected 'index,name'", no)
        idx = int(idx_text)
        cname = cname.strip()
        if idx in names or cname in names.values():
            raise DuplicateCandidateError(f"candidate {cname!r} declared twice", no)
        names[idx] = cname
    if len(names) != m:
        raise ParseError(f"expected {m} candidate lines")
    ballots = []
    for no, line in rows[m + 2:]:
        if ":" in line:
            count_text, _, body = line.partition(":")
        else:
            count_text, _, body = line.partition(",")
        count = _parse_count(count_text, no)
        groups = _parse_groups(body, no)
        _check_indices(groups, names, no)
        ballots.append((count, groups))
    return RawElection(name, names, ballots)


def _format_groups(groups) -> str:
    parts = []
    for g in groups:
        items = ",".join(str(i) for i in sorted(g))
        parts.append(items if len(g) == 1 else "{" + items + "}")
    return ",".join(parts)


def format_election(raw: RawElection) -> str:
    """Serialize in the commented-header layout; parse_election inverts it."""
    kind = "toi" if raw.has_ties() else "soi"
    out = [
        f"# TITLE: {raw.name}",
        f"# DATA TYPE: {kind}",
        f"# NUMBER ALTERNATIVES: {len(raw.candidate_names)}",
    ]
    for idx in sorted(raw.candidate_names):
        out.append(f"# ALTERNATIVE NAME {idx}: {raw.candidate_names[idx]}")
    out.append(f"# NUMBER VOTERS: {raw.voter_count}")
    out.append(f"# NUMBER UNIQUE ORDERS: {len(raw.ballot_groups)}")
    for count, groups in raw.ballot_groups:
        out.append(f"{count}: {_format_groups(groups)}")
    return "\n".join(out) + "\n"


def parse_csv(text: str, name: str = "election") -> RawElection:
    """One ballot per row, e.g. ``a>b~c>d``; an optional count may precede it."""
    rows = []
    for no, row in enumerate(csv.reader(io.StringIO(text)), 1):
        cells = [c.strip() for c in row if c.strip()]
        if not cells:
            continue
        if len(cells) == 2 and cells[0].isdigit():
            count, body = _parse_count(cells[0], no), cells[1]
        elif len(cells) == 1:
            count, body = 1, cells[0]
        else:
            raise ParseError("expected 'ranking' or 'count,ranking'", no)
        classes = [[c.strip() for c in part.split("~") if c.strip()] for part in body.split(">")]
        if any(not cls for cls in classes):
            raise ParseError("empty indifference class", no)
        rows.append((no, count, classes))
    names = sorted({c for _, _, classes in rows for cls in classes for c in cls})
    index = {c: i + 1 for i, c in enumerate(names)}
    ballots = []
    for no, count, classes in rows:
        seen: set = set()
        groups = []
        for cls in classes:
            g = frozenset(index[c] for c in cls)
            if seen & g or len(g) != len(cls):
                raise DuplicateCandidateError("candidate listed twice", no)
            seen |= g
            groups.append(g)
        ballots.append((count, tuple(groups)))
    return RawElection(name, {i: c for c, i in index.items()}, ballots)


def load_election(path) -> RawElection:
    from pathlib import Path

    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".csv":
        return parse_csv(text, path.stem)
    return parse_election(text, path.stem)


# --------------------------------------------------------------------------
# Interpretation
# --------------------------------------------------------------------------


def to_lobi(raw: RawElection) -> Profile:
    """Unlisted candidates form one tie below every listed candidate."""
    names = raw.candidate_names
    scope = frozenset(names.values())
    ballots = {}
    v = 0
    cache: dict = {}
    for count, groups in raw.ballot_groups:
        if groups not in cache:
            classes = [{names[i] for i in g} for g in groups]
            rest = scope.difference(*classes) if classes else scope
            if rest:
                classes.append(set(rest))
            cache[groups] = make_ranking(classes, scope)
        for _ in range(count):
            ballots[Natural(v)] = cache[groups]
            v += 1
    return Profile(scope, ballots)


def _relation(raw: RawElection, groups) -> PrefRelation:
    names = raw.candidate_names
    scope = frozenset(names.values())
    if not groups:
        return PrefRelation.blank(scope)
    classes = [{names[i] for i in g} for g in groups]
    listed = set().union(*classes)
    return PrefRelation.from_ranking(make_ranking(classes, listed), scope)


def to_losn(raw: RawElection) -> RelProfile:
    """Unlisted candidates become noncomparable to everyone."""
    if raw.has_ties():
        raise ToLosnTieError(f"{raw.name} contains tied groups; read it as WOSN instead")
    return to_rel_profile(raw)


def to_rel_profile(raw: RawElection) -> RelProfile:
    """LOSN reading when the file has no ties, WOSN reading otherwise."""
    scope = frozenset(raw.candidate_names.values())
    ballots = {}
    v = 0
    for count, groups in raw.ballot_groups:
        r = _relation(raw, groups)
        for _ in range(count):
            ballots[Natural(v)] = r
            v += 1
    return RelProfile(scope, ballots)


def rel_domain_of(raw: RawElection) -> RelDomain:
    return RelDomain.WOSN if raw.has_ties() else RelDomain.LOSN


def absolute_majority_winner(p: Profile):
    """Candidate with more than half of all first places, counting singleton tops only."""
    tally = first_place_counts(p.counts, p.candidates)
    for c in sorted(tally):
        if 2 * tally[c] > len(p):
            return c
    return None


def top_three_restriction(p: Profile) -> Profile:
    """Restrict to the IRV winner and the last two candidates eliminated."""
    eliminated, winner = irv_rounds(p.candidates, p.counts)
    return restrict(p, {winner, *eliminated[-2:]})


# --------------------------------------------------------------------------
# Scans
# --------------------------------------------------------------------------


@dataclass
class ScanReport:
    kind: str
    dataset: str
    profiles_total: int = 0
    conditioned: int = 0  # no Condorcet winner / no absolute majority winner
    hits: int = 0
    secondary_hits: int = 0  # PCV hits for the IRV scan
    voters_total: int = 0
    details: list = field(default_factory=list)
    skipped: list = field(default_factory=list)
    budget: int | None = None

    @property
    def frequency(self) -> float | None:
        return self.hits / self.conditioned if self.conditioned else None

    @property
    def secondary_frequency(self) -> float | None:
        return self.secondary_hits / self.conditioned if self.conditioned else None

    @property
    def average_voters(self) -> float | None:
        return self.voters_total / self.conditioned if self.conditioned else None

    def to_json(self) -> dict:
        out = {
            "kind": self.kind,
            "dataset": self.dataset,
            "profiles_total": self.profiles_total,
            "conditioned": self.conditioned,
            "hits": self.hits,
            "frequency": self.frequency,
            "details": self.details,
            "skipped": self.skipped,
        }
        if self.kind == "minimax":
            out["average_voters"] = self.average_voters
        else:
            out["pcv_hits"] = self.secondary_hits
            out["pcv_frequency"] = self.secondary_frequency
            out["budget"] = self.budget
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=1) + "\n"

    def to_table(self) -> str:
        def fmt(x):
            return "-" if x is None else f"{x:.2f}"

        if self.kind == "minimax":
            header = ["Dataset", "# Profiles", "# No CW", "Avg voters", "Freq different winners"]
            row = [self.dataset, str(self.profiles_total), str(self.conditioned),
                   fmt(self.average_voters), fmt(self.frequency)]
        else:
            header = ["Dataset", "# Relevant", "# Relevant no AMW", "PEV freq >=", "PCV freq >="]
            row = [self.dataset, str(self.profiles_total), str(self.conditioned),
                   fmt(self.frequency), fmt(self.secondary_frequency)]
        widths = [max(len(h), len(r)) for h, r in zip(header, row)]
        line = lambda cells: "  ".join(  # noqa: E731
            c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(cells, widths))
        )
        return line(header) + "\n" + line(row) + "\n"


def _parsed(items) -> tuple[list, list]:
    elections, errors = [], []
    for item in items:
        if isinstance(item, RawElection):
            elections.append(item)
            continue
        name, text = item
        try:
            elections.append(parse_election(text, name))
        except ParseError as exc:
            errors.append({"name": name, "reason": str(exc)})
    return elections, errors


def _map(func, items, workers: int):
    if workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(func, items))
    return [func(x) for x in items]


def _minimax_one(raw: RawElection) -> dict:
    p = to_lobi(raw)
    cw = condorcet_winner(p)
    out = {"name": raw.name, "voters": len(p), "condorcet_winner": cw}
    if cw is None:
        a, b = minimax_margins(p), minimax_winning_votes(p)
        out.update(margins_winners=sorted(a), wv_winners=sorted(b), different=a != b)
    return out


def scan_minimax_divergence(elections: Iterable, dataset: str = "dataset", workers: int = 1) -> ScanReport:
    """How often the two Minimax variants disagree when there is no Condorcet winner.

    `elections` holds RawElection objects or (name, text) pairs; parse
    failures are listed under `skipped` rather than raised.
    """
    parsed, errors = _parsed(elections)
    report = ScanReport("minimax", dataset, skipped=errors)
    for d in _map(_minimax_one, parsed, workers):
        report.profiles_total += 1
        report.details.append(d)
        if d["condorcet_winner"] is None:
            report.conditioned += 1
            report.voters_total += d["voters"]
            report.hits += d["different"]
    return report


def _irv_winner(counts) -> object | None:
    cands = next(iter(counts)).scope
    try:
        return irv_rounds(cands, counts)[1]
    except TieAmbiguous:
        return None


def _shifted(counts, moves) -> dict:
    """Counts after moving `s` voters of ballot r to ballot r2, for each (r, r2, s)."""
    out = dict(counts)
    for r, r2, s in moves:
        out[r] -= s
        if not out[r]:
            del out[r]
        out[r2] = out.get(r2, 0) + s
    return out


def _flip(r: Ranking, x, y) -> Ranking:
    classes = list(r.classes)
    i = r.position[x]
    classes[i], classes[i + 1] = classes[i + 1], classes[i]
    return Ranking(tuple(classes))


def find_pev(counts, budget: int):
    """First coalitional Preferential Equality witness, by the documented heuristic.

    Coalitions are taken inside single ballot-type groups, from two distinct
    groups, of sizes 1..budget.
    """
    types = sorted(counts, key=str)
    cands = sorted(types[0].scope)
    for s in range(1, budget + 1):
        for x in cands:
            for y in cands:
                if x == y:
                    continue
                groups = [r for r in types if r.immediately_above(x, y) and counts[r] >= s]
                for ai, a in enumerate(groups):
                    wa = _irv_winner(_shifted(counts, [(a, _flip(a, x, y), s)]))
                    if wa is None:
                        continue
                    for b in groups[ai + 1:]:
                        wb = _irv_winner(_shifted(counts, [(b, _flip(b, x, y), s)]))
                        if wb is not None and wb != wa:
                            return {"pair": [x, y], "size": s, "I": str(a), "J": str(b),
                                    "outcomes": [wa, wb]}
    return None


def find_pcv(counts, budget: int):
    """First coalitional Preferential Compensation witness (opposite switches)."""
    types = sorted(counts, key=str)
    cands = sorted(types[0].scope)
    base = _irv_winner(counts)
    if base is None:
        return None
    for s in range(1, budget + 1):
        for ai, x in enumerate(cands):
            for y in cands[ai + 1:]:
                xy = [r for r in types if r.immediately_above(x, y) and counts[r] >= s]
                yx = [r for r in types if r.immediately_above(y, x) and counts[r] >= s]
                for a in xy:
                    for b in yx:
                        moved = _shifted(counts, [(a, _flip(a, x, y), s), (b, _flip(b, y, x), s)])
                        w = _irv_winner(moved)
                        if w is not None and w != base:
                            return {"pair": [x, y], "size": s, "I": str(a), "J": str(b),
                                    "outcomes": [base, w]}
    return None


def _irv_one(args) -> dict:
    raw, budget = args
    out: dict = {"name": raw.name}
    if raw.has_ties():
        return {**out, "relevant": False, "reason": "ballots contain ties"}
    p = to_lobi(raw)
    try:
        eliminated, winner = irv_rounds(p.candidates, p.counts)
    except TieAmbiguous as exc:
        return {**out, "relevant": False, "reason": f"elimination tie: {exc}"}
    q = restrict(p, {winner, *eliminated[-2:]}) if len(p.candidates) > 3 else p
    amw = absolute_majority_winner(q)
    out.update(relevant=True, voters=len(q), winner=winner, top_three=sorted(q.candidates), amw=amw)
    if amw is not None:
        return out
    pev = find_pev(q.counts, budget)
    pcv = find_pcv(q.counts, budget)
    out.update(pev=pev, pcv=pcv)
    return out


def scan_irv_violations(elections: Iterable, budget: int = 3, dataset: str = "dataset",
                        workers: int = 1) -> ScanReport:
    """Lower bounds on how often IRV shows PE / PC violations without a majority winner."""
    parsed, errors = _parsed(elections)
    report = ScanReport("irv", dataset, skipped=list(errors), budget=budget)
    for d in _map(_irv_one, [(raw, budget) for raw in parsed], workers):
        if not d["relevant"]:
            report.skipped.append({"name": d["name"], "reason": d["reason"]})
            continue
        report.profiles_total += 1
        report.details.append(d)
        if d["amw"] is None:
            report.conditioned += 1
            report.voters_total += d["voters"]
            report.hits += d["pev"] is not None
            report.secondary_hits += d["pcv"] is not None
    return report


__all__ = [
    "RawElection", "ScanReport", "absolute_majority_winner", "find_pcv", "find_pev",
    "format_election", "load_election", "parse_csv", "parse_election", "scan_irv_violations",
    "scan_minimax_divergence", "to_lobi", "to_losn", "to_rel_profile", "top_three_restriction",
]

