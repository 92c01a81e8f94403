"""Margin-based voting rules: counting, axioms, canonical forms and scans."""

from .core import Domain, Natural, Profile, Ranking, linear
from .margins import MarginMatrix, margins, smith_set, support
from .rules import RULES, all_rules, get_rule

__all__ = [
    "Domain", "MarginMatrix", "Natural", "Profile", "RULES", "Ranking", "all_rules",
    "get_rule", "linear", "margins", "smith_set", "support",
]

__version__ = "0.1.0"
