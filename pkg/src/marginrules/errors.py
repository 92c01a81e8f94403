"""Exception hierarchy shared by every module."""


class VotingError(Exception):
    """Base class for all errors raised by this package."""


class OverlapOrGapError(VotingError, ValueError):
    pass


class NotAdjacentError(VotingError, ValueError):
    pass


class NotATieError(VotingError, ValueError):
    pass


class VoterCollisionError(VotingError, ValueError):
    pass


class CandidateMismatchError(VotingError, ValueError):
    pass


class EmptyRestrictionError(VotingError, ValueError):
    pass


class ScopeMismatchError(VotingError, ValueError):
    pass


class OddMarginError(VotingError, ValueError):
    pass


class MarginMismatchError(VotingError, ValueError):
    pass


class NotReversalPairError(VotingError, ValueError):
    pass


class SelfReversalError(VotingError, ValueError):
    pass


class PreconditionError(VotingError, ValueError):
    pass


class DomainMismatchError(VotingError, ValueError):
    """An axiom was requested for a rule whose domain cannot express it."""


class OutOfDomainError(VotingError):
    """A profile lies outside the domain on which a rule is defined.

    Axiom checkers treat this as "the scenario is not in dom(F)" and skip it.
    """


class DomainError(OutOfDomainError, ValueError):
    pass


class TieAmbiguous(OutOfDomainError):
    """Instant runoff hit a tie for fewest first-place votes.

    Axiom checkers read this as an output value (see VotingRule.outcome),
    not as a skipped scenario.
    """


class ParseError(VotingError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DuplicateCandidateError(ParseError):
    pass


class ToLosnTieError(VotingError, ValueError):
    pass


class InvariantBreach(VotingError, AssertionError):
    """Internal consistency check failed; indicates a bug, not bad input."""
