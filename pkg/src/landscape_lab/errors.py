"""Exception hierarchy shared by every analysis module."""


class LandscapeError(Exception):
    """Base class for analysis failures (CLI exit code 1)."""


class MissingRow(LandscapeError):
    """The kernel has no row for the requested cost level."""


class RangeMismatch(LandscapeError):
    """A distribution and kernel were built over different cost ranges."""


class BadTarget(LandscapeError):
    """Target cost is above the current cost."""


class UnreachableTarget(LandscapeError):
    """Blind search can never reach the target (zero mass at or below it)."""


class DeadEnd(LandscapeError):
    """A reachable level has no improving neighbour under an infinite neighbourhood."""


class Divergent(LandscapeError):
    """Local blind descent cannot make expected progress (restart weight >= 1)."""


class TooLarge(LandscapeError):
    """Exhaustive enumeration would exceed the configured budget."""
