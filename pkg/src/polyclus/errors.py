"""Shared exception types."""


class PolyclusError(Exception):
    """Base class for library errors."""


class NonMonomial(PolyclusError):
    """Operation requires a single-word expression."""


class NotInvertible(PolyclusError):
    """A required inverse does not exist in the evaluation ring."""


class CentralityViolated(PolyclusError):
    """A norm evaluated to a non-central ring element."""


class Inadmissible(PolyclusError):
    """Requested mutation/flip is not admissible; carries diagnostics."""

    def __init__(self, message, details=None):
        super().__init__(message)
        self.details = details or {}


class MixedTwoCycle(Inadmissible):
    """Mutation would create an exchange-matrix entry with components of
    opposite sign (only meaningful on surfaces that support it)."""


class NotTwoTiles(Inadmissible):
    """Mutation requested at a node with an empty side that is not flagged
    self-symmetric."""


class InvalidDecoration(PolyclusError):
    """Angle indicators of a decorated polygon fail to intersect pairwise, or
    the coloring violates admissibility."""


class NotSTCompatible(PolyclusError):
    """Quiver/tiling conversion requested on data outside the tiling
    correspondence (small or frozen nodes, non-tile side structure, ...)."""


class NotDigonConfiguration(PolyclusError):
    """The arc is not interior to a once-punctured digon configuration."""


class NotDisk(PolyclusError):
    """Operation requires a tiling of a disk (tree-shaped dual graph)."""


class UnknownSeed(PolyclusError):
    """Requested catalog seed name is not registered."""


class BudgetExceeded(PolyclusError):
    """Search budget ran out; carries the partial report."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
