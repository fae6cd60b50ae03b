"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`TvEffError`
and carries a stable ``code`` (the class name) that the CLI reports in its
machine-readable error JSON.
"""

from __future__ import annotations


class TvEffError(ValueError):
    """Base class for all package errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


# series-core
class InsufficientData(TvEffError):
    pass


class GapTooLong(TvEffError):
    pass


class HasGaps(TvEffError):
    pass


class NoOverlap(TvEffError):
    pass


class NonMonotonePeriods(TvEffError):
    pass


class MalformedInput(TvEffError):
    pass


# unit-root
class TooShort(TvEffError):
    pass


class NonFinite(TvEffError):
    pass


# var-engine
class RankDeficient(TvEffError):
    pass


class DegenerateInput(RankDeficient):
    """Zero-variance input; a special case of a singular regressor matrix."""


class SingularScoreCovariance(TvEffError):
    pass


class Unstable(TvEffError):
    pass


# tvvar-engine
class NonPositiveWeight(TvEffError):
    pass


class UnstablePeriod(TvEffError):
    def __init__(self, periods, zeta=None):
        self.periods = list(periods)
        self.zeta = zeta
        shown = ", ".join(str(t) for t in self.periods[:10])
        more = "" if len(self.periods) <= 10 else f" (+{len(self.periods) - 10} more)"
        super().__init__(f"unstable coefficient path at periods {shown}{more}")


class BandFailure(TvEffError):
    pass


# event-study
class WindowOutOfRange(TvEffError):
    pass


class IndexMismatch(TvEffError):
    pass


# synth-oracle
class UnstableSpec(TvEffError):
    pass


class GapAtBoundary(TvEffError):
    pass
