"""Exception hierarchy shared by all modules.

Every domain error derives from :class:`LogChowError`; the command-line front
end maps these to exit code 1 and a machine-readable error record.
"""

from __future__ import annotations


class LogChowError(Exception):
    """Base class of all domain errors raised by the library."""

    @property
    def code(self) -> str:
        return type(self).__name__

    def to_json(self) -> dict:
        return {"error": self.code, "message": str(self)}


class MissingVariable(LogChowError):
    """A substitution did not provide an image for some variable."""


class NotDivisible(LogChowError):
    """An exact polynomial division left a nonzero remainder."""


class UnknownObject(LogChowError):
    """An object index or identifier does not belong to the cone stack."""


class NotEmbedded(LogChowError):
    """The star of the object does not embed fully faithfully, so the
    star subdivision is undefined."""


class AsymmetricSubdivision(LogChowError):
    """The automorphism orbit of a stellar point meets some cone twice."""


class NotInterior(LogChowError):
    """The stellar point does not lie in the relative interior of its cone."""


class NotSmooth(LogChowError):
    """An operation would create a cone that is not smooth."""


class Unstable(LogChowError):
    """The pair (g, n) or a vertex violates 2g - 2 + n > 0."""


class TypeMismatch(LogChowError):
    """Objects of different types (g, n) were combined."""


class StackMismatch(LogChowError):
    """Piecewise polynomials living on different cone stacks were combined."""


class NotRelDimZero(LogChowError):
    """A pushforward was requested along a map that collapses some cone."""


class HistoryMismatch(LogChowError):
    """Two subdivisions have no common refinement in the supported fragment."""


class DecorationNotTrivial(LogChowError):
    """An operation requiring trivial decorations received a nontrivial one."""


class IncompatiblePP(LogChowError):
    """Per-cone polynomials do not agree under some face map."""


class ParseError(LogChowError):
    """Malformed textual or JSON input."""


class Unsupported(LogChowError):
    """The input is well formed but outside the implemented fragment."""
