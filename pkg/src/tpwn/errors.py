"""Exception types raised across the package."""

from __future__ import annotations


class TPWNError(Exception):
    """Base class for all errors raised by this package."""


class NetDefinitionError(TPWNError, ValueError):
    """The net description is structurally malformed (bad ids, weights, times)."""


class NotEnabled(TPWNError):
    def __init__(self, transition: str, marking=None):
        self.transition = transition
        self.marking = marking
        detail = f" at {sorted(marking)}" if marking is not None else ""
        super().__init__(f"transition {transition!r} is not enabled{detail}")


class NotFirable(NotEnabled):
    """A transition sequence stops being firable at ``position``."""

    def __init__(self, transition: str, position: int, marking=None):
        super().__init__(transition, marking)
        self.position = position
        self.args = (f"sequence not firable at position {position}: {self.args[0]}",)


class UnsafeFiring(TPWNError):
    def __init__(self, transition: str, place: str):
        self.transition = transition
        self.place = place
        super().__init__(f"firing {transition!r} puts a second token on {place!r}")


class Unsafe1(TPWNError):
    """The net is not 1-safe; ``witness`` is a firing sequence exhibiting it."""

    def __init__(self, witness: list[str], place: str):
        self.witness = list(witness)
        self.place = place
        super().__init__(
            f"net is not 1-safe: firing {' '.join(witness) or '(empty)'} "
            f"puts a second token on {place!r}"
        )


class StateExplosion(TPWNError):
    def __init__(self, what: str, cap: int):
        self.cap = cap
        super().__init__(f"{what} exceeded the cap of {cap} states")


class NotConfusionFree(TPWNError):
    def __init__(self, marking, t: str, u: str):
        self.marking = marking
        self.t = t
        self.u = u
        super().__init__(
            f"net is not confusion-free: at {sorted(marking)} firing {t!r} "
            f"changes the conflict set of concurrent {u!r}"
        )


class NoEnabledTransition(TPWNError):
    pass


class Deadlock(TPWNError):
    def __init__(self, marking):
        self.marking = marking
        super().__init__(f"non-final marking {sorted(marking)} enables no transition")


class Singular(TPWNError):
    pass


class NonTermination(TPWNError):
    pass


class InvalidPert(TPWNError, ValueError):
    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("invalid PERT network: " + "; ".join(self.violations))


class NonDyadic(TPWNError, ValueError):
    pass


class TooManyEdges(TPWNError):
    pass


class FormatError(TPWNError, ValueError):
    """A JSON document could not be parsed or does not describe a valid object."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)
