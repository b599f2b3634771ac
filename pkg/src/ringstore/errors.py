"""Exception hierarchy.

Every error carries a ``category`` (the class name) so the CLI can print a
single machine-parsable line.
"""

from __future__ import annotations


class RingStoreError(Exception):
    @property
    def category(self) -> str:
        return type(self).__name__


# algebra
class NotPrime(RingStoreError, ValueError):
    pass


class ZeroInverse(RingStoreError, ZeroDivisionError):
    pass


class DimensionMismatch(RingStoreError, ValueError):
    pass


class FieldMismatch(RingStoreError, ValueError):
    pass


class Singular(RingStoreError, ValueError):
    pass


class WidthTooLarge(RingStoreError, ValueError):
    pass


# construct
class BadArguments(RingStoreError, ValueError):
    pass


class ShapeError(RingStoreError, ValueError):
    pass


class FieldTooSmall(RingStoreError, ValueError):
    pass


class InstanceTooLarge(RingStoreError, ValueError):
    pass


class NonTermination(RingStoreError, RuntimeError):
    pass


# scheme
class NotFullRank(RingStoreError, ValueError):
    pass


class PartitionMismatch(RingStoreError, ValueError):
    pass


class TooFewNodes(RingStoreError, ValueError):
    pass


# protocol
class NotOrdss(RingStoreError, ValueError):
    pass


class BadNodeIndex(RingStoreError, IndexError):
    pass


class RingTooShort(RingStoreError, ValueError):
    pass


class PlanSchemeMismatch(RingStoreError, ValueError):
    pass


class SingularBasis(Singular):
    pass


class SingularFinalSystem(Singular):
    pass


class ContextMismatch(RingStoreError, ValueError):
    pass


# simnet
class PathBlockedByFailure(RingStoreError, RuntimeError):
    pass


class BadUserIndex(BadNodeIndex):
    pass


class AnotherNodeFailed(RingStoreError, RuntimeError):
    pass


# cli / file format
class ParseError(RingStoreError, ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class InvariantViolation(RingStoreError, ValueError):
    def __init__(self, condition: str, message: str):
        self.condition = condition
        super().__init__(f"{condition}: {message}")
