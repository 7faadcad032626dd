"""Exception hierarchy for the engine.

Every error raised by the package derives from NeuroDbError so callers
(REPL, script runner) can catch one base class and keep the session alive.
"""


class NeuroDbError(Exception):
    """Base class for all engine errors."""


# --- object store ---------------------------------------------------------

class DuplicateType(NeuroDbError):
    pass


class UnknownSupertype(NeuroDbError):
    pass


class CyclicHierarchy(NeuroDbError):
    pass


class UnknownType(NeuroDbError):
    pass


class UnknownFunction(NeuroDbError):
    pass


class UnknownObject(NeuroDbError):
    pass


class TypeMismatch(NeuroDbError):
    pass


class NameCollision(NeuroDbError):
    pass


# --- snapshots ------------------------------------------------------------

class IoError(NeuroDbError):
    pass


class FormatVersionMismatch(NeuroDbError):
    pass


class CorruptSnapshot(NeuroDbError):
    pass


# --- OSQL parsing / evaluation --------------------------------------------

class OsqlSyntaxError(NeuroDbError):
    """Parse failure; carries position and what was expected."""

    def __init__(self, message, line, col):
        super().__init__(f"line {line} col {col}: {message}")
        self.line = line
        self.col = col


class UnknownIdentifier(NeuroDbError):
    pass


class ArityMismatch(NeuroDbError):
    pass


class LengthMismatch(NeuroDbError):
    pass


class IndexOutOfRange(NeuroDbError):
    pass


class RecursiveFunctionCall(NeuroDbError):
    """User-defined functions may not call themselves, directly or not."""


# --- network structure and dynamics ---------------------------------------

class CrossNetConnection(NeuroDbError):
    pass


class CyclicContainment(NeuroDbError):
    pass


class ContainmentConflict(NeuroDbError):
    """A unit may belong to at most one containment parent."""


class UnsetWeight(NeuroDbError):
    pass


class MissingTargets(NeuroDbError):
    pass


class MissingLearnRate(NeuroDbError):
    pass


class UnboundData(NeuroDbError):
    pass


class RowCountMismatch(NeuroDbError):
    pass


class InvalidOrder(NeuroDbError):
    """Order values of input/output elements must be a 1..k permutation."""


# --- environment operators --------------------------------------------------

class NonNumericProjection(NeuroDbError):
    pass


# --- paradigms ---------------------------------------------------------------

class AlreadyInitialized(NeuroDbError):
    pass


class UnknownLayer(NeuroDbError):
    pass


class LayerNotEmpty(NeuroDbError):
    pass


# --- CSV import ---------------------------------------------------------------

class HeaderMismatch(NeuroDbError):
    pass


class CsvParseError(NeuroDbError):
    def __init__(self, message, row):
        super().__init__(f"row {row}: {message}")
        self.row = row
