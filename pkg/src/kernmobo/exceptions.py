"""Exception hierarchy.

Two families matter to callers (and to the CLI's exit codes):
:class:`DataError` for bad inputs and :class:`NumericError` for linear
algebra that cannot be completed.
"""


class KernmoboError(Exception):
    """Base class for every error raised by this package."""


class DataError(KernmoboError, ValueError):
    """Invalid, malformed or inconsistent input data."""


class NumericError(KernmoboError, ArithmeticError):
    """A numerical procedure failed."""


# -- generic input errors ----------------------------------------------------

class EmptyInput(DataError):
    pass


class LengthMismatch(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class NegativeInput(DataError):
    pass


class NonPositiveVariance(DataError):
    pass


# -- SMILES ------------------------------------------------------------------

class SmilesError(DataError):
    """Base class for SMILES syntax errors.

    Attributes:
        smiles: the offending string.
        position: 0-based character offset where the problem was detected,
            or ``None`` when it only shows up at end of input.
    """

    def __init__(self, message, smiles=None, position=None):
        if smiles is not None:
            where = f" at position {position}" if position is not None else ""
            message = f"{message}{where} in {smiles!r}"
        super().__init__(message)
        self.smiles = smiles
        self.position = position


class EmptySmiles(SmilesError, EmptyInput):
    pass


class UnbalancedParenthesis(SmilesError):
    pass


class UnclosedRing(SmilesError):
    pass


class UnknownSymbol(SmilesError):
    pass


class DanglingBond(SmilesError):
    pass


class DisconnectedFragments(SmilesError):
    pass


class RingBondConflict(SmilesError):
    pass


class SmilesSyntaxError(SmilesError):
    pass


# -- fingerprints --------------------------------------------------------------

class AlreadyFolded(DataError):
    pass


# -- Pareto / hypervolume ----------------------------------------------------------

class ReferenceNotDominated(DataError):
    pass


class TooManyPoints(DataError):
    pass


class EmptyFront(DataError):
    pass


# -- acquisition / BO ----------------------------------------------------------------

class NoEligibleCandidates(DataError):
    pass


class PoolExhausted(DataError):
    pass


# -- IO ------------------------------------------------------------------------

class MissingColumn(DataError):
    pass


class DuplicateSmiles(DataError):
    pass


class EmptyFile(DataError):
    pass


class ParseError(DataError):
    """Unparseable record in a data file.

    Attributes:
        line: 1-based line number of the bad record.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigError(DataError):
    pass


# -- numerics ------------------------------------------------------------------

class NotPositiveDefinite(NumericError):
    pass
