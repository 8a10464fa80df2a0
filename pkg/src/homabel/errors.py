"""Exception hierarchy shared by all homabel modules."""


class HomabelError(Exception):
    """Base class for all errors raised by this package."""


class StructureError(HomabelError):
    """Incompatible carriers, variants, degrees or malformed algebraic data."""


class TruncationError(HomabelError):
    """A Taylor coefficient beyond the certified truncation arity was required."""


class InversionError(HomabelError):
    """A linear or coalgebra morphism that must be invertible is not."""


class PreconditionError(HomabelError):
    """An operation was called on data that fails its stated precondition."""


class InternalFaultError(HomabelError):
    """A state that is provably impossible was reached; indicates a sign or
    bookkeeping bug inside this package, not bad user input."""


class DocumentError(HomabelError):
    """A document file failed to parse or referenced undeclared entities."""

    def __init__(self, message, *, line=None, column=None, entity=None):
        super().__init__(message)
        self.line = line
        self.column = column
        self.entity = entity
