"""Exception hierarchy shared by the engine, the oracle and the CLI."""


class DDKPError(Exception):
    """Base class for all errors raised by this package."""


class EngineError(DDKPError):
    """Computation could not be carried out inside the supported calculus."""


class NonSummableAtom(EngineError):
    """``Dinv`` was applied to a term with no dependence on ``u``.

    Such a sum has no compactly supported realization; the result would leave
    the space of quasi-local polynomials.
    """


class NotNilpotent(EngineError):
    def __init__(self, cap: int):
        super().__init__(f"ad_K series did not terminate within cap={cap}")
        self.cap = cap


class DepthBlowup(EngineError):
    def __init__(self, index: int, terms: int, ceiling: int):
        super().__init__(
            f"hierarchy member {index} has {terms} terms (ceiling {ceiling})"
        )
        self.index = index
        self.terms = terms
        self.ceiling = ceiling


class BasePointViolation(EngineError):
    """The lattice state's base point is not left of every reachable site."""


class UnknownBuiltin(DDKPError, LookupError):
    pass


class DSLSyntaxError(DDKPError, ValueError):
    def __init__(self, message: str, text: str, pos: int, expected=()):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        self.message = message
        self.line = line
        self.column = col
        self.pos = pos
        self.expected = tuple(sorted(set(expected)))
        detail = f"{message} at line {line}, column {col}"
        if self.expected:
            detail += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(detail)


class SchemaError(DDKPError, ValueError):
    """Malformed JSON document."""


class SchemaVersionError(SchemaError):
    pass
