"""Exception hierarchy shared by every layer of the library."""


class QueryError(Exception):
    """Base class for all errors raised by liftq."""


class TypingError(QueryError):
    def __init__(self, path, expected, found):
        self.path = path
        self.expected = expected
        self.found = found
        super().__init__(f"{path}: expected {expected}, found {found}")


class ArityError(QueryError):
    pass


class SchemaError(QueryError):
    pass


class DuplicateSchema(SchemaError):
    pass


class DuplicateField(SchemaError):
    pass


class UnknownReferencedSchema(SchemaError):
    pass


class ValueTagMismatch(QueryError):
    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


class MissingField(QueryError):
    def __init__(self, path, field):
        self.path = path
        self.field = field
        super().__init__(f"{path}: missing field {field!r}")


class UnknownCollection(QueryError):
    pass


class ParseError(QueryError):
    def __init__(self, line, reason, col=None):
        self.line = line
        self.col = col
        self.reason = reason
        where = f"line {line}" if col is None else f"line {line}, col {col}"
        super().__init__(f"{where}: {reason}")


class EvaluationError(QueryError):
    """Raised while interpreting a well-typed tree."""


class UnboundVariable(EvaluationError):
    def __init__(self, var_id):
        self.var_id = var_id
        super().__init__(f"unbound variable {var_id}")


class DivisionByZero(EvaluationError):
    pass


class IterationLimitExceeded(QueryError):
    pass
