"""Exception types shared across the package."""


class RelqueryError(Exception):
    pass


class SchemaError(RelqueryError, ValueError):
    """A value, column, or type directive violates the table schema."""


class IngestError(RelqueryError, ValueError):
    """Malformed CSV input: ragged rows, duplicate headers, duplicate keys."""


class FingerprintMismatch(RelqueryError, ValueError):
    """A persisted ensemble or manifest does not match the referenced table."""


class FormatVersionError(RelqueryError, ValueError):
    """A persisted file has an unknown or incompatible version field."""


class BqlError(RelqueryError):
    """Base for query-language errors; carries a source position when known."""

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column

    def __str__(self):
        if self.line is not None:
            return f"{self.message} (line {self.line}, column {self.column})"
        return self.message


class BqlSyntaxError(BqlError):
    pass


class BqlExecutionError(BqlError):
    pass
