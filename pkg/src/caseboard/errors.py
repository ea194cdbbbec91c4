"""Exception types shared across the engine.

The service layer maps these onto wire error codes, so every public
operation raises one of the classes below rather than bare ValueError.
"""

from __future__ import annotations


class CaseboardError(Exception):
    """Base class for all engine errors."""

    code = "internal"


class NotFoundError(CaseboardError):
    """A referenced entity, series, session, or card does not exist."""

    code = "not_found"


class InvalidArgumentError(CaseboardError):
    """An argument violates a documented precondition."""

    code = "invalid_argument"


class AlreadyExistsError(CaseboardError):
    """An insert collides with an existing element of the same identity."""

    code = "conflict"


class SchemaError(InvalidArgumentError):
    """A document failed structural validation.

    ``path`` names the offending field, e.g. ``concepts[2].attributes[0].kind``.
    """

    def __init__(self, message: str, path: str = ""):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


class GraphInvalidError(InvalidArgumentError):
    """Serialization refused because the graph fails validation.

    Carries the full ``ValidationReport`` so callers can surface every finding.
    """

    def __init__(self, report):
        self.report = report
        lines = "; ".join(f"{f.element}: {f.message}" for f in report.findings)
        super().__init__(f"graph is invalid: {lines}")
