"""Exception hierarchy.

Every error carries a short ``code`` so Monte Carlo runs can record a
per-replication failure reason instead of aborting.
"""


class ScreenlabError(Exception):
    code = "error"


class DegenerateAssignment(ScreenlabError):
    code = "degenerate_assignment"


class InvalidRetention(ScreenlabError, ValueError):
    code = "invalid_retention"


class InvalidConfig(ScreenlabError, ValueError):
    code = "invalid_config"


class MissingTypes(ScreenlabError):
    code = "missing_types"


class MissingStatedTypes(ScreenlabError):
    code = "missing_stated_types"


class EmptyScreen(ScreenlabError):
    code = "empty_screen"


class EmptyArm(ScreenlabError):
    code = "empty_arm"


class WeakFirstStage(ScreenlabError):
    code = "weak_first_stage"


class AllCompliers(ScreenlabError):
    code = "all_compliers"


class DegenerateBootstrap(ScreenlabError):
    code = "degenerate_bootstrap"


class AllDiscarded(ScreenlabError):
    code = "all_discarded"


class SchemaError(ScreenlabError, ValueError):
    """Dataset CSV does not conform to the expected layout."""

    code = "schema_error"

    def __init__(self, message, row=None, column=None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)
        self.row = row
        self.column = column


class ConfigError(ScreenlabError, ValueError):
    code = "config_error"
