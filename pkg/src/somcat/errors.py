"""Exception hierarchy shared by all somcat modules.

Every error carries a short ``category`` token; the CLI prints it as a
single machine-parsable line (``error:<category>: <message>``).
"""


class SomcatError(Exception):
    category = "error"


class DataError(SomcatError):
    """Invalid or inconsistent input data (ingest, schema, alignment)."""

    category = "data"


class ZeroModalityError(DataError):
    """A modality has zero count; the 1/sqrt(count) corrections are singular."""

    category = "zero-modality"

    def __init__(self, modality: str):
        super().__init__(f"modality {modality!r} has zero count")
        self.modality = modality


class DimensionError(SomcatError):
    """Mismatched shapes or out-of-range indices."""

    category = "dimension"


class ConfigError(SomcatError):
    """Invalid parameter values (grid shape, schedules, cut level, ...)."""

    category = "config"


class RenderError(SomcatError):
    category = "render"


class IOErrorCategory(SomcatError):
    """File-level failure surfaced through the CLI."""

    category = "io"
