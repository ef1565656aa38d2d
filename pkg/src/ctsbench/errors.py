"""Exception hierarchy shared across the pipeline.

Every module-specific error derives from :class:`CtsBenchError` so the CLI can
map any pipeline failure to a typed message and exit code 1.
"""


class CtsBenchError(Exception):
    """Base class for all pipeline errors."""
