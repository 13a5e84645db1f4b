"""Shared exception types.

Contract violations on user-supplied data raise :class:`ToolkitError`
subclasses so the CLI can map them to exit code 2. Programming errors
(bad arguments from calling code) raise plain ``ValueError``.
"""


class ToolkitError(Exception):
    """Base class for input-contract violations."""


class IngestError(ToolkitError):
    """Malformed or inconsistent input file."""


class UndefinedKappaError(ToolkitError):
    """Chance agreement is 1, so kappa has no value.

    The observed/expected agreement components are still available on the
    exception (`p_bar`, `p_e`, `per_item`).
    """

    def __init__(self, p_bar: float, p_e: float, per_item: tuple):
        super().__init__(
            "kappa is undefined: expected chance agreement is 1 "
            "(all rating mass in a single category)"
        )
        self.p_bar = p_bar
        self.p_e = p_e
        self.per_item = per_item
