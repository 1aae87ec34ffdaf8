# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.

"""Exception hierarchy shared by the algebra package and the command line."""


class ForgeException(Exception):
    """Base class for every error forge reports to a user.

    `exit_code` is the process exit status used by the management commands.
    """

    exit_code = 1
    default_title = "Analysis failed"

    def __init__(self, detail: str | None = None, title: str | None = None):
        super().__init__(detail)
        self.detail = detail
        self.title = title or self.default_title

    @property
    def json_detail(self) -> dict:
        return {
            "title": self.title,
            "detail": self.detail,
            "exit_code": self.exit_code,
        }


class InvalidProblem(ForgeException):
    """The problem is well formed text but cannot be analysed as stated."""

    exit_code = 2
    default_title = "Invalid problem"


class ProblemParseError(InvalidProblem):
    """The problem file (or a command-line value) could not be parsed."""

    default_title = "Parse error"

    def __init__(self, detail: str, *, line: int | None = None):
        if line is not None:
            detail = f"line {line}: {detail}"
        super().__init__(detail)
        self.line = line


class DimensionMismatch(ForgeException):
    """Dimensions, arities or index ranges do not fit together."""

    exit_code = 3
    default_title = "Dimension mismatch"


class OracleMismatch(ForgeException):
    """Two independent computations of the same quantity disagree."""

    exit_code = 4
    default_title = "Internal inconsistency"
