"""
Exceptions raised by middlebox_placer. Every error carries the exit code the command line front end uses for it, so
scripts can tell an infeasible instance from a broken input file.
"""


class PlacementError(Exception):
    """
    Base class of all errors raised by the package.

    :cvar int exit_code: process exit code used by the command line interface
    """
    exit_code = 1

    def __init__(self, message, **details):  # type: (str, ...) -> None
        super(PlacementError, self).__init__(message)
        self.message = message
        self.details = details

    def to_dict(self):
        """
        Machine readable form, written by the command line interface on failure.

        :return: dict with keys **error**, **message**, **details** and **exit_code**
        """
        return {
            "error": type(self).__name__,
            "message": self.message,
            "details": self.details,
            "exit_code": self.exit_code,
        }


class DomainError(PlacementError, ValueError):
    pass


class GeoUnavailable(PlacementError):
    pass


class InfeasiblePair(PlacementError):
    exit_code = 2

    def __init__(self, pair_index, pair, message=None):
        super(InfeasiblePair, self).__init__(
            message or "No candidate location satisfies the route constraint for pair {}".format(pair),
            pair_index=pair_index,
            pair=list(pair)
        )


class Infeasible(PlacementError):
    exit_code = 2


class Stalled(Infeasible):
    pass


class AlreadyActive(PlacementError):
    pass


class InvalidPath(PlacementError):
    pass


class RoundingFailed(PlacementError):
    pass


class InvalidAssignment(PlacementError):
    pass


class TooLarge(PlacementError):
    exit_code = 4


class ParseError(PlacementError):
    exit_code = 3


class MissingEndpoint(ParseError):
    pass


class NegativeDemand(ParseError):
    pass
