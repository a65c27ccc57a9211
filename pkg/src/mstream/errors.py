"""Exception hierarchy shared by the engine, the language front end and the CLI."""


class MStreamError(Exception):
    """Base class for every error raised by this package."""


class SupportOverflow(MStreamError):
    """An exact distribution grew past the configured support cap."""

    def __init__(self, limit, attempted):
        self.limit = limit
        self.attempted = attempted
        super().__init__(
            f"support overflow: distribution needs more than {limit} entries "
            f"(reached {attempted}); raise the cap with MSTREAM_SUPPORT_CAP"
        )


class SignatureError(MStreamError):
    """Kernels or streams were wired together with incompatible types."""


class ScheduleError(SignatureError):
    """Per-step type schedules of two streams do not line up."""


class DomainError(MStreamError):
    """Exhaustive enumeration was requested over a type with no finite domain."""


class StochasticKernelError(MStreamError):
    """A deterministic-only operation met a stochastic kernel."""


class ParseError(MStreamError):
    def __init__(self, message, line, col):
        self.line = line
        self.col = col
        super().__init__(f"{line}:{col}: {message}")


class TypeCheckError(MStreamError):
    """Raised by desugaring and type checking.

    ``kind`` is one of ``unbound``, ``delay``, ``type``, ``linearity``,
    ``recursion``, ``generator`` or ``feedback``.
    """

    def __init__(self, kind, message, pos=None):
        self.kind = kind
        self.pos = pos
        where = f"{pos[0]}:{pos[1]}: " if pos else ""
        super().__init__(f"{where}{kind} error: {message}")
