"""Exception hierarchy shared by all zsym modules."""


class ZsymError(Exception):
    """Base class for every error raised by zsym."""


class ExprSyntaxError(ZsymError):
    def __init__(self, message, offset, text=None):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at offset {offset}")


class UnknownVariableError(ZsymError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"unknown variable {name!r}")


class DomainError(ZsymError):
    """An elementary function or division left its domain at a sample point."""

    def __init__(self, message, subexpr=None, point=None):
        self.subexpr = subexpr
        self.point = point
        detail = message
        if subexpr is not None:
            detail += f" in {subexpr}"
        if point is not None:
            detail += f" at {tuple(float(x) for x in point)}"
        super().__init__(detail)


class JetOrderError(ZsymError):
    """Raised when a derivative is requested from a jet of order 0."""


class MetricError(ZsymError):
    """Invalid metric specification or a non-SPD metric at a point."""


class ManifestError(ZsymError):
    def __init__(self, field, reason):
        self.field = field
        self.reason = reason
        super().__init__(f"{field}: {reason}")
