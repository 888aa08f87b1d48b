"""Exception hierarchy shared by every ordern module."""


class OrdernError(Exception):
    """Base class for all library errors."""

    kind = "Error"


# exact algebra

class NotNormalized(OrdernError, ValueError):
    kind = "NotNormalized"


class UnboundVariable(OrdernError, KeyError):
    kind = "UnboundVariable"

    def __str__(self):
        return Exception.__str__(self)


class InvalidVariable(OrdernError, ValueError):
    kind = "InvalidVariable"


# parsing / evaluation

class ParseError(OrdernError, ValueError):
    kind = "ParseError"

    def __init__(self, message, offset=0, expected=()):
        self.offset = offset
        self.expected = tuple(sorted(expected))
        detail = f"{message} at offset {offset}"
        if self.expected:
            detail += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(detail)


class UnknownFunction(ParseError):
    kind = "UnknownFunction"

    def __init__(self, name, offset=0):
        self.name = name
        super().__init__(f"unknown function {name!r}", offset)


class DomainError(OrdernError, ArithmeticError):
    kind = "DomainError"

    def __init__(self, message, node=None):
        self.node = node
        super().__init__(message)


class JetDivisionByZero(DomainError, ZeroDivisionError):
    kind = "JetDivisionByZero"


# methods

class UnknownMethod(OrdernError, ValueError):
    kind = "UnknownMethod"


class UnsupportedMethod(OrdernError, ValueError):
    kind = "UnsupportedMethod"


class DerivativeNearZero(OrdernError, ArithmeticError):
    kind = "DerivativeNearZero"


class DegenerateNodes(OrdernError, ArithmeticError):
    kind = "DegenerateNodes"


class OrbitEscape(OrdernError, ArithmeticError):
    kind = "OrbitEscape"


# harness

class InsufficientSamples(OrdernError, ValueError):
    kind = "InsufficientSamples"


class EmptyMethods(OrdernError, ValueError):
    kind = "EmptyMethods"
