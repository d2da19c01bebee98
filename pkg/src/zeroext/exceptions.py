"""Exception hierarchy shared by all zeroext modules."""


class ZeroExtError(Exception):
    """Base class for every error raised by this package."""


class InvalidInput(ZeroExtError, ValueError):
    pass


class DisconnectedGraph(InvalidInput):
    pass


class NegativeLength(InvalidInput):
    pass


class UnknownPoint(InvalidInput, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class NotAMetric(InvalidInput):
    pass


class NotBipartite(InvalidInput):
    pass


class NotAnOrbit(InvalidInput):
    pass


class NotApplicable(ZeroExtError):
    """A method was asked to handle a metric outside its class."""


class NotModular(NotApplicable):
    pass


class Modular(NotApplicable):
    pass


class Orientable(NotApplicable):
    pass


class NotMedian(NotApplicable):
    pass


class NotMinimizable(NotApplicable):
    pass


class NotIntractable(NotApplicable):
    pass


class NotOrbitInvariant(ZeroExtError):
    pass


class Infeasible(ZeroExtError):
    pass


class Unbounded(ZeroExtError):
    pass


class BudgetExceeded(ZeroExtError):
    pass


class NoPinPossible(ZeroExtError):
    """Self-reduction found no pin preserving the LP value.

    This means the metric is not minimizable after all; ``instance`` and
    ``point`` describe the counterexample.
    """

    def __init__(self, message, instance=None, point=None):
        super().__init__(message)
        self.instance = instance
        self.point = point


class IterationOverflow(ZeroExtError):
    pass


class HypothesisViolation(ZeroExtError):
    """A structural precondition of the retraction construction failed.

    ``hypothesis`` names the failed condition (e.g. ``"isometric"``).
    """

    def __init__(self, hypothesis, detail=""):
        msg = hypothesis if not detail else f"{hypothesis}: {detail}"
        super().__init__(msg)
        self.hypothesis = hypothesis


class CyclicOddness(HypothesisViolation):
    def __init__(self, detail=""):
        super().__init__("cyclically-even", detail)


class NotCyclicallyEven(InvalidInput):
    pass


class LemmaViolation(ZeroExtError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NoZeroNode(ZeroExtError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NonTermination(ZeroExtError):
    pass


class PropertyViolated(ZeroExtError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ParseError(InvalidInput):
    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f"line {line}" + (f", column {column}" if column is not None else "")
            message = f"{loc}: {message}"
        super().__init__(message)
        self.line = line
        self.column = column
