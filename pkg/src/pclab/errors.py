"""Exception hierarchy shared by all pclab modules."""


class PclabError(Exception):
    """Base class for every error raised by pclab."""


# field construction
class NotPrime(PclabError, ValueError):
    pass


class TooLarge(PclabError, ValueError):
    pass


class FactorizationFailed(PclabError, RuntimeError):
    pass


class NotADivisor(PclabError, ValueError):
    pass


class OutOfRange(PclabError, ValueError):
    pass


# connection sets
class CongruenceViolated(PclabError, ValueError):
    pass


class DNotEven(PclabError, ValueError):
    pass


class NotSymmetric(PclabError, ValueError):
    pass


class NotCosetUnion(PclabError, ValueError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


# cliques
class ZeroMissing(PclabError, ValueError):
    pass


class NotAClique(PclabError, ValueError):
    pass


class SearchTimeout(PclabError, TimeoutError):
    """Search budget exhausted; ``lower``/``upper`` bracket the true answer."""

    def __init__(self, message, lower=None, upper=None, witness=None):
        super().__init__(message)
        self.lower = lower
        self.upper = upper
        self.witness = witness


# directions
class BasisDegenerate(PclabError, ValueError):
    pass


class TooSmall(PclabError, ValueError):
    pass


class OriginMissing(PclabError, ValueError):
    pass


class ScaleTooLarge(PclabError, ValueError):
    pass


# character sums
class DegreeMismatch(PclabError, ValueError):
    pass


class TrivialCharacter(PclabError, ValueError):
    pass


class HypothesisViolated(PclabError, ValueError):
    pass


class Empty(PclabError, ValueError):
    pass


# harness
class BudgetExceeded(PclabError, TimeoutError):
    pass
