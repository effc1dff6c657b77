"""
Errors raised by mddc analytics.

Every error derives from MddcError and from the closest builtin exception,
so callers may catch either.
"""

class MddcError(Exception):
    """Base class for all mddc analytics errors"""

    def __init__(self, msg, **context):
        super().__init__(msg)
        self.msg = msg
        for key, value in context.items():
            setattr(self, key, value)

    def add_context(self, prefix):
        """Prefix the message with the pipeline stage that raised it"""
        self.msg = f"{prefix}: {self.msg}"
        self.args = (self.msg,)
        return self

    def __str__(self):
        return self.msg

class NegativeCount(MddcError, ValueError):
    """A contingency table entry is negative"""

class NonIntegralCount(MddcError, ValueError):
    """A contingency table entry is not an integer (strict mode)"""

class EmptyTable(MddcError, ValueError):
    """Fewer than two rows or columns, or a zero grand total"""

class DuplicateLabel(MddcError, ValueError):
    """Row or column labels repeat (strict mode)"""

class EmptyData(MddcError, ValueError):
    """A statistic was requested on no data"""

class BadProbabilityVector(MddcError, ValueError):
    """Probabilities are negative or do not sum to one"""

class NotPSD(MddcError, ValueError):
    """A covariance matrix has a clearly negative eigenvalue"""

class CoefLengthMismatch(MddcError, ValueError):
    """A per-column coefficient list does not have one entry per column"""

class AllInfinite(MddcError, ValueError):
    """No simulated table produced an admissible maximum for a column"""

class NoConvergence(MddcError, ValueError):
    """The adaptive coefficient search passed its ceiling"""

class NoComparisonColumns(MddcError, ValueError):
    """Class exclusion left no comparison column for Fisher's exact test"""

class MarginalMismatch(MddcError, ValueError):
    """Row and column marginals have different totals"""

class RetryExhausted(MddcError, RuntimeError):
    """A generated table never met the total-count tolerance"""

class DimensionMismatch(MddcError, ValueError):
    """Matrices or labels do not conform"""

class InvalidSignalValue(MddcError, ValueError):
    """A signal matrix holds values other than 0, 1 or MISSING"""

class ParseError(MddcError, ValueError):
    """A CSV input could not be parsed"""

class IoError(MddcError, OSError):
    """A file could not be read or written"""

class UnknownFixture(MddcError, KeyError):
    """No bundled fixture has the requested name"""
