"""
qev/qev/errors.py

Exceptions raised by the qev package. Everything derives from QevError so a
caller can catch the whole family at once.
"""

class QevError(Exception):
    """Base class for every error raised by qev"""

class DomainError(QevError, ValueError):
    """An argument lies outside the domain an operation is defined on"""

class ConfigError(QevError, ValueError):
    """A configuration key or value could not be understood"""

class ConvergenceError(QevError, ArithmeticError):
    """A series or quadrature did not reach its tolerance"""

class TruncationError(ConvergenceError):
    """A Fock cutoff leaves more mass outside the table than allowed"""
