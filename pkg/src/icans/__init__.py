"""Shot-frugal stochastic gradient descent for variational quantum algorithms."""

__version__ = "0.1.0"
