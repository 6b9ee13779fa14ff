"""corpusforge: a self-hostable crowd-translation pipeline engine."""

__version__ = "0.1.0"
