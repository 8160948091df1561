"""Topic models and trend reports for bibliographic corpora."""

__version__ = "0.1.0"
