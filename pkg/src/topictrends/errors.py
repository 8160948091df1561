"""Exception types shared across the pipeline."""


class TopicTrendsError(Exception):
    """Base class for all errors raised by this package."""


class UnsupportedHeader(TopicTrendsError):
    pass


class EmptyDocument(TopicTrendsError):
    pass


class EmptyVocabulary(TopicTrendsError):
    pass


class InvalidConfig(TopicTrendsError, ValueError):
    pass


class NegativeInput(TopicTrendsError, ValueError):
    pass


class RankTooLarge(TopicTrendsError, ValueError):
    pass


class TopicTooSmall(TopicTrendsError, ValueError):
    pass


class EmptyCorpus(TopicTrendsError):
    pass


class AllCellsFailed(TopicTrendsError):
    pass


class ModelMismatch(TopicTrendsError):
    """Model vocabulary does not match the corpus it is applied to."""
