"""Error classes shared across the package.

Every error class carries a stable process exit code so the CLI can map
failures one-to-one. Codes are part of the public contract: never renumber,
only append.
"""

from __future__ import annotations


class VideoReseqError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class MissingPath(VideoReseqError):
    exit_code = 3


class MixedDimensions(VideoReseqError):
    exit_code = 4


class FewerThanTwoFrames(VideoReseqError):
    exit_code = 5


class BadMagic(VideoReseqError):
    exit_code = 6


class TruncatedPayload(VideoReseqError):
    exit_code = 7


class NonFiniteValues(VideoReseqError):
    exit_code = 8


class HeaderMismatch(VideoReseqError):
    exit_code = 9


class DimZero(VideoReseqError):
    exit_code = 10


class SideTooSmall(VideoReseqError):
    exit_code = 11


class DimensionMismatch(VideoReseqError):
    exit_code = 12


class ProviderNotReady(VideoReseqError):
    exit_code = 13


class IndexOutOfRange(VideoReseqError):
    exit_code = 14


class TooFewFrames(VideoReseqError):
    exit_code = 15


class NoValidTriplets(VideoReseqError):
    exit_code = 16


class BadParams(VideoReseqError):
    exit_code = 17


class EmptyInput(VideoReseqError):
    exit_code = 18


class EmptyEmbeddings(VideoReseqError):
    exit_code = 19


class AllVisited(VideoReseqError):
    exit_code = 20


class StartOutOfRange(VideoReseqError):
    exit_code = 21


class PathTooShort(VideoReseqError):
    exit_code = 22


class EmptyPath(VideoReseqError):
    exit_code = 23


class TallyMismatch(VideoReseqError):
    exit_code = 24


class UniverseMismatch(VideoReseqError):
    exit_code = 25


class NoDatasetLoaded(VideoReseqError):
    exit_code = 26
