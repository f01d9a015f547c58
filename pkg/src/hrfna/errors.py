"""Shared exception base for the hrfna package."""


class HrfnaError(Exception):
    """Base class for every error raised by this package."""
