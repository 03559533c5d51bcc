"""Exception types raised across the segmentation pipeline."""


class VorosegError(Exception):
    """Base class for all library errors."""


class UnsupportedFormat(VorosegError):
    pass


class CorruptData(VorosegError):
    pass


class LabelOutOfRange(VorosegError):
    pass


class PaletteTooSmall(VorosegError):
    pass


class ImageTooSmall(VorosegError):
    pass


class EmptySeedSet(VorosegError):
    pass


class EmptyInput(VorosegError):
    pass


class InvalidK(VorosegError):
    pass


class EmptyDirectory(VorosegError):
    pass
