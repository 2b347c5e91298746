"""Exception taxonomy.

Everything raised on purpose derives from ArtistreamError. The CLI maps
ConfigError to exit code 2 and any other ArtistreamError to exit code 3;
plain Python exceptions are bugs.
"""


class ArtistreamError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(ArtistreamError):
    """Bad or inconsistent user configuration."""


class ValueOutOfRange(ArtistreamError):
    """A value left its contractual range (normalized EMA outside [-1, 1],
    millimeter data outside the normalization spec's [min, max])."""


class UnsupportedFormat(ArtistreamError):
    """Audio file in a codec or sample format the decoder does not handle."""


class DeviceUnavailable(ArtistreamError):
    """Microphone could not be opened."""


class IoFailure(ArtistreamError):
    """Read or write failure on an audio source."""


class Overrun(ArtistreamError):
    """Microphone produced data faster than the pipeline consumed it,
    beyond the internal 2 s buffer. The pipeline is not keeping real time."""


class OutOfOrderBatch(ArtistreamError):
    """Batch indices arrived with a gap; upstream bug."""


class BadContextFile(ConfigError):
    """Artificial-context recording unreadable or unusable."""


class RemoteUnavailable(ArtistreamError):
    """Remote inversion endpoint unreachable."""


class RemoteTimeout(RemoteUnavailable):
    """Remote inversion request exceeded its deadline."""


class RemoteProtocolError(ArtistreamError):
    """Malformed reply (or request) on the inversion wire protocol."""


class FrameCountMismatch(ArtistreamError):
    """Inversion reply did not contain exactly 100*n frames."""


class BufferFull(ArtistreamError):
    """Cumulative shared-memory log reached its record capacity."""


class BadMagic(ArtistreamError):
    """Shared-memory buffer does not start with the expected magic bytes."""


class BadVersion(ArtistreamError):
    """Shared-memory buffer has an unsupported layout version."""


class DegenerateSeries(ArtistreamError):
    """Pearson correlation is undefined (constant or too-short series)."""


class LengthMismatch(ArtistreamError):
    """Predicted and reference trajectories differ by more than the
    tolerated alignment slack."""


class EmptyInput(ArtistreamError):
    """An aggregate was requested over zero records."""
