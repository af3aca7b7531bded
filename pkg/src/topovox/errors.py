"""Exception hierarchy shared across the pipeline stages."""


class TopovoxError(Exception):
    """Base class for all errors raised by this package."""


class CloudParseError(TopovoxError):
    """Malformed point cloud file. Carries the byte offset of the failure."""

    def __init__(self, message, path=None, offset=None):
        self.path = path
        self.offset = offset
        detail = message
        if path is not None:
            detail = f"{path}: {detail}"
        if offset is not None:
            detail = f"{detail} (byte offset {offset})"
        super().__init__(detail)


class EmptyCloudError(TopovoxError):
    """A stage received or produced a cloud with zero valid points."""


class DegenerateSignalError(TopovoxError):
    """A signal with fewer than two distinct values cannot be thresholded."""


class PeakAlternationError(TopovoxError):
    """Odd number of detected height peaks; floor/ceiling pairing impossible."""

    def __init__(self, peaks):
        self.peaks = list(peaks)
        super().__init__(
            f"detected {len(self.peaks)} height peaks at {self.peaks}; "
            "an even count is required to pair floors with ceilings "
            "(override with an explicit peak list in the config)"
        )


class CapacityError(TopovoxError):
    """An allocation would exceed the configured memory cap."""

    def __init__(self, required_bytes, cap_bytes, what="occupancy grid"):
        self.required_bytes = required_bytes
        self.cap_bytes = cap_bytes
        super().__init__(
            f"{what} requires {required_bytes} bytes "
            f"but the memory cap is {cap_bytes} bytes"
        )


class NoSeedError(TopovoxError):
    """No volume exceeded the seed size threshold."""

    def __init__(self, a_th, largest):
        self.a_th = a_th
        self.largest = largest
        super().__init__(
            f"no volume larger than a_th={a_th} m^3 "
            f"(largest volume found: {largest} m^3)"
        )


class ConsistencyError(TopovoxError):
    """An internal invariant was violated while assembling the map."""


class PipelineError(TopovoxError):
    """A pipeline stage failed; carries the stage name for context."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")
