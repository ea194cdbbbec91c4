"""Time windows over telemetry.

All timestamps in the engine are integer epoch seconds. A window is
half-open: ``start`` is included, ``end`` is excluded, so adjacent
windows tile a span without double counting samples.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidArgumentError


@dataclass(frozen=True, order=True)
class TimeWindow:
    start: int
    end: int

    def __post_init__(self):
        if not isinstance(self.start, int) or not isinstance(self.end, int):
            raise InvalidArgumentError("window bounds must be integer epoch seconds")
        if self.end < self.start:
            raise InvalidArgumentError(f"window end {self.end} precedes start {self.start}")

    @property
    def duration(self) -> int:
        return self.end - self.start

    def require_nonempty(self) -> "TimeWindow":
        if self.duration <= 0:
            raise InvalidArgumentError("window has zero length")
        return self

    def contains(self, t: int) -> bool:
        return self.start <= t < self.end

    def intersect(self, other: "TimeWindow") -> "TimeWindow | None":
        lo = max(self.start, other.start)
        hi = min(self.end, other.end)
        if hi <= lo:
            return None
        return TimeWindow(lo, hi)

    def clip_to(self, bounds: "TimeWindow") -> "TimeWindow":
        """Clamp this window into ``bounds``; empty overlap is an error."""
        got = self.intersect(bounds)
        if got is None:
            raise InvalidArgumentError(
                f"window [{self.start}, {self.end}) lies outside [{bounds.start}, {bounds.end})"
            )
        return got

    def sample_count(self, step: int) -> int:
        """Number of samples a uniform grid of ``step`` seconds places here."""
        if step <= 0:
            raise InvalidArgumentError("step must be positive")
        return self.duration // step

    def to_json(self) -> dict:
        return {"start": self.start, "end": self.end}

    @classmethod
    def from_json(cls, obj: dict) -> "TimeWindow":
        if not isinstance(obj, dict) or set(obj) != {"start", "end"}:
            raise InvalidArgumentError(f"malformed window object: {obj!r}")
        return cls(int(obj["start"]), int(obj["end"]))
