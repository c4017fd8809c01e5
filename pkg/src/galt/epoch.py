"""Uniform mission timescale.

Epochs are day counts from the J2000 reference instant (2000-01-01 12:00),
the convention used throughout mission tables here.  No leap-second or
TDB/UTC distinction is modeled; one uniform day count suffices at the
accuracy of the rest of the toolkit.
"""

from __future__ import annotations

import datetime as _dt
import math
from dataclasses import dataclass

from .errors import EphemerisRangeError

_J2000_DATETIME = _dt.datetime(2000, 1, 1, 12, 0, 0)

# Validity window of the mean-element ephemeris: +/- 2 centuries of J2000.
EPHEMERIS_SPAN_DAYS = 73050.0


@dataclass(frozen=True, order=True)
class Epoch:
    """A single instant, stored as days since the J2000 epoch."""

    mjd: float

    def __post_init__(self):
        if not math.isfinite(self.mjd):
            raise ValueError(f"epoch must be finite, got {self.mjd}")

    def __add__(self, days: float) -> "Epoch":
        return Epoch(self.mjd + days)

    __radd__ = __add__

    def __sub__(self, other):
        """Epoch - Epoch -> days; Epoch - days -> Epoch."""
        if isinstance(other, Epoch):
            return self.mjd - other.mjd
        return Epoch(self.mjd - other)

    @classmethod
    def from_calendar(cls, year: int, month: int, day: int,
                      hour: int = 0, minute: int = 0, second: float = 0.0) -> "Epoch":
        dt = _dt.datetime(year, month, day, hour, minute) + _dt.timedelta(seconds=second)
        delta = dt - _J2000_DATETIME
        return cls(delta.days + delta.seconds / 86400.0 + delta.microseconds / 86.4e9)

    def to_datetime(self) -> _dt.datetime:
        return _J2000_DATETIME + _dt.timedelta(days=self.mjd)

    def calendar_str(self) -> str:
        return self.to_datetime().strftime("%d %b %Y %H:%M")

    def centuries_since_j2000(self) -> float:
        return self.mjd / 36525.0

    def check_ephemeris_range(self):
        if abs(self.mjd) > EPHEMERIS_SPAN_DAYS:
            raise EphemerisRangeError(
                f"epoch {self.mjd:.1f} d outside the +/-2 century validity window"
            )
