"""Billing periods and the calendar arithmetic used for window resets.

Two distinct notions of period length live here and must not be mixed up:

* ``canonical_days`` is a fixed comparison convention (DAY=1, WEEK=7,
  MONTH=30, YEAR=365) used only to decide whether one period outlasts
  another. It is never used to compute dates.
* ``advance`` is real calendar arithmetic: months and years move by
  calendar months with day-of-month clamping (Jan-31 plus one month is
  Feb-28, or Feb-29 in a leap year), while days and weeks move by exact
  multiples of 86400 seconds.
"""

from __future__ import annotations

import calendar
from dataclasses import dataclass
from datetime import datetime, timedelta
from enum import Enum

from .errors import ModelError

__all__ = ["PeriodUnit", "Period", "advance", "latest_window_index"]


class PeriodUnit(Enum):
    DAY = "DAY"
    WEEK = "WEEK"
    MONTH = "MONTH"
    YEAR = "YEAR"


_CANONICAL_DAYS = {
    PeriodUnit.DAY: 1,
    PeriodUnit.WEEK: 7,
    PeriodUnit.MONTH: 30,
    PeriodUnit.YEAR: 365,
}

_SECONDS = {PeriodUnit.DAY: 86400, PeriodUnit.WEEK: 7 * 86400}


@dataclass(frozen=True)
class Period:
    """A positive count of days, weeks, months, or years."""

    value: int
    unit: PeriodUnit

    def __post_init__(self) -> None:
        if not isinstance(self.value, int) or isinstance(self.value, bool) or self.value < 1:
            raise ModelError(f"period value must be a positive integer, got {self.value!r}")
        if not isinstance(self.unit, PeriodUnit):
            raise ModelError(f"period unit must be a PeriodUnit, got {self.unit!r}")

    @property
    def canonical_days(self) -> int:
        """Day count for ordering periods; a convention, not calendar math."""
        return self.value * _CANONICAL_DAYS[self.unit]


def _add_months(anchor: datetime, months: int) -> datetime:
    total = anchor.year * 12 + (anchor.month - 1) + months
    year, month_index = divmod(total, 12)
    month = month_index + 1
    day = min(anchor.day, calendar.monthrange(year, month)[1])
    return anchor.replace(year=year, month=month, day=day)


def advance(start: datetime, period: Period, count: int) -> datetime:
    """Instant ``count`` periods after ``start``.

    Month and year steps are always taken from the anchor, so the
    day-of-month snaps back after short months: Jan-31 anchored monthly
    windows start Jan-31, Feb-28, Mar-31, ...
    """
    if count < 0:
        raise ValueError("count must be >= 0")
    if period.unit in _SECONDS:
        return start + timedelta(seconds=_SECONDS[period.unit] * period.value * count)
    months_per = period.value * (12 if period.unit is PeriodUnit.YEAR else 1)
    return _add_months(start, months_per * count)


def latest_window_index(start: datetime, period: Period, now: datetime) -> int:
    """Largest k with ``advance(start, period, k) <= now``; requires now >= start."""
    if now < start:
        raise ValueError("now precedes start")
    if period.unit in _SECONDS:
        span = _SECONDS[period.unit] * period.value
        return int((now - start).total_seconds() // span)
    months_per = period.value * (12 if period.unit is PeriodUnit.YEAR else 1)
    elapsed_months = (now.year - start.year) * 12 + (now.month - start.month)
    k = max(elapsed_months // months_per, 0)
    while advance(start, period, k + 1) <= now:
        k += 1
    while k > 0 and advance(start, period, k) > now:
        k -= 1
    return k
