"""Exception types shared across the package."""

from __future__ import annotations

from decimal import Decimal


class PricebookError(Exception):
    """Base class for all errors raised by this package."""


class ModelError(PricebookError):
    """An in-memory pricing object violates a structural invariant."""


class UnknownPlanError(PricebookError):
    def __init__(self, name: str):
        super().__init__(f"unknown plan: {name!r}")
        self.name = name


class UnknownFeatureError(PricebookError):
    def __init__(self, name: str):
        super().__init__(f"unknown feature: {name!r}")
        self.name = name


class UnknownLimitError(PricebookError):
    def __init__(self, name: str):
        super().__init__(f"unknown usage limit: {name!r}")
        self.name = name


class UnknownAddOnError(PricebookError):
    def __init__(self, name: str):
        super().__init__(f"unknown add-on: {name!r}")
        self.name = name


class AddOnNotAvailableError(PricebookError):
    """The add-on exists but is not offered for the subscription's plan."""

    def __init__(self, add_on: str, plan: str):
        super().__init__(f"add-on {add_on!r} is not available for plan {plan!r}")
        self.add_on = add_on
        self.plan = plan


class NoPlansError(PricebookError):
    """Raised where an operation is undefined for a pricing without plans."""


class NonPositiveAmountError(PricebookError):
    def __init__(self, amount: Decimal):
        super().__init__(f"usage amount must be positive, got {amount}")
        self.amount = amount


class ClockBeforeStartError(PricebookError):
    """The supplied evaluation instant precedes the subscription start."""


class ContractPeriodError(PricebookError):
    """A usage-limit window is longer than the subscription's contract period."""

    def __init__(self, limit: str):
        super().__init__(f"usage limit {limit!r} has a window longer than the contract period")
        self.limit = limit


class QuotaExceededError(PricebookError):
    """A usage recording was rejected; the subscription state is unchanged."""

    def __init__(self, limit: str, effective: Decimal, used: Decimal, requested: Decimal):
        super().__init__(
            f"quota exceeded for {limit!r}: effective={effective} used={used} requested={requested}"
        )
        self.limit = limit
        self.effective = effective
        self.used = used
        self.requested = requested
