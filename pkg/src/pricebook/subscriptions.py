"""Subscription-time semantics: entitlements, effective limits, metering.

A subscription binds one plan, any number of available add-ons, a start
instant, and per-limit usage counters. Everything here is functional:
operations take a subscription and return a new one, never mutating in
place, so a rejected recording leaves the caller's state untouched and
distinct subscriptions are trivially thread-safe.

Time is always an explicit argument. The engine never reads a clock,
which keeps replays and tests deterministic. Limits that declare a period
renew on windows anchored at the start instant and advanced by calendar
arithmetic (see ``periods``); windows never move backwards, even when a
caller passes an earlier instant than it did before.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from decimal import Decimal

from .errors import (
    AddOnNotAvailableError,
    ClockBeforeStartError,
    ContractPeriodError,
    NonPositiveAmountError,
    QuotaExceededError,
    UnknownAddOnError,
    UnknownFeatureError,
    UnknownLimitError,
    UnknownPlanError,
)
from .model import FeatureValue, Pricing, ResolvedPlanConfig, resolve_plan, value_to_json
from .periods import Period, PeriodUnit, advance, latest_window_index

__all__ = [
    "UsageState",
    "Subscription",
    "LimitStatus",
    "EvaluationResult",
    "create_subscription",
    "effective_limit",
    "evaluate_feature",
    "evaluation_context",
    "record_usage",
    "lapse_windows",
    "reset_usage",
    "subscription_to_state",
    "subscription_from_state",
    "subscription_to_json",
    "subscription_from_json",
    "parse_instant",
    "format_instant",
]


@dataclass(frozen=True)
class UsageState:
    """Counter for one limit; window fields exist iff the limit has a period."""

    used: Decimal = Decimal(0)
    window_start: datetime | None = None
    window_index: int | None = None


@dataclass(frozen=True)
class Subscription:
    plan_name: str
    add_on_names: frozenset[str]
    start_instant: datetime
    contract_period: Period
    usage: dict[str, UsageState]


@dataclass(frozen=True)
class LimitStatus:
    limit: str
    effective: Decimal
    used: Decimal
    remaining: Decimal

    def to_dict(self) -> dict:
        return {
            "limit": self.limit,
            "effective": format(self.effective, "f"),
            "used": format(self.used, "f"),
            "remaining": format(self.remaining, "f"),
        }


@dataclass(frozen=True)
class EvaluationResult:
    feature: str
    enabled: bool
    value: FeatureValue
    limits: tuple[LimitStatus, ...]

    def to_dict(self) -> dict:
        return {
            "feature": self.feature,
            "enabled": self.enabled,
            "value": value_to_json(self.value),
            "limits": [status.to_dict() for status in self.limits],
        }


def parse_instant(text: str) -> datetime:
    """RFC-3339 UTC timestamp with whole seconds."""
    raw = text.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    try:
        instant = datetime.fromisoformat(raw)
    except ValueError:
        raise ValueError(f"not an RFC-3339 timestamp: {text!r}") from None
    if instant.tzinfo is None:
        raise ValueError(f"timestamp must carry a UTC offset: {text!r}")
    if instant.microsecond != 0:
        raise ValueError(f"timestamps are whole seconds, got {text!r}")
    return instant.astimezone(timezone.utc)


def format_instant(instant: datetime) -> str:
    return instant.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _check_instant(instant: datetime) -> datetime:
    if instant.tzinfo is None:
        raise ValueError("instants must be timezone-aware")
    if instant.microsecond != 0:
        raise ValueError("instants are whole seconds")
    return instant.astimezone(timezone.utc)


def create_subscription(
    pricing: Pricing,
    plan_name: str,
    add_on_names,
    start_instant: datetime,
    contract_period: Period | None = None,
) -> Subscription:
    """New subscription with zeroed usage and windows anchored at start.

    The contract period defaults to the pricing's billing period. Any
    limit whose window outlasts the contract is refused outright: it
    could never renew within the subscription.
    """
    if plan_name not in pricing.plans:
        raise UnknownPlanError(plan_name)
    names = frozenset(add_on_names)
    for name in sorted(names):
        if name not in pricing.add_ons:
            raise UnknownAddOnError(name)
        available = pricing.add_ons[name].available_for
        if available and plan_name not in available:
            raise AddOnNotAvailableError(name, plan_name)
    start = _check_instant(start_instant)
    contract = contract_period or pricing.billing_period
    usage = {}
    for limit in pricing.usage_limits.values():
        if limit.period is not None and limit.period.canonical_days > contract.canonical_days:
            raise ContractPeriodError(limit.name)
        if limit.period is not None:
            usage[limit.name] = UsageState(Decimal(0), start, 0)
        else:
            usage[limit.name] = UsageState(Decimal(0))
    return Subscription(
        plan_name=plan_name,
        add_on_names=names,
        start_instant=start,
        contract_period=contract,
        usage=usage,
    )


def effective_limit(pricing: Pricing, subscription: Subscription, limit_name: str) -> Decimal:
    """Plan-resolved limit value plus all subscribed add-ons' extensions."""
    if limit_name not in pricing.usage_limits:
        raise UnknownLimitError(limit_name)
    resolved = resolve_plan(pricing, subscription.plan_name)
    total = resolved.limit_values[limit_name]
    for add_on in pricing.add_ons.values():
        if add_on.name in subscription.add_on_names:
            total += add_on.limit_extensions.get(limit_name, Decimal(0))
    return total


def lapse_windows(pricing: Pricing, subscription: Subscription, now: datetime) -> Subscription:
    """Advance every periodic limit to the window containing ``now``.

    A window advance resets the counter to zero. Idempotent for a fixed
    ``now``; windows never regress.
    """
    now = _check_instant(now)
    if now < subscription.start_instant:
        raise ClockBeforeStartError(
            f"{format_instant(now)} precedes subscription start "
            f"{format_instant(subscription.start_instant)}"
        )
    updated: dict[str, UsageState] = {}
    changed = False
    for name, state in subscription.usage.items():
        limit = pricing.usage_limits.get(name)
        if limit is None or limit.period is None or state.window_index is None:
            updated[name] = state
            continue
        k = latest_window_index(subscription.start_instant, limit.period, now)
        if k > state.window_index:
            updated[name] = UsageState(
                Decimal(0),
                advance(subscription.start_instant, limit.period, k),
                k,
            )
            changed = True
        else:
            updated[name] = state
    if not changed:
        return subscription
    return replace(subscription, usage=updated)


def _grant_for(pricing: Pricing, subscription: Subscription, feature_name: str):
    """All grants for a feature from subscribed add-ons, in catalog order."""
    grants = []
    for add_on in pricing.add_ons.values():
        if add_on.name in subscription.add_on_names and feature_name in add_on.feature_grants:
            grants.append(add_on.feature_grants[feature_name])
    return grants


def _evaluate(
    pricing: Pricing,
    lapsed: Subscription,
    resolved: ResolvedPlanConfig,
    feature_name: str,
) -> EvaluationResult:
    plan_value = resolved.feature_values[feature_name]
    grants = _grant_for(pricing, lapsed, feature_name)
    enabled = plan_value.truthy or any(g.truthy for g in grants)
    # A grant dominates the plan value; with several, the last add-on in
    # catalog order wins.
    value = grants[-1] if grants else plan_value
    statuses = []
    for limit in pricing.usage_limits.values():
        if feature_name not in limit.linked_features:
            continue
        eff = effective_limit(pricing, lapsed, limit.name)
        used = lapsed.usage[limit.name].used
        statuses.append(LimitStatus(
            limit=limit.name,
            effective=eff,
            used=used,
            remaining=max(Decimal(0), eff - used),
        ))
    return EvaluationResult(
        feature=feature_name,
        enabled=enabled,
        value=value,
        limits=tuple(statuses),
    )


def evaluate_feature(
    pricing: Pricing,
    subscription: Subscription,
    feature_name: str,
    now: datetime,
) -> EvaluationResult:
    """Can this subscriber use the feature right now, and at which limits?"""
    if feature_name not in pricing.features:
        raise UnknownFeatureError(feature_name)
    lapsed = lapse_windows(pricing, subscription, now)
    resolved = resolve_plan(pricing, subscription.plan_name)
    return _evaluate(pricing, lapsed, resolved, feature_name)


def evaluation_context(
    pricing: Pricing,
    subscription: Subscription,
    now: datetime,
) -> dict[str, EvaluationResult]:
    """Evaluation of every declared feature, keyed in catalog order."""
    lapsed = lapse_windows(pricing, subscription, now)
    resolved = resolve_plan(pricing, subscription.plan_name)
    return {name: _evaluate(pricing, lapsed, resolved, name) for name in pricing.features}


def record_usage(
    pricing: Pricing,
    subscription: Subscription,
    limit_name: str,
    amount: Decimal,
    now: datetime,
) -> Subscription:
    """Consume quota; all-or-nothing.

    Raises QuotaExceededError without any state change when the recording
    would push usage past the effective limit. The amount's meaning
    follows the limit's kind: units of the metric, a per-request cost, or
    elapsed time.
    """
    if limit_name not in pricing.usage_limits:
        raise UnknownLimitError(limit_name)
    amount = Decimal(amount)
    if not amount.is_finite() or amount <= 0:
        raise NonPositiveAmountError(amount)
    lapsed = lapse_windows(pricing, subscription, now)
    effective = effective_limit(pricing, lapsed, limit_name)
    state = lapsed.usage[limit_name]
    if state.used + amount > effective:
        raise QuotaExceededError(limit_name, effective, state.used, amount)
    usage = dict(lapsed.usage)
    usage[limit_name] = replace(state, used=state.used + amount)
    return replace(lapsed, usage=usage)


def reset_usage(subscription: Subscription, limit_name: str) -> Subscription:
    """Zero one counter, e.g. at an explicit session boundary."""
    if limit_name not in subscription.usage:
        raise UnknownLimitError(limit_name)
    usage = dict(subscription.usage)
    usage[limit_name] = replace(usage[limit_name], used=Decimal(0))
    return replace(subscription, usage=usage)


# -- persistence -------------------------------------------------------------

def subscription_to_state(pricing: Pricing, subscription: Subscription) -> dict:
    usage = {}
    for name in pricing.usage_limits:
        state = subscription.usage[name]
        entry: dict = {"used": format(state.used, "f")}
        if state.window_index is not None:
            entry["windowStart"] = format_instant(state.window_start)
            entry["windowIndex"] = state.window_index
        usage[name] = entry
    return {
        "saasName": pricing.saas_name,
        "plan": subscription.plan_name,
        "addOns": sorted(subscription.add_on_names),
        "startInstant": format_instant(subscription.start_instant),
        "contractPeriod": {
            "value": subscription.contract_period.value,
            "unit": subscription.contract_period.unit.value,
        },
        "usage": usage,
    }


def subscription_from_state(pricing: Pricing, state: dict) -> Subscription:
    """Rebuild a subscription from its persisted form, checking the binding.

    Raises ValueError when the document is malformed or does not refer to
    this pricing; unknown plans and add-ons raise their specific errors.
    """
    if not isinstance(state, dict):
        raise ValueError("subscription state must be a JSON object")
    try:
        saas_name = state["saasName"]
        plan = state["plan"]
        add_ons = state["addOns"]
        start_text = state["startInstant"]
        contract = state["contractPeriod"]
        usage_doc = state["usage"]
    except (KeyError, TypeError):
        raise ValueError("subscription state is missing required fields") from None
    if saas_name != pricing.saas_name:
        raise ValueError(
            f"state refers to {saas_name!r}, not to this pricing ({pricing.saas_name!r})"
        )
    if plan not in pricing.plans:
        raise UnknownPlanError(plan)
    if not isinstance(add_ons, list):
        raise ValueError("addOns must be a list")
    for name in add_ons:
        if name not in pricing.add_ons:
            raise UnknownAddOnError(name)
        available = pricing.add_ons[name].available_for
        if available and plan not in available:
            raise AddOnNotAvailableError(name, plan)
    start = parse_instant(start_text)
    try:
        period = Period(contract["value"], PeriodUnit(contract["unit"]))
    except (KeyError, TypeError, ValueError):
        raise ValueError("contractPeriod must be {value, unit}") from None
    if not isinstance(usage_doc, dict) or set(usage_doc) != set(pricing.usage_limits):
        raise ValueError("usage map does not match this pricing's usage limits")
    usage: dict[str, UsageState] = {}
    for name, limit in pricing.usage_limits.items():
        entry = usage_doc[name]
        if not isinstance(entry, dict) or "used" not in entry:
            raise ValueError(f"usage entry for {name!r} is malformed")
        try:
            used = Decimal(str(entry["used"]))
        except ArithmeticError:
            raise ValueError(f"usage entry for {name!r} has a bad counter") from None
        if not used.is_finite() or used < 0:
            raise ValueError(f"usage entry for {name!r} has a bad counter")
        if limit.period is not None:
            index = entry.get("windowIndex")
            if not isinstance(index, int) or isinstance(index, bool) or index < 0:
                raise ValueError(f"usage entry for {name!r} needs a windowIndex")
            usage[name] = UsageState(used, advance(start, limit.period, index), index)
        else:
            usage[name] = UsageState(used)
    return Subscription(
        plan_name=plan,
        add_on_names=frozenset(add_ons),
        start_instant=start,
        contract_period=period,
        usage=usage,
    )


def subscription_to_json(pricing: Pricing, subscription: Subscription) -> str:
    return json.dumps(subscription_to_state(pricing, subscription), indent=2) + "\n"


def subscription_from_json(pricing: Pricing, text: str) -> Subscription:
    try:
        state = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"subscription state is not valid JSON: {exc}") from None
    return subscription_from_state(pricing, state)
