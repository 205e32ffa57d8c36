"""In-memory model of a SaaS pricing: plans, add-ons, features, usage limits.

All objects are frozen dataclasses and safe to share between threads. The
``Pricing`` constructor canonicalizes its input (plan overrides exactly
equal to the catalog default are dropped, since they change nothing) and
then enforces every structural invariant, so any ``Pricing`` you can hold
is internally consistent: names are unique, every reference resolves, and
every value matches its declared kind.

Numbers are ``decimal.Decimal`` throughout. Documents round-trip exactly
and equality never suffers binary floating point surprises.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from decimal import Decimal
from enum import Enum

from .errors import ModelError, NoPlansError, UnknownPlanError
from .periods import Period

__all__ = [
    "FeatureType",
    "ValueKind",
    "FeatureValue",
    "Feature",
    "LimitKind",
    "UsageLimit",
    "Plan",
    "AddOn",
    "Pricing",
    "ResolvedPlanConfig",
    "FeatureClass",
    "StatsSummary",
    "resolve_plan",
    "classify_features",
    "pricing_stats",
]

IDENTIFIER_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class FeatureType(Enum):
    DOMAIN = "DOMAIN"
    INTEGRATION = "INTEGRATION"
    AUTOMATION = "AUTOMATION"
    MANAGEMENT = "MANAGEMENT"
    INFORMATION = "INFORMATION"
    GUARANTEE = "GUARANTEE"
    SUPPORT = "SUPPORT"
    PAYMENT = "PAYMENT"


class ValueKind(Enum):
    BOOLEAN = "BOOLEAN"
    NUMERIC = "NUMERIC"
    TEXT = "TEXT"


class LimitKind(Enum):
    RENEWABLE = "RENEWABLE"
    NON_RENEWABLE = "NON_RENEWABLE"
    RESPONSE_DRIVEN = "RESPONSE_DRIVEN"
    TIME_DRIVEN = "TIME_DRIVEN"


@dataclass(frozen=True)
class FeatureValue:
    """A typed feature payload: a flag, a finite non-negative number, or text.

    The kind is part of identity: ``boolean true`` and ``numeric 1`` are
    different values even though Python considers ``True == 1``.
    """

    kind: ValueKind
    value: bool | Decimal | str

    def __post_init__(self) -> None:
        if self.kind is ValueKind.BOOLEAN:
            if not isinstance(self.value, bool):
                raise ModelError(f"BOOLEAN value must be a bool, got {self.value!r}")
        elif self.kind is ValueKind.NUMERIC:
            if isinstance(self.value, bool) or not isinstance(self.value, Decimal):
                raise ModelError(f"NUMERIC value must be a Decimal, got {self.value!r}")
            if not self.value.is_finite() or self.value < 0:
                raise ModelError(f"NUMERIC value must be finite and >= 0, got {self.value}")
        elif self.kind is ValueKind.TEXT:
            if not isinstance(self.value, str):
                raise ModelError(f"TEXT value must be a str, got {self.value!r}")
        else:
            raise ModelError(f"unknown value kind {self.kind!r}")

    @classmethod
    def boolean(cls, value: bool) -> "FeatureValue":
        return cls(ValueKind.BOOLEAN, value)

    @classmethod
    def numeric(cls, value: Decimal | int | str) -> "FeatureValue":
        if isinstance(value, bool):
            raise ModelError("numeric value cannot be a bool")
        return cls(ValueKind.NUMERIC, Decimal(value))

    @classmethod
    def text(cls, value: str) -> "FeatureValue":
        return cls(ValueKind.TEXT, value)

    @property
    def truthy(self) -> bool:
        """True for boolean true, a number > 0, or a non-empty string."""
        if self.kind is ValueKind.BOOLEAN:
            return bool(self.value)
        if self.kind is ValueKind.NUMERIC:
            return self.value > 0
        return self.value != ""


def default_value_for(kind: ValueKind) -> FeatureValue:
    """The schema default payload for a value kind: false, 0, or ""."""
    if kind is ValueKind.BOOLEAN:
        return FeatureValue.boolean(False)
    if kind is ValueKind.NUMERIC:
        return FeatureValue.numeric(0)
    return FeatureValue.text("")


@dataclass(frozen=True)
class Feature:
    name: str
    feature_type: FeatureType
    value_kind: ValueKind = ValueKind.BOOLEAN
    default_value: FeatureValue | None = None
    description: str = ""

    def __post_init__(self) -> None:
        _check_identifier(self.name, "feature")
        if self.default_value is None:
            object.__setattr__(self, "default_value", default_value_for(self.value_kind))
        if self.default_value.kind is not self.value_kind:
            raise ModelError(
                f"feature {self.name!r}: default value kind {self.default_value.kind.value} "
                f"does not match declared {self.value_kind.value}"
            )


@dataclass(frozen=True)
class UsageLimit:
    """A quantified cap with an objective metric.

    A blank metric is deliberately constructible: it is the validator's
    job to flag it (rule R3B), while the document parser rejects it at
    the boundary.
    """

    name: str
    kind: LimitKind
    metric: str
    default_value: Decimal = Decimal(0)
    period: Period | None = None
    linked_features: tuple[str, ...] = ()
    description: str = ""

    def __post_init__(self) -> None:
        _check_identifier(self.name, "usage limit")
        _check_amount(self.default_value, f"usage limit {self.name!r} default")
        if self.kind is LimitKind.RENEWABLE and self.period is None:
            raise ModelError(f"usage limit {self.name!r}: RENEWABLE requires a period")
        if self.kind is LimitKind.NON_RENEWABLE and self.period is not None:
            raise ModelError(f"usage limit {self.name!r}: NON_RENEWABLE forbids a period")


@dataclass(frozen=True)
class Plan:
    """A subscription tier, expressed as deltas over the catalog defaults."""

    name: str
    price: Decimal
    feature_overrides: dict[str, FeatureValue] = field(default_factory=dict)
    limit_overrides: dict[str, Decimal] = field(default_factory=dict)

    def __post_init__(self) -> None:
        _check_identifier(self.name, "plan")
        _check_amount(self.price, f"plan {self.name!r} price")


@dataclass(frozen=True)
class AddOn:
    """An optional purchasable extra; grants features and/or extends limits.

    An empty ``available_for`` means the add-on is offered with every plan.
    """

    name: str
    price: Decimal
    available_for: tuple[str, ...] = ()
    feature_grants: dict[str, FeatureValue] = field(default_factory=dict)
    limit_extensions: dict[str, Decimal] = field(default_factory=dict)

    def __post_init__(self) -> None:
        _check_identifier(self.name, "add-on")
        _check_amount(self.price, f"add-on {self.name!r} price")
        if not self.feature_grants and not self.limit_extensions:
            raise ModelError(f"add-on {self.name!r} grants no features and extends no limits")
        for limit, amount in self.limit_extensions.items():
            if not isinstance(amount, Decimal) or not amount.is_finite() or amount <= 0:
                raise ModelError(f"add-on {self.name!r}: extension for {limit!r} must be > 0")


@dataclass(frozen=True)
class Pricing:
    """Root container for a pricing document.

    Maps preserve declaration order; that order is what the serializer and
    the diff engine report things in.
    """

    saas_name: str
    version: str
    currency: str
    billing_period: Period
    features: dict[str, Feature] = field(default_factory=dict)
    usage_limits: dict[str, UsageLimit] = field(default_factory=dict)
    plans: dict[str, Plan] = field(default_factory=dict)
    add_ons: dict[str, AddOn] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self._canonicalize()
        self._check()

    def _canonicalize(self) -> None:
        # Two normalizations keep "equal pricings serialize identically"
        # true: plan overrides restating the catalog default are dropped
        # (they are inert under resolution), and every cross-reference map
        # or list is rewritten in catalog declaration order, deduplicated.
        def ordered(values: dict, catalog: dict) -> dict:
            out = {key: values[key] for key in catalog if key in values}
            out.update({key: value for key, value in values.items() if key not in catalog})
            return out

        limits = {}
        for name, limit in self.usage_limits.items():
            linked = tuple(
                sorted(set(limit.linked_features),
                       key=lambda f: _catalog_index(self.features, f))
            )
            if linked != limit.linked_features:
                limit = replace(limit, linked_features=linked)
            limits[name] = limit
        object.__setattr__(self, "usage_limits", limits)

        plans = {}
        for name, plan in self.plans.items():
            fo = ordered({
                f: v
                for f, v in plan.feature_overrides.items()
                if f not in self.features or self.features[f].default_value != v
            }, self.features)
            lo = ordered({
                l: v
                for l, v in plan.limit_overrides.items()
                if l not in self.usage_limits or self.usage_limits[l].default_value != v
            }, self.usage_limits)
            plans[name] = replace(plan, feature_overrides=fo, limit_overrides=lo)
        object.__setattr__(self, "plans", plans)

        add_ons = {}
        for name, add_on in self.add_ons.items():
            available = tuple(
                sorted(set(add_on.available_for),
                       key=lambda p: _catalog_index(plans, p))
            )
            add_ons[name] = replace(
                add_on,
                available_for=available,
                feature_grants=ordered(add_on.feature_grants, self.features),
                limit_extensions=ordered(add_on.limit_extensions, self.usage_limits),
            )
        object.__setattr__(self, "add_ons", add_ons)

    def _check(self) -> None:
        if not self.saas_name.strip():
            raise ModelError("saasName must be non-empty")
        if not self.currency.strip():
            raise ModelError("currency must be non-empty")
        for mapping, label in (
            (self.features, "feature"),
            (self.usage_limits, "usage limit"),
            (self.plans, "plan"),
            (self.add_ons, "add-on"),
        ):
            for key, entry in mapping.items():
                if key != entry.name:
                    raise ModelError(f"{label} map key {key!r} does not match name {entry.name!r}")
        clash = set(self.features) & set(self.usage_limits)
        if clash:
            raise ModelError(f"names used for both a feature and a usage limit: {sorted(clash)}")
        if not self.plans and not self.add_ons:
            raise ModelError("a pricing needs at least one plan or add-on")

        for limit in self.usage_limits.values():
            for f in limit.linked_features:
                if f not in self.features:
                    raise ModelError(f"usage limit {limit.name!r} links unknown feature {f!r}")
        for plan in self.plans.values():
            self._check_feature_values(plan.feature_overrides, f"plan {plan.name!r}")
            self._check_limit_values(plan.limit_overrides, f"plan {plan.name!r}")
        for add_on in self.add_ons.values():
            for p in add_on.available_for:
                if p not in self.plans:
                    raise ModelError(f"add-on {add_on.name!r} references unknown plan {p!r}")
            self._check_feature_values(add_on.feature_grants, f"add-on {add_on.name!r}")
            for l in add_on.limit_extensions:
                if l not in self.usage_limits:
                    raise ModelError(f"add-on {add_on.name!r} extends unknown limit {l!r}")

    def _check_feature_values(self, values: dict[str, FeatureValue], owner: str) -> None:
        for f, v in values.items():
            if f not in self.features:
                raise ModelError(f"{owner} references unknown feature {f!r}")
            declared = self.features[f].value_kind
            if v.kind is not declared:
                raise ModelError(
                    f"{owner}: value for {f!r} is {v.kind.value}, feature declares {declared.value}"
                )

    def _check_limit_values(self, values: dict[str, Decimal], owner: str) -> None:
        for l, v in values.items():
            if l not in self.usage_limits:
                raise ModelError(f"{owner} references unknown limit {l!r}")
            _check_amount(v, f"{owner} value for {l!r}")


@dataclass(frozen=True)
class ResolvedPlanConfig:
    """Total feature and limit values for one plan: override else default."""

    plan_name: str
    feature_values: dict[str, FeatureValue]
    limit_values: dict[str, Decimal]


class FeatureClass(Enum):
    COMMON = "COMMON"
    SPECIFIC = "SPECIFIC"


@dataclass(frozen=True)
class StatsSummary:
    plans: int
    add_ons: int
    features: int
    usage_limits: int
    feature_types: dict[FeatureType, int]
    limit_kinds: dict[LimitKind, int]
    plan_managed_features: int
    add_on_managed_features: int
    add_on_feature_counts: dict[str, int]

    def to_dict(self) -> dict:
        return {
            "plans": self.plans,
            "addOns": self.add_ons,
            "features": self.features,
            "usageLimits": self.usage_limits,
            "featureTypes": {t.value: self.feature_types[t] for t in FeatureType},
            "limitKinds": {k.value: self.limit_kinds[k] for k in LimitKind},
            "planManagedFeatures": self.plan_managed_features,
            "addOnManagedFeatures": self.add_on_managed_features,
            "addOnFeatureCounts": dict(self.add_on_feature_counts),
        }


def resolve_plan(pricing: Pricing, plan_name: str) -> ResolvedPlanConfig:
    """Total configuration of one plan: every feature and limit gets a value.

    Pure function; override values dominate catalog defaults.
    """
    if plan_name not in pricing.plans:
        raise UnknownPlanError(plan_name)
    plan = pricing.plans[plan_name]
    feature_values = {
        name: plan.feature_overrides.get(name, feat.default_value)
        for name, feat in pricing.features.items()
    }
    limit_values = {
        name: plan.limit_overrides.get(name, limit.default_value)
        for name, limit in pricing.usage_limits.items()
    }
    return ResolvedPlanConfig(plan_name, feature_values, limit_values)


def classify_features(pricing: Pricing) -> dict[str, FeatureClass]:
    """COMMON if a feature resolves identically in every plan, else SPECIFIC.

    Classification is defined over plans only; add-on grants do not enter.
    Undefined for a pricing without plans.
    """
    if not pricing.plans:
        raise NoPlansError("feature classification requires at least one plan")
    resolved = [resolve_plan(pricing, p) for p in pricing.plans]
    out: dict[str, FeatureClass] = {}
    for name in pricing.features:
        first = resolved[0].feature_values[name]
        same = all(r.feature_values[name] == first for r in resolved[1:])
        out[name] = FeatureClass.COMMON if same else FeatureClass.SPECIFIC
    return out


def pricing_stats(pricing: Pricing) -> StatsSummary:
    """Headline counts: catalog sizes, type histograms, who manages what.

    A feature is plan-managed when it resolves truthy in at least one plan,
    and add-on-managed when at least one add-on grants it a truthy value.
    """
    feature_types = {t: 0 for t in FeatureType}
    for feat in pricing.features.values():
        feature_types[feat.feature_type] += 1
    limit_kinds = {k: 0 for k in LimitKind}
    for limit in pricing.usage_limits.values():
        limit_kinds[limit.kind] += 1

    resolved = [resolve_plan(pricing, p) for p in pricing.plans]
    plan_managed = sum(
        1
        for name in pricing.features
        if any(r.feature_values[name].truthy for r in resolved)
    )
    add_on_counts = {
        name: sum(1 for v in add_on.feature_grants.values() if v.truthy)
        for name, add_on in pricing.add_ons.items()
    }
    add_on_managed = sum(
        1
        for name in pricing.features
        if any(a.feature_grants.get(name) is not None and a.feature_grants[name].truthy
               for a in pricing.add_ons.values())
    )
    return StatsSummary(
        plans=len(pricing.plans),
        add_ons=len(pricing.add_ons),
        features=len(pricing.features),
        usage_limits=len(pricing.usage_limits),
        feature_types=feature_types,
        limit_kinds=limit_kinds,
        plan_managed_features=plan_managed,
        add_on_managed_features=add_on_managed,
        add_on_feature_counts=add_on_counts,
    )


def _catalog_index(catalog: dict, name: str) -> int:
    for index, key in enumerate(catalog):
        if key == name:
            return index
    return len(catalog)  # unknown names sort last; _check rejects them next


def _check_identifier(name: str, label: str) -> None:
    if not isinstance(name, str) or not IDENTIFIER_RE.match(name):
        raise ModelError(f"{label} name {name!r} is not a valid identifier")


def _check_amount(value: Decimal, what: str) -> None:
    if isinstance(value, bool) or not isinstance(value, Decimal):
        raise ModelError(f"{what} must be a Decimal, got {value!r}")
    if not value.is_finite() or value < 0:
        raise ModelError(f"{what} must be finite and >= 0, got {value}")


# Plain-data views used by the diff engine and the CLI's JSON output.

def value_to_json(value: FeatureValue) -> dict:
    payload = format(value.value, "f") if value.kind is ValueKind.NUMERIC else value.value
    return {"type": value.kind.value, "value": payload}


def period_to_json(period: Period | None) -> dict | None:
    if period is None:
        return None
    return {"value": period.value, "unit": period.unit.value}


def feature_to_json(feature: Feature) -> dict:
    return {
        "name": feature.name,
        "description": feature.description,
        "type": feature.feature_type.value,
        "valueType": feature.value_kind.value,
        "defaultValue": value_to_json(feature.default_value),
    }


def limit_to_json(limit: UsageLimit) -> dict:
    return {
        "name": limit.name,
        "description": limit.description,
        "type": limit.kind.value,
        "metric": limit.metric,
        "period": period_to_json(limit.period),
        "defaultValue": format(limit.default_value, "f"),
        "linkedFeatures": list(limit.linked_features),
    }


def plan_to_json(plan: Plan) -> dict:
    return {
        "name": plan.name,
        "price": format(plan.price, "f"),
        "features": {f: value_to_json(v) for f, v in plan.feature_overrides.items()},
        "usageLimits": {l: format(v, "f") for l, v in plan.limit_overrides.items()},
    }


def add_on_to_json(add_on: AddOn) -> dict:
    return {
        "name": add_on.name,
        "price": format(add_on.price, "f"),
        "availableFor": list(add_on.available_for),
        "features": {f: value_to_json(v) for f, v in add_on.feature_grants.items()},
        "usageLimitExtensions": {l: format(v, "f") for l, v in add_on.limit_extensions.items()},
    }
