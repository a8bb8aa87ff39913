"""AST for preventive ECA mechanisms and mechanism templates.

All nodes are frozen dataclasses with tuple children, so trees hash and
compare structurally.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union

TENTATIVE = "tentative"
ACTUAL = "actual"

ALLOW = "allow"
DENY = "deny"
MODIFY = "modify"
DELAY = "delay"
ACTION_KINDS = (DENY, ALLOW, MODIFY, DELAY)

ENTITY = "entity"
DATA = "data"


class PolicyError(ValueError):
    """Semantic error in a policy AST."""


# -- attribute matchers ----------------------------------------------------


@dataclass(frozen=True)
class Equals:
    value: str


@dataclass(frozen=True)
class Wildcard:
    pass


@dataclass(frozen=True)
class Placeholder:
    """Template variable; ``attr`` selects a data attribute of an entity."""

    variable: str
    attr: str | None = None


Matcher = Union[Equals, Wildcard, Placeholder]
WILDCARD = Wildcard()


@dataclass(frozen=True)
class EventPattern:
    phase: str
    activity: str
    attributes: tuple[tuple[str, Matcher], ...] = ()

    def __post_init__(self) -> None:
        if self.phase not in (TENTATIVE, ACTUAL):
            raise PolicyError(f"unknown event phase {self.phase!r}")
        names = [n for n, _ in self.attributes]
        if len(names) != len(set(names)):
            raise PolicyError(f"duplicate attribute in pattern {self.activity}")

    def matches(self, event: "Event") -> bool:
        if event.activity != self.activity:
            return False
        attrs = event.attr_map
        for name, matcher in self.attributes:
            if isinstance(matcher, Equals):
                if attrs.get(name) != matcher.value:
                    return False
            elif isinstance(matcher, Placeholder):
                raise PolicyError("cannot match an uninstantiated template pattern")
        return True

    def placeholders(self) -> Iterator[Placeholder]:
        for _, m in self.attributes:
            if isinstance(m, Placeholder):
                yield m


@dataclass(frozen=True)
class Event:
    """A concrete plaintext event (probe or observed occurrence)."""

    activity: str
    attributes: tuple[tuple[str, str], ...] = ()

    @classmethod
    def of(cls, activity: str, **attrs: str) -> "Event":
        return cls(activity, tuple(sorted(attrs.items())))

    @property
    def attr_map(self) -> dict[str, str]:
        return dict(self.attributes)

    def with_substitutions(self, subs: tuple[tuple[str, str], ...]) -> "Event":
        attrs = self.attr_map
        attrs.update(subs)
        return Event(self.activity, tuple(sorted(attrs.items())))


# -- conditions ------------------------------------------------------------


@dataclass(frozen=True)
class EventMatch:
    pattern: EventPattern


@dataclass(frozen=True)
class Not:
    child: "Condition"


@dataclass(frozen=True)
class And:
    children: tuple["Condition", ...] = ()


@dataclass(frozen=True)
class Or:
    children: tuple["Condition", ...] = ()


@dataclass(frozen=True)
class Within:
    window: int
    child: "Condition"


@dataclass(frozen=True)
class Cardinality:
    limit: int
    window: int
    pattern: EventPattern


Condition = Union[EventMatch, Not, And, Or, Within, Cardinality]
TRUE = And(())
FALSE = Or(())


def children(node: Condition) -> tuple[Condition, ...]:
    if isinstance(node, (Not, Within)):
        return (node.child,)
    if isinstance(node, (And, Or)):
        return node.children
    return ()


def walk(node: Condition) -> Iterator[Condition]:
    yield node
    for c in children(node):
        yield from walk(c)


def condition_patterns(node: Condition) -> Iterator[EventPattern]:
    for n in walk(node):
        if isinstance(n, EventMatch):
            yield n.pattern
        elif isinstance(n, Cardinality):
            yield n.pattern


def validate_condition(node: Condition) -> None:
    for n in walk(node):
        if isinstance(n, (Within, Cardinality)) and n.window < 1:
            raise PolicyError("window must be at least one tick")
        if isinstance(n, Cardinality) and n.limit < 0:
            raise PolicyError("cardinality limit must be non-negative")
        if isinstance(n, (And, Or)) and len(n.children) == 1:
            raise PolicyError("conjunctions and disjunctions need zero or at least two operands")
        if isinstance(n, (EventMatch, Cardinality)) and n.pattern.phase != ACTUAL:
            raise PolicyError("condition patterns must refer to actual events")


# -- actions and mechanisms ------------------------------------------------


@dataclass(frozen=True)
class EnforcementAction:
    kind: str
    substitutions: tuple[tuple[str, Matcher], ...] = ()
    delay_ticks: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ACTION_KINDS:
            raise PolicyError(f"unknown action {self.kind!r}")
        if self.kind == DELAY and self.delay_ticks < 1:
            raise PolicyError("delay needs at least one tick")
        if self.kind != DELAY and self.delay_ticks:
            raise PolicyError("only delay actions carry a tick count")
        if self.kind != MODIFY and self.substitutions:
            raise PolicyError("only modify actions carry substitutions")
        if self.kind == MODIFY and not self.substitutions:
            raise PolicyError("modify needs at least one substitution")


ALLOW_ACTION = EnforcementAction(ALLOW)
DENY_ACTION = EnforcementAction(DENY)


@dataclass(frozen=True)
class Granularity:
    amount: int = 1
    unit: str = "day"

    def __str__(self) -> str:
        return f"{self.amount} {self.unit}"


@dataclass(frozen=True)
class Mechanism:
    name: str
    trigger: EventPattern
    condition: Condition = TRUE
    action: EnforcementAction = ALLOW_ACTION
    granularity: Granularity = field(default_factory=Granularity)
    # time-triggered detective clause: a violation is signalled while it holds
    violation: Condition | None = None

    def __post_init__(self) -> None:
        if self.trigger.phase != TENTATIVE:
            raise PolicyError("mechanism trigger must be a tentative event")
        validate_condition(self.condition)
        if self.violation is not None:
            validate_condition(self.violation)
        trigger_attrs = {n for n, _ in self.trigger.attributes}
        for name, _ in self.action.substitutions:
            if name not in trigger_attrs:
                raise PolicyError(f"modify substitutes {name!r}, which the trigger does not bind")

    def patterns(self) -> Iterator[EventPattern]:
        yield self.trigger
        yield from condition_patterns(self.condition)
        if self.violation is not None:
            yield from condition_patterns(self.violation)

    def placeholders(self) -> Iterator[Placeholder]:
        for p in self.patterns():
            yield from p.placeholders()
        for _, m in self.action.substitutions:
            if isinstance(m, Placeholder):
                yield m

    @property
    def is_concrete(self) -> bool:
        return next(self.placeholders(), None) is None


@dataclass(frozen=True)
class MechanismTemplate:
    name: str
    variables: tuple[tuple[str, str], ...]
    body: Mechanism
    configuration: EventPattern | None = None
    disposal: EventPattern | None = None

    def __post_init__(self) -> None:
        declared = [v for v, _ in self.variables]
        if len(declared) != len(set(declared)):
            raise PolicyError(f"template {self.name} declares a variable twice")
        for _, domain in self.variables:
            if domain not in (ENTITY, DATA):
                raise PolicyError(f"unknown variable domain {domain!r}")
        used = {p.variable for p in self.body.placeholders()}
        for rule in (self.configuration, self.disposal):
            if rule is not None:
                used |= {p.variable for p in rule.placeholders()}
        undeclared = sorted(used - set(declared))
        if undeclared:
            raise PolicyError(f"template {self.name} uses undeclared variables: {', '.join(undeclared)}")


Policy = Union[Mechanism, MechanismTemplate]
