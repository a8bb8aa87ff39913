"""Template instantiation and configuration-rule handling."""

from __future__ import annotations

from typing import Callable, Mapping

from .ast import (
    And,
    Cardinality,
    Condition,
    EnforcementAction,
    Equals,
    Event,
    EventMatch,
    EventPattern,
    Matcher,
    Mechanism,
    MechanismTemplate,
    Not,
    Or,
    Placeholder,
    PolicyError,
    Wildcard,
    Within,
)

Resolver = Callable[[str, str], str]


def default_resolver(entity: str, attr: str) -> str:
    """Data assignment used when no lookup is supplied: the instantiation path."""
    return f"{entity}.{attr}"


def _subst_matcher(m: Matcher, bindings: Mapping[str, str], resolve: Resolver) -> Matcher:
    if not isinstance(m, Placeholder):
        return m
    value = bindings[m.variable]
    return Equals(value if m.attr is None else resolve(value, m.attr))


def _subst_pattern(p: EventPattern, bindings: Mapping[str, str], resolve: Resolver) -> EventPattern:
    attrs = tuple((n, _subst_matcher(m, bindings, resolve)) for n, m in p.attributes)
    return EventPattern(p.phase, p.activity, attrs)


def _subst_condition(node: Condition, bindings: Mapping[str, str], resolve: Resolver) -> Condition:
    if isinstance(node, EventMatch):
        return EventMatch(_subst_pattern(node.pattern, bindings, resolve))
    if isinstance(node, Cardinality):
        return Cardinality(node.limit, node.window, _subst_pattern(node.pattern, bindings, resolve))
    if isinstance(node, Not):
        return Not(_subst_condition(node.child, bindings, resolve))
    if isinstance(node, Within):
        return Within(node.window, _subst_condition(node.child, bindings, resolve))
    kids = tuple(_subst_condition(c, bindings, resolve) for c in node.children)
    return And(kids) if isinstance(node, And) else Or(kids)


def instantiate_template(
    template: MechanismTemplate, bindings: Mapping[str, str], resolve: Resolver | None = None
) -> Mechanism:
    missing = [v for v, _ in template.variables if v not in bindings]
    if missing:
        raise PolicyError(f"template {template.name} is missing bindings for: {', '.join(missing)}")
    resolve = resolve or default_resolver
    body = template.body
    action = body.action
    if action.substitutions:
        action = EnforcementAction(
            action.kind,
            tuple((n, _subst_matcher(m, bindings, resolve)) for n, m in action.substitutions),
            action.delay_ticks,
        )
    return Mechanism(
        name=body.name,
        trigger=_subst_pattern(body.trigger, bindings, resolve),
        condition=_subst_condition(body.condition, bindings, resolve),
        action=action,
        granularity=body.granularity,
        violation=None if body.violation is None else _subst_condition(body.violation, bindings, resolve),
    )


def rule_bindings(rule: EventPattern, event: Event) -> dict[str, str] | None:
    """Match a configuration/disposal rule, capturing ``$var`` attributes."""
    if event.activity != rule.activity:
        return None
    attrs = event.attr_map
    out: dict[str, str] = {}
    for name, m in rule.attributes:
        if isinstance(m, Wildcard):
            continue
        if name not in attrs:
            return None
        if isinstance(m, Equals):
            if attrs[name] != m.value:
                return None
        elif m.attr is not None:
            raise PolicyError("configuration rules cannot bind data attributes")
        elif out.setdefault(m.variable, attrs[name]) != attrs[name]:
            return None
    return out


class TemplateManager:
    """Keeps template instances alive between configure and dispose events."""

    def __init__(self, templates: list[MechanismTemplate], resolve: Resolver | None = None):
        self.templates = {t.name: t for t in templates}
        self.resolve = resolve
        self.active: dict[tuple[str, tuple[tuple[str, str], ...]], Mechanism] = {}

    def observe(self, event: Event) -> list[tuple[str, tuple[tuple[str, str], ...]]]:
        """Apply configure/dispose rules; returns the keys that changed."""
        changed = []
        for name, template in self.templates.items():
            if template.configuration is not None:
                b = rule_bindings(template.configuration, event)
                if b is not None and len(b) == len(template.variables):
                    key = (name, tuple(sorted(b.items())))
                    if key not in self.active:
                        self.active[key] = instantiate_template(template, b, self.resolve)
                        changed.append(key)
            if template.disposal is not None:
                b = rule_bindings(template.disposal, event)
                if b is not None:
                    key = (name, tuple(sorted(b.items())))
                    if self.active.pop(key, None) is not None:
                        changed.append(key)
        return changed

    def mechanisms(self) -> list[Mechanism]:
        return [self.active[k] for k in sorted(self.active)]
