"""Usage-control policy language: AST and parser, plus the reference interpreter."""

from .ast import (
    ACTUAL, ALLOW, ALLOW_ACTION, DELAY, DENY, DENY_ACTION, FALSE, MODIFY, TENTATIVE, TRUE, WILDCARD,
    And, Cardinality, Condition, EnforcementAction, Equals, Event, EventMatch, EventPattern, Granularity,
    Mechanism, MechanismTemplate, Not, Or, Placeholder, Policy, PolicyError, Wildcard, Within,
)
from .interpreter import InterpreterState, Observe, Probe, ReferenceInterpreter, Tick, TimeTravelError, reference_step
from .parser import (
    PolicyParseError, PolicySemanticError, PolicySyntaxError, format_condition, format_document, format_pattern,
    format_policy, parse_document, parse_policy,
)
from .templates import TemplateManager, default_resolver, instantiate_template, rule_bindings

__all__ = [
    "ACTUAL", "ALLOW", "ALLOW_ACTION", "And", "Cardinality", "Condition", "DELAY", "DENY", "DENY_ACTION",
    "EnforcementAction", "Equals", "Event", "EventMatch", "EventPattern", "FALSE", "Granularity",
    "InterpreterState", "MODIFY", "Mechanism", "MechanismTemplate", "Not", "Observe", "Or", "Placeholder",
    "Policy", "PolicyError", "PolicyParseError", "PolicySemanticError", "PolicySyntaxError", "Probe",
    "ReferenceInterpreter", "TENTATIVE", "TRUE", "Tick", "TimeTravelError", "TemplateManager", "WILDCARD",
    "Wildcard", "Within", "default_resolver", "format_condition", "format_document", "format_pattern",
    "format_policy", "instantiate_template", "parse_document", "parse_policy", "reference_step", "rule_bindings",
]
