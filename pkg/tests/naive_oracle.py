"""Deliberately simple policy semantics, written from the operator definitions.

No bit masks, no kernels, no incremental state: every query rescans the
full history. Used to check the reference interpreter and to freeze
expected decisions.
"""

from provledger.policy import And, Cardinality, EventMatch, Not, Or, Within


def holds(node, history, t):
    if isinstance(node, EventMatch):
        return any(tick == t and node.pattern.matches(e) for tick, e in history)
    if isinstance(node, Not):
        return not holds(node.child, history, t)
    if isinstance(node, And):
        return all(holds(c, history, t) for c in node.children)
    if isinstance(node, Or):
        return any(holds(c, history, t) for c in node.children)
    if isinstance(node, Within):
        return any(holds(node.child, history, u) for u in range(max(0, t - node.window + 1), t + 1))
    if isinstance(node, Cardinality):
        n = sum(1 for tick, e in history if t - node.window < tick <= t and node.pattern.matches(e))
        return n <= node.limit
    raise TypeError(node)


def decide(mechanism, history, event, t, default="deny"):
    if mechanism.trigger.matches(event) and holds(mechanism.condition, history, t):
        return mechanism.action.kind
    return default
