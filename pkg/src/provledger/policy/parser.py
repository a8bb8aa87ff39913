"""Concrete syntax for mechanisms and templates.

Grammar (keywords are reserved; ``#`` starts a comment)::

    document   := policy+
    policy     := mechanism | template
    mechanism  := 'mechanism' NAME ['granularity' INT NAME]
                  'on' 'tentative' pattern
                  ['if' cond] 'then' action
                  ['violation' 'if' cond] 'end'
    template   := 'template' NAME '(' [var (',' var)*] ')'
                  ['configure' 'on' phase pattern]
                  ['dispose' 'on' phase pattern]
                  mechanism 'end'
    var        := NAME ':' ('entity' | 'data')
    pattern    := NAME '(' [attr (',' attr)*] ')'
    attr       := NAME '=' value
    value      := STRING | NAME | INT | '*' | '$' NAME ['.' NAME]
    cond       := conj ('or' conj)*
    conj       := unary ('and' unary)*
    unary      := 'not' unary | primary
    primary    := '(' cond ')' | 'true' | 'false'
                | 'within' INT '(' cond ')'
                | 'atmost' INT 'within' INT '(' ['actual'] pattern ')'
                | ['actual'] pattern
    action     := 'allow' | 'deny' | 'delay' INT
                | 'modify' '(' attr (',' attr)* ')'

``format_policy`` prints the canonical form; parsing it back yields an
equal AST.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from .ast import (
    ACTUAL,
    ALLOW,
    DATA,
    DELAY,
    DENY,
    ENTITY,
    FALSE,
    MODIFY,
    TENTATIVE,
    TRUE,
    WILDCARD,
    And,
    Cardinality,
    Condition,
    EnforcementAction,
    Equals,
    EventMatch,
    EventPattern,
    Granularity,
    Matcher,
    Mechanism,
    MechanismTemplate,
    Not,
    Or,
    Placeholder,
    Policy,
    PolicyError,
    Wildcard,
    Within,
)

KEYWORDS = frozenset(
    """mechanism template end on tentative actual if then violation granularity configure dispose
    not and or within atmost true false allow deny modify delay entity data""".split()
)


class PolicyParseError(PolicyError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class PolicySyntaxError(PolicyParseError):
    pass


class PolicySemanticError(PolicyParseError):
    """Well-formed text whose meaning breaks an AST invariant."""


@dataclass(frozen=True)
class Token:
    kind: str  # NAME, INT, STRING, PUNCT, EOF
    text: str
    line: int
    column: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<STRING>"(?:[^"\\\n]|\\.)*")
  | (?P<INT>\d+)
  | (?P<NAME>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<PUNCT>[(),=*$.:])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, pos = 1, 0, 0
    opens: list[Token] = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise PolicySyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tok = Token(kind, m.group(), line, col)
            if tok.text == "(":
                opens.append(tok)
            elif tok.text == ")":
                if not opens:
                    raise PolicySyntaxError("unmatched ')'", line, col)
                opens.pop()
            tokens.append(tok)
        pos = m.end()
    if opens:
        tok = opens[-1]
        raise PolicySyntaxError("unclosed '('", tok.line, tok.column)
    tokens.append(Token("EOF", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, message: str, tok: Token | None = None) -> PolicySyntaxError:
        tok = tok or self.tok
        found = "end of input" if tok.kind == "EOF" else repr(tok.text)
        return PolicySyntaxError(f"{message}, found {found}", tok.line, tok.column)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("NAME", "PUNCT") and self.tok.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"expected {text!r}")
        tok = self.tok
        self.i += 1
        return tok

    def name(self, what: str = "a name") -> str:
        tok = self.tok
        if tok.kind != "NAME" or tok.text in KEYWORDS:
            raise self.error(f"expected {what}")
        self.i += 1
        return tok.text

    def integer(self) -> int:
        tok = self.tok
        if tok.kind != "INT":
            raise self.error("expected an integer")
        self.i += 1
        return int(tok.text)

    # -- top level -----------------------------------------------------

    def document(self) -> list[Policy]:
        out = []
        while self.tok.kind != "EOF":
            out.append(self.policy())
        if not out:
            raise self.error("expected 'mechanism' or 'template'")
        return out

    def policy(self) -> Policy:
        if self.at("mechanism"):
            return self.mechanism()
        if self.at("template"):
            return self.template()
        raise self.error("expected 'mechanism' or 'template'")

    def mechanism(self) -> Mechanism:
        start = self.expect("mechanism")
        name = self.name("a mechanism name")
        granularity = Granularity()
        if self.accept("granularity"):
            granularity = Granularity(self.integer(), self.name("a time unit"))
        self.expect("on")
        phase_tok = self.tok
        if not self.accept(TENTATIVE):
            if self.at(ACTUAL):
                raise PolicySemanticError(
                    "mechanism trigger must be a tentative event", phase_tok.line, phase_tok.column
                )
            raise self.error("expected 'tentative'")
        trigger = self.pattern(TENTATIVE)
        condition: Condition = TRUE
        if self.accept("if"):
            condition = self.condition()
        self.expect("then")
        action = self.action()
        violation = None
        if self.accept("violation"):
            self.expect("if")
            violation = self.condition()
        self.expect("end")
        try:
            return Mechanism(name, trigger, condition, action, granularity, violation)
        except PolicyError as exc:
            raise PolicySemanticError(str(exc), start.line, start.column) from None

    def template(self) -> MechanismTemplate:
        start = self.expect("template")
        name = self.name("a template name")
        self.expect("(")
        variables = []
        if not self.at(")"):
            variables.append(self.variable())
            while self.accept(","):
                variables.append(self.variable())
        self.expect(")")
        configuration = disposal = None
        if self.accept("configure"):
            self.expect("on")
            configuration = self.pattern(self.phase())
        if self.accept("dispose"):
            self.expect("on")
            disposal = self.pattern(self.phase())
        body = self.mechanism()
        self.expect("end")
        try:
            return MechanismTemplate(name, tuple(variables), body, configuration, disposal)
        except PolicyError as exc:
            raise PolicySemanticError(str(exc), start.line, start.column) from None

    def variable(self) -> tuple[str, str]:
        var = self.name("a variable name")
        self.expect(":")
        if self.accept(ENTITY):
            return var, ENTITY
        if self.accept(DATA):
            return var, DATA
        raise self.error("expected 'entity' or 'data'")

    def phase(self) -> str:
        if self.accept(TENTATIVE):
            return TENTATIVE
        self.expect(ACTUAL)
        return ACTUAL

    # -- patterns and values ---------------------------------------------

    def pattern(self, phase: str) -> EventPattern:
        start = self.tok
        activity = self.name("an activity name")
        self.expect("(")
        attrs: list[tuple[str, Matcher]] = []
        if not self.at(")"):
            attrs.append(self.attribute())
            while self.accept(","):
                attrs.append(self.attribute())
        self.expect(")")
        try:
            return EventPattern(phase, activity, tuple(attrs))
        except PolicyError as exc:
            raise PolicySemanticError(str(exc), start.line, start.column) from None

    def attribute(self) -> tuple[str, Matcher]:
        attr = self.name("an attribute name")
        self.expect("=")
        return attr, self.value()

    def value(self) -> Matcher:
        tok = self.tok
        if tok.kind == "STRING":
            self.i += 1
            return Equals(json.loads(tok.text))
        if tok.kind == "INT" or (tok.kind == "NAME" and tok.text not in KEYWORDS):
            self.i += 1
            return Equals(tok.text)
        if self.accept("*"):
            return WILDCARD
        if self.accept("$"):
            var = self.name("a variable name")
            attr = None
            if self.accept("."):
                attr = self.name("a data attribute")
            return Placeholder(var, attr)
        raise self.error("expected a value")

    # -- conditions --------------------------------------------------------

    def condition(self) -> Condition:
        parts = [self.conjunction()]
        while self.accept("or"):
            parts.append(self.conjunction())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conjunction(self) -> Condition:
        parts = [self.unary()]
        while self.accept("and"):
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def unary(self) -> Condition:
        if self.accept("not"):
            return Not(self.unary())
        return self.primary()

    def primary(self) -> Condition:
        if self.accept("("):
            inner = self.condition()
            self.expect(")")
            return inner
        if self.accept("true"):
            return TRUE
        if self.accept("false"):
            return FALSE
        if self.at("within"):
            tok = self.expect("within")
            window = self.integer()
            if window < 1:
                raise PolicySemanticError("window must be at least one tick", tok.line, tok.column)
            self.expect("(")
            inner = self.condition()
            self.expect(")")
            return Within(window, inner)
        if self.at("atmost"):
            tok = self.expect("atmost")
            limit = self.integer()
            self.expect("within")
            window = self.integer()
            if window < 1:
                raise PolicySemanticError("window must be at least one tick", tok.line, tok.column)
            self.expect("(")
            self.accept(ACTUAL)
            pattern = self.pattern(ACTUAL)
            self.expect(")")
            return Cardinality(limit, window, pattern)
        if self.at(TENTATIVE):
            tok = self.tok
            raise PolicySemanticError("condition patterns must refer to actual events", tok.line, tok.column)
        self.accept(ACTUAL)
        return EventMatch(self.pattern(ACTUAL))

    def action(self) -> EnforcementAction:
        if self.accept(ALLOW):
            return EnforcementAction(ALLOW)
        if self.accept(DENY):
            return EnforcementAction(DENY)
        if self.at(DELAY):
            tok = self.expect(DELAY)
            ticks = self.integer()
            if ticks < 1:
                raise PolicySemanticError("delay needs at least one tick", tok.line, tok.column)
            return EnforcementAction(DELAY, delay_ticks=ticks)
        if self.accept(MODIFY):
            self.expect("(")
            subs = [self.attribute()]
            while self.accept(","):
                subs.append(self.attribute())
            self.expect(")")
            if any(isinstance(m, Wildcard) for _, m in subs):
                raise self.error("modify cannot substitute a wildcard")
            return EnforcementAction(MODIFY, tuple(subs))
        raise self.error("expected an action (allow, deny, modify, delay)")


def parse_document(text: str) -> list[Policy]:
    return _Parser(text).document()


def parse_policy(text: str) -> Policy:
    """Parse exactly one mechanism or template."""
    parser = _Parser(text)
    policy = parser.policy()
    if parser.tok.kind != "EOF":
        raise parser.error("expected end of input")
    return policy


# -- printing --------------------------------------------------------------


def format_value(m: Matcher) -> str:
    if isinstance(m, Equals):
        return json.dumps(m.value, ensure_ascii=False)
    if isinstance(m, Wildcard):
        return "*"
    return f"${m.variable}" + (f".{m.attr}" if m.attr else "")


def format_pattern(p: EventPattern) -> str:
    attrs = ", ".join(f"{n} = {format_value(m)}" for n, m in p.attributes)
    return f"{p.activity}({attrs})"


def format_condition(node: Condition) -> str:
    if isinstance(node, And):
        if not node.children:
            return "true"
        return " and ".join(_operand(c, And) for c in node.children)
    if isinstance(node, Or):
        if not node.children:
            return "false"
        return " or ".join(_operand(c, Or) for c in node.children)
    if isinstance(node, Not):
        return "not " + _operand(node.child, Not)
    if isinstance(node, Within):
        return f"within {node.window} ({format_condition(node.child)})"
    if isinstance(node, Cardinality):
        return f"atmost {node.limit} within {node.window} (actual {format_pattern(node.pattern)})"
    return f"actual {format_pattern(node.pattern)}"


def _operand(child: Condition, parent: type) -> str:
    text = format_condition(child)
    compound = isinstance(child, (And, Or)) and child.children
    # "and" binds tighter than "or", so only that nesting may go bare
    if compound and not (parent is Or and isinstance(child, And)):
        return f"({text})"
    return text


def format_action(a: EnforcementAction) -> str:
    if a.kind == DELAY:
        return f"delay {a.delay_ticks}"
    if a.kind == MODIFY:
        return "modify(" + ", ".join(f"{n} = {format_value(m)}" for n, m in a.substitutions) + ")"
    return a.kind


def _format_mechanism(m: Mechanism, indent: str) -> list[str]:
    lines = [f"{indent}mechanism {m.name}", f"{indent}  granularity {m.granularity}"]
    lines.append(f"{indent}  on tentative {format_pattern(m.trigger)}")
    if m.condition != TRUE:
        lines.append(f"{indent}  if {format_condition(m.condition)}")
    lines.append(f"{indent}  then {format_action(m.action)}")
    if m.violation is not None:
        lines.append(f"{indent}  violation if {format_condition(m.violation)}")
    lines.append(f"{indent}end")
    return lines


def format_policy(policy: Policy) -> str:
    if isinstance(policy, Mechanism):
        return "\n".join(_format_mechanism(policy, "")) + "\n"
    variables = ", ".join(f"{v}: {d}" for v, d in policy.variables)
    lines = [f"template {policy.name}({variables})"]
    if policy.configuration is not None:
        lines.append(f"  configure on {policy.configuration.phase} {format_pattern(policy.configuration)}")
    if policy.disposal is not None:
        lines.append(f"  dispose on {policy.disposal.phase} {format_pattern(policy.disposal)}")
    lines += _format_mechanism(policy.body, "  ")
    lines.append("end")
    return "\n".join(lines) + "\n"


def format_document(policies: list[Policy]) -> str:
    return "\n".join(format_policy(p) for p in policies)
