"""Text grammar for the three formula dialects (hs, point, fo) and the matching printer.

Precedence from loosest to tightest: ``->`` (right associative), ``|``, ``&``,
``U``/``S`` (right associative, point dialect only), then prefix operators.
Binders (``down x .``, ``exists x .``, ``forall x .``) extend as far right as possible.
"""

import re

from hsmc.formulas import (
    RELATIONS,
    And,
    Always,
    Atom,
    Bind,
    Bot,
    Eventually,
    Exists,
    ExistsF,
    FoExists,
    FoForall,
    Forall,
    ForallF,
    Historically,
    Implies,
    Le,
    Lt,
    Modal,
    Next,
    Not,
    Once,
    Or,
    Pred,
    Prev,
    Since,
    Top,
    Until,
    Var,
    build_length,
    match_length,
)

DIALECTS = ("hs", "point", "fo")

POINT_UNARY = {"X": Next, "F": Eventually, "G": Always, "Y": Prev, "O": Once, "H": Historically}
POINT_QUANT = {"E": Exists, "A": Forall, "Ef": ExistsF, "Af": ForallF}
POINT_BINARY = {"U": Until, "S": Since}
RESERVED = {
    "hs": {"true", "false"},
    "point": {"true", "false", "down"} | set(POINT_UNARY) | set(POINT_QUANT) | set(POINT_BINARY),
    "fo": {"true", "false", "exists", "forall"},
}
LEN_RE = re.compile(r"len([1-9][0-9]*)$")


class ParseError(ValueError):
    def __init__(self, message, line, column):
        super().__init__(f"{message} at line {line}, column {column}")
        self.message = message
        self.line = line
        self.column = column


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<modal>[<\[]\s*[A-Za-z_][A-Za-z0-9_]*\s*[>\]])
  | (?P<op>->|<=|>=|[!&|().<>])
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)


def _tokenize(text, dialect):
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        value = m.group()
        if kind == "modal" and dialect != "hs":
            # in fo, '<' is a comparison; re-scan it as an operator
            m = re.compile(r"<=|>=|[<>\[\]]").match(text, pos)
            kind, value = "op", m.group()
            if value in "[]":
                raise ParseError(f"unexpected character {value!r}", line, col)
        if kind == "op" and value in ("<", ">", "<=", ">=") and dialect == "hs":
            raise ParseError("malformed modality", line, col)
        if kind != "ws":
            tokens.append((kind, value, line, col))
        for i, ch in enumerate(value):
            if ch == "\n":
                line += 1
                line_start = pos + i + 1
        pos = m.end()
    tokens.append(("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text, dialect, variables, free):
        self.dialect = dialect
        self.tokens = _tokenize(text, dialect)
        self.i = 0
        self.bound = list(variables)
        self.free = set(free)

    def peek(self, k=0):
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        return ParseError(message, tok[2], tok[3])

    def expect(self, value):
        tok = self.next()
        if tok[1] != value:
            raise self.error(f"expected {value!r}, found {tok[1] or 'end of input'!r}", tok)
        return tok

    def parse(self):
        if self.peek()[0] == "eof":
            raise self.error("empty formula")
        f = self.implication()
        if self.peek()[0] != "eof":
            raise self.error(f"unexpected token {self.peek()[1]!r}")
        return f

    def implication(self):
        left = self.disjunction()
        if self.peek()[1] == "->":
            self.next()
            return Implies(left, self.implication())
        return left

    def disjunction(self):
        left = self.conjunction()
        while self.peek()[1] == "|":
            self.next()
            left = Or(left, self.conjunction())
        return left

    def conjunction(self):
        left = self.binary_temporal()
        while self.peek()[1] == "&":
            self.next()
            left = And(left, self.binary_temporal())
        return left

    def binary_temporal(self):
        left = self.unary()
        tok = self.peek()
        if self.dialect == "point" and tok[0] == "ident" and tok[1] in POINT_BINARY:
            self.next()
            return POINT_BINARY[tok[1]](left, self.binary_temporal())
        return left

    def unary(self):
        tok = self.peek()
        if tok[1] == "!":
            self.next()
            return Not(self.unary())
        if tok[1] == "(":
            self.next()
            f = self.implication()
            self.expect(")")
            return f
        if tok[0] == "modal":
            return self.modal()
        if tok[0] != "ident":
            raise self.error(f"unexpected token {tok[1] or 'end of input'!r}")
        if tok[1] == "true":
            self.next()
            return Top()
        if tok[1] == "false":
            self.next()
            return Bot()
        if self.dialect == "point":
            return self.point_ident()
        if self.dialect == "fo":
            return self.fo_ident()
        return self.hs_ident()

    def modal(self):
        tok = self.next()
        name = tok[1][1:-1].strip()
        closer = ">" if tok[1][0] == "<" else "]"
        if tok[1][-1] != closer:
            raise self.error("mismatched modality brackets", tok)
        if name not in RELATIONS:
            raise self.error(f"unknown modality {name!r}", tok)
        return Modal(name, closer == "]", self.unary())

    def hs_ident(self):
        tok = self.next()
        m = LEN_RE.match(tok[1])
        if m:
            return build_length(int(m.group(1)))
        return Atom(tok[1])

    def point_ident(self):
        tok = self.peek()
        name = tok[1]
        if name in POINT_UNARY:
            self.next()
            return POINT_UNARY[name](self.unary())
        if name in POINT_QUANT:
            self.next()
            if self.peek()[1] != "(":
                raise self.error(f"path quantifier {name} must be followed by '('")
            self.next()
            f = self.implication()
            self.expect(")")
            return POINT_QUANT[name](f)
        if name == "down":
            self.next()
            var = self.binder_name()
            self.expect(".")
            self.bound.append(var)
            try:
                body = self.implication()
            finally:
                self.bound.pop()
            return Bind(var, body)
        if name in RESERVED["point"]:
            raise self.error(f"misplaced operator {name!r}")
        self.next()
        if name in self.bound:
            return Var(name)
        return Atom(name)

    def binder_name(self):
        tok = self.next()
        if tok[0] != "ident" or tok[1] in RESERVED[self.dialect]:
            raise self.error("expected a variable name", tok)
        return tok[1]

    def fo_ident(self):
        tok = self.next()
        name = tok[1]
        if name in ("exists", "forall"):
            var = self.binder_name()
            self.expect(".")
            self.bound.append(var)
            try:
                body = self.implication()
            finally:
                self.bound.pop()
            return (FoExists if name == "exists" else FoForall)(var, body)
        if name in RESERVED["fo"]:
            raise self.error(f"misplaced keyword {name!r}", tok)
        nxt = self.peek()
        if nxt[1] == "(":
            self.next()
            var = self.fo_var()
            self.expect(")")
            return Pred(name, var)
        if nxt[1] in ("<=", "<", ">=", ">"):
            self.check_var(name, tok)
            self.next()
            other = self.fo_var()
            if nxt[1] == "<=":
                return Le(name, other)
            if nxt[1] == "<":
                return Lt(name, other)
            if nxt[1] == ">=":
                return Le(other, name)
            return Lt(other, name)
        raise self.error(f"expected predicate application or comparison after {name!r}", tok)

    def fo_var(self):
        tok = self.next()
        if tok[0] != "ident" or tok[1] in RESERVED["fo"]:
            raise self.error("expected a variable", tok)
        self.check_var(tok[1], tok)
        return tok[1]

    def check_var(self, name, tok):
        if name not in self.bound and name not in self.free:
            raise self.error(f"unbound variable {name!r}", tok)


def parse(text, dialect, variables=(), free=()):
    """Parse ``text`` in the given dialect.

    ``variables`` names hybrid position variables that are free in a point
    formula; ``free`` declares the free variables allowed in an fo formula.
    """
    if dialect not in DIALECTS:
        raise ValueError(f"unknown dialect {dialect!r}")
    if not text or not text.strip():
        raise ParseError("empty formula", 1, 1)
    return _Parser(text, dialect, variables, free).parse()


def _is_atomic(f):
    return isinstance(f, (Atom, Top, Bot, Var, Pred, Le, Lt)) or match_length(f) is not None


def _is_binder(f):
    return isinstance(f, (Bind, FoExists, FoForall))


def _is_prefix(f):
    return isinstance(f, (Not, Modal, Next, Eventually, Always, Prev, Once, Historically, Exists, Forall, ExistsF, ForallF))


def _child(f):
    s = render(f)
    if _is_atomic(f) or _is_prefix(f):
        return s
    return f"({s})"


_BIN_SYMBOL = {And: "&", Or: "|", Implies: "->", Until: "U", Since: "S"}
_PREFIX_SYMBOL = {Next: "X", Eventually: "F", Always: "G", Prev: "Y", Once: "O", Historically: "H"}
_QUANT_SYMBOL = {Exists: "E", Forall: "A", ExistsF: "Ef", ForallF: "Af"}


def render(f):
    """Print a formula so that parsing the result gives back the same AST."""
    n = match_length(f)
    if n is not None:
        return f"len{n}"
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Var):
        return f.name
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Bot):
        return "false"
    if isinstance(f, Not):
        return f"!{_child(f.arg)}"
    if isinstance(f, Modal):
        rel = f"[{f.rel}]" if f.universal else f"<{f.rel}>"
        return f"{rel} {_child(f.arg)}"
    if type(f) in _PREFIX_SYMBOL:
        return f"{_PREFIX_SYMBOL[type(f)]} {_child(f.arg)}"
    if type(f) in _QUANT_SYMBOL:
        return f"{_QUANT_SYMBOL[type(f)]}({render(f.arg)})"
    if type(f) in _BIN_SYMBOL:
        return f"{_child(f.left)} {_BIN_SYMBOL[type(f)]} {_child(f.right)}"
    if isinstance(f, Bind):
        return f"down {f.var} . {render(f.arg)}"
    if isinstance(f, FoExists):
        return f"exists {f.var} . {render(f.arg)}"
    if isinstance(f, FoForall):
        return f"forall {f.var} . {render(f.arg)}"
    if isinstance(f, Pred):
        return f"{f.atom}({f.var})"
    if isinstance(f, Le):
        return f"{f.left} <= {f.right}"
    if isinstance(f, Lt):
        return f"{f.left} < {f.right}"
    raise TypeError(f"cannot render {f!r}")
