"""AST, parser and printer for the small imperative language.

Statements are separated by `;` or newline.  Branch and loop bodies are
either a single statement after `then` / `do` (possibly on the next
line) or a braced block.  `true`/`false` are sugar for 1/0, `=` at
statement position is accepted as an alias for `:=`, and `#` starts a
comment.  Values are 64-bit wrapping signed integers; nonzero is true.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

BINOPS = ("+", "-", "*", "=", "<", "and", "or")

_WORD_MASK = (1 << 64) - 1


def wrap64(v):
    v &= _WORD_MASK
    return v - (1 << 64) if v >= (1 << 63) else v


class LangError(ValueError):
    pass


class SyntaxErrorAt(LangError):
    def __init__(self, line, col, message):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


class UnknownOperator(LangError):
    pass


# --- AST ------------------------------------------------------------------
# line/col fields do not participate in equality, so structural comparison
# of a reparse against the original AST just works.


@dataclass(frozen=True)
class Expr:
    pass


@dataclass(frozen=True)
class Const(Expr):
    value: int


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr

    def __post_init__(self):
        if self.op not in BINOPS:
            raise UnknownOperator(f"unknown operator {self.op!r}")


@dataclass(frozen=True)
class Not(Expr):
    arg: Expr


@dataclass(frozen=True)
class Stmt:
    line: int = field(default=0, compare=False, kw_only=True)
    col: int = field(default=0, compare=False, kw_only=True)


@dataclass(frozen=True)
class Skip(Stmt):
    pass


@dataclass(frozen=True)
class Assign(Stmt):
    name: str
    expr: Expr


@dataclass(frozen=True)
class Seq(Stmt):
    first: Stmt
    second: Stmt


@dataclass(frozen=True)
class If(Stmt):
    cond: Expr
    then: Stmt
    els: Stmt


@dataclass(frozen=True)
class While(Stmt):
    cond: Expr
    body: Stmt


def variables_of(node):
    """All variable names read or written anywhere in a statement/expression."""
    out = set()

    def walk(n):
        if isinstance(n, Var):
            out.add(n.name)
        elif isinstance(n, Const):
            pass
        elif isinstance(n, BinOp):
            walk(n.left)
            walk(n.right)
        elif isinstance(n, Not):
            walk(n.arg)
        elif isinstance(n, Skip):
            pass
        elif isinstance(n, Assign):
            out.add(n.name)
            walk(n.expr)
        elif isinstance(n, Seq):
            walk(n.first)
            walk(n.second)
        elif isinstance(n, (If, While)):
            walk(n.cond)
            if isinstance(n, If):
                walk(n.then)
                walk(n.els)
            else:
                walk(n.body)
        else:
            raise LangError(f"unexpected node {n!r}")

    walk(node)
    return out


# --- Tokenizer ------------------------------------------------------------

KEYWORDS = {"skip", "if", "then", "else", "while", "do", "not", "and", "or", "true", "false"}

_TOKEN_RE = re.compile(
    r"""(?P<ws>[ \t]+)
      | (?P<comment>\#[^\n]*)
      | (?P<nl>\n)
      | (?P<num>\d+)
      | (?P<ident>[A-Za-z][A-Za-z0-9_']*)
      | (?P<op>:=|[=+\-*<(){};])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # NUM, IDENT, KW, OP, NL, EOF
    text: str
    line: int
    col: int


def tokenize(text):
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise SyntaxErrorAt(line, col, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        tok = m.group()
        if kind == "nl":
            tokens.append(Token("NL", "\n", line, col))
            line += 1
            col = 1
        elif kind in ("ws", "comment"):
            col += len(tok)
        else:
            if kind == "num":
                tokens.append(Token("NUM", tok, line, col))
            elif kind == "ident":
                if tok in KEYWORDS:
                    tokens.append(Token("KW", tok, line, col))
                else:
                    tokens.append(Token("IDENT", tok, line, col))
            else:
                tokens.append(Token("OP", tok, line, col))
            col += len(tok)
        pos = m.end()
    tokens.append(Token("EOF", "", line, col))
    return tokens


# --- Parser ---------------------------------------------------------------


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    def peek(self, ahead=0):
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def next(self):
        tok = self.tokens[self.i]
        if tok.kind != "EOF":
            self.i += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        raise SyntaxErrorAt(tok.line, tok.col, message)

    def accept(self, kind, text=None):
        tok = self.peek()
        if tok.kind == kind and (text is None or tok.text == text):
            return self.next()
        return None

    def expect(self, kind, text=None):
        tok = self.accept(kind, text)
        if tok is None:
            got = self.peek()
            want = text or kind
            self.error(f"expected {want!r}, got {got.text or got.kind!r}")
        return tok

    def skip_newlines(self):
        while self.peek().kind == "NL":
            self.next()

    # expressions, lowest precedence first
    def parse_expr(self):
        return self.parse_or()

    def parse_or(self):
        left = self.parse_and()
        while self.peek().kind == "KW" and self.peek().text == "or":
            self.next()
            left = BinOp("or", left, self.parse_and())
        return left

    def parse_and(self):
        left = self.parse_cmp()
        while self.peek().kind == "KW" and self.peek().text == "and":
            self.next()
            left = BinOp("and", left, self.parse_cmp())
        return left

    def parse_cmp(self):
        left = self.parse_add()
        while self.peek().kind == "OP" and self.peek().text in ("=", "<"):
            op = self.next().text
            left = BinOp(op, left, self.parse_add())
        return left

    def parse_add(self):
        left = self.parse_mul()
        while self.peek().kind == "OP" and self.peek().text in ("+", "-"):
            op = self.next().text
            left = BinOp(op, left, self.parse_mul())
        return left

    def parse_mul(self):
        left = self.parse_unary()
        while self.peek().kind == "OP" and self.peek().text == "*":
            self.next()
            left = BinOp("*", left, self.parse_unary())
        return left

    def parse_unary(self):
        if self.accept("KW", "not"):
            return Not(self.parse_unary())
        return self.parse_atom()

    def parse_atom(self):
        tok = self.peek()
        if tok.kind == "NUM":
            self.next()
            return Const(int(tok.text))
        if tok.kind == "IDENT":
            self.next()
            return Var(tok.text)
        if tok.kind == "KW" and tok.text in ("true", "false"):
            self.next()
            return Const(1 if tok.text == "true" else 0)
        if tok.kind == "OP" and tok.text == "(":
            self.next()
            e = self.parse_expr()
            self.expect("OP", ")")
            return e
        self.error(f"expected expression, got {tok.text or tok.kind!r}")

    # statements
    def parse_seq(self, stop_at_brace=False):
        stmts = []
        while True:
            self.skip_newlines()
            tok = self.peek()
            if tok.kind == "EOF" or (stop_at_brace and tok.kind == "OP" and tok.text == "}"):
                break
            stmts.append(self.parse_stmt())
            sep = self.peek()
            if sep.kind in ("NL",) or (sep.kind == "OP" and sep.text == ";"):
                self.next()
                continue
            break
        if not stmts:
            tok = self.peek()
            return Skip(line=tok.line, col=tok.col)
        node = stmts[-1]
        for s in reversed(stmts[:-1]):
            node = Seq(s, node, line=s.line, col=s.col)
        return node

    def parse_body(self):
        """A branch/loop body: a braced block or a single statement."""
        self.skip_newlines()
        if self.accept("OP", "{"):
            body = self.parse_seq(stop_at_brace=True)
            self.skip_newlines()
            self.expect("OP", "}")
            return body
        return self.parse_stmt()

    def parse_stmt(self):
        self.skip_newlines()
        tok = self.peek()
        if tok.kind == "KW" and tok.text == "skip":
            self.next()
            return Skip(line=tok.line, col=tok.col)
        if tok.kind == "KW" and tok.text == "if":
            self.next()
            cond = self.parse_expr()
            if self.peek().kind == "OP" and self.peek().text == "{":
                then = self.parse_body()
            else:
                self.expect("KW", "then")
                then = self.parse_body()
            els = self._parse_else(tok)
            return If(cond, then, els, line=tok.line, col=tok.col)
        if tok.kind == "KW" and tok.text == "while":
            self.next()
            cond = self.parse_expr()
            if self.peek().kind == "OP" and self.peek().text == "{":
                body = self.parse_body()
            else:
                self.expect("KW", "do")
                body = self.parse_body()
            return While(cond, body, line=tok.line, col=tok.col)
        if tok.kind == "IDENT":
            nxt = self.peek(1)
            if nxt.kind == "OP" and nxt.text in (":=", "="):
                self.next()
                self.next()
                self.skip_newlines()
                expr = self.parse_expr()
                return Assign(tok.text, expr, line=tok.line, col=tok.col)
        self.error(f"expected statement, got {tok.text or tok.kind!r}")

    def _parse_else(self, if_tok):
        # Only consume newlines if an `else` actually follows them.
        mark = self.i
        self.skip_newlines()
        if self.accept("KW", "else"):
            return self.parse_body()
        self.i = mark
        return Skip(line=if_tok.line, col=if_tok.col)


def parse_program(text):
    parser = _Parser(tokenize(text))
    prog = parser.parse_seq()
    parser.skip_newlines()
    if parser.peek().kind != "EOF":
        parser.error("trailing input after program")
    return prog


# --- Printer --------------------------------------------------------------


def print_expr(e):
    if isinstance(e, Const):
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Not):
        return f"not({print_expr(e.arg)})"
    if isinstance(e, BinOp):
        return f"({print_expr(e.left)} {e.op} {print_expr(e.right)})"
    raise LangError(f"not an expression: {e!r}")


def _print_block(stmt, indent):
    pad = "  " * indent
    return "{\n" + print_program(stmt, indent + 1) + "\n" + pad + "}"


def print_program(stmt, indent=0):
    """Canonical text form; bodies are always braced so reparsing is exact."""
    pad = "  " * indent
    if isinstance(stmt, Skip):
        return pad + "skip"
    if isinstance(stmt, Assign):
        return f"{pad}{stmt.name} := {print_expr(stmt.expr)}"
    if isinstance(stmt, Seq):
        return print_program(stmt.first, indent) + "\n" + print_program(stmt.second, indent)
    if isinstance(stmt, If):
        out = f"{pad}if {print_expr(stmt.cond)} " + _print_block(stmt.then, indent)
        if stmt.els != Skip():
            out += " else " + _print_block(stmt.els, indent)
        return out
    if isinstance(stmt, While):
        return f"{pad}while {print_expr(stmt.cond)} " + _print_block(stmt.body, indent)
    raise LangError(f"not a statement: {stmt!r}")
