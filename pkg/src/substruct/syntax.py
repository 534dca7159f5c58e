"""Abstract syntax, parser and pretty-printer for `.ord` programs.

Concrete syntax of types, loosest binding first::

    all a b. A                     quantifier (extends to the right)
    A ->> B   A \\ B   A -o B   A -> B
                                   over, under, linear, unrestricted (right assoc)
    A * B   A % B                  fuse, twist (right assoc)
    1   a   F[A, ...]   F A ...   +{l : A, ...}   (A)

Expressions::

    \\x. e     e1 e2     e [A]     (e1, e2)     ()     l(e)     #atom
    match e ((x, y) => e')   match e (() => e')   match e {l(x) => e', ...}

Programs are sequences of ``type F[a] = A`` definitions and
``[@mode m] [rec] def name : A = e`` declarations; ``--`` starts a comment.
"""

from __future__ import annotations

import enum
import itertools
import re
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from .errors import DuplicateDefinition, ParseError

Pos = tuple[int, int]


class Mode(enum.Enum):
    ORDERED = "ordered"
    LINEAR = "linear"
    UNRESTRICTED = "unrestricted"

    @classmethod
    def parse(cls, text: str) -> "Mode":
        try:
            return cls(text.lower())
        except ValueError:
            raise ParseError(f"unknown mode {text!r}") from None

    def __str__(self) -> str:
        return self.value


# ---------------------------------------------------------------------------
# Types


@dataclass(frozen=True)
class Type:
    def __str__(self) -> str:
        return pretty_type(self)


@dataclass(frozen=True)
class TVar(Type):
    name: str


@dataclass(frozen=True)
class Fuse(Type):
    left: Type
    right: Type


@dataclass(frozen=True)
class Twist(Type):
    left: Type
    right: Type


@dataclass(frozen=True)
class Under(Type):
    """``A \\ B``: takes its argument at the left end of the context."""

    arg: Type
    result: Type


@dataclass(frozen=True)
class Over(Type):
    """``A ->> B``: takes its argument at the right end of the context."""

    arg: Type
    result: Type


@dataclass(frozen=True)
class Lolli(Type):
    arg: Type
    result: Type


@dataclass(frozen=True)
class UArrow(Type):
    arg: Type
    result: Type


@dataclass(frozen=True)
class Sum(Type):
    alts: tuple[tuple[str, Type], ...]

    def __post_init__(self):
        labels = [label for label, _ in self.alts]
        if not labels:
            raise ValueError("sum type needs at least one label")
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate labels in sum type: {labels}")
        object.__setattr__(self, "alts", tuple(sorted(self.alts, key=lambda a: a[0])))

    @property
    def branches(self) -> dict[str, Type]:
        return dict(self.alts)


@dataclass(frozen=True)
class Unit(Type):
    pass


@dataclass(frozen=True)
class Forall(Type):
    var: str
    body: Type


@dataclass(frozen=True)
class Named(Type):
    """Instance ``F[A1, ..., An]`` of a type definition; args are positional."""

    name: str
    args: tuple[Type, ...] = ()


ARROWS = (Over, Under, Lolli, UArrow)
PRODUCTS = (Fuse, Twist)


def forall(vars: str, body: Type) -> Type:
    for v in reversed(vars.split()):
        body = Forall(v, body)
    return body


# ---------------------------------------------------------------------------
# Expressions and values


@dataclass(frozen=True)
class Expr:
    pos: Optional[Pos] = field(default=None, compare=False, repr=False, kw_only=True)

    def __str__(self) -> str:
        return pretty_expr(self)


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Lam(Expr):
    binder: str
    body: Expr


@dataclass(frozen=True)
class App(Expr):
    fn: Expr
    arg: Expr


@dataclass(frozen=True)
class Pair(Expr):
    fst: Expr
    snd: Expr


@dataclass(frozen=True)
class MatchPair(Expr):
    scrutinee: Expr
    left: str
    right: str
    body: Expr


@dataclass(frozen=True)
class UnitVal(Expr):
    pass


@dataclass(frozen=True)
class MatchUnit(Expr):
    scrutinee: Expr
    body: Expr


@dataclass(frozen=True)
class Inj(Expr):
    label: str
    payload: Expr


@dataclass(frozen=True)
class MatchSum(Expr):
    scrutinee: Expr
    branches: tuple[tuple[str, str, Expr], ...]

    def __post_init__(self):
        labels = [b[0] for b in self.branches]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate branch labels: {labels}")
        object.__setattr__(self, "branches", tuple(sorted(self.branches, key=lambda b: b[0])))


@dataclass(frozen=True)
class TyInst(Expr):
    subject: Expr
    type: Type


@dataclass(frozen=True)
class Fix(Expr):
    """Recursive declaration ``name : type`` unrolled on evaluation."""

    name: str
    type: Type
    body: Expr


@dataclass(frozen=True)
class Atom(Expr):
    """Opaque symbol; also a value."""

    name: str


@dataclass(frozen=True)
class SymApp(Expr):
    """Uninterpreted application of a symbolic head; also a value."""

    head: str
    args: tuple = ()


@dataclass(frozen=True)
class Closure:
    binder: str
    body: Expr

    def __str__(self) -> str:
        return pretty_expr(value_to_expr(self))


@dataclass(frozen=True)
class VPair:
    fst: "Value"
    snd: "Value"

    def __str__(self) -> str:
        return pretty_expr(value_to_expr(self))


@dataclass(frozen=True)
class VUnit:
    def __str__(self) -> str:
        return "()"


@dataclass(frozen=True)
class VInj:
    label: str
    value: "Value"

    def __str__(self) -> str:
        return pretty_expr(value_to_expr(self))


Value = Union[Closure, VPair, VUnit, VInj, Atom, SymApp]
VALUE_TYPES = (Closure, VPair, VUnit, VInj, Atom, SymApp)


def value_to_expr(v: Value) -> Expr:
    match v:
        case Closure(x, body):
            return Lam(x, body)
        case VPair(a, b):
            return Pair(value_to_expr(a), value_to_expr(b))
        case VUnit():
            return UnitVal()
        case VInj(label, w):
            return Inj(label, value_to_expr(w))
        case Atom() | SymApp():
            return v
    raise TypeError(f"not a value: {v!r}")


# ---------------------------------------------------------------------------
# Programs


@dataclass(frozen=True)
class TypeDef:
    name: str
    params: tuple[str, ...]
    body: Type
    pos: Optional[Pos] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Signature:
    defs: tuple[TypeDef, ...] = ()

    def __post_init__(self):
        index: dict[str, TypeDef] = {}
        for d in self.defs:
            if d.name in index:
                raise DuplicateDefinition(f"type {d.name} defined twice", *(d.pos or (None, None)))
            index[d.name] = d
        object.__setattr__(self, "_index", index)

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def get(self, name: str) -> Optional[TypeDef]:
        return self._index.get(name)

    def names(self) -> list[str]:
        return [d.name for d in self.defs]

    def extend(self, other: "Signature") -> "Signature":
        return Signature(self.defs + tuple(d for d in other.defs if d.name not in self))


@dataclass(frozen=True)
class Decl:
    name: str
    type: Type
    body: Expr
    recursive: bool = False
    mode: Optional[Mode] = None
    pos: Optional[Pos] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Program:
    signature: Signature = field(default_factory=Signature)
    decls: tuple[Decl, ...] = ()

    def decl(self, name: str) -> Decl:
        for d in self.decls:
            if d.name == name:
                return d
        raise KeyError(name)

    def names(self) -> list[str]:
        return [d.name for d in self.decls]


# ---------------------------------------------------------------------------
# Free variables, renaming, alpha-equivalence


def free_vars(e: Expr) -> frozenset[str]:
    match e:
        case Var(x):
            return frozenset((x,))
        case Lam(x, body):
            return free_vars(body) - {x}
        case App(f, a):
            return free_vars(f) | free_vars(a)
        case Pair(a, b):
            return free_vars(a) | free_vars(b)
        case MatchPair(s, x, y, body):
            return free_vars(s) | (free_vars(body) - {x, y})
        case MatchUnit(s, body):
            return free_vars(s) | free_vars(body)
        case Inj(_, p):
            return free_vars(p)
        case MatchSum(s, branches):
            out = free_vars(s)
            for _, x, body in branches:
                out |= free_vars(body) - {x}
            return out
        case TyInst(s, _):
            return free_vars(s)
        case Fix(f, _, body):
            return free_vars(body) - {f}
        case SymApp(_, args):
            out = frozenset()
            for a in args:
                if isinstance(a, Expr):
                    out |= free_vars(a)
            return out
        case _:
            return frozenset()


def fresh_name(base: str, avoid) -> str:
    stem = base.rstrip("0123456789'") or "x"
    for i in itertools.count(1):
        cand = f"{stem}{i}"
        if cand not in avoid:
            return cand
    raise AssertionError("unreachable")


def rename_free(e: Expr, old: str, new: str) -> Expr:
    """Replace free occurrences of variable `old` by `new` (assumed fresh)."""
    return subst_expr({old: Var(new)}, e)


def subst_expr(sub: dict[str, Expr], e: Expr) -> Expr:
    """Simultaneous capture-avoiding substitution of expressions for variables."""
    if not sub:
        return e
    match e:
        case Var(x):
            return sub.get(x, e)
        case Lam(x, body):
            x2, body2, inner = _under_binder(sub, x, body)
            return Lam(x2, subst_expr(inner, body2), pos=e.pos)
        case App(f, a):
            return App(subst_expr(sub, f), subst_expr(sub, a), pos=e.pos)
        case Pair(a, b):
            return Pair(subst_expr(sub, a), subst_expr(sub, b), pos=e.pos)
        case MatchPair(s, x, y, body):
            x2, body2, inner = _under_binder(sub, x, body)
            y2, body3, inner2 = _under_binder(inner, y, body2, extra_avoid={x2})
            return MatchPair(subst_expr(sub, s), x2, y2, subst_expr(inner2, body3), pos=e.pos)
        case MatchUnit(s, body):
            return MatchUnit(subst_expr(sub, s), subst_expr(sub, body), pos=e.pos)
        case Inj(label, p):
            return Inj(label, subst_expr(sub, p), pos=e.pos)
        case MatchSum(s, branches):
            new_branches = []
            for label, x, body in branches:
                x2, body2, inner = _under_binder(sub, x, body)
                new_branches.append((label, x2, subst_expr(inner, body2)))
            return MatchSum(subst_expr(sub, s), tuple(new_branches), pos=e.pos)
        case TyInst(s, ty):
            return TyInst(subst_expr(sub, s), ty, pos=e.pos)
        case Fix(f, ty, body):
            f2, body2, inner = _under_binder(sub, f, body)
            return Fix(f2, ty, subst_expr(inner, body2), pos=e.pos)
        case _:
            return e


def _under_binder(sub: dict[str, Expr], x: str, body: Expr, extra_avoid=frozenset()):
    inner = {k: v for k, v in sub.items() if k != x}
    if not inner:
        return x, body, inner
    incoming = set()
    for v in inner.values():
        incoming |= free_vars(v)
    if x in incoming or x in extra_avoid:
        avoid = incoming | free_vars(body) | set(inner) | set(extra_avoid)
        x2 = fresh_name(x, avoid)
        return x2, rename_free(body, x, x2), inner
    return x, body, inner


def alpha_key(e: Expr, env: tuple[str, ...] = ()):
    """Nameless structural key: alpha-equivalent expressions get equal keys."""

    def ref(x):
        for i in range(len(env) - 1, -1, -1):
            if env[i] == x:
                return ("bv", len(env) - 1 - i)
        return ("fv", x)

    match e:
        case Var(x):
            return ref(x)
        case Lam(x, body):
            return ("lam", alpha_key(body, env + (x,)))
        case App(f, a):
            return ("app", alpha_key(f, env), alpha_key(a, env))
        case Pair(a, b):
            return ("pair", alpha_key(a, env), alpha_key(b, env))
        case MatchPair(s, x, y, body):
            return ("mpair", alpha_key(s, env), alpha_key(body, env + (x, y)))
        case UnitVal():
            return ("unit",)
        case MatchUnit(s, body):
            return ("munit", alpha_key(s, env), alpha_key(body, env))
        case Inj(label, p):
            return ("inj", label, alpha_key(p, env))
        case MatchSum(s, branches):
            return ("msum", alpha_key(s, env),
                    tuple((label, alpha_key(body, env + (x,))) for label, x, body in branches))
        case TyInst(s, ty):
            return ("tyinst", alpha_key(s, env), type_key(ty))
        case Fix(f, ty, body):
            return ("fix", type_key(ty), alpha_key(body, env + (f,)))
        case Atom(name):
            return ("atom", name)
        case SymApp(head, args):
            return ("symapp", head, tuple(alpha_key(value_to_expr(a) if not isinstance(a, Expr) else a, env)
                                          for a in args))
    raise TypeError(f"not an expression: {e!r}")


def type_key(t: Type, env: tuple[str, ...] = ()):
    match t:
        case TVar(a):
            for i in range(len(env) - 1, -1, -1):
                if env[i] == a:
                    return ("bv", len(env) - 1 - i)
            return ("fv", a)
        case Forall(a, body):
            return ("all", type_key(body, env + (a,)))
        case Sum(alts):
            return ("sum", tuple((label, type_key(a, env)) for label, a in alts))
        case Named(name, args):
            return ("named", name, tuple(type_key(a, env) for a in args))
        case Unit():
            return ("one",)
        case _:
            a, b = (t.left, t.right) if isinstance(t, PRODUCTS) else (t.arg, t.result)
            return (type(t).__name__, type_key(a, env), type_key(b, env))


def alpha_equal(e1, e2) -> bool:
    if isinstance(e1, Type) and isinstance(e2, Type):
        return type_key(e1) == type_key(e2)
    if not isinstance(e1, Expr):
        e1 = value_to_expr(e1)
    if not isinstance(e2, Expr):
        e2 = value_to_expr(e2)
    return alpha_key(e1) == alpha_key(e2)


def subexprs(e: Expr) -> Iterator[Expr]:
    yield e
    match e:
        case Lam(_, b) | Inj(_, b) | TyInst(b, _) | Fix(_, _, b):
            yield from subexprs(b)
        case App(a, b) | Pair(a, b) | MatchPair(a, _, _, b) | MatchUnit(a, b):
            yield from subexprs(a)
            yield from subexprs(b)
        case MatchSum(s, branches):
            yield from subexprs(s)
            for _, _, b in branches:
                yield from subexprs(b)


# ---------------------------------------------------------------------------
# Lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>--[^\n]*)
  | (?P<sym>->>|->|-o(?![A-Za-z0-9_'])|=>|[\\.,:()\[\]{}*%=+@])
  | (?P<atom>\#[A-Za-z0-9_']+)
  | (?P<one>1(?![0-9]))
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
    """,
    re.VERBOSE,
)

KEYWORDS = {"def", "rec", "type", "match", "all", "fix"}


@dataclass(frozen=True)
class Token:
    kind: str  # 'ident', 'kw', 'sym', 'atom', 'one', 'eof'
    text: str
    line: int
    col: int
    glued: bool  # no whitespace before this token


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col, i = 1, 1, 0
    glued = False
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if not m:
            raise ParseError(f"unexpected character {text[i]!r}", line, col)
        kind = m.lastgroup
        lexeme = m.group()
        if kind == "nl":
            line, col = line + 1, 1
            glued = False
        elif kind in ("ws", "comment"):
            col += len(lexeme)
            glued = False
        else:
            if kind == "ident" and lexeme in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, lexeme, line, col, glued))
            col += len(lexeme)
            glued = True
        i = m.end()
    tokens.append(Token("eof", "", line, col, False))
    return tokens


# ---------------------------------------------------------------------------
# Parser

_ARROW_SYMS = {"->>": Over, "\\": Under, "-o": Lolli, "->": UArrow}
_PROD_SYMS = {"*": Fuse, "%": Twist}


class _Parser:
    def __init__(self, text: str, type_arities: Optional[dict[str, int]] = None,
                 term_names: frozenset[str] = frozenset()):
        self.toks = tokenize(text)
        self.i = 0
        self.arities = dict(type_arities or {})
        self.term_names = set(term_names)

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str, k: int = 0) -> bool:
        t = self.peek(k)
        return t.kind in ("sym", "kw", "one") and t.text == text

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}")
        return self.advance()

    def ident(self, what: str = "identifier") -> Token:
        if self.tok.kind != "ident":
            self.error(f"expected {what}")
        return self.advance()

    def error(self, msg: str):
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(f"{msg}, found {found}", t.line, t.col)

    # types
    def type_(self, scope: dict[str, str]) -> Type:
        if self.at("all"):
            self.advance()
            names = [self.ident("type variable").text]
            while self.tok.kind == "ident":
                names.append(self.advance().text)
            self.expect(".")
            inner = dict(scope)
            binders = []
            for n in names:
                internal = n if n not in inner.values() else fresh_name(n, set(inner.values()))
                inner[n] = internal
                binders.append(internal)
            body = self.type_(inner)
            for b in reversed(binders):
                body = Forall(b, body)
            return body
        left = self.prod_type(scope)
        if self.tok.kind == "sym" and self.tok.text in _ARROW_SYMS:
            ctor = _ARROW_SYMS[self.advance().text]
            return ctor(left, self.type_(scope))
        return left

    def prod_type(self, scope) -> Type:
        left = self.atom_type(scope)
        if self.tok.kind == "sym" and self.tok.text in _PROD_SYMS:
            ctor = _PROD_SYMS[self.advance().text]
            return ctor(left, self.prod_type(scope))
        return left

    def starts_atom_type(self) -> bool:
        t = self.tok
        return t.kind in ("ident", "one") or (t.kind == "sym" and t.text in ("(", "+"))

    def atom_type(self, scope) -> Type:
        t = self.tok
        if t.kind == "one":
            self.advance()
            return Unit()
        if self.at("("):
            self.advance()
            ty = self.type_(scope)
            self.expect(")")
            return ty
        if self.at("+"):
            self.advance()
            self.expect("{")
            alts = []
            while True:
                label = self.ident("label").text
                self.expect(":")
                alts.append((label, self.type_(scope)))
                if not self.at(","):
                    break
                self.advance()
            self.expect("}")
            try:
                return Sum(tuple(alts))
            except ValueError as exc:
                raise ParseError(str(exc), t.line, t.col) from None
        if t.kind == "ident":
            self.advance()
            if t.text in scope:
                return TVar(scope[t.text])
            if self.at("[") and self.tok.glued:
                self.advance()
                args = []
                if not self.at("]"):
                    args.append(self.type_(scope))
                    while self.at(","):
                        self.advance()
                        args.append(self.type_(scope))
                self.expect("]")
                return Named(t.text, tuple(args))
            if t.text in self.arities:
                args = [self.atom_type(scope) for _ in range(self.arities[t.text])]
                return Named(t.text, tuple(args))
            return TVar(t.text)
        self.error("expected a type")

    # expressions
    def expr(self, bound: frozenset[str]) -> Expr:
        if self.at("\\"):
            start = self.advance()
            names = [self.ident("binder").text]
            while self.tok.kind == "ident":
                names.append(self.advance().text)
            self.expect(".")
            body = self.expr(bound | set(names))
            for n in reversed(names):
                body = Lam(n, body, pos=(start.line, start.col))
            return body
        return self.app_expr(bound)

    def _arms_ahead(self) -> bool:
        if self.at("{"):
            return True
        if not (self.at("(") and self.at("(", 1)):
            return False
        if self.at(")", 2) and self.at("=>", 3):
            return True
        return (self.peek(2).kind == "ident" and self.at(",", 3) and self.peek(4).kind == "ident"
                and self.at(")", 5) and self.at("=>", 6))

    def starts_atom_expr(self) -> bool:
        t = self.tok
        if t.kind in ("ident", "atom"):
            return True
        if t.kind == "kw" and t.text in ("match", "fix"):
            return True
        return t.kind == "sym" and t.text == "("

    def app_expr(self, bound, stop_at_arms: bool = False) -> Expr:
        start = self.tok
        e = self.postfix_expr(bound)
        while True:
            if stop_at_arms and self._arms_ahead():
                break
            if self.starts_atom_expr():
                e = App(e, self.postfix_expr(bound), pos=(start.line, start.col))
            elif self.at("\\") and not stop_at_arms:
                e = App(e, self.expr(bound), pos=(start.line, start.col))
                break
            else:
                break
        return e

    def postfix_expr(self, bound) -> Expr:
        start = self.tok
        e = self.atom_expr(bound)
        while self.at("["):
            self.advance()
            ty = self.type_({})
            self.expect("]")
            e = TyInst(e, ty, pos=(start.line, start.col))
        return e

    def group(self, bound) -> Expr:
        start = self.expect("(")
        pos = (start.line, start.col)
        if self.at(")"):
            self.advance()
            return UnitVal(pos=pos)
        first = self.expr(bound)
        if self.at(","):
            self.advance()
            second = self.expr(bound)
            self.expect(")")
            return Pair(first, second, pos=pos)
        self.expect(")")
        return first

    def atom_expr(self, bound) -> Expr:
        t = self.tok
        pos = (t.line, t.col)
        if t.kind == "atom":
            self.advance()
            return Atom(t.text[1:], pos=pos)
        if t.kind == "ident":
            self.advance()
            is_var = t.text in bound or t.text in self.term_names
            if not is_var and self.at("(") and self.tok.glued:
                return Inj(t.text, self.group(bound), pos=pos)
            return Var(t.text, pos=pos)
        if self.at("("):
            return self.group(bound)
        if self.at("match"):
            return self.match_expr(bound)
        if self.at("fix"):
            self.advance()
            name = self.ident("recursive name").text
            self.expect(":")
            ty = self.type_({})
            self.expect(".")
            return Fix(name, ty, self.expr(bound | {name}), pos=pos)
        self.error("expected an expression")

    def match_expr(self, bound) -> Expr:
        start = self.expect("match")
        pos = (start.line, start.col)
        scrut = self.app_expr(bound, stop_at_arms=True)
        if self.at("{"):
            self.advance()
            branches = []
            while True:
                label = self.ident("label").text
                self.expect("(")
                x = self.ident("binder").text
                self.expect(")")
                self.expect("=>")
                branches.append((label, x, self.expr(bound | {x})))
                if not self.at(","):
                    break
                self.advance()
            self.expect("}")
            try:
                return MatchSum(scrut, tuple(branches), pos=pos)
            except ValueError as exc:
                raise ParseError(str(exc), *pos) from None
        self.expect("(")
        self.expect("(")
        if self.at(")"):
            self.advance()
            self.expect("=>")
            body = self.expr(bound)
            self.expect(")")
            return MatchUnit(scrut, body, pos=pos)
        x = self.ident("binder").text
        self.expect(",")
        y = self.ident("binder").text
        if x == y:
            raise ParseError(f"pattern binds {x} twice", *pos)
        self.expect(")")
        self.expect("=>")
        body = self.expr(bound | {x, y})
        self.expect(")")
        return MatchPair(scrut, x, y, body, pos=pos)

    # programs
    def program(self) -> Program:
        self._prescan()
        defs: list[TypeDef] = []
        decls: list[Decl] = []
        seen: set[str] = set()
        while self.tok.kind != "eof":
            start = self.tok
            if self.at("type"):
                self.advance()
                name = self.ident("type name").text
                params: list[str] = []
                if self.at("["):
                    self.advance()
                    if not self.at("]"):
                        params.append(self.ident("type parameter").text)
                        while self.at(","):
                            self.advance()
                            params.append(self.ident("type parameter").text)
                    self.expect("]")
                if len(set(params)) != len(params):
                    raise ParseError(f"repeated parameter in type {name}", start.line, start.col)
                self.expect("=")
                body = self.type_({p: p for p in params})
                if name in (d.name for d in defs):
                    raise DuplicateDefinition(f"type {name} defined twice", start.line, start.col)
                defs.append(TypeDef(name, tuple(params), body, pos=(start.line, start.col)))
                continue
            mode = None
            if self.at("@"):
                self.advance()
                pragma = self.ident("pragma")
                if pragma.text != "mode":
                    raise ParseError(f"unknown pragma @{pragma.text}", pragma.line, pragma.col)
                m = self.ident("mode")
                try:
                    mode = Mode(m.text)
                except ValueError:
                    raise ParseError(f"unknown mode {m.text!r}", m.line, m.col) from None
            recursive = False
            if self.at("rec"):
                self.advance()
                recursive = True
            if not self.at("def"):
                self.error("expected 'type' or 'def'")
            self.advance()
            name_tok = self.ident("declaration name")
            name = name_tok.text
            if name in seen:
                raise DuplicateDefinition(f"declaration {name} defined twice", name_tok.line, name_tok.col)
            self.expect(":")
            ty = self.type_({})
            self.expect("=")
            in_scope = frozenset(seen | ({name} if recursive else set()))
            body = self.expr(in_scope)
            seen.add(name)
            decls.append(Decl(name, ty, body, recursive, mode, pos=(start.line, start.col)))
        return Program(Signature(tuple(defs)), tuple(decls))

    def _prescan(self):
        toks = self.toks
        for k, t in enumerate(toks):
            if t.kind == "kw" and t.text == "type" and toks[k + 1].kind == "ident":
                arity = 0
                if toks[k + 2].text == "[" and toks[k + 2].kind == "sym":
                    j = k + 3
                    while toks[j].kind == "ident":
                        arity += 1
                        j += 1
                        if toks[j].text == ",":
                            j += 1
                self.arities[toks[k + 1].text] = arity
            elif t.kind == "kw" and t.text == "def" and toks[k + 1].kind == "ident":
                self.term_names.add(toks[k + 1].text)


def parse_program(text: str) -> Program:
    """Parse and validate a whole program."""
    from . import types as _types

    program = _Parser(text).program()
    _types.validate_signature(program.signature)
    for d in program.decls:
        _types.check_well_formed(d.type, program.signature, frozenset(), pos=d.pos)
    return program


def parse_type(text: str, sig: Optional[Signature] = None) -> Type:
    arities = {d.name: len(d.params) for d in sig.defs} if sig else {}
    p = _Parser(text, arities)
    ty = p.type_({})
    if p.tok.kind != "eof":
        p.error("unexpected trailing input")
    return ty


def parse_expr(text: str, names=frozenset()) -> Expr:
    p = _Parser(text, term_names=frozenset(names))
    e = p.expr(frozenset())
    if p.tok.kind != "eof":
        p.error("unexpected trailing input")
    return e


# ---------------------------------------------------------------------------
# Pretty-printing

_ARROW_TEXT = {Over: "->>", Under: "\\", Lolli: "-o", UArrow: "->"}
_PROD_TEXT = {Fuse: "*", Twist: "%"}


def pretty_type(t: Type) -> str:
    match t:
        case TVar(a):
            return a
        case Unit():
            return "1"
        case Named(name, args):
            return f"{name}[{', '.join(pretty_type(a) for a in args)}]"
        case Sum(alts):
            return "+{" + ", ".join(f"{label} : {pretty_type(a)}" for label, a in alts) + "}"
        case Forall(a, body):
            return f"all {a}. {pretty_type(body)}"
        case Over() | Under() | Lolli() | UArrow():
            left = pretty_type(t.arg)
            if isinstance(t.arg, ARROWS + (Forall,)):
                left = f"({left})"
            right = pretty_type(t.result)
            if isinstance(t.result, ARROWS) and type(t.result) is not type(t):
                right = f"({right})"
            return f"{left} {_ARROW_TEXT[type(t)]} {right}"
        case Fuse() | Twist():
            left = pretty_type(t.left)
            if isinstance(t.left, ARROWS + PRODUCTS + (Forall,)):
                left = f"({left})"
            right = pretty_type(t.right)
            if isinstance(t.right, ARROWS + (Forall,)) or (
                    isinstance(t.right, PRODUCTS) and type(t.right) is not type(t)):
                right = f"({right})"
            return f"{left} {_PROD_TEXT[type(t)]} {right}"
    raise TypeError(f"not a type: {t!r}")


def _is_atomic_expr(e: Expr) -> bool:
    return isinstance(e, (Var, Pair, UnitVal, Inj, Atom)) or (isinstance(e, SymApp) and not e.args)


def pretty_expr(e) -> str:
    if not isinstance(e, Expr):
        e = value_to_expr(e)
    match e:
        case Var(x):
            return x
        case Atom(name):
            return f"#{name}"
        case UnitVal():
            return "()"
        case Lam(x, body):
            return f"\\{x}. {pretty_expr(body)}"
        case Pair(a, b):
            return f"({pretty_expr(a)}, {pretty_expr(b)})"
        case Inj(label, p):
            if isinstance(p, (Pair, UnitVal)):
                return f"{label}{pretty_expr(p)}"
            return f"{label}({pretty_expr(p)})"
        case App(f, a):
            return f"{_fn_pos(f)} {_arg_pos(a)}"
        case SymApp(head, args):
            parts = [f"#{head}"] + [_arg_pos(a if isinstance(a, Expr) else value_to_expr(a)) for a in args]
            return " ".join(parts)
        case TyInst(s, ty):
            return f"{_arg_pos(s)} [{pretty_type(ty)}]"
        case MatchPair(s, x, y, body):
            return f"match {_fn_pos(s)} (({x}, {y}) => {pretty_expr(body)})"
        case MatchUnit(s, body):
            return f"match {_fn_pos(s)} (() => {pretty_expr(body)})"
        case MatchSum(s, branches):
            arms = ", ".join(f"{label}({x}) => {pretty_expr(b)}" for label, x, b in branches)
            return f"match {_fn_pos(s)} {{{arms}}}"
        case Fix(f, ty, body):
            return f"(fix {f} : {pretty_type(ty)}. {pretty_expr(body)})"
    raise TypeError(f"not an expression: {e!r}")


def _fn_pos(e: Expr) -> str:
    if isinstance(e, (App, TyInst)) or _is_atomic_expr(e) or isinstance(e, (Fix, SymApp)):
        return pretty_expr(e)
    return f"({pretty_expr(e)})"


def _arg_pos(e: Expr) -> str:
    if _is_atomic_expr(e) or isinstance(e, Fix):
        return pretty_expr(e)
    return f"({pretty_expr(e)})"


def pretty_program(p: Program) -> str:
    lines = []
    for d in p.signature.defs:
        params = f"[{', '.join(d.params)}]" if d.params else "[]"
        lines.append(f"type {d.name}{params} = {pretty_type(d.body)}")
    for d in p.decls:
        prefix = f"@mode {d.mode.value}\n" if d.mode else ""
        rec = "rec " if d.recursive else ""
        lines.append(f"{prefix}{rec}def {d.name} : {pretty_type(d.type)} =\n  {pretty_expr(d.body)}")
    return "\n".join(lines) + ("\n" if lines else "")
