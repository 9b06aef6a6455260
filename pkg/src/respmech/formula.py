"""Boolean and quantified Boolean formula trees.

Grammar accepted by :func:`parse` (binding strength low to high:
``->``, ``|``, ``&``, ``!``):

    formula := quant | impl
    quant   := ("@all" | "@ex") ident+ "." formula
    impl    := disj ("->" impl)?
    disj    := conj ("|" conj)*
    conj    := neg ("&" neg)*
    neg     := "!" neg | atom
    atom    := "T" | "F" | ident | "(" formula ")"
    ident   := [A-Za-z_][A-Za-z0-9_]*   (excluding the constants T, F)

``T`` and ``F`` are reserved constants, ``->`` associates to the right,
``&`` and ``|`` to the left.  A quantifier body extends as far right as
possible; a quantifier nested inside a connective must be parenthesised.
:func:`render` emits this grammar with minimal parentheses, and
``parse(render(f))`` rebuilds a structurally equal tree.
"""

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Iterator, Mapping


class FormulaSyntaxError(ValueError):
    """Malformed formula text; carries the offending line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class CaptureError(ValueError):
    """Renaming would pull a free occurrence under a binder of the new name."""


class BudgetExceededError(RuntimeError):
    """An enumeration would be larger than the configured budget allows."""


class Formula:
    """Base class for formula nodes.  Instances are immutable."""

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True)
class Const(Formula):
    value: bool


@dataclass(frozen=True)
class Var(Formula):
    name: str


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


def _checked_block(names: Iterable[str]) -> tuple[str, ...]:
    names = tuple(names)
    if not names:
        raise ValueError("quantifier block must bind at least one variable")
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate variable in quantifier block: {names}")
    return names


@dataclass(frozen=True)
class Forall(Formula):
    vars: tuple[str, ...]
    body: Formula

    def __post_init__(self):
        object.__setattr__(self, "vars", _checked_block(self.vars))


@dataclass(frozen=True)
class Exists(Formula):
    vars: tuple[str, ...]
    body: Formula

    def __post_init__(self):
        object.__setattr__(self, "vars", _checked_block(self.vars))


TRUE = Const(True)
FALSE = Const(False)


def forall(names: Iterable[str], body: Formula) -> Formula:
    """Universal block over ``names``; identity when the list is empty."""
    names = tuple(names)
    return Forall(names, body) if names else body


def exists(names: Iterable[str], body: Formula) -> Formula:
    """Existential block over ``names``; identity when the list is empty."""
    names = tuple(names)
    return Exists(names, body) if names else body


def and_all(items: Iterable[Formula]) -> Formula:
    """Left-folded conjunction; the empty conjunction is ``T``."""
    out = None
    for f in items:
        out = f if out is None else And(out, f)
    return TRUE if out is None else out


def or_all(items: Iterable[Formula]) -> Formula:
    """Left-folded disjunction; the empty disjunction is ``F``."""
    out = None
    for f in items:
        out = f if out is None else Or(out, f)
    return FALSE if out is None else out


# ---------------------------------------------------------------------------
# Traversals


def free_vars(f: Formula) -> tuple[str, ...]:
    """Variables occurring free in ``f``, in first-occurrence order."""
    out: list[str] = []
    seen: set[str] = set()

    def walk(node: Formula, bound: frozenset[str]) -> None:
        if isinstance(node, Var):
            if node.name not in bound and node.name not in seen:
                seen.add(node.name)
                out.append(node.name)
        elif isinstance(node, Not):
            walk(node.arg, bound)
        elif isinstance(node, (And, Or, Implies)):
            walk(node.left, bound)
            walk(node.right, bound)
        elif isinstance(node, (Forall, Exists)):
            walk(node.body, bound | set(node.vars))

    walk(f, frozenset())
    return tuple(out)


def bound_vars(f: Formula) -> frozenset[str]:
    """Every name bound by some quantifier block in ``f``."""
    out: set[str] = set()

    def walk(node: Formula) -> None:
        if isinstance(node, Not):
            walk(node.arg)
        elif isinstance(node, (And, Or, Implies)):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, (Forall, Exists)):
            out.update(node.vars)
            walk(node.body)

    walk(f)
    return frozenset(out)


def is_quantifier_free(f: Formula) -> bool:
    if isinstance(f, (Const, Var)):
        return True
    if isinstance(f, Not):
        return is_quantifier_free(f.arg)
    if isinstance(f, (And, Or, Implies)):
        return is_quantifier_free(f.left) and is_quantifier_free(f.right)
    return False


def _quantifier_width(f: Formula) -> int:
    """Total number of binder slots, counting repeats."""
    if isinstance(f, (Const, Var)):
        return 0
    if isinstance(f, Not):
        return _quantifier_width(f.arg)
    if isinstance(f, (And, Or, Implies)):
        return _quantifier_width(f.left) + _quantifier_width(f.right)
    return len(f.vars) + _quantifier_width(f.body)


# ---------------------------------------------------------------------------
# Evaluation


def _eval(f: Formula, env: dict[str, bool]) -> bool:
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Var):
        try:
            return env[f.name]
        except KeyError:
            raise ValueError(f"unbound variable {f.name!r}") from None
    if isinstance(f, Not):
        return not _eval(f.arg, env)
    if isinstance(f, And):
        return _eval(f.left, env) and _eval(f.right, env)
    if isinstance(f, Or):
        return _eval(f.left, env) or _eval(f.right, env)
    if isinstance(f, Implies):
        return (not _eval(f.left, env)) or _eval(f.right, env)
    # quantifier: expand over all assignments of the block, short-circuiting
    existential = isinstance(f, Exists)
    saved = [(v, env.get(v)) for v in f.vars]
    try:
        for combo in product((False, True), repeat=len(f.vars)):
            for v, b in zip(f.vars, combo):
                env[v] = b
            if _eval(f.body, env) == existential:
                return existential
        return not existential
    finally:
        for v, old in saved:
            if old is None:
                env.pop(v, None)
            else:
                env[v] = old


def evaluate(f: Formula, valuation: Mapping[str, object]) -> bool:
    """Value of a quantifier-free formula under a total valuation.

    Raises ValueError on a quantifier node or an unbound variable.
    """
    if not is_quantifier_free(f):
        raise ValueError("evaluate() requires a quantifier-free formula")
    env = {name: bool(v) for name, v in valuation.items()}
    return _eval(f, env)


def eval_qbf(f: Formula) -> bool:
    """Truth value of a closed formula by naive quantifier expansion.

    Exponential in the number of bound variables; intended for desk scale.
    """
    fv = free_vars(f)
    if fv:
        raise ValueError(f"formula is not closed; free variables: {', '.join(fv)}")
    return _eval(f, {})


def semantically_equivalent(f: Formula, g: Formula, max_vars: int = 20) -> bool:
    """True when ``f`` and ``g`` agree under every valuation of their free
    variables, expanding quantified subformulas.

    The combined count of free and bound variables must not exceed
    ``max_vars`` (raises BudgetExceededError otherwise): the check costs up
    to 2**max_vars evaluations.
    """
    fv = list(free_vars(f))
    fv.extend(v for v in free_vars(g) if v not in fv)
    width = len(fv) + _quantifier_width(f) + _quantifier_width(g)
    if width > max_vars:
        raise BudgetExceededError(
            f"{width} variables exceed the equivalence budget of {max_vars}"
        )
    for combo in product((False, True), repeat=len(fv)):
        env = dict(zip(fv, combo))
        if _eval(f, env) != _eval(g, dict(env)):
            return False
    return True


# ---------------------------------------------------------------------------
# Substitution and renaming


def _checked_names(names: Iterable[str], what: str) -> tuple[str, ...]:
    names = tuple(names)
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate variable in {what}: {names}")
    return names


def substitute(f: Formula, bits: Iterable[object], names: Iterable[str]) -> Formula:
    """Replace each free occurrence of ``names[j]`` with the constant for
    ``bits[j]``.  Bound occurrences are untouched.
    """
    names = _checked_names(names, "substitution")
    bits = tuple(bits)
    if len(bits) != len(names):
        raise ValueError(
            f"substitution arity mismatch: {len(bits)} values for {len(names)} variables"
        )
    mapping = {n: (TRUE if b else FALSE) for n, b in zip(names, bits)}

    def walk(node: Formula, mapping: dict[str, Const]) -> Formula:
        if isinstance(node, Const):
            return node
        if isinstance(node, Var):
            return mapping.get(node.name, node)
        if isinstance(node, Not):
            return Not(walk(node.arg, mapping))
        if isinstance(node, (And, Or, Implies)):
            return type(node)(walk(node.left, mapping), walk(node.right, mapping))
        inner = {k: v for k, v in mapping.items() if k not in node.vars}
        if not inner:
            return node
        return type(node)(node.vars, walk(node.body, inner))

    return walk(f, mapping)


def rename(f: Formula, new_names: Iterable[str], old_names: Iterable[str]) -> Formula:
    """Positionally rename free occurrences of ``old_names`` to ``new_names``.

    The renaming is simultaneous.  Raises CaptureError if a renamed
    occurrence would fall inside a quantifier binding its new name.
    """
    old_names = _checked_names(old_names, "renaming source")
    new_names = _checked_names(new_names, "renaming target")
    if len(new_names) != len(old_names):
        raise ValueError(
            f"renaming arity mismatch: {len(new_names)} names for {len(old_names)} variables"
        )
    mapping = dict(zip(old_names, new_names))

    def walk(node: Formula, bound: frozenset[str]) -> Formula:
        if isinstance(node, Const):
            return node
        if isinstance(node, Var):
            if node.name in bound or node.name not in mapping:
                return node
            target = mapping[node.name]
            if target in bound:
                raise CaptureError(
                    f"renaming {node.name!r} to {target!r} would be captured by a binder"
                )
            return Var(target)
        if isinstance(node, Not):
            return Not(walk(node.arg, bound))
        if isinstance(node, (And, Or, Implies)):
            return type(node)(walk(node.left, bound), walk(node.right, bound))
        return type(node)(node.vars, walk(node.body, bound | set(node.vars)))

    return walk(f, frozenset())


# ---------------------------------------------------------------------------
# Rendering

_PREC_QUANT = 0
_PREC_IMPL = 1
_PREC_OR = 2
_PREC_AND = 3
_PREC_NOT = 4
_PREC_ATOM = 5


def render(f: Formula) -> str:
    """Formula back to grammar text with minimal parentheses."""
    return _render(f, _PREC_QUANT)


def _render(f: Formula, min_prec: int) -> str:
    if isinstance(f, Const):
        return "T" if f.value else "F"
    if isinstance(f, Var):
        return f.name
    if isinstance(f, Not):
        text, prec = "!" + _render(f.arg, _PREC_NOT), _PREC_NOT
    elif isinstance(f, And):
        text = f"{_render(f.left, _PREC_AND)} & {_render(f.right, _PREC_NOT)}"
        prec = _PREC_AND
    elif isinstance(f, Or):
        text = f"{_render(f.left, _PREC_OR)} | {_render(f.right, _PREC_AND)}"
        prec = _PREC_OR
    elif isinstance(f, Implies):
        text = f"{_render(f.left, _PREC_OR)} -> {_render(f.right, _PREC_IMPL)}"
        prec = _PREC_IMPL
    else:
        word = "@all" if isinstance(f, Forall) else "@ex"
        text = f"{word} {' '.join(f.vars)}. {_render(f.body, _PREC_QUANT)}"
        prec = _PREC_QUANT
    return f"({text})" if prec < min_prec else text


# ---------------------------------------------------------------------------
# Parsing

_TOK_IDENT = "ident"
_TOK_CONST = "const"
_TOK_LPAREN = "("
_TOK_RPAREN = ")"
_TOK_NOT = "!"
_TOK_AND = "&"
_TOK_OR = "|"
_TOK_ARROW = "->"
_TOK_ALL = "@all"
_TOK_EX = "@ex"
_TOK_DOT = "."
_TOK_EOF = "eof"

_SINGLE = {"(": _TOK_LPAREN, ")": _TOK_RPAREN, "!": _TOK_NOT, "&": _TOK_AND,
           "|": _TOK_OR, ".": _TOK_DOT}


def _is_ident_start(c: str) -> bool:
    return c.isalpha() or c == "_"


def _is_ident_char(c: str) -> bool:
    return c.isalnum() or c == "_"


def _tokenize(text: str) -> list[tuple[str, str, int, int]]:
    toks = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if c in " \t\r":
            i, col = i + 1, col + 1
            continue
        if c in _SINGLE:
            toks.append((_SINGLE[c], c, line, col))
            i, col = i + 1, col + 1
            continue
        if c == "-":
            if text[i : i + 2] == "->":
                toks.append((_TOK_ARROW, "->", line, col))
                i, col = i + 2, col + 2
                continue
            raise FormulaSyntaxError("expected '->'", line, col)
        if c == "@":
            j = i + 1
            while j < n and _is_ident_char(text[j]):
                j += 1
            word = text[i + 1 : j]
            if word == "all":
                toks.append((_TOK_ALL, "@all", line, col))
            elif word == "ex":
                toks.append((_TOK_EX, "@ex", line, col))
            else:
                raise FormulaSyntaxError(f"unknown quantifier '@{word}'", line, col)
            col += j - i
            i = j
            continue
        if _is_ident_start(c):
            j = i + 1
            while j < n and _is_ident_char(text[j]):
                j += 1
            word = text[i:j]
            kind = _TOK_CONST if word in ("T", "F") else _TOK_IDENT
            toks.append((kind, word, line, col))
            col += j - i
            i = j
            continue
        raise FormulaSyntaxError(f"unexpected character {c!r}", line, col)
    toks.append((_TOK_EOF, "", line, col))
    return toks


class _Parser:
    def __init__(self, toks: list[tuple[str, str, int, int]]):
        self.toks = toks
        self.pos = 0

    def peek(self) -> str:
        return self.toks[self.pos][0]

    def advance(self) -> tuple[str, str, int, int]:
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def error(self, message: str):
        _, _, line, col = self.toks[self.pos]
        raise FormulaSyntaxError(message, line, col)

    def expect(self, kind: str, what: str) -> tuple[str, str, int, int]:
        if self.peek() != kind:
            self.error(f"expected {what}")
        return self.advance()

    def formula(self) -> Formula:
        if self.peek() in (_TOK_ALL, _TOK_EX):
            return self.quantified()
        return self.implication()

    def quantified(self) -> Formula:
        kind, _, line, col = self.advance()
        names: list[str] = []
        while self.peek() != _TOK_DOT:
            if self.peek() == _TOK_CONST:
                self.error("reserved word used as a variable")
            tok = self.expect(_TOK_IDENT, "a variable name")
            if tok[1] in names:
                raise FormulaSyntaxError(
                    f"duplicate variable {tok[1]!r} in quantifier block", tok[2], tok[3]
                )
            names.append(tok[1])
        if not names:
            raise FormulaSyntaxError("empty quantifier block", line, col)
        self.expect(_TOK_DOT, "'.'")
        body = self.formula()
        return (Forall if kind == _TOK_ALL else Exists)(tuple(names), body)

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.peek() == _TOK_ARROW:
            self.advance()
            return Implies(left, self.implication())
        return left

    def disjunction(self) -> Formula:
        out = self.conjunction()
        while self.peek() == _TOK_OR:
            self.advance()
            out = Or(out, self.conjunction())
        return out

    def conjunction(self) -> Formula:
        out = self.negation()
        while self.peek() == _TOK_AND:
            self.advance()
            out = And(out, self.negation())
        return out

    def negation(self) -> Formula:
        if self.peek() == _TOK_NOT:
            self.advance()
            return Not(self.negation())
        return self.atom()

    def atom(self) -> Formula:
        kind = self.peek()
        if kind == _TOK_CONST:
            return TRUE if self.advance()[1] == "T" else FALSE
        if kind == _TOK_IDENT:
            return Var(self.advance()[1])
        if kind == _TOK_LPAREN:
            self.advance()
            inner = self.formula()
            self.expect(_TOK_RPAREN, "')'")
            return inner
        self.error("expected a formula")


def parse(text: str) -> Formula:
    """Parse formula text into a tree; see the module grammar."""
    parser = _Parser(_tokenize(text))
    out = parser.formula()
    if parser.peek() != _TOK_EOF:
        parser.error("unexpected trailing input")
    return out
