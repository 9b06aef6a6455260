"""Prenexing, CNF conversion, and QDIMACS export for closed formulas.

The pipeline is ``prenex`` (implications unfolded, bound variables made
distinct, quantifiers pulled out with flipping under negation), then a
Tseitin transform of the matrix (one auxiliary variable per connective
node, defined by equivalence clauses), then text emission.  Auxiliary
variables always land in the innermost existential block, which preserves
the truth value of the quantified formula, not just satisfiability.

``run_external`` drives an external QBF solver on the emitted text and
parses the usual exit-status convention (10 true / 20 false) or an
``s cnf 0|1`` result line.
"""

import os
import re
import shlex
import subprocess
import tempfile
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable

from .formula import (
    FALSE,
    TRUE,
    And,
    Const,
    Exists,
    Forall,
    Formula,
    Implies,
    Not,
    Or,
    Var,
    exists,
    forall,
    free_vars,
    is_quantifier_free,
)


class SolverError(RuntimeError):
    """The external solver could not be run or produced no usable verdict."""


@dataclass(frozen=True)
class PrenexQbf:
    """Closed prenex form: alternating quantifier blocks over a
    quantifier-free matrix."""

    prefix: tuple[tuple[str, tuple[str, ...]], ...]
    matrix: Formula

    def __post_init__(self):
        if not is_quantifier_free(self.matrix):
            raise ValueError("prenex matrix contains a quantifier")
        names = [v for _, block in self.prefix for v in block]
        if len(set(names)) != len(names):
            raise ValueError("prefix binds a variable twice")
        loose = [v for v in free_vars(self.matrix) if v not in set(names)]
        if loose:
            raise ValueError(f"matrix variables not bound by the prefix: {loose}")

    def as_formula(self) -> Formula:
        body = self.matrix
        for kind, block in reversed(self.prefix):
            body = (forall if kind == "a" else exists)(block, body)
        return body


def _unfold_implications(f: Formula) -> Formula:
    if isinstance(f, (Const, Var)):
        return f
    if isinstance(f, Not):
        return Not(_unfold_implications(f.arg))
    if isinstance(f, Implies):
        return Or(Not(_unfold_implications(f.left)), _unfold_implications(f.right))
    if isinstance(f, (And, Or)):
        return type(f)(_unfold_implications(f.left), _unfold_implications(f.right))
    return type(f)(f.vars, _unfold_implications(f.body))


def _all_names(f: Formula) -> set[str]:
    out: set[str] = set()

    def walk(node: Formula) -> None:
        if isinstance(node, Var):
            out.add(node.name)
        elif isinstance(node, Not):
            walk(node.arg)
        elif isinstance(node, (And, Or, Implies)):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, (Forall, Exists)):
            out.update(node.vars)
            walk(node.body)

    walk(f)
    return out


def _uniquify(f: Formula) -> Formula:
    """Alpha-rename so every quantifier binds fresh names."""
    avoid = _all_names(f)
    claimed: set[str] = set()

    def fresh(base: str) -> str:
        k = 1
        while f"{base}_{k}" in avoid:
            k += 1
        name = f"{base}_{k}"
        avoid.add(name)
        return name

    def walk(node: Formula, env: dict[str, str]) -> Formula:
        if isinstance(node, Const):
            return node
        if isinstance(node, Var):
            return Var(env.get(node.name, node.name))
        if isinstance(node, Not):
            return Not(walk(node.arg, env))
        if isinstance(node, (And, Or)):
            return type(node)(walk(node.left, env), walk(node.right, env))
        inner = dict(env)
        block = []
        for v in node.vars:
            name = v if v not in claimed else fresh(v)
            claimed.add(name)
            inner[v] = name
            block.append(name)
        return type(node)(tuple(block), walk(node.body, inner))

    return walk(f, {})


_FLIP = {"a": "e", "e": "a"}


def _pull(f: Formula) -> tuple[list[tuple[str, tuple[str, ...]]], Formula]:
    if isinstance(f, (Const, Var)):
        return [], f
    if isinstance(f, Not):
        blocks, matrix = _pull(f.arg)
        return [(_FLIP[kind], block) for kind, block in blocks], Not(matrix)
    if isinstance(f, (And, Or)):
        left_blocks, left = _pull(f.left)
        right_blocks, right = _pull(f.right)
        return left_blocks + right_blocks, type(f)(left, right)
    kind = "a" if isinstance(f, Forall) else "e"
    blocks, matrix = _pull(f.body)
    return [(kind, f.vars)] + blocks, matrix


def _merge(blocks: Iterable[tuple[str, tuple[str, ...]]]) -> list[tuple[str, tuple[str, ...]]]:
    out: list[tuple[str, tuple[str, ...]]] = []
    for kind, block in blocks:
        if out and out[-1][0] == kind:
            out[-1] = (kind, out[-1][1] + block)
        else:
            out.append((kind, block))
    return out


def prenex(f: Formula) -> PrenexQbf:
    """Logically equivalent prenex form of a closed formula."""
    loose = free_vars(f)
    if loose:
        raise ValueError(f"formula is not closed; free variables: {', '.join(loose)}")
    g = _uniquify(_unfold_implications(f))
    blocks, matrix = _pull(g)
    return PrenexQbf(tuple(_merge(blocks)), matrix)


# ---------------------------------------------------------------------------
# CNF conversion


def _fold_constants(f: Formula) -> Formula:
    """Remove T/F leaves; the result is a constant or a constant-free tree."""
    if isinstance(f, (Const, Var)):
        return f
    if isinstance(f, Not):
        arg = _fold_constants(f.arg)
        if isinstance(arg, Const):
            return FALSE if arg.value else TRUE
        return Not(arg)
    if isinstance(f, Implies):
        return _fold_constants(Or(Not(f.left), f.right))
    left = _fold_constants(f.left)
    right = _fold_constants(f.right)
    if isinstance(f, And):
        if left == FALSE or right == FALSE:
            return FALSE
        if left == TRUE:
            return right
        if right == TRUE:
            return left
        return And(left, right)
    if left == TRUE or right == TRUE:
        return TRUE
    if left == FALSE:
        return right
    if right == FALSE:
        return left
    return Or(left, right)


@dataclass
class CnfInstance:
    """Prenex CNF with integer literals, ready for QDIMACS emission.

    ``var_ids`` maps the original (prenexed) variable names to DIMACS ids;
    auxiliary Tseitin variables get the ids after them and are listed in
    ``aux_ids`` with their defining gates in ``aux_defs`` (id, "and"|"or",
    operand literals, in dependency order).
    """

    var_ids: dict[str, int]
    clauses: list[list[int]]
    prefix: list[tuple[str, list[int]]] = field(default_factory=list)
    aux_ids: list[int] = field(default_factory=list)
    aux_defs: list[tuple[int, str, tuple[int, int]]] = field(default_factory=list)

    @property
    def num_vars(self) -> int:
        return len(self.var_ids) + len(self.aux_ids)


def tseitin(matrix: Formula, var_ids: dict[str, int] | None = None) -> CnfInstance:
    """Equivalence-preserving CNF of a quantifier-free matrix.

    Each conjunction/disjunction node gets one auxiliary variable defined by
    biconditional clauses; negations become negative literals; the root is
    asserted by a unit clause.  Implications are unfolded and constants
    folded away first.
    """
    if not is_quantifier_free(matrix):
        raise ValueError("tseitin() requires a quantifier-free matrix")
    if var_ids is None:
        var_ids = {name: k + 1 for k, name in enumerate(free_vars(matrix))}
    matrix = _fold_constants(_unfold_implications(matrix))
    inst = CnfInstance(var_ids=dict(var_ids), clauses=[])
    if isinstance(matrix, Const):
        if not matrix.value:
            inst.clauses.append([])
        return inst
    next_id = len(inst.var_ids) + 1
    cache: dict[Formula, int] = {}

    def literal(node: Formula) -> int:
        nonlocal next_id
        if isinstance(node, Var):
            return inst.var_ids[node.name]
        if isinstance(node, Not):
            return -literal(node.arg)
        cached = cache.get(node)
        if cached is not None:
            return cached
        a = literal(node.left)
        b = literal(node.right)
        aux = next_id
        next_id += 1
        inst.aux_ids.append(aux)
        if isinstance(node, And):
            inst.aux_defs.append((aux, "and", (a, b)))
            inst.clauses.extend([[-aux, a], [-aux, b], [aux, -a, -b]])
        else:
            inst.aux_defs.append((aux, "or", (a, b)))
            inst.clauses.extend([[aux, -a], [aux, -b], [-aux, a, b]])
        cache[node] = aux
        return aux

    inst.clauses.append([literal(matrix)])
    return inst


def build_cnf(f: Formula) -> CnfInstance:
    """Prenex a closed formula and convert the matrix to CNF; auxiliary
    variables extend (or form) the innermost existential block."""
    pq = prenex(f)
    var_ids: dict[str, int] = {}
    for _, block in pq.prefix:
        for name in block:
            var_ids[name] = len(var_ids) + 1
    inst = tseitin(pq.matrix, var_ids)
    inst.prefix = [
        (kind, [var_ids[name] for name in block]) for kind, block in pq.prefix
    ]
    if inst.aux_ids:
        if inst.prefix and inst.prefix[-1][0] == "e":
            inst.prefix[-1] = ("e", inst.prefix[-1][1] + list(inst.aux_ids))
        else:
            inst.prefix.append(("e", list(inst.aux_ids)))
    return inst


def format_qdimacs(inst: CnfInstance) -> str:
    """QDIMACS text: name-map comments, header, alternating quantifier
    lines, then 0-terminated clauses."""
    lines = [f"c map {name} {vid}" for name, vid in inst.var_ids.items()]
    lines.append(f"p cnf {inst.num_vars} {len(inst.clauses)}")
    for kind, ids in inst.prefix:
        lines.append(f"{kind} {' '.join(map(str, ids))} 0")
    for clause in inst.clauses:
        lines.append(" ".join(map(str, clause + [0])))
    return "\n".join(lines) + "\n"


def to_qdimacs(f: Formula) -> str:
    """QDIMACS text for a closed formula (prenex + Tseitin)."""
    return format_qdimacs(build_cnf(f))


def evaluate_instance(inst: CnfInstance) -> bool:
    """Naive truth value of a CNF instance: expand the original prefix
    variables and derive the auxiliary values from their gate definitions
    (they are innermost-existential, so their forced values decide truth)."""
    aux = set(inst.aux_ids)
    blocks = [
        (kind, [v for v in ids if v not in aux]) for kind, ids in inst.prefix
    ]
    blocks = [(kind, ids) for kind, ids in blocks if ids]
    assign: dict[int, bool] = {}

    def value(lit: int) -> bool:
        v = assign[abs(lit)]
        return v if lit > 0 else not v

    def matrix_value() -> bool:
        for aux_id, gate, (a, b) in inst.aux_defs:
            assign[aux_id] = value(a) and value(b) if gate == "and" else value(a) or value(b)
        return all(any(value(lit) for lit in clause) for clause in inst.clauses)

    def recurse(level: int) -> bool:
        if level == len(blocks):
            return matrix_value()
        kind, ids = blocks[level]
        existential = kind == "e"
        for combo in product((False, True), repeat=len(ids)):
            assign.update(zip(ids, combo))
            if recurse(level + 1) == existential:
                return existential
        return not existential

    return recurse(0)


_RESULT_LINE = re.compile(r"^s\s+cnf\s+(-?\d+)")


def run_external(qdimacs: str, solver_command: str, timeout: float = 60.0) -> bool:
    """Run an external QBF solver on QDIMACS text and parse its verdict.

    ``solver_command`` is a shell-style template; a ``{file}`` placeholder
    is replaced with the instance path, otherwise the path is appended.
    The verdict is the exit status (10 true, 20 false) or an ``s cnf 1|0``
    line; anything else raises SolverError.
    """
    argv = shlex.split(solver_command)
    if not argv:
        raise SolverError("empty solver command")
    fd, path = tempfile.mkstemp(suffix=".qdimacs", text=True)
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(qdimacs)
        if any("{file}" in arg for arg in argv):
            argv = [arg.replace("{file}", path) for arg in argv]
        else:
            argv = argv + [path]
        try:
            proc = subprocess.run(
                argv, capture_output=True, text=True, timeout=timeout, check=False
            )
        except FileNotFoundError as exc:
            raise SolverError(f"solver not found: {argv[0]}") from exc
        except subprocess.TimeoutExpired as exc:
            raise SolverError(f"solver timed out after {timeout}s") from exc
    finally:
        os.unlink(path)
    if proc.returncode == 10:
        return True
    if proc.returncode == 20:
        return False
    for line in proc.stdout.splitlines():
        match = _RESULT_LINE.match(line.strip())
        if match:
            verdict = int(match.group(1))
            if verdict == 1:
                return True
            if verdict == 0:
                return False
    raise SolverError(
        f"no verdict from solver (exit {proc.returncode}); "
        f"stdout: {proc.stdout[:200]!r}"
    )
