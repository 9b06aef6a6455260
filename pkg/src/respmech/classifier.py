"""Mechanism classification.

Four classes are decided:

* ``df`` (diffusion-free): no violating profile blames two or more agents;
* ``gf`` (gap-free): every violating profile blames at least one agent;
* ``rf`` (responsibility-free): no agent is ever responsible;
* ``gdf`` (gap-and-diffusion-free): every violating profile blames exactly
  one agent, equivalently membership in both ``df`` and ``gf``.

Each class is decided two independent ways: profile enumeration over the
evaluated constraint ("brute") and naive evaluation of a closed quantified
formula ("qbf").  ``classify(..., method="both")`` runs both and raises
DivergenceError on any disagreement, since their agreement is the
load-bearing correctness property of the whole package.
"""

import itertools
import json
import time
from dataclasses import dataclass
from typing import Callable, Iterator

from .formula import (
    And,
    BudgetExceededError,
    Formula,
    Implies,
    Not,
    Or,
    _eval,
    eval_qbf,
    evaluate,
    exists,
    forall,
    or_all,
    render,
    rename,
)
from .mechanism import DEFAULT_MAX_BITS, Mechanism, Profile
from .responsibility import DivergenceError, ability_formula

CLASSES = ("df", "gf", "rf", "gdf")

METHODS = ("brute", "qbf", "both")


@dataclass(frozen=True)
class Witness:
    """Counterexample profile plus the responsible agents found there
    (empty for a gap, two for diffusion)."""

    profile: Profile
    agents: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "profile": [list(t) for t in self.profile],
            "agents": list(self.agents),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Witness":
        return cls(
            tuple(tuple(t) for t in doc["profile"]), tuple(doc["agents"])
        )


# ---------------------------------------------------------------------------
# Brute path: one constraint-table sweep shared by all four checks.


def _value_table(mechanism: Mechanism, max_bits: int) -> bytearray:
    """Constraint value for every profile; the index packs the profile bits
    with agent 0's first variable most significant."""
    names = mechanism.var_names
    if len(names) > max_bits:
        _raise_budget(len(names), max_bits)
    constraint = mechanism.constraint
    table = bytearray(1 << len(names))
    for idx, combo in enumerate(itertools.product((False, True), repeat=len(names))):
        table[idx] = _eval(constraint, dict(zip(names, combo)))
    return table


def _raise_budget(bits: int, max_bits: int):
    raise BudgetExceededError(
        f"{bits} variables exceed the enumeration budget of {max_bits} bits"
    )


def _force_table(mechanism: Mechanism, table: bytearray, i: int) -> bytearray:
    """``out[prefix]`` is 1 when some action of agent ``i`` makes the
    constraint hold for every continuation by later agents, given the
    earlier agents' bits ``prefix``.  Each (prefix, action) pair covers a
    contiguous window of the value table."""
    widths = [len(agent.vars) for agent in mechanism.agents]
    own = widths[i]
    suffix = sum(widths[i + 1 :])
    out = bytearray(1 << sum(widths[:i]))
    span = 1 << suffix
    for head in range(len(out)):
        for action in range(1 << own):
            base = ((head << own) | action) << suffix
            if table.find(0, base, base + span) == -1:
                out[head] = 1
                break
    return out


def _profile_from_index(mechanism: Mechanism, idx: int) -> Profile:
    out: list[tuple[int, ...]] = []
    for agent in reversed(mechanism.agents):
        w = len(agent.vars)
        bits = idx & ((1 << w) - 1)
        idx >>= w
        out.append(tuple((bits >> (w - 1 - j)) & 1 for j in range(w)))
    return tuple(reversed(out))


def violations(
    mechanism: Mechanism, max_bits: int = DEFAULT_MAX_BITS
) -> Iterator[tuple[Profile, tuple[int, ...]]]:
    """Yield every constraint-violating profile with its responsible agents,
    in profile enumeration order.  Pure enumeration over the evaluated
    constraint; independent of the formula path."""
    table = _value_table(mechanism, max_bits)
    # shift[i] drops agent i's own and all later bits, leaving the prefix
    shifts = []
    acc = mechanism.bits
    for agent in mechanism.agents:
        shifts.append(acc)
        acc -= len(agent.vars)
    force = [_force_table(mechanism, table, i) for i in range(mechanism.n)]
    for idx in range(len(table)):
        if table[idx]:
            continue
        responsible = tuple(
            i for i in range(mechanism.n) if force[i][idx >> shifts[i]]
        )
        yield _profile_from_index(mechanism, idx), responsible


def diffusion_free_brute(
    mechanism: Mechanism, max_bits: int = DEFAULT_MAX_BITS
) -> tuple[bool, Witness | None]:
    """At most one responsible agent at every violating profile."""
    for profile, responsible in violations(mechanism, max_bits):
        if len(responsible) >= 2:
            return False, Witness(profile, responsible[:2])
    return True, None


def gap_free_brute(
    mechanism: Mechanism, max_bits: int = DEFAULT_MAX_BITS
) -> tuple[bool, Witness | None]:
    """At least one responsible agent at every violating profile."""
    for profile, responsible in violations(mechanism, max_bits):
        if not responsible:
            return False, Witness(profile, ())
    return True, None


def responsibility_free_brute(
    mechanism: Mechanism, max_bits: int = DEFAULT_MAX_BITS
) -> tuple[bool, Witness | None]:
    """No agent responsible under any profile."""
    for profile, responsible in violations(mechanism, max_bits):
        if responsible:
            return False, Witness(profile, responsible[:1])
    return True, None


def gap_diffusion_free_brute(
    mechanism: Mechanism, max_bits: int = DEFAULT_MAX_BITS
) -> tuple[bool, Witness | None]:
    """Exactly one responsible agent at every violating profile."""
    for profile, responsible in violations(mechanism, max_bits):
        if len(responsible) != 1:
            return False, Witness(profile, responsible)
    return True, None


# ---------------------------------------------------------------------------
# Formula path: closed formulas evaluated by naive expansion.


def diffusion_free_formula(mechanism: Mechanism) -> Formula:
    """Closed formula: wherever two distinct agents could each force the
    constraint, it holds.  The pairwise disjunction is empty (rendered F)
    for fewer than two agents, making the formula trivially true."""
    pairs = or_all(
        And(ability_formula(mechanism, i), ability_formula(mechanism, j))
        for i in range(mechanism.n)
        for j in range(i + 1, mechanism.n)
    )
    body: Formula = Implies(pairs, mechanism.constraint)
    for agent in reversed(mechanism.agents):
        body = forall(agent.vars, body)
    return body


def gap_free_formula(mechanism: Mechanism) -> Formula:
    """Closed formula: wherever the constraint fails, some agent could have
    forced it."""
    blame = or_all(ability_formula(mechanism, i) for i in range(mechanism.n))
    body: Formula = Implies(Not(mechanism.constraint), blame)
    for agent in reversed(mechanism.agents):
        body = forall(agent.vars, body)
    return body


def primed(name: str) -> str:
    return name + "__p"


def responsibility_free_formula(mechanism: Mechanism, k: int = 0) -> Formula:
    """Uniformity of the constraint once the first ``k`` agents are fixed:
    any two completions by the remaining agents give the same value.  Free
    variables are exactly the first ``k`` agents'; ``k=0`` is closed and
    decides responsibility-freeness of the whole mechanism."""
    if not 0 <= k <= mechanism.n:
        raise IndexError(f"k={k} out of range for {mechanism.n} agents")
    originals = tuple(v for agent in mechanism.agents[k:] for v in agent.vars)
    copies = tuple(primed(v) for v in originals)
    taken = set(mechanism.var_names)
    clashes = [v for v in copies if v in taken]
    if clashes:
        raise ValueError(f"primed variable names collide with the mechanism: {clashes}")
    body: Formula = Implies(
        mechanism.constraint, rename(mechanism.constraint, copies, originals)
    )
    for agent in reversed(mechanism.agents[k:]):
        body = forall(tuple(primed(v) for v in agent.vars), body)
    for agent in reversed(mechanism.agents[k:]):
        body = forall(agent.vars, body)
    return body


def gap_diffusion_free_formula(mechanism: Mechanism, k: int = 0) -> Formula:
    """Backward-induction formula for exactly-one-responsible, free in the
    first ``k`` agents' variables.

    Level ``n`` is the constraint itself.  One level down, either the next
    agent can force the constraint, in which case every completion of its
    choice must leave a responsibility-free residue, or it cannot, and the
    residue must itself stay in the class.  Each level embeds the next one
    once, so the construction stays polynomial in the constraint size.
    """
    if not 0 <= k <= mechanism.n:
        raise IndexError(f"k={k} out of range for {mechanism.n} agents")
    level: Formula = mechanism.constraint
    for j in range(mechanism.n - 1, k - 1, -1):
        head = mechanism.agents[j].vars
        tail: Formula = mechanism.constraint
        for agent in reversed(mechanism.agents[j + 1 :]):
            tail = forall(agent.vars, tail)
        can_force = exists(head, tail)
        level = Or(
            And(can_force, forall(head, responsibility_free_formula(mechanism, j + 1))),
            And(Not(can_force), forall(head, level)),
        )
    return level


# ---------------------------------------------------------------------------
# Recursive gap-and-diffusion-free check via the force/no-force split.


def gap_diffusion_free_recursive(
    mechanism: Mechanism, max_bits: int = DEFAULT_MAX_BITS
) -> bool:
    """Alternative gap-and-diffusion-free decision, peeling one agent at a
    time: where the next agent can force the constraint, every residual
    mechanism must be responsibility-free; where it cannot, every residual
    mechanism must itself be gap-and-diffusion-free."""
    if mechanism.bits > max_bits:
        _raise_budget(mechanism.bits, max_bits)

    def first_agent_forces(m: Mechanism) -> bool:
        own = m.agents[0].vars
        later = tuple(v for agent in m.agents[1:] for v in agent.vars)
        return any(
            all(
                evaluate(m.constraint, dict(zip(own + later, t + rest)))
                for rest in itertools.product((0, 1), repeat=len(later))
            )
            for t in itertools.product((0, 1), repeat=len(own))
        )

    def recurse(m: Mechanism) -> bool:
        if m.n == 0:
            return m.constraint_value(())
        choices = itertools.product((0, 1), repeat=len(m.agents[0].vars))
        if first_agent_forces(m):
            return all(
                responsibility_free_brute(m.partial(1, (t,)), max_bits)[0]
                for t in choices
            )
        return all(recurse(m.partial(1, (t,))) for t in choices)

    return recurse(mechanism)


# ---------------------------------------------------------------------------
# Aggregation.


@dataclass(frozen=True)
class ClassResult:
    member: bool
    witness: Witness | None
    method: str
    seconds: float

    def to_dict(self) -> dict:
        return {
            "member": self.member,
            "witness": self.witness.to_dict() if self.witness else None,
            "method": self.method,
            "seconds": self.seconds,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ClassResult":
        witness = doc.get("witness")
        return cls(
            member=doc["member"],
            witness=Witness.from_dict(witness) if witness else None,
            method=doc["method"],
            seconds=doc["seconds"],
        )


@dataclass(frozen=True)
class ClassificationReport:
    results: dict[str, ClassResult]

    def to_dict(self) -> dict:
        return {"classes": {name: self.results[name].to_dict() for name in CLASSES}}

    @classmethod
    def from_dict(cls, doc: dict) -> "ClassificationReport":
        return cls(
            {name: ClassResult.from_dict(entry) for name, entry in doc["classes"].items()}
        )


_BRUTE: dict[str, Callable[[Mechanism, int], tuple[bool, Witness | None]]] = {
    "df": diffusion_free_brute,
    "gf": gap_free_brute,
    "rf": responsibility_free_brute,
    "gdf": gap_diffusion_free_brute,
}

_FORMULA: dict[str, Callable[[Mechanism], Formula]] = {
    "df": diffusion_free_formula,
    "gf": gap_free_formula,
    "rf": responsibility_free_formula,
    "gdf": gap_diffusion_free_formula,
}


def classify(
    mechanism: Mechanism, method: str = "both", max_bits: int = DEFAULT_MAX_BITS
) -> ClassificationReport:
    """Decide all four class memberships.

    ``method`` is "brute", "qbf", or "both"; "both" asserts agreement of the
    two paths and raises DivergenceError otherwise, dumping both verdicts.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    results: dict[str, ClassResult] = {}
    for name in CLASSES:
        start = time.perf_counter()
        member = None
        witness = None
        if method in ("brute", "both"):
            member, witness = _BRUTE[name](mechanism, max_bits)
        if method in ("qbf", "both"):
            formula = _FORMULA[name](mechanism)
            by_formula = eval_qbf(formula)
            if member is not None and by_formula != member:
                raise DivergenceError(
                    f"{name}: brute verdict {member} "
                    f"(witness {witness.to_dict() if witness else None}) but formula "
                    f"verdict {by_formula}\nmechanism: {json.dumps(mechanism.to_dict())}\n"
                    f"formula: {render(formula)}"
                )
            member = by_formula if member is None else member
        results[name] = ClassResult(member, witness, method, time.perf_counter() - start)
    return ClassificationReport(results)
