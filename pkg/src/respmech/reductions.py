"""Instance generators tying quantified-sentence truth to class membership.

Each generator takes a quantifier-free formula with a declared variable
partition, builds a small mechanism around it with one or two fresh helper
variables, and records the naive truth value of the corresponding
quantified sentence.  By construction, the sentence is true exactly when
the mechanism lands in the advertised class, which makes the generated
instances ground-truth test cases for the classifier:

* ``df_instance``:  "for all x there is y with phi"        <-> diffusion-free
* ``gf_instance``:  "for all x there is y, for all z, phi" <-> gap-free
* ``gdf_instance``: "for all x there is y with phi"        <-> gap-and-diffusion-free

Fresh helper variables use the reserved ``_`` prefix, which is rejected in
the input so the disjointness side conditions hold mechanically.
"""

import random
from dataclasses import dataclass
from typing import Iterable

from .formula import (
    FALSE,
    TRUE,
    And,
    Formula,
    Implies,
    Not,
    Or,
    Var,
    eval_qbf,
    exists,
    forall,
    free_vars,
    is_quantifier_free,
    render,
)
from .mechanism import Agent, Mechanism


@dataclass(frozen=True)
class ReductionInstance:
    """A generated mechanism with its ground truth: ``expected`` is the
    naive truth value of ``sentence`` and, by the construction, equals
    membership of ``mechanism`` in the class named by ``kind``."""

    kind: str
    source: Formula
    sentence: Formula
    expected: bool
    mechanism: Mechanism
    fresh_vars: tuple[str, ...]

    def sidecar(self) -> dict:
        return {
            "kind": self.kind,
            "source": render(self.source),
            "sentence": render(self.sentence),
            "expected": self.expected,
        }


def _checked_partition(
    phi: Formula, groups: dict[str, tuple[str, ...]]
) -> dict[str, tuple[str, ...]]:
    if not is_quantifier_free(phi):
        raise ValueError("the source formula must be quantifier-free")
    groups = {key: tuple(names) for key, names in groups.items()}
    reserved = [
        v
        for v in list(free_vars(phi)) + [v for g in groups.values() for v in g]
        if v.startswith("_")
    ]
    if reserved:
        raise ValueError(
            f"variable names starting with '_' are reserved for fresh variables: {sorted(set(reserved))}"
        )
    seen: dict[str, str] = {}
    for key, names in groups.items():
        for v in names:
            if v in seen:
                raise ValueError(f"partition groups {seen[v]} and {key} overlap on {v!r}")
            seen[v] = key
    missing = [v for v in free_vars(phi) if v not in seen]
    if missing:
        raise ValueError(f"formula variables not covered by the partition: {missing}")
    return groups


def df_instance(
    phi: Formula, x: Iterable[str], y: Iterable[str]
) -> ReductionInstance:
    """Two agents; the first controls x plus a fresh switch, the second y
    plus another.  The sentence "for all x there is y with phi" is true
    exactly when the mechanism is diffusion-free."""
    groups = _checked_partition(phi, {"forall": tuple(x), "exists": tuple(y)})
    x, y = groups["forall"], groups["exists"]
    constraint = Or(And(Not(phi), Var("_z1")), Var("_z2"))
    mechanism = Mechanism(
        (Agent("a1", x + ("_z1",)), Agent("a2", y + ("_z2",))), constraint
    )
    sentence = forall(x, exists(y, phi))
    return ReductionInstance(
        "df", phi, sentence, eval_qbf(sentence), mechanism, ("_z1", "_z2")
    )


def gf_instance(
    phi: Formula, x: Iterable[str], y: Iterable[str], z: Iterable[str]
) -> ReductionInstance:
    """Three agents around "for all x there is y, for all z, phi"; the
    middle agent also controls a fresh switch that conjoins the constraint.
    The sentence is true exactly when the mechanism is gap-free."""
    groups = _checked_partition(
        phi, {"forall": tuple(x), "exists": tuple(y), "forall2": tuple(z)}
    )
    x, y, z = groups["forall"], groups["exists"], groups["forall2"]
    constraint = And(phi, Var("_t"))
    mechanism = Mechanism(
        (Agent("a1", x), Agent("a2", y + ("_t",)), Agent("a3", z)), constraint
    )
    sentence = forall(x, exists(y, forall(z, phi)))
    return ReductionInstance(
        "gf", phi, sentence, eval_qbf(sentence), mechanism, ("_t",)
    )


def gdf_instance(
    phi: Formula, x: Iterable[str], y: Iterable[str]
) -> ReductionInstance:
    """Two agents; the second controls y plus a fresh switch conjoined to
    the constraint.  The sentence "for all x there is y with phi" is true
    exactly when the mechanism is gap-and-diffusion-free."""
    groups = _checked_partition(phi, {"forall": tuple(x), "exists": tuple(y)})
    x, y = groups["forall"], groups["exists"]
    constraint = And(phi, Var("_z"))
    mechanism = Mechanism((Agent("a1", x), Agent("a2", y + ("_z",))), constraint)
    sentence = forall(x, exists(y, phi))
    return ReductionInstance(
        "gdf", phi, sentence, eval_qbf(sentence), mechanism, ("_z",)
    )


def random_formula(seed: int, nvars: int, size: int) -> Formula:
    """Deterministic pseudo-random quantifier-free formula over
    ``v1..v<nvars>`` with at most ``size`` connective nodes."""
    rng = random.Random(seed)
    names = tuple(f"v{i}" for i in range(1, nvars + 1))
    budget = size

    def gen() -> Formula:
        nonlocal budget
        if budget <= 0 or rng.random() < 0.2:
            if names and rng.random() < 0.9:
                return Var(rng.choice(names))
            return TRUE if rng.random() < 0.5 else FALSE
        budget -= 1
        op = rng.randrange(4)
        if op == 0:
            return Not(gen())
        left = gen()
        right = gen()
        return (And, Or, Implies)[op - 1](left, right)

    return gen()
