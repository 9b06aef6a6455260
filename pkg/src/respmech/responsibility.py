"""Counterfactual responsibility attribution.

An agent is responsible for a violating profile when, given the earlier
agents' choices, it had an action that would have satisfied the constraint
no matter what the later agents did ("could have done otherwise").  The
module decides this two ways: by direct enumeration of the agent's actions
and all continuations, and by evaluating a closed quantified formula; the
two paths are asserted against each other.
"""

import itertools
from dataclasses import dataclass
from typing import Sequence

from .formula import And, Formula, Not, eval_qbf, evaluate, exists, forall, substitute
from .mechanism import Mechanism, Profile


class DivergenceError(RuntimeError):
    """Enumeration and formula evaluation disagree: an implementation bug."""


def ability_formula(mechanism: Mechanism, i: int) -> Formula:
    """Formula stating that agent ``i`` (0-based) can force the constraint:
    it picks its own variables, then every later agent acts adversarially.
    The earlier agents' variables are exactly the free variables."""
    if not 0 <= i < mechanism.n:
        raise IndexError(f"agent index {i} out of range for {mechanism.n} agents")
    body = mechanism.constraint
    for agent in reversed(mechanism.agents[i + 1 :]):
        body = forall(agent.vars, body)
    return exists(mechanism.agents[i].vars, body)


def forcing_strategy(
    mechanism: Mechanism, profile: Sequence[Sequence[object]], i: int
) -> tuple[int, ...] | None:
    """Lexicographically least action of agent ``i`` that satisfies the
    constraint for every continuation by later agents, with earlier agents
    fixed to ``profile``.  ``None`` when no action forces it."""
    profile = mechanism.check_profile(profile)
    if not 0 <= i < mechanism.n:
        raise IndexError(f"agent index {i} out of range for {mechanism.n} agents")
    fixed = {
        v: b
        for agent, t in zip(mechanism.agents[:i], profile)
        for v, b in zip(agent.vars, t)
    }
    own = mechanism.agents[i].vars
    later = tuple(v for agent in mechanism.agents[i + 1 :] for v in agent.vars)
    constraint = mechanism.constraint
    for t in itertools.product((0, 1), repeat=len(own)):
        env = dict(fixed)
        env.update(zip(own, t))
        if all(
            evaluate(constraint, {**env, **dict(zip(later, rest))})
            for rest in itertools.product((0, 1), repeat=len(later))
        ):
            return t
    return None


def is_responsible(
    mechanism: Mechanism, profile: Sequence[Sequence[object]], i: int
) -> bool:
    """Direct check: the profile violates the constraint and agent ``i``
    had a forcing action available."""
    if mechanism.constraint_value(profile):
        return False
    return forcing_strategy(mechanism, profile, i) is not None


@dataclass(frozen=True)
class ResponsibilityVerdict:
    """Per-profile outcome: whether the constraint is violated, which agents
    are responsible, and one forcing action per responsible agent."""

    profile: Profile
    violates: bool
    responsible: tuple[int, ...]
    witnesses: dict[int, tuple[int, ...]]


def responsible_agents(
    mechanism: Mechanism,
    profile: Sequence[Sequence[object]],
    check_formula: bool = True,
) -> ResponsibilityVerdict:
    """Aggregate verdict over all agents for one profile.

    With ``check_formula`` (the default) the verdict is recomputed by
    evaluating, per agent, the closed formula "constraint violated and the
    agent could force it" with the profile substituted in; a mismatch raises
    DivergenceError.  Disable for large sweeps: it roughly doubles the work.
    """
    profile = mechanism.check_profile(profile)
    violates = not mechanism.constraint_value(profile)
    responsible: list[int] = []
    witnesses: dict[int, tuple[int, ...]] = {}
    if violates:
        for i in range(mechanism.n):
            t = forcing_strategy(mechanism, profile, i)
            if t is not None:
                responsible.append(i)
                witnesses[i] = t
    if check_formula:
        names = mechanism.var_names
        bits = [b for t in profile for b in t]
        for i in range(mechanism.n):
            blamed = substitute(
                And(Not(mechanism.constraint), ability_formula(mechanism, i)),
                bits,
                names,
            )
            if eval_qbf(blamed) != (i in witnesses):
                raise DivergenceError(
                    f"agent {i} under profile {profile}: enumeration says "
                    f"{i in witnesses}, formula {blamed} says {eval_qbf(blamed)}"
                )
    return ResponsibilityVerdict(profile, violates, tuple(responsible), witnesses)
