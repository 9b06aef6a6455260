"""Sequential decision-making mechanisms.

A mechanism is an ordered list of agents, each controlling a tuple of
Boolean variables, plus a quantifier-free deontic constraint over the union
of those variables.  Agents act in list order with full knowledge of prior
actions; a profile under which the constraint evaluates to false is an
impermissible outcome.

Mechanism file format (JSON, UTF-8)::

    {"agents": [{"name": "uncle",
                 "vars": ["u"],
                 "actions": {"brake": [1], "continue": [0]}},
                ...],
     "constraint": "!u"}

The per-agent "actions" map is optional; bit tuples are arrays of 0/1 of
length ``len(vars)``; the array order of agents is the decision order.
"""

import itertools
import json
import re
from dataclasses import dataclass
from typing import Iterator, Sequence

from .formula import (
    BudgetExceededError,
    Formula,
    evaluate,
    free_vars,
    is_quantifier_free,
    parse,
    render,
    substitute,
)

# One Boolean tuple per agent, tuple i of length |vars_i|.
Profile = tuple[tuple[int, ...], ...]

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

DEFAULT_MAX_BITS = 22


class MechanismError(ValueError):
    """A mechanism definition violates a structural requirement."""


def _checked_bits(bits: Sequence[object], arity: int, what: str) -> tuple[int, ...]:
    bits = tuple(bits)
    if len(bits) != arity:
        raise MechanismError(f"{what}: expected {arity} bits, got {len(bits)}")
    if any(b not in (0, 1, False, True) for b in bits):
        raise MechanismError(f"{what}: bits must be 0 or 1, got {bits}")
    return tuple(int(b) for b in bits)


@dataclass(frozen=True)
class Agent:
    """One decision maker: the ordered variables it assigns, plus an
    optional map from action labels to bit tuples.

    ``vars`` may be empty: such an agent has a single action and can never
    force the constraint on its own.
    """

    name: str
    vars: tuple[str, ...] = ()
    actions: dict[str, tuple[int, ...]] | None = None

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        if not self.name or not isinstance(self.name, str):
            raise MechanismError(f"invalid agent name {self.name!r}")
        for v in self.vars:
            if not _NAME_RE.match(v) or v in ("T", "F"):
                raise MechanismError(f"agent {self.name!r}: invalid variable name {v!r}")
        if len(set(self.vars)) != len(self.vars):
            raise MechanismError(f"agent {self.name!r}: duplicate variables in {self.vars}")
        if self.actions is not None:
            checked = {
                str(label): _checked_bits(bits, len(self.vars), f"agent {self.name!r} action {label!r}")
                for label, bits in self.actions.items()
            }
            object.__setattr__(self, "actions", checked)

    def label_for(self, bits: tuple[int, ...]) -> str | None:
        """First label encoding ``bits``, if the agent has an actions map."""
        if self.actions is None:
            return None
        for label, encoded in self.actions.items():
            if encoded == bits:
                return label
        return None


@dataclass(frozen=True)
class Mechanism:
    """Agents in decision order plus the deontic constraint over their
    variables.  Validated on construction; immutable afterwards."""

    agents: tuple[Agent, ...]
    constraint: Formula

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(self.agents))
        names = [a.name for a in self.agents]
        if len(set(names)) != len(names):
            raise MechanismError(f"duplicate agent names: {names}")
        seen: dict[str, str] = {}
        for agent in self.agents:
            for v in agent.vars:
                if v in seen:
                    raise MechanismError(
                        f"variable {v!r} owned by both {seen[v]!r} and {agent.name!r}"
                    )
                seen[v] = agent.name
        if not is_quantifier_free(self.constraint):
            raise MechanismError("constraint must be quantifier-free")
        unknown = [v for v in free_vars(self.constraint) if v not in seen]
        if unknown:
            raise MechanismError(f"constraint uses unknown variables: {unknown}")

    @property
    def n(self) -> int:
        return len(self.agents)

    @property
    def var_names(self) -> tuple[str, ...]:
        """All variables, agent by agent in decision order."""
        return tuple(v for agent in self.agents for v in agent.vars)

    @property
    def bits(self) -> int:
        return sum(len(agent.vars) for agent in self.agents)

    # -- profiles ----------------------------------------------------------

    def check_profile(self, profile: Sequence[Sequence[object]]) -> Profile:
        """Validate per-agent arity and bit values; returns the canonical
        tuple-of-tuples form."""
        profile = tuple(tuple(t) for t in profile)
        if len(profile) != self.n:
            raise MechanismError(
                f"profile has {len(profile)} tuples for {self.n} agents"
            )
        return tuple(
            _checked_bits(t, len(agent.vars), f"agent {agent.name!r} tuple")
            for agent, t in zip(self.agents, profile)
        )

    def profiles(self, max_bits: int = DEFAULT_MAX_BITS) -> Iterator[Profile]:
        """All action profiles exactly once, lexicographic by agent then bit."""
        if self.bits > max_bits:
            raise BudgetExceededError(
                f"{self.bits} variables exceed the enumeration budget of {max_bits} bits"
            )
        spaces = [
            itertools.product((0, 1), repeat=len(agent.vars)) for agent in self.agents
        ]
        return itertools.product(*spaces)

    def valuation(self, profile: Sequence[Sequence[object]]) -> dict[str, int]:
        profile = self.check_profile(profile)
        return {
            v: b
            for agent, t in zip(self.agents, profile)
            for v, b in zip(agent.vars, t)
        }

    def constraint_value(self, profile: Sequence[Sequence[object]]) -> bool:
        """The deontic constraint under the valuation induced by the profile;
        false marks a violation."""
        return evaluate(self.constraint, self.valuation(profile))

    # -- derived mechanisms --------------------------------------------------

    def partial(self, k: int, prefix: Sequence[Sequence[object]]) -> "Mechanism":
        """Residual mechanism after the first ``k`` agents chose ``prefix``:
        their choices are substituted into the constraint and they drop out
        of the agent list."""
        if not 0 <= k <= self.n:
            raise MechanismError(f"k={k} out of range for {self.n} agents")
        prefix = tuple(tuple(t) for t in prefix)
        if len(prefix) != k:
            raise MechanismError(f"prefix has {len(prefix)} tuples, expected {k}")
        bits: list[int] = []
        names: list[str] = []
        for agent, t in zip(self.agents[:k], prefix):
            bits.extend(_checked_bits(t, len(agent.vars), f"agent {agent.name!r} tuple"))
            names.extend(agent.vars)
        constraint = substitute(self.constraint, bits, names)
        return Mechanism(self.agents[k:], constraint)

    def reorder(self, order: Sequence[int]) -> "Mechanism":
        """Same agents and constraint with the decision order permuted;
        ``order`` lists current agent indices in their new positions."""
        order = tuple(order)
        if sorted(order) != list(range(self.n)):
            raise MechanismError(f"{order} is not a permutation of 0..{self.n - 1}")
        return Mechanism(tuple(self.agents[i] for i in order), self.constraint)

    # -- labels ----------------------------------------------------------------

    def profile_from_labels(self, labels: Sequence[str]) -> Profile:
        if len(labels) != self.n:
            raise MechanismError(f"{len(labels)} labels for {self.n} agents")
        out = []
        for agent, label in zip(self.agents, labels):
            if agent.actions is None:
                raise MechanismError(f"agent {agent.name!r} has no action labels")
            if label not in agent.actions:
                raise MechanismError(
                    f"unknown label {label!r} for agent {agent.name!r} "
                    f"(known: {', '.join(agent.actions)})"
                )
            out.append(agent.actions[label])
        return tuple(out)

    def profile_labels(self, profile: Sequence[Sequence[object]]) -> tuple[str, ...]:
        """Display form of a profile: action labels where the agent defines
        them, otherwise the raw bit string."""
        profile = self.check_profile(profile)
        out = []
        for agent, t in zip(self.agents, profile):
            label = agent.label_for(t)
            out.append(label if label is not None else "".join(str(b) for b in t))
        return tuple(out)

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        agents = []
        for agent in self.agents:
            entry: dict = {"name": agent.name, "vars": list(agent.vars)}
            if agent.actions is not None:
                entry["actions"] = {k: list(v) for k, v in agent.actions.items()}
            agents.append(entry)
        return {"agents": agents, "constraint": render(self.constraint)}

    @classmethod
    def from_dict(cls, doc: dict) -> "Mechanism":
        try:
            raw_agents = doc["agents"]
            raw_constraint = doc["constraint"]
        except (TypeError, KeyError) as exc:
            raise MechanismError(f"mechanism document lacks key {exc}") from None
        agents = []
        for entry in raw_agents:
            agents.append(
                Agent(
                    name=entry["name"],
                    vars=tuple(entry.get("vars", ())),
                    actions={k: tuple(v) for k, v in entry["actions"].items()}
                    if entry.get("actions") is not None
                    else None,
                )
            )
        return cls(tuple(agents), parse(raw_constraint))


def load_mechanism(path: str) -> Mechanism:
    with open(path, encoding="utf-8") as handle:
        return Mechanism.from_dict(json.load(handle))


def save_mechanism(mechanism: Mechanism, path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(mechanism.to_dict(), handle, indent=2)
        handle.write("\n")
