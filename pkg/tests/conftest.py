"""Shared helpers: the exhaustive small-mechanism family and paths."""

import itertools
from pathlib import Path

import pytest

from respmech.formula import Not, Var, and_all, or_all
from respmech.mechanism import Agent, Mechanism
from respmech.responsibility import is_responsible

REPO_ROOT = Path(__file__).resolve().parent.parent
MECHANISMS_DIR = REPO_ROOT / "mechanisms"


def table_formula(names, table):
    """Formula over ``names`` realizing a truth table: disjunction of the
    rows valued 1.  Row index packs the names, first name most significant;
    the all-zero table is the constant F."""
    width = len(names)
    assert len(table) == 1 << width
    minterms = []
    for idx, value in enumerate(table):
        if not value:
            continue
        lits = [
            Var(name) if (idx >> (width - 1 - j)) & 1 else Not(Var(name))
            for j, name in enumerate(names)
        ]
        minterms.append(and_all(lits))
    return or_all(minterms)


def split_mechanism(split, table):
    """Mechanism whose agents own ``split`` many bits each and whose
    constraint realizes ``table`` over the concatenated bits."""
    names = tuple(f"x{j}" for j in range(1, sum(split) + 1))
    agents = []
    used = 0
    for i, width in enumerate(split):
        agents.append(Agent(f"a{i + 1}", names[used : used + width]))
        used += width
    return Mechanism(tuple(agents), table_formula(names, table))


def small_family():
    """Every 2-bit mechanism with two single-bit agents (16 constraints) and
    every 3-bit mechanism over the splits 1+1+1, 1+2, 2+1 (3 x 256)."""
    out = []
    for table in itertools.product((0, 1), repeat=4):
        out.append(split_mechanism((1, 1), table))
    for split in ((1, 1, 1), (1, 2), (2, 1)):
        for table in itertools.product((0, 1), repeat=8):
            out.append(split_mechanism(split, table))
    return out


def shift_property_holds(mechanism):
    """Responsibility commutes with peeling one agent off the front: agent
    ``i`` of the (k+1)-step residual mechanism is responsible exactly when
    agent ``i+1`` of the k-step one is, for every split of the profile."""
    n = mechanism.n
    for k in range(n):
        heads = [agent.vars for agent in mechanism.agents[: k + 1]]
        for prefix in itertools.product(
            *(itertools.product((0, 1), repeat=len(v)) for v in heads[:-1])
        ):
            residual_k = mechanism.partial(k, prefix)
            for step in itertools.product((0, 1), repeat=len(heads[-1])):
                residual_k1 = mechanism.partial(k + 1, prefix + (step,))
                tails = [agent.vars for agent in mechanism.agents[k + 1 :]]
                for suffix in itertools.product(
                    *(itertools.product((0, 1), repeat=len(v)) for v in tails)
                ):
                    for i in range(n - k - 1):
                        one = is_responsible(residual_k1, suffix, i)
                        two = is_responsible(residual_k, (step,) + suffix, i + 1)
                        if one != two:
                            return False
    return True


@pytest.fixture(scope="session")
def family():
    return small_family()


@pytest.fixture(scope="session")
def family_sample():
    """The 16 two-bit mechanisms plus every 16th three-bit one; keeps the
    per-module exhaustive checks fast (the full family runs in acceptance)."""
    full = small_family()
    return full[:16] + full[16::16]
