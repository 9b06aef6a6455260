"""Canonical example mechanisms used across the docs, tests, and CLI corpus."""

from .formula import parse
from .mechanism import Agent, Mechanism


def yellow_light() -> Mechanism:
    """Two drivers at a yellow light; braking first guarantees a rear-end
    collision (1 = brake)."""
    return Mechanism(
        (
            Agent("uncle", ("u",), {"brake": (1,), "continue": (0,)}),
            Agent("lorry", ("l",), {"brake": (1,), "continue": (0,)}),
        ),
        parse("!u"),
    )


def pollution() -> Mechanism:
    """Two factories; the fish die only if both pollute (1 = pollute)."""
    return Mechanism(
        (
            Agent("factory_a", ("va",), {"pollute": (1,), "dont_pollute": (0,)}),
            Agent("factory_b", ("vb",), {"pollute": (1,), "dont_pollute": (0,)}),
        ),
        parse("!(va & vb)"),
    )


def clemency(governor_first: bool = False) -> Mechanism:
    """A clemency petition: the prisoner is spared only when the board
    supports and the governor grants (1 = support / grant)."""
    board = Agent("board", ("b",), {"support": (1,), "dont_support": (0,)})
    governor = Agent("governor", ("g",), {"grant": (1,), "dont_grant": (0,)})
    agents = (governor, board) if governor_first else (board, governor)
    return Mechanism(agents, parse("b & g"))


_COSTUMES = {"red": (0, 0), "white": (0, 1), "blue": (1, 0)}


def _same_costume(p: str, q: str) -> str:
    # blue is encoded surjectively: (1,0) and the spare (1,1) are the same
    # costume, so matching on blue only compares the high bit.
    return (
        f"(!{p}1 & !{p}2 & !{q}1 & !{q}2)"
        f" | (!{p}1 & {p}2 & !{q}1 & {q}2)"
        f" | ({p}1 & {q}1)"
    )


def salsa(order: str = "abc") -> Mechanism:
    """A dance team must field a female and a male dancer in matching
    costumes: Ann (female) must match Bob or Charles.  Two bits per dancer
    encode three costumes.  ``order`` is a permutation of "abc" giving the
    decision order (a=Ann, b=Bob, c=Charles)."""
    if sorted(order) != ["a", "b", "c"]:
        raise ValueError(f"order must be a permutation of 'abc', got {order!r}")
    dancers = {
        key: Agent(name, (f"{key}1", f"{key}2"), dict(_COSTUMES))
        for key, name in (("a", "ann"), ("b", "bob"), ("c", "charles"))
    }
    constraint = parse(f"{_same_costume('a', 'b')} | {_same_costume('a', 'c')}")
    return Mechanism(tuple(dancers[key] for key in order), constraint)


def all_fixtures() -> dict[str, Mechanism]:
    """Name to mechanism for the whole corpus, including order variants."""
    return {
        "yellow_light": yellow_light(),
        "pollution": pollution(),
        "clemency": clemency(),
        "clemency_governor_first": clemency(governor_first=True),
        "salsa_abc": salsa("abc"),
        "salsa_bac": salsa("bac"),
        "salsa_bca": salsa("bca"),
        "trivial_true": Mechanism((), parse("T")),
        "trivial_false": Mechanism((), parse("F")),
    }
