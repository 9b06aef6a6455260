"""Prenexing, Tseitin conversion, QDIMACS emission, solver adapter."""

import sys
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from respmech.classifier import (
    diffusion_free_formula,
    gap_diffusion_free_formula,
    gap_free_formula,
    responsibility_free_formula,
)
from respmech.fixtures import clemency, pollution, yellow_light
from respmech.formula import (
    And,
    Exists,
    Forall,
    Not,
    Or,
    Var,
    eval_qbf,
    evaluate,
    free_vars,
    parse,
)
from respmech.qdimacs import (
    SolverError,
    build_cnf,
    evaluate_instance,
    format_qdimacs,
    prenex,
    run_external,
    to_qdimacs,
    tseitin,
)

from test_formula import qf_formulas


def fixture_formulas():
    out = []
    for m in (pollution(), yellow_light(), clemency()):
        out.extend(
            [
                diffusion_free_formula(m),
                gap_free_formula(m),
                responsibility_free_formula(m, 0),
                gap_diffusion_free_formula(m, 0),
            ]
        )
    return out


# ---------------------------------------------------------------------------
# prenex


def test_prenex_leading_universal_block():
    pq = prenex(diffusion_free_formula(pollution()))
    assert pq.prefix[0][0] == "a"
    assert pq.prefix[0][1][:2] == ("va", "vb")
    assert free_vars(pq.matrix) and not free_vars(pq.as_formula())


def test_prenex_preserves_truth_on_fixture_formulas():
    for f in fixture_formulas():
        pq = prenex(f)
        assert eval_qbf(pq.as_formula()) == eval_qbf(f), f


def test_prenex_already_prenex_input_unchanged():
    f = Forall(("p",), Exists(("q",), Or(Not(Var("p")), Var("q"))))
    pq = prenex(f)
    assert pq.prefix == (("a", ("p",)), ("e", ("q",)))
    assert pq.matrix == Or(Not(Var("p")), Var("q"))


def test_prenex_flips_quantifiers_under_negation():
    f = Not(Exists(("p",), Var("p")))
    pq = prenex(f)
    assert pq.prefix == (("a", ("p",)),)
    assert pq.matrix == Not(Var("p"))


def test_prenex_renames_clashing_binders():
    f = And(Forall(("p",), Var("p")), Exists(("p",), Var("p")))
    pq = prenex(f)
    names = [v for _, block in pq.prefix for v in block]
    assert len(set(names)) == 2
    assert eval_qbf(pq.as_formula()) == eval_qbf(f) is False


def test_prenex_rejects_open_formulas():
    with pytest.raises(ValueError, match="closed"):
        prenex(parse("p -> p"))


@settings(max_examples=40)
@given(qf_formulas(), st.data())
def test_prenex_preserves_truth_on_random_closed_formulas(matrix, data):
    f = matrix
    for name in free_vars(f):
        f = (Forall if data.draw(st.booleans()) else Exists)((name,), f)
    pq = prenex(f)
    assert eval_qbf(pq.as_formula()) == eval_qbf(f)


# ---------------------------------------------------------------------------
# tseitin


def test_tseitin_single_variable():
    inst = tseitin(Var("p"))
    assert inst.var_ids == {"p": 1}
    assert inst.clauses == [[1]]
    assert inst.aux_ids == []


def test_tseitin_negated_conjunction():
    inst = tseitin(parse("!(va & vb)"))
    assert inst.aux_ids == [3]
    assert [3, "and", (1, 2)] == list(inst.aux_defs[0])
    assert inst.clauses[-1] == [-3]  # negated root unit


def test_tseitin_implication_unfolds():
    inst = tseitin(parse("a -> b"))
    assert inst.aux_defs[0][1] == "or"
    assert inst.aux_defs[0][2] == (-1, 2)


@pytest.mark.parametrize("text", ["a -> b", "!(va & vb)", "(a | !b) & (b -> a)", "T", "F"])
def test_tseitin_projection_small(text):
    matrix = parse(text)
    inst = tseitin(matrix)
    names = list(inst.var_ids)
    aux = list(inst.aux_ids)
    for combo in product((0, 1), repeat=len(names)):
        env = dict(zip(names, combo))
        # exhaustive over auxiliaries: the CNF must have a model extending
        # this assignment exactly when the matrix holds under it
        assign = {inst.var_ids[n]: bool(b) for n, b in env.items()}
        models = 0
        for ext in product((False, True), repeat=len(aux)):
            full = dict(assign)
            full.update(zip(aux, ext))
            ok = all(
                any((lit > 0) == full[abs(lit)] for lit in clause)
                for clause in inst.clauses
            )
            models += ok
        assert (models > 0) == evaluate(matrix, env)
        assert models <= 1  # equivalence clauses force the auxiliaries


@settings(max_examples=40)
@given(qf_formulas())
def test_tseitin_projection_random(matrix):
    inst = tseitin(matrix)
    names = list(inst.var_ids)
    for combo in product((0, 1), repeat=len(names)):
        env = dict(zip(names, combo))
        assign = {inst.var_ids[n]: bool(b) for n, b in env.items()}
        for aux_id, gate, (a, b) in inst.aux_defs:
            va = assign[abs(a)] == (a > 0)
            vb = assign[abs(b)] == (b > 0)
            assign[aux_id] = (va and vb) if gate == "and" else (va or vb)
        satisfied = all(
            any((lit > 0) == assign[abs(lit)] for lit in clause)
            for clause in inst.clauses
        )
        assert satisfied == evaluate(matrix, env)


# ---------------------------------------------------------------------------
# QDIMACS emission


def test_qdimacs_tautology_format():
    text = to_qdimacs(parse("@all p. p -> p"))
    lines = text.strip().splitlines()
    assert lines[0] == "c map p_1 1" or lines[0] == "c map p 1"
    header = next(l for l in lines if l.startswith("p cnf"))
    _, _, nvars, nclauses = header.split()
    assert int(nvars) >= 1
    quant = [l for l in lines if l[0] in "ae"]
    assert all(l.endswith(" 0") for l in quant)
    kinds = [l[0] for l in quant]
    assert all(a != b for a, b in zip(kinds, kinds[1:]))  # strict alternation
    clause_lines = lines[lines.index(header) + 1 + len(quant) :]
    assert len(clause_lines) == int(nclauses)
    assert all(l.endswith("0") for l in clause_lines)


def test_qdimacs_map_comments_cover_prefix():
    inst = build_cnf(gap_free_formula(clemency()))
    text = format_qdimacs(inst)
    for name, vid in inst.var_ids.items():
        assert f"c map {name} {vid}" in text


def test_aux_variables_extend_innermost_existential_block():
    inst = build_cnf(Forall(("p", "q"), parse("!(p & q)")))
    assert inst.aux_ids
    assert inst.prefix[-1][0] == "e"
    assert set(inst.aux_ids) <= set(inst.prefix[-1][1])
    inst2 = build_cnf(Exists(("p",), And(Var("p"), Var("p"))))
    assert inst2.prefix[-1][0] == "e"
    assert set(inst2.aux_ids) <= set(inst2.prefix[-1][1])


def test_instance_truth_matches_naive_evaluation():
    for f in fixture_formulas():
        assert evaluate_instance(build_cnf(f)) == eval_qbf(f), f


def test_instance_truth_trivial_cases():
    assert evaluate_instance(build_cnf(parse("T"))) is True
    assert evaluate_instance(build_cnf(parse("F"))) is False
    assert evaluate_instance(build_cnf(parse("@all p. p -> T"))) is True


# ---------------------------------------------------------------------------
# External solver adapter


def _fake_solver(tmp_path, body: str) -> str:
    script = tmp_path / "fake_solver.py"
    script.write_text(body)
    return f"{sys.executable} {script}"


def test_run_external_exit_codes(tmp_path):
    true_solver = _fake_solver(tmp_path, "import sys; sys.exit(10)\n")
    assert run_external("p cnf 0 0\n", true_solver) is True
    false_solver = _fake_solver(tmp_path, "import sys; sys.exit(20)\n")
    assert run_external("p cnf 0 0\n", false_solver) is False


def test_run_external_result_line(tmp_path):
    solver = _fake_solver(tmp_path, "print('s cnf 1 3 2')\n")
    assert run_external("p cnf 0 0\n", solver) is True
    solver = _fake_solver(tmp_path, "print('s cnf 0 3 2')\n")
    assert run_external("p cnf 0 0\n", solver) is False


def test_run_external_file_placeholder(tmp_path):
    body = "import sys\nprint(open(sys.argv[1]).readline().strip())\nsys.exit(10)\n"
    script = tmp_path / "echo_solver.py"
    script.write_text(body)
    command = f"{sys.executable} {script} {{file}}"
    assert run_external("p cnf 1 1\n1 0\n", command) is True


def test_run_external_malformed_output(tmp_path):
    solver = _fake_solver(tmp_path, "print('hello'); import sys; sys.exit(0)\n")
    with pytest.raises(SolverError, match="no verdict"):
        run_external("p cnf 0 0\n", solver)


def test_run_external_missing_solver():
    with pytest.raises(SolverError, match="not found"):
        run_external("p cnf 0 0\n", "definitely-not-a-solver-binary-xyz")
