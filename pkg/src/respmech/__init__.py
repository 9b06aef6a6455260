"""Verifier for responsibility gaps and diffusion of responsibility in
sequential decision-making mechanisms with Boolean deontic constraints."""

from .formula import (
    FALSE,
    TRUE,
    And,
    BudgetExceededError,
    CaptureError,
    Const,
    Exists,
    Forall,
    Formula,
    FormulaSyntaxError,
    Implies,
    Not,
    Or,
    Var,
    eval_qbf,
    evaluate,
    free_vars,
    parse,
    render,
    rename,
    semantically_equivalent,
    substitute,
)
from .mechanism import (
    Agent,
    Mechanism,
    MechanismError,
    Profile,
    load_mechanism,
    save_mechanism,
)
from .responsibility import (
    DivergenceError,
    ResponsibilityVerdict,
    ability_formula,
    forcing_strategy,
    is_responsible,
    responsible_agents,
)
from .classifier import (
    CLASSES,
    ClassificationReport,
    Witness,
    classify,
    diffusion_free_brute,
    diffusion_free_formula,
    gap_diffusion_free_brute,
    gap_diffusion_free_formula,
    gap_diffusion_free_recursive,
    gap_free_brute,
    gap_free_formula,
    responsibility_free_brute,
    responsibility_free_formula,
)
from .qdimacs import (
    CnfInstance,
    PrenexQbf,
    SolverError,
    build_cnf,
    evaluate_instance,
    prenex,
    run_external,
    to_qdimacs,
    tseitin,
)
from .reductions import (
    ReductionInstance,
    df_instance,
    gdf_instance,
    gf_instance,
    random_formula,
)

__version__ = "0.1.0"
