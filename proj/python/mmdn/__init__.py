"""MMD-Newton multi-objective optimization toolkit.

Thin wrapper around the compiled extension; the heavy lifting lives in C++.
"""

try:
    # installed wheel: the extension lives inside the package
    from ._mmdn import (
        Problem,
        available_problems,
        delta_p,
        gd_p,
        generate_reference_set,
        igd_p,
        make_problem,
        mmd_grad_decision,
        mmd_grad_objective,
        mmd_hess_objective,
        mmd_sq,
        mmdn_run,
        nsga2_run,
        run_hybrid,
    )
except ImportError:  # development layout: extension on PYTHONPATH
    from _mmdn import (
        Problem,
        available_problems,
        delta_p,
        gd_p,
        generate_reference_set,
        igd_p,
        make_problem,
        mmd_grad_decision,
        mmd_grad_objective,
        mmd_hess_objective,
        mmd_sq,
        mmdn_run,
        nsga2_run,
        run_hybrid,
    )

__all__ = [
    "Problem",
    "available_problems",
    "delta_p",
    "gd_p",
    "generate_reference_set",
    "igd_p",
    "make_problem",
    "mmd_grad_decision",
    "mmd_grad_objective",
    "mmd_hess_objective",
    "mmd_sq",
    "mmdn_run",
    "nsga2_run",
    "run_hybrid",
]
