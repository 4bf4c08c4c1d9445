"""Regenerates the bundled scenario configs."""
import json
import math
import pathlib
import re

HERE = pathlib.Path(__file__).parent
SCHEMA = "fracrelax.scenario/1"
AAP = ["AP", "AAP"]


def tridiag(n, h, shift=0.0):
    a = [[0.0] * n for _ in range(n)]
    for i in range(n):
        a[i][i] = -2.0 / h**2 - shift
        if i > 0:
            a[i][i - 1] = 1.0 / h**2
        if i + 1 < n:
            a[i][i + 1] = 1.0 / h**2
    return a


def diag(v):
    return [[v[i] if i == j else 0.0 for j in range(len(v))] for i in range(len(v))]


def kronecker(profile=None, decay=1.0):
    def term(t):
        if profile is not None:
            t["profile"] = profile
        return t
    return {
        "sines": [term({"amp": 1.0, "omega": 1.0}), term({"amp": 1.0, "omega": math.sqrt(2.0)})],
        "exps": [term({"amp": decay, "rate": 1.0})],
    }


def write(sc):
    sc = {"schema": SCHEMA, **sc}
    text = json.dumps(sc, indent=2)
    # one line per innermost array
    text = re.sub(r"\[[^\[\]{}]*\]", lambda m: re.sub(r"\s+", " ", m.group(0)).replace("[ ", "[").replace(" ]", "]"), text)
    (HERE / f"{sc['name']}.json").write_text(text + "\n")


write({
    "name": "scalar_relax",
    "description": "A = -1, gamma = 0.5, f = sin t + sin sqrt2 t + exp(-t)",
    "criteria": ["3", "6"],
    "operator": {"kind": "dense", "dim": 1, "A": [[-1.0]]},
    "gamma": 0.5,
    "forcing": kronecker(),
    "solver": "linear",
    "grid": {"T": 400.0, "N": 25600},
    "analysis": {"decay_slopes": True, "classify_solution": True},
    "expect": {"verdict_in": AAP, "remainder_tail_max": 0.05, "decay_slope_tol": 0.05, "residual_max": 0.05},
})

write({
    "name": "diagonal_relax",
    "description": "A = diag(-0.5, -1, -2, -4), gamma = 0.7, constant plus periodic forcing",
    "criteria": ["3", "4"],
    "operator": {"kind": "dense", "dim": 4, "A": diag([-0.5, -1.0, -2.0, -4.0])},
    "gamma": 0.7,
    "x0": [1.0, -1.0, 0.5, 0.0],
    "forcing": {"sines": [{"amp": 1.0, "omega": 1.0}], "constants": [{"value": 0.5}]},
    "solver": "linear",
    "grid": {"T": 200.0, "N": 12800},
    "analysis": {"condition_P": True, "condition_p_c": 0.25, "decay_slopes": True, "classify_solution": True},
    "expect": {
        "condition_p_holds": True,
        "decay_slope_tol": 0.05,
        "small_time_violation_max": 0.1,
        "verdict_in": AAP,
        "residual_max": 0.05,
    },
})

n = 10
h = 1.0 / (n + 1)
write({
    "name": "heat_1d",
    "description": "Dirichlet Laplacian on 10 interior nodes, gamma = 0.5",
    "criteria": ["6"],
    "operator": {"kind": "dense", "dim": n, "A": tridiag(n, h)},
    "gamma": 0.5,
    "forcing": kronecker([math.sin(math.pi * (i + 1) * h) for i in range(n)]),
    "solver": "linear",
    "grid": {"T": 400.0, "N": 25600},
    "analysis": {"classify_solution": True},
    "expect": {"verdict_in": AAP, "remainder_tail_max": 0.05, "residual_max": 0.5},
})

n = 50
h = 1.0 / (n + 1)
xs = [(i + 1) * h for i in range(n)]
m = [0.0 if 0.4 <= x <= 0.6 else 1.0 for x in xs]
write({
    "name": "degenerate_heat",
    "description": "pencil (M, L): m vanishes on [0.4, 0.6], L = Laplacian - 1, 50 nodes",
    "criteria": ["8"],
    "operator": {"kind": "pencil", "dim": n, "M": diag(m), "L": tridiag(n, h, 1.0)},
    "gamma": 0.5,
    "forcing": kronecker([math.sin(math.pi * x) for x in xs]),
    "solver": "linear",
    "grid": {"T": 300.0, "N": 19200},
    "analysis": {"condition_P": True, "classify_solution": True, "null_components": True},
    "expect": {"condition_p_holds": True, "null_component_max": 1e-12, "verdict_in": AAP, "remainder_tail_max": 0.05},
})

write({
    "name": "semilinear_relax",
    "description": "A = diag(-1, -2), gamma = 0.6, f + L sin(u) with A1 <= 0.5",
    "criteria": ["7"],
    "operator": {"kind": "dense", "dim": 2, "A": diag([-1.0, -2.0])},
    "gamma": 0.6,
    "x0": [0.5, -0.5],
    "forcing": {**kronecker(), "coupling": {"kind": "sin", "l": 0.1}},
    "solver": "semilinear",
    "grid": {"T": 400.0, "N": 25600},
    "picard": {"tol": 1e-8, "max_iter": 30},
    "analysis": {"contraction_cert": True, "double_start": True, "classify_solution": True},
    "expect": {
        "a1_max": 0.5,
        "contraction_ratio_slack": 0.05,
        "residual_max": 0.05,
        "picard_iterations_max": 30,
        "double_start_gap_max": 1e-8,
        "verdict_in": AAP,
        "remainder_tail_max": 0.05,
    },
})

write({
    "name": "regularized_relax",
    "description": "C-regularized generator, A = diag(-1, -2, -4), C = diag(0.5, 0.25, 0.5), gamma = 0.8",
    "criteria": ["12"],
    "operator": {"kind": "regularized", "dim": 3, "A": diag([-1.0, -2.0, -4.0]), "C": diag([0.5, 0.25, 0.5])},
    "gamma": 0.8,
    "x0": [0.25, 0.125, -0.25],
    "forcing": {"sines": [{"amp": 1.0, "omega": 1.0}]},
    "solver": "linear",
    "grid": {"T": 20.0, "N": 2000},
    "analysis": {"mild_defect_nodes": [100, 500, 1000, 2000]},
    "expect": {"mild_defect_max": 1e-6, "residual_max": 0.05},
})

write({
    "name": "weyl_line",
    "description": "full-line solution for A = -1, gamma = 0.5, f = 2 + sin t",
    "criteria": ["11"],
    "operator": {"kind": "dense", "dim": 1, "A": [[-1.0]]},
    "gamma": 0.5,
    "forcing": {"sines": [{"amp": 1.0, "omega": 1.0}], "constants": [{"value": 2.0}]},
    "solver": "weyl-liouville",
    "grid": {"T": 200.0, "N": 12800},
    "weyl": {"history": 10000.0},
    "analysis": {"weyl_self_convergence": True, "classify_solution": True},
    "expect": {"weyl_self_convergence_max": 1e-6, "verdict_in": ["AP"]},
})
