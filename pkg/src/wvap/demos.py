"""Small worked instances of the pre/post-selection framework.

Each function returns a JSON-ready dict; complex numbers are encoded as
``{"re": ..., "im": ...}``.
"""
from __future__ import annotations

import math

import numpy as np

from .pps import (
    CoupledSystem,
    PrePostSelection,
    coupled_evolve,
    deviation_ratios,
    modular_value,
    potent_operator_apply,
    potent_values,
    postselect,
    weak_limit_check,
    weak_value,
)
from .qstate import (
    Dense,
    Projector,
    Statevector,
    apply_controlled,
    fidelity,
    identity,
    make_basis_state,
    tensor_product,
    uniform_state,
)
from .search import (
    SearchConfig,
    build_postselection,
    build_preselection,
    build_V,
    projector_pair,
    run_wvap,
)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Z = np.diag([1.0, -1.0]).astype(np.complex128)
WEAK_LADDER = (0.1, 0.05, 0.025, 0.0125)


def cjson(z: complex) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def state_json(s: Statevector) -> list[dict]:
    return [cjson(a) for a in s.amps]


def weak_limit_demo() -> dict:
    plus = uniform_state(1)
    sel = PrePostSelection(make_basis_state(1, 0), Statevector([0.6, 0.8]))
    out = {
        "Psi": state_json(plus),
        "psi_i": state_json(sel.psi_i),
        "psi_f": state_json(sel.psi_f),
        "A": "sigma_x",
        "weak_value_A": cjson(weak_value(Dense(SIGMA_X), sel)),
        "observables": {},
    }
    # sigma_z squares to I, so its second-order residual drops out of the
    # state; the projector keeps it.
    for name, O in (("sigma_z", Dense(SIGMA_Z)), ("projector_1", Projector(1, 1))):
        table = weak_limit_check(CoupledSystem(O, Dense(SIGMA_X), 0.0), plus, sel, WEAK_LADDER)
        devs = [d for _, d in table]
        out["observables"][name] = {
            "table": [{"g": g, "deviation": d} for g, d in table],
            "ratios": deviation_ratios(table),
            "monotone": all(b < a for a, b in zip(devs, devs[1:])),
        }
    return out


def conditional_unitary_demo() -> dict:
    n = 2
    Psi = uniform_state(n)
    sel = PrePostSelection(make_basis_state(1, 0), Statevector([0.6, 0.8]))
    v = Dense(SIGMA_X)
    blocks = [(Projector(n, 3, complement=True), identity(1)), (Projector(n, 3), v)]
    one_step = potent_operator_apply(blocks, sel, Psi)
    joint = apply_controlled(Projector(n, 3), v, tensor_product(Psi, sel.psi_i))
    two_step = postselect(joint, sel.psi_f)
    return {
        "Psi": state_json(Psi),
        "psi_i": state_json(sel.psi_i),
        "psi_f": state_json(sel.psi_f),
        "blocks": ["(I - |3><3|) x I", "|3><3| x sigma_x"],
        "modular_values": [cjson(modular_value(op, sel)) for _, op in blocks],
        "weak_values": [cjson(weak_value(op, sel)) for _, op in blocks],
        "conditional_state": state_json(one_step.conditional_state),
        "success_probability": one_step.success_probability,
        "coupled_path_success_probability": two_step.success_probability,
        "max_amplitude_difference": float(
            np.max(np.abs(one_step.conditional_state.amps - two_step.conditional_state.amps))
        ),
    }


def search_equivalence_demo(n: int = 3) -> dict:
    N = 2**n
    y, w = N - 1, 0
    report = run_wvap(SearchConfig(n=n, y=y, w=w))
    V = build_V(n, w)
    sel = PrePostSelection(build_preselection(n, w), build_postselection(n))
    Psi = uniform_state(n)
    blocks = [(Projector(n, y, complement=True), identity(n)), (Projector(n, y), V)]
    one_step = potent_operator_apply(blocks, sel, Psi)
    # The same U written as exp(-i pi |y><y| (x) P2), with P2 = (I - V)/2.
    _, p2 = projector_pair(V)
    recast = potent_values(CoupledSystem(Projector(n, y), Dense(p2), math.pi), Psi, sel)
    joint = coupled_evolve(CoupledSystem(Projector(n, y), Dense(p2), math.pi), Psi, sel.psi_i)
    return {
        "n": n,
        "N": N,
        "y": y,
        "w": w,
        "weak_value": cjson(report.weak_value),
        "p_sim": report.p_sim,
        "postsel_prob": report.postsel_prob,
        "fidelity_potent_operator_vs_search": fidelity(
            one_step.conditional_state, report.conditional_state
        ),
        "fidelity_potent_values_vs_search": fidelity(
            recast.conditional_state(), report.conditional_state
        ),
        "coupled_evolution_postsel_prob": postselect(joint, sel.psi_f).success_probability,
        "potent_values": [cjson(v) for v in recast.values],
    }


DEMOS = {
    "weak-limit": weak_limit_demo,
    "conditional-unitary": conditional_unitary_demo,
    "search-equivalence": search_equivalence_demo,
}
