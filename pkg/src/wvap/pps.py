"""Pre- and post-selected ancillas: weak, modular and potent values.

System 1 (the register being steered) sits on the high-order bits of a joint
state, system 2 (the pre/post-selected ancilla) on the low-order bits.
Couplings are ``exp(-i g O (x) A)`` with hbar = 1.

The dense machinery here is meant for small cross-check instances; each
subsystem is capped at 6 qubits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    DimensionTooLarge,
    ImpossibleOutcome,
    IncompleteProjectors,
    NotHermitian,
    NotUnitary,
    OrthogonalSelection,
)
from .qstate import (
    EXACT_TOL,
    LinearOperator,
    Statevector,
    apply_operator,
    inner_product,
    is_hermitian,
    is_unitary,
)

MAX_SUBSYSTEM_DIM = 2**6
SELECTION_TOL = 1e-12
# Squared amplitude below which a post-selection click is treated as impossible.
IMPOSSIBLE_PROB = SELECTION_TOL**2


@dataclass(frozen=True)
class PrePostSelection:
    psi_i: Statevector
    psi_f: Statevector

    def __post_init__(self) -> None:
        if self.psi_i.dim != self.psi_f.dim:
            raise DimensionMismatch(
                f"pre-selection dim {self.psi_i.dim} vs post-selection dim {self.psi_f.dim}"
            )
        for name in ("psi_i", "psi_f"):
            if not getattr(self, name).is_normalized():
                raise ValueError(f"{name} is not normalized")

    @property
    def overlap(self) -> complex:
        """<psi_f|psi_i>."""
        return inner_product(self.psi_f, self.psi_i)


@dataclass(frozen=True)
class CoupledSystem:
    """Interaction ``exp(-i g O (x) A)``; ``O`` acts on system 1, ``A`` on system 2."""

    O: LinearOperator
    A: LinearOperator
    g: float

    def __post_init__(self) -> None:
        for name in ("O", "A"):
            op = getattr(self, name)
            if op.dim > MAX_SUBSYSTEM_DIM:
                raise DimensionTooLarge(
                    f"{name} has dim {op.dim}; limit is {MAX_SUBSYSTEM_DIM}"
                )
            if not is_hermitian(op):
                raise NotHermitian(f"{name} is not Hermitian")

    @cached_property
    def _eig_O(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linalg.eigh(self.O.to_dense())

    @cached_property
    def _eig_A(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linalg.eigh(self.A.to_dense())

    def with_coupling(self, g: float) -> "CoupledSystem":
        other = CoupledSystem(self.O, self.A, g)
        # eigendecompositions do not depend on g
        for key in ("_eig_O", "_eig_A"):
            if key in self.__dict__:
                other.__dict__[key] = self.__dict__[key]
        return other


@dataclass(frozen=True)
class PotentValueSet:
    values: np.ndarray
    basis_dim: int

    @property
    def norm_factor(self) -> float:
        """Normalization of the reconstructed state: 1 / sqrt(sum |value_k|^2)."""
        return 1.0 / math.sqrt(float(np.sum(np.abs(self.values) ** 2)))

    def conditional_state(self) -> Statevector:
        return Statevector(self.norm_factor * self.values)


@dataclass(frozen=True)
class PostselectionOutcome:
    conditional_state: Statevector
    success_probability: float


def _check_pair(sys: CoupledSystem, Psi: Statevector, psi: Statevector) -> None:
    if sys.O.dim != Psi.dim:
        raise DimensionMismatch(f"O has dim {sys.O.dim}, system-1 state {Psi.dim}")
    if sys.A.dim != psi.dim:
        raise DimensionMismatch(f"A has dim {sys.A.dim}, system-2 state {psi.dim}")


def coupled_evolve(sys: CoupledSystem, Psi: Statevector, psi_i: Statevector) -> Statevector:
    """Joint state ``exp(-i g O (x) A) |Psi>|psi_i>`` via both spectral decompositions."""
    _check_pair(sys, Psi, psi_i)
    lam, wo = sys._eig_O
    a, wa = sys._eig_A
    m = np.outer(Psi.amps, psi_i.amps)
    # Rotate into the joint eigenbasis, apply phases, rotate back.
    t = wo.conj().T @ m @ wa.conj()
    t *= np.exp(-1j * sys.g * np.outer(lam, a))
    return Statevector._owned((wo @ t @ wa.T).reshape(-1))


def interaction_operators(sys: CoupledSystem, Psi: Statevector) -> np.ndarray:
    """Stack of system-2 operators ``A_k = <k| exp(-i g O (x) A) |Psi>``.

    Built as ``A_k = sum_j <k|o_j><o_j|Psi> exp(-i g lambda_j A)``; shape
    ``(dim1, dim2, dim2)``.
    """
    if sys.O.dim != Psi.dim:
        raise DimensionMismatch(f"O has dim {sys.O.dim}, state has {Psi.dim}")
    lam, wo = sys._eig_O
    a, wa = sys._eig_A
    weights = wo * (wo.conj().T @ Psi.amps)[None, :]
    phases = np.exp(-1j * sys.g * np.outer(lam, a))
    exps = np.einsum("bm,jm,cm->jbc", wa, phases, wa.conj())
    return np.einsum("kj,jbc->kbc", weights, exps)


def potent_values(
    sys: CoupledSystem, Psi: Statevector, sel: PrePostSelection
) -> PotentValueSet:
    """Potent values ``<psi_f|A_k|psi_i> / <psi_f|psi_i>`` for every basis label k."""
    _check_pair(sys, Psi, sel.psi_i)
    overlap = _checked_overlap(sel)
    ops = interaction_operators(sys, Psi)
    numer = np.einsum("b,kbc,c->k", sel.psi_f.amps.conj(), ops, sel.psi_i.amps)
    return PotentValueSet(values=numer / overlap, basis_dim=Psi.dim)


def _checked_overlap(sel: PrePostSelection) -> complex:
    overlap = sel.overlap
    if abs(overlap) <= SELECTION_TOL:
        raise OrthogonalSelection(
            f"|<psi_f|psi_i>| = {abs(overlap):.3e} is at or below {SELECTION_TOL}"
        )
    return overlap


def _selection_quotient(op: LinearOperator, sel: PrePostSelection) -> complex:
    if op.dim != sel.psi_i.dim:
        raise DimensionMismatch(f"operator dim {op.dim} vs ancilla dim {sel.psi_i.dim}")
    overlap = _checked_overlap(sel)
    return inner_product(sel.psi_f, apply_operator(op, sel.psi_i)) / overlap


def weak_value(A: LinearOperator, sel: PrePostSelection) -> complex:
    """``<psi_f|A|psi_i> / <psi_f|psi_i>``. Unbounded in modulus, possibly complex."""
    return _selection_quotient(A, sel)


def modular_value(V: LinearOperator, sel: PrePostSelection) -> complex:
    """Same quotient as :func:`weak_value` for a unitary ``V``."""
    if not is_unitary(V):
        raise NotUnitary("modular values are defined for unitary operators")
    return _selection_quotient(V, sel)


def _contract(rows: np.ndarray, psi_f: np.ndarray) -> np.ndarray:
    """c[x_A] = sum_b conj(psi_f[b]) rows[x_A, b]."""
    return rows @ psi_f.conj()


def _outcome(c: np.ndarray) -> PostselectionOutcome:
    prob = float(np.sum(np.abs(c) ** 2))
    if prob <= IMPOSSIBLE_PROB:
        raise ImpossibleOutcome(f"post-selection probability {prob:.3e}")
    return PostselectionOutcome(
        conditional_state=Statevector._owned(c / math.sqrt(prob)),
        success_probability=min(prob, 1.0),
    )


def postselect(joint: Statevector, psi_f: Statevector) -> PostselectionOutcome:
    """Project register B of ``joint`` onto ``psi_f``.

    The conditional state keeps the raw phase of the contraction.
    """
    d_b = psi_f.dim
    if joint.dim % d_b or joint.dim // d_b < 2:
        raise DimensionMismatch(f"joint dim {joint.dim} vs ancilla dim {d_b}")
    c = _contract(joint.amps.reshape(-1, d_b), psi_f.amps)
    return _outcome(c)


Block = tuple[LinearOperator, LinearOperator]


def _check_blocks(blocks: Sequence[Block]) -> tuple[int, int]:
    if not blocks:
        raise IncompleteProjectors("no projector blocks given")
    d1, d2 = blocks[0][0].dim, blocks[0][1].dim
    for proj, v in blocks:
        if proj.dim != d1 or v.dim != d2:
            raise DimensionMismatch("blocks act on inconsistent dimensions")
    if d1 > MAX_SUBSYSTEM_DIM or d2 > MAX_SUBSYSTEM_DIM:
        raise DimensionTooLarge(f"subsystem dims {d1}, {d2} exceed {MAX_SUBSYSTEM_DIM}")
    mats = [p.to_dense() for p, _ in blocks]
    if np.max(np.abs(sum(mats) - np.eye(d1))) > EXACT_TOL:
        raise IncompleteProjectors("projectors do not sum to the identity")
    for i, pi in enumerate(mats):
        for j, pj in enumerate(mats):
            target = pi if i == j else 0.0
            if np.max(np.abs(pi @ pj - target)) > EXACT_TOL:
                raise IncompleteProjectors(f"blocks {i} and {j} are not orthogonal projectors")
    for _, v in blocks:
        if not is_unitary(v):
            raise NotUnitary("every conditional block must be unitary")
    return d1, d2


def potent_operator(blocks: Sequence[Block], sel: PrePostSelection) -> np.ndarray:
    """Dense ``sum_k <V_k>_M P_k`` acting on system 1."""
    _check_blocks(blocks)
    return sum(modular_value(v, sel) * p.to_dense() for p, v in blocks)


def potent_operator_apply(
    blocks: Sequence[Block], sel: PrePostSelection, Psi: Statevector
) -> PostselectionOutcome:
    """Post-selected outcome of ``U = sum_k P_k (x) V_k`` in one step.

    ``blocks`` pairs each projector ``P_k`` on system 1 with a unitary
    ``V_k`` on system 2. Each branch is weighted by ``<psi_f|V_k|psi_i>``,
    which is ``<V_k>_M <psi_f|psi_i>``; the unnormalized vector therefore
    has the same phase as the evolve-then-postselect route and its squared
    norm is the click probability.
    """
    d1, d2 = _check_blocks(blocks)
    if Psi.dim != d1 or sel.psi_i.dim != d2:
        raise DimensionMismatch("state dims do not match the blocks")
    c = np.zeros(d1, dtype=np.complex128)
    for proj, v in blocks:
        amp = inner_product(sel.psi_f, apply_operator(v, sel.psi_i))
        c += amp * apply_operator(proj, Psi).amps
    try:
        return _outcome(c)
    except ImpossibleOutcome as exc:
        raise OrthogonalSelection(str(exc)) from exc


def weak_coupling_state(
    sys: CoupledSystem, Psi: Statevector, sel: PrePostSelection, g: float
) -> Statevector:
    """Normalized ``exp(-i g A_W O) |Psi>``; non-unitary when A_W is complex."""
    a_w = weak_value(sys.A, sel)
    lam, wo = sys._eig_O
    amps = wo @ (np.exp(-1j * g * a_w * lam) * (wo.conj().T @ Psi.amps))
    return Statevector._owned(amps / np.linalg.norm(amps))


def weak_limit_check(
    sys: CoupledSystem,
    Psi: Statevector,
    sel: PrePostSelection,
    g_values: Iterable[float],
) -> list[tuple[float, float]]:
    """Distance between the exact post-selected state and its weak-value form.

    Returns ``(g, sqrt(1 - |<exact|approx>|^2))`` per coupling; ``sys.g`` is
    ignored in favour of ``g_values``.
    """
    gs = [float(g) for g in g_values]
    if any(g < 0 for g in gs) or any(b > a for a, b in zip(gs, gs[1:])):
        raise ValueError("g_values must be non-negative and descending")
    if gs and max(gs) >= 0.5:
        raise ValueError("weak-limit ladder must stay below g = 0.5")
    table = []
    for g in gs:
        coupled = sys.with_coupling(g)
        exact = postselect(coupled_evolve(coupled, Psi, sel.psi_i), sel.psi_f)
        approx = weak_coupling_state(coupled, Psi, sel, g)
        f = abs(inner_product(exact.conditional_state, approx)) ** 2
        table.append((g, math.sqrt(max(0.0, 1.0 - f))))
    return table


def deviation_ratios(table: Sequence[tuple[float, float]]) -> list[float]:
    """deviation(g_{i+1}) / deviation(g_i) for consecutive table rows."""
    return [b[1] / a[1] for a, b in zip(table, table[1:])]


__all__ = [
    "CoupledSystem",
    "PotentValueSet",
    "PostselectionOutcome",
    "PrePostSelection",
    "coupled_evolve",
    "deviation_ratios",
    "interaction_operators",
    "modular_value",
    "potent_operator",
    "potent_operator_apply",
    "potent_values",
    "postselect",
    "weak_coupling_state",
    "weak_limit_check",
    "weak_value",
]
