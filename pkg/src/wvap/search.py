"""One-query search with a pre- and post-selected ancilla register, plus Grover.

Two n-qubit registers: the search register A (high-order bits) and the
ancilla B (low-order bits). The ancilla is pre-selected in
``I_w H|0...0>``, coupled to A by ``U = (I - |y><y|) (x) I + |y><y| (x) V``
with ``V = Z^{(x)n} I_w``, and post-selected on ``|->^{(x)n}``. The weak value
of V is ``-N/2`` and the target probability conditioned on the click is
``N^2 / (N^2 + 4(N - 1))``.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidConfig, OddParityW
from .pps import PrePostSelection, PostselectionOutcome, _contract, _outcome, weak_value
from .qstate import (
    Composite,
    HadamardLayer,
    LinearOperator,
    PhaseLayer,
    Projector,
    Reflection,
    Statevector,
    _controlled_rows,
    apply_controlled,
    apply_operator,
    inner_product,
    parity_signs,
    uniform_state,
)

MAX_QUBITS = 14
U64_MAX = 2**64 - 1
# Joint amplitudes materialized at once by the streamed simulation (64 MiB).
STREAM_BLOCK_AMPS = 2**22
MC_CHUNK = 4096

_SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)


def popcount(x: int) -> int:
    return bin(x).count("1")


@dataclass(frozen=True)
class SearchConfig:
    n: int
    y: int
    w: int = 0
    seed: int = 42
    trials: int = 0

    def __post_init__(self) -> None:
        if not 1 <= self.n <= MAX_QUBITS:
            raise InvalidConfig(f"n must be in 1..{MAX_QUBITS}, got {self.n}")
        if not 0 <= self.y < self.N_db:
            raise InvalidConfig(f"target out of range: {self.y} not in [0, {self.N_db})")
        if not 0 <= self.w < self.N_db:
            raise InvalidConfig(f"w out of range: {self.w} not in [0, {self.N_db})")
        if popcount(self.w) % 2:
            raise OddParityW(f"w must have even popcount, got w={self.w}")
        if self.trials < 0:
            raise InvalidConfig("trials must be >= 0")
        if not 0 <= self.seed <= U64_MAX:
            raise InvalidConfig("seed must be an unsigned 64-bit integer")

    @property
    def N_db(self) -> int:
        return 2**self.n

    @property
    def joint_bytes(self) -> int:
        """Size of the full joint statevector, 2**(2n + 4) bytes."""
        return 2 ** (2 * self.n + 4)


class Oracle:
    """Black box for target ``y``; counts every use."""

    def __init__(self, n: int, y: int):
        self.n = n
        self._y = y
        self.query_count = 0

    @property
    def y(self) -> int:
        return self._y

    def phase(self, s: Statevector) -> Statevector:
        """I_y = I - 2|y><y|."""
        self.query_count += 1
        return apply_operator(Reflection(self.n, self._y), s)

    def controlled(self, op: LinearOperator, joint: Statevector) -> Statevector:
        """(I - |y><y|) (x) I + |y><y| (x) op on a joint state."""
        self.query_count += 1
        return apply_controlled(Projector(self.n, self._y), op, joint)

    def controlled_stream(self, op: LinearOperator):
        """One controlled query applied lazily to consecutive row blocks.

        Returns ``apply(rows, row_offset)`` which mutates ``rows`` in place.
        """
        self.query_count += 1
        control = Projector(self.n, self._y)

        def apply(rows: np.ndarray, row_offset: int) -> np.ndarray:
            return _controlled_rows(control, op, rows, row_offset)

        return apply


def build_preselection(n: int, w: int) -> Statevector:
    """I_w H^{(x)n} |0...0> = |+...+> - (2/sqrt N) |w>."""
    return apply_operator(Reflection(n, w), uniform_state(n))


def build_postselection(n: int) -> Statevector:
    """|->^{(x)n}: amplitude (-1)^popcount(x) / sqrt(N)."""
    return Statevector._owned(parity_signs(n) / math.sqrt(2**n) + 0j)


def _check_parity(w: int) -> None:
    if popcount(w) % 2:
        raise OddParityW(f"w must have even popcount, got w={w}")


def build_V(n: int, w: int) -> Composite:
    """V = Z^{(x)n} I_w as a structured product (I_w acts first)."""
    _check_parity(w)
    return Composite((PhaseLayer(n), Reflection(n, w)))


def dense_V_hadamard_form(n: int, w: int) -> np.ndarray:
    """H X H I_w on every qubit, materialized; the alternative construction of V."""
    h = HadamardLayer(n).to_dense()
    x = functools.reduce(np.kron, [_SIGMA_X] * n)
    return h @ x @ h @ Reflection(n, w).to_dense()


def projector_pair(V: LinearOperator) -> tuple[np.ndarray, np.ndarray]:
    """(I + V)/2 and (I - V)/2, dense."""
    v = V.to_dense()
    eye = np.eye(V.dim)
    return (eye + v) / 2, (eye - v) / 2


@dataclass
class ControlledUnitary:
    """Deferred U = (I - |y><y|) (x) I + |y><y| (x) V. One application is one query."""

    oracle: Oracle
    target: LinearOperator

    @property
    def n(self) -> int:
        return self.oracle.n

    def apply(self, joint: Statevector) -> Statevector:
        return self.oracle.controlled(self.target, joint)

    def to_dense(self) -> np.ndarray:
        """Materialized conditional form, for small n only."""
        pi = Projector(self.n, self.oracle.y).to_dense()
        eye = np.eye(2**self.n)
        return np.kron(eye - pi, eye) + np.kron(pi, self.target.to_dense())


def build_U(n: int, y: int, w: int) -> ControlledUnitary:
    return ControlledUnitary(Oracle(n, y), build_V(n, w))


def dense_U_projector_form(n: int, y: int, w: int) -> np.ndarray:
    """I (x) P1 + I_y (x) P2 with P1, P2 the eigenprojectors of V."""
    p1, p2 = projector_pair(build_V(n, w))
    return np.kron(np.eye(2**n), p1) + np.kron(Reflection(n, y).to_dense(), p2)


def evolve_and_postselect(
    U: ControlledUnitary,
    Psi: Statevector,
    psi_i: Statevector,
    psi_f: Statevector,
    block_amps: int = STREAM_BLOCK_AMPS,
) -> PostselectionOutcome:
    """Apply U to |Psi>|psi_i> and post-select B on psi_f.

    The joint state is produced a block of register-A rows at a time and
    contracted immediately, so peak memory is ``block_amps`` amplitudes
    rather than the full ``2**(2n)``. Every joint amplitude is still
    computed exactly.
    """
    d_a, d_b = Psi.dim, psi_i.dim
    rows_per_block = max(1, block_amps // d_b)
    apply_u = U.oracle.controlled_stream(U.target)
    c = np.empty(d_a, dtype=np.complex128)
    for start in range(0, d_a, rows_per_block):
        stop = min(start + rows_per_block, d_a)
        rows = np.outer(Psi.amps[start:stop], psi_i.amps)
        apply_u(rows, start)
        c[start:stop] = _contract(rows, psi_f.amps)
    return _outcome(c)


@dataclass(frozen=True)
class AnalyticPrediction:
    p: float
    overlap_sq: float
    weak_value_mod_sq: float
    end_to_end: float
    postsel_prob: float


def analytic_predictions(n: int) -> AnalyticPrediction:
    """Closed forms at N = 2**n; no simulation."""
    if n < 1:
        raise InvalidConfig("n must be >= 1")
    N = 2**n
    denom = N * N + 4 * (N - 1)
    return AnalyticPrediction(
        p=N * N / denom,
        overlap_sq=4 / (N * N),
        weak_value_mod_sq=N * N / 4,
        end_to_end=1 / N,
        postsel_prob=denom / N**3,
    )


@dataclass
class SearchReport:
    config: SearchConfig
    p_analytic: float
    p_sim: float
    weak_value: complex
    overlap: complex
    overlap_sq: float
    transition_amp: complex
    postsel_prob: float
    end_to_end_prob: float
    oracle_queries: int
    mc_postsel_successes: int = 0
    mc_target_hits: int = 0
    conditional_state: Statevector | None = field(default=None, repr=False)


def run_wvap(config: SearchConfig, block_amps: int = STREAM_BLOCK_AMPS) -> SearchReport:
    n, y, w = config.n, config.y, config.w
    Psi = uniform_state(n)
    psi_i = build_preselection(n, w)
    psi_f = build_postselection(n)
    U = build_U(n, y, w)
    outcome = evolve_and_postselect(U, Psi, psi_i, psi_f, block_amps)

    sel = PrePostSelection(psi_i, psi_f)
    p_sim = float(abs(outcome.conditional_state.amps[y]) ** 2)
    report = SearchReport(
        config=config,
        p_analytic=analytic_predictions(n).p,
        p_sim=p_sim,
        weak_value=weak_value(U.target, sel),
        overlap=sel.overlap,
        overlap_sq=abs(sel.overlap) ** 2,
        transition_amp=inner_product(psi_f, apply_operator(U.target, psi_i)),
        postsel_prob=outcome.success_probability,
        end_to_end_prob=outcome.success_probability * p_sim,
        oracle_queries=U.oracle.query_count,
        conditional_state=outcome.conditional_state,
    )
    if config.trials > 0:
        report.mc_postsel_successes, report.mc_target_hits = run_wvap_montecarlo(
            config, report
        )
    return report


def _mc_chunk(
    seed: int, index: int, size: int, postsel_prob: float, cdf: np.ndarray, y: int
) -> tuple[int, int]:
    rng = np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,)))
    )
    u = rng.random((size, 2))
    clicked = u[:, 0] < postsel_prob
    outcomes = np.searchsorted(cdf, u[clicked, 1], side="right")
    outcomes = np.minimum(outcomes, cdf.size - 1)
    return int(clicked.sum()), int(np.count_nonzero(outcomes == y))


def run_wvap_montecarlo(
    config: SearchConfig, report: SearchReport | None = None
) -> tuple[int, int]:
    """Sample ``config.trials`` runs of the physical protocol.

    Each trial draws a click/no-click for the ancilla projection
    ``{|psi_f><psi_f|, I - |psi_f><psi_f|}``; on a click the search register
    is measured in the computational basis. Failed trials are discarded.
    Trials are grouped in fixed chunks of ``MC_CHUNK``; chunk ``j`` draws
    from its own ``SeedSequence(seed, spawn_key=(j,))`` stream, so tallies do
    not depend on evaluation order.
    """
    if config.trials == 0:
        return 0, 0
    if report is None:
        report = run_wvap(
            SearchConfig(config.n, config.y, config.w, config.seed, trials=0)
        )
    cdf = np.cumsum(report.conditional_state.probabilities())
    cdf /= cdf[-1]
    successes = hits = 0
    for j, start in enumerate(range(0, config.trials, MC_CHUNK)):
        size = min(MC_CHUNK, config.trials - start)
        s, h = _mc_chunk(config.seed, j, size, report.postsel_prob, cdf, config.y)
        successes += s
        hits += h
    return successes, hits


@dataclass(frozen=True)
class GroverResult:
    iterations: int
    success_probability: float
    oracle_queries: int


def grover_iterations(n: int) -> int:
    return math.floor(math.pi / 4 * math.sqrt(2**n))


def grover_closed_form(n: int, k: int) -> float:
    theta = math.asin(1 / math.sqrt(2**n))
    return math.sin((2 * k + 1) * theta) ** 2


def run_grover(n: int, y: int, iterations: int | None = None) -> GroverResult:
    """Iterate G = -I_0 I_y on the uniform state; one query per iteration."""
    k = grover_iterations(n) if iterations is None else iterations
    if k < 0:
        raise InvalidConfig("iterations must be >= 0")
    oracle = Oracle(n, y)
    # I_0 = I - 2|s><s| with |s> uniform, as H I_{0...0} H
    reflect_uniform = Composite((HadamardLayer(n), Reflection(n, 0), HadamardLayer(n)))
    state = uniform_state(n)
    for _ in range(k):
        state = apply_operator(reflect_uniform, oracle.phase(state))
        state = Statevector._owned(-state.amps)
    return GroverResult(
        iterations=k,
        success_probability=float(abs(state.amps[y]) ** 2),
        oracle_queries=oracle.query_count,
    )
