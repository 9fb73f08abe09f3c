"""Dense statevectors and bit-indexed gate kernels.

Amplitudes live in a flat ``complex128`` array (interleaved re/im in memory).
Index ``x`` is the computational-basis label with bit 0 least significant.
For a joint state of two registers, register A occupies the high-order bits
and register B the low-order bits, so the joint array reshapes to
``(2**n_A, 2**n_B)`` with A on the row axis.

Every kernel works on the *last* axis of an ndarray, which lets the same code
act on one state or on a stack of register-B rows of a joint state.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    DimensionTooLarge,
    IndexOutOfRange,
    InvalidSize,
)

NORM_TOL = 1e-10
EXACT_TOL = 1e-12
# Two registers of at most 6 qubits each.
MAX_DENSE_DIM = 2**12

_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_H = np.array([[1, 1], [1, -1]], dtype=np.complex128) * _INV_SQRT2
_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


def _qubits_for_dim(dim: int) -> int:
    if dim < 2 or dim & (dim - 1):
        raise InvalidSize(f"dimension {dim} is not a power of two >= 2")
    return dim.bit_length() - 1


@functools.lru_cache(maxsize=32)
def parity_signs(n: int) -> np.ndarray:
    """(-1)**popcount(x) for x in [0, 2**n), as a read-only float array."""
    x = np.arange(2**n, dtype=np.uint64)
    signs = 1.0 - 2.0 * (np.bitwise_count(x) & 1).astype(np.float64)
    signs.flags.writeable = False
    return signs


# --------------------------------------------------------------------------
# Statevector
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Statevector:
    """An immutable n-qubit pure state.

    The constructor copies ``amps``; the stored array is read-only.
    """

    amps: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.amps, dtype=np.complex128, copy=True).reshape(-1)
        _qubits_for_dim(arr.size)
        if not np.isfinite(arr).all():
            raise ValueError("amplitudes must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "amps", arr)

    @classmethod
    def _owned(cls, arr: np.ndarray) -> "Statevector":
        # Skips the defensive copy; caller guarantees nobody else holds ``arr``.
        obj = object.__new__(cls)
        arr = arr.reshape(-1)
        _qubits_for_dim(arr.size)
        arr.flags.writeable = False
        object.__setattr__(obj, "amps", arr)
        return obj

    @property
    def dim(self) -> int:
        return self.amps.size

    @property
    def num_qubits(self) -> int:
        return self.dim.bit_length() - 1

    def __len__(self) -> int:
        return self.dim

    def __getitem__(self, x):
        return self.amps[x]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(self.norm() ** 2 - 1.0) <= tol

    def normalized(self) -> "Statevector":
        nrm = self.norm()
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return Statevector._owned(self.amps / nrm)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def __repr__(self) -> str:
        return f"Statevector(num_qubits={self.num_qubits}, amps={self.amps!r})"


# --------------------------------------------------------------------------
# Linear operators
# --------------------------------------------------------------------------


class LinearOperator:
    """Operator on a ``2**num_qubits`` dimensional register.

    Subclasses supply a structured kernel (``_apply``) and an independent
    dense materialization (``to_dense``) built from the defining formula.
    """

    num_qubits: int

    @property
    def dim(self) -> int:
        return 2**self.num_qubits

    def _apply(self, arr: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def to_dense(self) -> np.ndarray:
        raise NotImplementedError

    def _check_dense_size(self) -> None:
        if self.dim > MAX_DENSE_DIM:
            raise DimensionTooLarge(
                f"refusing to materialize a {self.dim}x{self.dim} matrix"
            )

    def __matmul__(self, other: "LinearOperator") -> "Composite":
        if not isinstance(other, LinearOperator):
            return NotImplemented
        left = self.factors if isinstance(self, Composite) else (self,)
        right = other.factors if isinstance(other, Composite) else (other,)
        return Composite(tuple(left) + tuple(right), num_qubits=self.num_qubits)


@dataclass(frozen=True, eq=False)
class Dense(LinearOperator):
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=np.complex128, copy=True)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"matrix must be square, got {m.shape}")
        n = _qubits_for_dim(m.shape[0])
        if m.shape[0] > MAX_DENSE_DIM:
            raise DimensionTooLarge(f"dense operator of dim {m.shape[0]}")
        if not np.isfinite(m).all():
            raise ValueError("matrix entries must be finite")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "num_qubits", n)

    def _apply(self, arr: np.ndarray) -> np.ndarray:
        return arr @ self.matrix.T

    def to_dense(self) -> np.ndarray:
        return self.matrix.copy()


@dataclass(frozen=True)
class Reflection(LinearOperator):
    """I - 2|m><m|."""

    num_qubits: int
    index: int

    def __post_init__(self) -> None:
        _check_index(self.num_qubits, self.index)

    def _apply(self, arr: np.ndarray) -> np.ndarray:
        out = arr.copy()
        out[..., self.index] *= -1.0
        return out

    def to_dense(self) -> np.ndarray:
        self._check_dense_size()
        ket = np.zeros((self.dim, 1), dtype=np.complex128)
        ket[self.index] = 1.0
        return np.eye(self.dim, dtype=np.complex128) - 2.0 * (ket @ ket.conj().T)


@dataclass(frozen=True)
class Projector(LinearOperator):
    """|m><m|, or I - |m><m| when ``complement`` is set."""

    num_qubits: int
    index: int
    complement: bool = False

    def __post_init__(self) -> None:
        _check_index(self.num_qubits, self.index)

    def _apply(self, arr: np.ndarray) -> np.ndarray:
        if self.complement:
            out = arr.copy()
            out[..., self.index] = 0.0
        else:
            out = np.zeros_like(arr)
            out[..., self.index] = arr[..., self.index]
        return out

    def to_dense(self) -> np.ndarray:
        self._check_dense_size()
        ket = np.zeros((self.dim, 1), dtype=np.complex128)
        ket[self.index] = 1.0
        proj = ket @ ket.conj().T
        if self.complement:
            return np.eye(self.dim, dtype=np.complex128) - proj
        return proj


@dataclass(frozen=True)
class PhaseLayer(LinearOperator):
    """sigma_z on every qubit."""

    num_qubits: int

    def __post_init__(self) -> None:
        _check_qubits(self.num_qubits)

    def _apply(self, arr: np.ndarray) -> np.ndarray:
        return arr * parity_signs(self.num_qubits)

    def to_dense(self) -> np.ndarray:
        self._check_dense_size()
        return functools.reduce(np.kron, [_Z] * self.num_qubits)


@dataclass(frozen=True)
class HadamardLayer(LinearOperator):
    """Hadamard on every qubit."""

    num_qubits: int

    def __post_init__(self) -> None:
        _check_qubits(self.num_qubits)

    def _apply(self, arr: np.ndarray) -> np.ndarray:
        return _hadamard_passes(arr, self.num_qubits)

    def to_dense(self) -> np.ndarray:
        self._check_dense_size()
        return functools.reduce(np.kron, [_H] * self.num_qubits)


@dataclass(frozen=True)
class Composite(LinearOperator):
    """Ordered product ``factors[0] @ factors[1] @ ...``.

    The last factor acts first. An empty product is the identity.
    """

    factors: tuple
    num_qubits: int | None = None

    def __post_init__(self) -> None:
        factors = tuple(self.factors)
        n = self.num_qubits
        if n is None:
            if not factors:
                raise InvalidSize("empty Composite needs an explicit num_qubits")
            n = factors[0].num_qubits
        _check_qubits(n)
        for f in factors:
            if f.num_qubits != n:
                raise DimensionMismatch(
                    f"factor on {f.num_qubits} qubits in a {n}-qubit product"
                )
        object.__setattr__(self, "factors", factors)
        object.__setattr__(self, "num_qubits", n)

    def _apply(self, arr: np.ndarray) -> np.ndarray:
        for f in reversed(self.factors):
            arr = f._apply(arr)
        return arr

    def to_dense(self) -> np.ndarray:
        self._check_dense_size()
        out = np.eye(self.dim, dtype=np.complex128)
        for f in self.factors:
            out = out @ f.to_dense()
        return out


def identity(n: int) -> Composite:
    return Composite((), num_qubits=n)


def _check_qubits(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidSize(f"qubit count must be >= 1, got {n!r}")


def _check_index(n: int, x: int) -> None:
    _check_qubits(n)
    if not 0 <= x < 2**n:
        raise IndexOutOfRange(f"basis index {x} outside [0, {2**n})")


def _hadamard_passes(arr: np.ndarray, n: int) -> np.ndarray:
    lead = arr.shape[:-1]
    out = arr
    for q in range(n):
        view = out.reshape(*lead, 2 ** (n - q - 1), 2, 2**q)
        a0 = view[..., 0, :]
        a1 = view[..., 1, :]
        out = np.stack(((a0 + a1) * _INV_SQRT2, (a0 - a1) * _INV_SQRT2), axis=-2)
    return out.reshape(arr.shape)


def is_hermitian(op: LinearOperator, tol: float = EXACT_TOL) -> bool:
    m = op.to_dense()
    return bool(np.max(np.abs(m - m.conj().T)) <= tol)


def is_unitary(op: LinearOperator, tol: float = NORM_TOL) -> bool:
    # Structured forms are decided without materializing.
    if isinstance(op, (Reflection, PhaseLayer, HadamardLayer)):
        return True
    if isinstance(op, Projector):
        return False
    if isinstance(op, Composite) and all(
        isinstance(f, (Reflection, PhaseLayer, HadamardLayer)) for f in op.factors
    ):
        return True
    m = op.to_dense()
    return bool(np.max(np.abs(m.conj().T @ m - np.eye(op.dim))) <= tol)


# --------------------------------------------------------------------------
# State operations
# --------------------------------------------------------------------------


def make_basis_state(n: int, x: int) -> Statevector:
    _check_index(n, x)
    amps = np.zeros(2**n, dtype=np.complex128)
    amps[x] = 1.0
    return Statevector._owned(amps)


def apply_hadamard_all(s: Statevector) -> Statevector:
    """H on every qubit via n butterfly passes (no 2^n x 2^n matrix)."""
    return Statevector._owned(_hadamard_passes(s.amps, s.num_qubits))


def apply_operator(op: LinearOperator, s: Statevector) -> Statevector:
    if op.dim != s.dim:
        raise DimensionMismatch(f"operator dim {op.dim} vs state dim {s.dim}")
    return Statevector._owned(np.ascontiguousarray(op._apply(s.amps)))


def _controlled_rows(
    control: LinearOperator,
    op: LinearOperator,
    rows: np.ndarray,
    row_offset: int = 0,
) -> np.ndarray:
    """Apply ``control-bar (x) I + control (x) op`` to a block of joint rows.

    ``rows`` has shape ``(k, op.dim)`` and holds register-A indices
    ``row_offset .. row_offset + k - 1``. Modifies ``rows`` in place.
    """
    k = rows.shape[0]
    if isinstance(control, Projector):
        local = control.index - row_offset
        if control.complement:
            keep = rows[local].copy() if 0 <= local < k else None
            rows[:] = op._apply(rows)
            if keep is not None:
                rows[local] = keep
        elif 0 <= local < k:
            rows[local] = op._apply(rows[local])
        return rows
    if row_offset != 0 or k != control.dim:
        raise DimensionMismatch("generic control projectors need the full joint state")
    # Generic projector: M + P (M_op - M), contracting P over the row axis.
    pm = control.to_dense()
    rows += pm @ (op._apply(rows) - rows)
    return rows


def apply_controlled(
    control_projector: LinearOperator,
    op: LinearOperator,
    joint: Statevector,
) -> Statevector:
    """Return ``(I - P) (x) I + P (x) op`` applied to ``joint``.

    ``P`` acts on register A (high-order bits), ``op`` on register B.
    """
    d_a, d_b = control_projector.dim, op.dim
    if d_a * d_b != joint.dim:
        raise DimensionMismatch(
            f"registers {d_a} x {d_b} do not match joint dim {joint.dim}"
        )
    rows = joint.amps.reshape(d_a, d_b).copy()
    return Statevector._owned(_controlled_rows(control_projector, op, rows))


def inner_product(a: Statevector, b: Statevector) -> complex:
    """<a|b>, conjugating the first argument."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"dims {a.dim} and {b.dim}")
    return complex(np.vdot(a.amps, b.amps))


def tensor_product(a: Statevector, b: Statevector) -> Statevector:
    """|a> (x) |b> with ``a`` on the high-order bits."""
    return Statevector._owned(np.outer(a.amps, b.amps).reshape(-1))


def fidelity(a: Statevector, b: Statevector) -> float:
    """|<a|b>|^2 / (<a|a><b|b>); insensitive to global phase."""
    num = abs(inner_product(a, b)) ** 2
    return float(num / (a.norm() ** 2 * b.norm() ** 2))


def uniform_state(n: int) -> Statevector:
    return apply_hadamard_all(make_basis_state(n, 0))


def as_state(amps: Sequence[complex] | np.ndarray) -> Statevector:
    return Statevector(np.asarray(amps, dtype=np.complex128))
