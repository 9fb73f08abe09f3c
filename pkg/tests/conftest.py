import math

import numpy as np
import pytest

from wvap.qstate import Statevector


def random_state(rng: np.random.Generator, n: int) -> Statevector:
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return Statevector(v / np.linalg.norm(v))


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (m + m.conj().T) / 2


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(m)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def brute_force_wvap(n, y, w):
    """Full joint vector built entry by entry, then contracted by hand."""
    N = 2**n
    psi_i = [1 / math.sqrt(N) - (2 / math.sqrt(N) if x == w else 0) for x in range(N)]
    zsign = [(-1) ** bin(x).count("1") for x in range(N)]
    v_psi_i = [zsign[x] * (-psi_i[x] if x == w else psi_i[x]) for x in range(N)]
    psi_f = [zsign[x] / math.sqrt(N) for x in range(N)]
    joint = np.zeros(N * N, dtype=complex)
    for a in range(N):
        anc = v_psi_i if a == y else psi_i
        for b in range(N):
            joint[a * N + b] = anc[b] / math.sqrt(N)
    c = np.array([sum(psi_f[b] * joint[a * N + b] for b in range(N)) for a in range(N)])
    prob = float(np.sum(np.abs(c) ** 2))
    return prob, abs(c[y]) ** 2 / prob


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, title: str, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] AC{number:<2} {title}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
