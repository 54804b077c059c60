"""Target and noisy density matrices.

Density matrices are plain ``complex128`` numpy arrays. The text fixture format
written by :func:`save_density_matrix` is::

    # oasis-dfe density matrix
    <d>
    <re> <im>          (d*d lines, row-major)
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .measurement import as_generator

MAX_QUBITS = 8


def _check_n(n: int, low: int = 1) -> None:
    if not low <= n <= MAX_QUBITS:
        raise ValueError(f"n must lie in [{low}, {MAX_QUBITS}], got {n}")


def projector(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def make_ghz(n: int) -> np.ndarray:
    """Projector onto ``(|0...0> + |1...1>)/sqrt(2)``."""
    _check_n(n)
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = psi[-1] = 1.0
    return projector(psi)


def make_w(n: int) -> np.ndarray:
    """Projector onto the uniform single-excitation state."""
    _check_n(n, low=2)
    psi = np.zeros(2**n, dtype=complex)
    for k in range(n):
        psi[1 << k] = 1.0
    return projector(psi)


def make_haar(n: int, seed=None) -> np.ndarray:
    """Projector onto a Haar-random pure state; ``seed`` may be an int or a Generator."""
    _check_n(n)
    rng = as_generator(seed)
    d = 2**n
    psi = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return projector(psi)


def random_density_matrix(n: int, seed=None, rank: int | None = None) -> np.ndarray:
    """Ginibre-distributed mixed state, used as a generic "unknown" state in tests."""
    _check_n(n)
    rng = as_generator(seed)
    d = 2**n
    k = d if rank is None else rank
    G = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def depolarize(O: np.ndarray, noise_strength: float) -> np.ndarray:
    """``(1 - lam) O + lam I/d``."""
    if not 0.0 <= noise_strength <= 1.0:
        raise ValueError(f"noise strength must lie in [0, 1], got {noise_strength}")
    O = np.asarray(O, dtype=complex)
    d = O.shape[0]
    return (1.0 - noise_strength) * O + noise_strength * np.eye(d) / d


def exact_fidelity(rho: np.ndarray, O: np.ndarray) -> float:
    """``tr(rho O)`` for a pure target ``O``."""
    rho, O = np.asarray(rho), np.asarray(O)
    if rho.shape != O.shape:
        raise ValueError(f"dimension mismatch: {rho.shape} vs {O.shape}")
    # tr(rho O) = sum_ij rho_ij O_ji
    return float(np.real(np.sum(rho * O.T)))


def check_density_matrix(rho: np.ndarray, psd_tol: float = 1e-10) -> None:
    """Raise ``ValueError`` unless ``rho`` is Hermitian, unit-trace and PSD."""
    rho = np.asarray(rho)
    if np.max(np.abs(rho - rho.conj().T)) > 1e-12:
        raise ValueError("matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > 1e-12:
        raise ValueError("trace is not one")
    if np.linalg.eigvalsh(rho).min() < -psd_tol:
        raise ValueError("matrix is not positive semidefinite")


def save_density_matrix(path, rho: np.ndarray) -> None:
    rho = np.asarray(rho, dtype=complex)
    lines = ["# oasis-dfe density matrix", str(rho.shape[0])]
    lines += [f"{float(z.real)!r} {float(z.imag)!r}" for z in rho.ravel()]
    Path(path).write_text("\n".join(lines) + "\n")


def load_density_matrix(path) -> np.ndarray:
    rows = [ln for ln in Path(path).read_text().splitlines() if ln and not ln.startswith("#")]
    d = int(rows[0])
    vals = np.array([[float(x) for x in ln.split()] for ln in rows[1:]])
    if vals.shape != (d * d, 2):
        raise ValueError(f"expected {d * d} entries, found {len(vals)}")
    return (vals[:, 0] + 1j * vals[:, 1]).reshape(d, d)
