"""Projective Pauli-basis measurements and the seeded random streams.

A measurement setting is a Pauli word without identities, e.g. ``"XZY"``. It is
realised by rotating every qubit into the eigenbasis of its letter and measuring
in the computational basis, so outcome bit ``b_i = 0`` means eigenvalue ``+1``.
"""

from __future__ import annotations

import numpy as np

from .pauli import PauliLike, as_pauli

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_SDG = np.diag([1, -1j])

# V P V^dag = Z for each letter P
ROTATIONS = {
    "X": _H,
    "Y": _H @ _SDG,
    "Z": np.eye(2, dtype=complex),
}


def make_rng(seed: int = 0, stream: int = 0) -> np.random.Generator:
    """Independent generator for the pair ``(seed, stream)``.

    Streams are children of one ``SeedSequence``, so trial ``i`` of an experiment
    can be replayed alone with ``make_rng(base_seed, i)``.
    """
    if seed < 0 or stream < 0:
        raise ValueError("seed and stream must be non-negative")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream,))))


def as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        return np.random.default_rng()
    return make_rng(int(seed))


def as_setting(setting: PauliLike) -> str:
    label = as_pauli(setting).label
    if "I" in label:
        raise ValueError(f"measurement setting {label!r} must not contain I")
    return label


def basis_change(setting: PauliLike) -> np.ndarray:
    """Unitary ``V`` such that measuring ``V rho V^dag`` in the Z basis measures ``setting``."""
    label = as_setting(setting)
    V = np.ones((1, 1), dtype=complex)
    for ch in label:
        V = np.kron(V, ROTATIONS[ch])
    return V


def outcome_distribution(rho: np.ndarray, setting: PauliLike) -> np.ndarray:
    """``probs[b] = <b| V rho V^dag |b>`` with tiny negative round-off clamped to zero."""
    rho = np.asarray(rho)
    V = basis_change(setting)
    if rho.shape != V.shape:
        raise ValueError(f"state of shape {rho.shape} does not match setting {setting}")
    probs = np.einsum("bj,jk,bk->b", V, rho, V.conj()).real
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum()


def _cdf(dist: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(dist)
    return cdf / cdf[-1]


def sample_outcome(dist: np.ndarray, rng: np.random.Generator) -> int:
    """One outcome index by inverse CDF over the lexicographic outcome order."""
    return int(sample_outcomes(dist, rng, 1)[0])


def sample_outcomes(dist: np.ndarray, rng: np.random.Generator, size: int) -> np.ndarray:
    cdf = _cdf(np.asarray(dist, dtype=float))
    idx = np.searchsorted(cdf, rng.random(size), side="right")
    return np.minimum(idx, len(cdf) - 1)


def sample_from_table(cdfs: np.ndarray, rows: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Draw one outcome per entry of ``rows`` from the distribution ``cdfs[row]``.

    ``cdfs`` holds one cumulative distribution per row (see :func:`cdf_table`).
    """
    u = rng.random(len(rows))
    out = np.empty(len(rows), dtype=np.int64)
    # chunked to bound memory at (chunk x d)
    chunk = max(1, 2**22 // cdfs.shape[1])
    for start in range(0, len(rows), chunk):
        sl = slice(start, start + chunk)
        out[sl] = (cdfs[rows[sl]] <= u[sl, None]).sum(axis=1)
    return np.minimum(out, cdfs.shape[1] - 1)


def cdf_table(dists: np.ndarray) -> np.ndarray:
    cdfs = np.cumsum(np.asarray(dists, dtype=float), axis=1)
    return cdfs / cdfs[:, -1:]
