"""Pauli strings, characteristic functions and qubit-wise commutation.

Conventions used throughout the package:

* letters are coded ``I=0, X=1, Y=2, Z=3``;
* a Pauli string of ``n`` qubits has the integer index ``sum(code_k * 4**(n-1-k))``,
  i.e. qubit 0 is the most significant digit and index order is lexicographic
  in ``I < X < Y < Z``;
* a measurement outcome is an integer ``0 <= b < 2**n`` whose most significant bit
  belongs to qubit 0 (the same ordering as ``np.kron``).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence, Union

import numpy as np

LETTERS = "IXYZ"
MAX_DENSE_QUBITS = 8

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_IMAG_TOL = 1e-12


@dataclass(frozen=True, order=True)
class PauliString:
    """An n-qubit Pauli word such as ``"XYZI"``.

    Instances order by their integer index, which is the lexicographic order
    ``I < X < Y < Z`` with qubit 0 first.
    """

    index: int
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("a Pauli string needs at least one qubit")
        if not 0 <= self.index < 4**self.n:
            raise ValueError(f"index {self.index} out of range for {self.n} qubits")

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        label = label.strip().upper()
        if not label or any(ch not in LETTERS for ch in label):
            raise ValueError(f"invalid Pauli label {label!r}")
        index = 0
        for ch in label:
            index = 4 * index + LETTERS.index(ch)
        return cls(index, len(label))

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(0, n)

    @property
    def codes(self) -> np.ndarray:
        """Letter codes as an int array of length n (qubit 0 first)."""
        return np.array(_codes(self.index, self.n), dtype=np.int8)

    @property
    def label(self) -> str:
        return "".join(LETTERS[c] for c in _codes(self.index, self.n))

    def is_identity(self) -> bool:
        return self.index == 0

    def weight(self) -> int:
        return sum(1 for c in _codes(self.index, self.n) if c)

    def matrix(self) -> np.ndarray:
        """Dense ``2**n x 2**n`` matrix of the string."""
        out = np.ones((1, 1), dtype=complex)
        for ch in self.label:
            out = np.kron(out, PAULI_MATRICES[ch])
        return out

    def __str__(self) -> str:
        return self.label

    def __repr__(self) -> str:
        return f"PauliString({self.label!r})"


PauliLike = Union[PauliString, str]


@lru_cache(maxsize=None)
def _codes(index: int, n: int) -> tuple:
    out = []
    for _ in range(n):
        out.append(index & 3)
        index >>= 2
    return tuple(reversed(out))


def as_pauli(p: PauliLike) -> PauliString:
    if isinstance(p, PauliString):
        return p
    return PauliString.from_label(p)


def as_bits(b, n: int | None = None) -> int:
    """Convert a bitstring (``"010"``, a 0/1 sequence or an int) to an outcome index."""
    if isinstance(b, (int, np.integer)):
        return int(b)
    if isinstance(b, str):
        bits = [int(ch) for ch in b]
    else:
        bits = [int(x) for x in b]
    if any(x not in (0, 1) for x in bits):
        raise ValueError(f"invalid bitstring {b!r}")
    if n is not None and len(bits) != n:
        raise ValueError(f"bitstring {b!r} does not have {n} bits")
    value = 0
    for x in bits:
        value = 2 * value + x
    return value


def bits_to_str(b: int, n: int) -> str:
    return format(b, f"0{n}b")


def hamming_weight(b: int) -> int:
    return bin(int(b)).count("1")


def _num_qubits(A: np.ndarray) -> int:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("expected a square matrix")
    d = A.shape[0]
    n = d.bit_length() - 1
    if d < 2 or 2**n != d:
        raise ValueError(f"matrix dimension {d} is not a power of two")
    return n


def char_value(A: np.ndarray, p: PauliLike) -> float:
    """``tr(A P) / sqrt(d)`` for a Hermitian ``A`` and Pauli string ``p``."""
    p = as_pauli(p)
    n = _num_qubits(A)
    if n != p.n:
        raise ValueError(f"matrix acts on {n} qubits but {p} has {p.n}")
    value = np.trace(np.asarray(A) @ p.matrix()) / np.sqrt(2**n)
    if abs(value.imag) > _IMAG_TOL * max(1.0, abs(value.real)) * 2**n:
        raise ValueError("non-real Pauli trace; is the matrix Hermitian?")
    return float(value.real)


# _TRACE_KERNEL[a, 2*r + c] = P_a[c, r], so that tr(A P_a) = sum_{r,c} A[r,c] P_a[c,r].
_TRACE_KERNEL = np.array(
    [[PAULI_MATRICES[ch][c, r] for r in range(2) for c in range(2)] for ch in LETTERS]
)


def char_vector(A: np.ndarray) -> np.ndarray:
    """All ``4**n`` characteristic values of ``A``, indexed by Pauli-string index.

    Uses one 4x4 contraction per qubit instead of ``4**n`` dense traces.
    """
    n = _num_qubits(A)
    if n > MAX_DENSE_QUBITS:
        raise ValueError(f"dense characteristic vector limited to n <= {MAX_DENSE_QUBITS}")
    A = np.asarray(A, dtype=complex)
    T = A.reshape((2,) * (2 * n))
    T = T.transpose([ax for k in range(n) for ax in (k, n + k)]).reshape((4,) * n)
    for k in range(n):
        T = np.moveaxis(np.tensordot(_TRACE_KERNEL, T, axes=([1], [k])), 0, k)
    vec = T.reshape(-1) / np.sqrt(2**n)
    if np.max(np.abs(vec.imag), initial=0.0) > 1e-10:
        raise ValueError("non-real Pauli traces; is the matrix Hermitian?")
    return np.ascontiguousarray(vec.real)


def all_pauli_strings(n: int) -> list[PauliString]:
    return [PauliString(i, n) for i in range(4**n)]


def code_table(n: int) -> np.ndarray:
    """``(4**n, n)`` array of letter codes for every string, in index order."""
    idx = np.arange(4**n)
    shifts = 2 * np.arange(n - 1, -1, -1)
    return ((idx[:, None] >> shifts) & 3).astype(np.int8)


def qubitwise_commutes(p: PauliLike, q: PauliLike) -> bool:
    """True iff at every position the letters agree or one of them is ``I``."""
    p, q = as_pauli(p), as_pauli(q)
    if p.n != q.n:
        raise ValueError("Pauli strings have different lengths")
    return all(a == b or a == 0 or b == 0 for a, b in zip(_codes(p.index, p.n), _codes(q.index, q.n)))


def support_mask(p: PauliLike, letter: str) -> str:
    """Bitstring marking the positions where ``p`` carries ``letter``."""
    p = as_pauli(p)
    if letter not in ("X", "Y", "Z", "I"):
        raise ValueError(f"invalid letter {letter!r}")
    return "".join("1" if ch == letter else "0" for ch in p.label)


def support_bits(p: PauliLike) -> int:
    """Outcome-index mask of the non-identity positions of ``p``."""
    p = as_pauli(p)
    mask = 0
    for c in _codes(p.index, p.n):
        mask = 2 * mask + (1 if c else 0)
    return mask


def eigen_sign(p: PauliLike, b) -> int:
    """``(-1)**(b . supp(p))``: the single-shot eigenvalue of ``p`` in its own eigenbasis."""
    p = as_pauli(p)
    return -1 if hamming_weight(as_bits(b, p.n) & support_bits(p)) % 2 else 1


def parity_table(n: int) -> np.ndarray:
    """``parity[x]`` is the parity of the popcount of ``x`` for ``0 <= x < 2**n``."""
    x = np.arange(2**n)
    return (np.bitwise_count(x) & 1).astype(np.int8)


def sign_vector(p: PauliLike) -> np.ndarray:
    """Eigen signs of ``p`` for all ``2**n`` outcomes at once."""
    p = as_pauli(p)
    parity = parity_table(p.n)
    return 1 - 2 * parity[np.arange(2**p.n) & support_bits(p)].astype(np.int64)


def strings_from_labels(labels: Iterable[str]) -> list[PauliString]:
    return [PauliString.from_label(s) for s in labels]


def merge_labels(labels: Sequence[PauliLike], fill: str = "Z") -> PauliString:
    """Elementwise non-identity merge of QWC strings, padded with ``fill``."""
    strings = [as_pauli(s) for s in labels]
    n = strings[0].n
    merged = [0] * n
    for s in strings:
        for k, c in enumerate(_codes(s.index, n)):
            if c:
                if merged[k] and merged[k] != c:
                    raise ValueError("strings do not qubit-wise commute")
                merged[k] = c
    fill_code = LETTERS.index(fill)
    return PauliString.from_label("".join(LETTERS[c or fill_code] for c in merged))
