"""Operator-aware shadow importance sampling for general targets (OASIS-GT).

The target ``O`` is expanded in the overcomplete POVM of uniformly random local
Pauli measurements,

    O = sum_{U,b} w[U,b] Pi[U,b],     Pi[U,b] = p(U) V_U^dag |b><b| V_U,

with weights chosen by the linear program

    minimize sum_U p(U) t_U   s.t.   |w[U,b]| <= t_U,   sum w Pi = O.

Settings are then drawn from ``q(U) ~ p(U) max_b |w[U,b]|`` and each shot
contributes ``w[U,b] p(U) / q(U)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import lp
from .grouping import EstimateReport
from .measurement import basis_change, cdf_table, outcome_distribution, sample_from_table
from .pauli import char_vector

MAX_QUBITS = 6
MAX_ENUM_QUBITS = 4
RECONSTRUCTION_TOL = 1e-8


@dataclass(frozen=True)
class PovmEnsemble:
    """All ``3**n`` local Pauli settings with default probabilities ``p(U)``."""

    n: int
    settings: tuple
    default_probs: np.ndarray
    rotations: np.ndarray  # (num_settings, d, d)

    @property
    def d(self) -> int:
        return 2**self.n

    @property
    def num_settings(self) -> int:
        return len(self.settings)

    @property
    def num_elements(self) -> int:
        return self.num_settings * self.d

    def element(self, u: int, b: int) -> np.ndarray:
        v = self.rotations[u].conj().T[:, b]
        return self.default_probs[u] * np.outer(v, v.conj())

    def elements(self) -> np.ndarray:
        """All elements as an array of shape ``(num_settings, d, d, d)``."""
        Vdag = np.conj(np.transpose(self.rotations, (0, 2, 1)))
        # Pi[u, b] = p(u) |v_b><v_b| with v_b = column b of V^dag
        return self.default_probs[:, None, None, None] * np.einsum("uib,ujb->ubij", Vdag, Vdag.conj())

    def completeness_error(self) -> float:
        total = self.elements().sum(axis=(0, 1))
        return float(np.max(np.abs(total - np.eye(self.d))))


def build_pauli_povm(n: int) -> PovmEnsemble:
    if not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"n must lie in [1, {MAX_QUBITS}], got {n}")
    settings = tuple("".join(s) for s in itertools.product("XYZ", repeat=n))
    rotations = np.array([basis_change(s) for s in settings])
    probs = np.full(len(settings), 1.0 / len(settings))
    return PovmEnsemble(n, settings, probs, rotations)


# Pauli coordinate of one element factor: rows (setting letter u, outcome bit),
# columns I, X, Y, Z. tr(((I + (-1)^b U)/2) P) is 1 for P = I, (-1)^b for P = U.
_KERNEL = np.zeros((6, 4))
for _u in range(3):
    for _b in range(2):
        _KERNEL[2 * _u + _b, 0] = 1.0
        _KERNEL[2 * _u + _b, _u + 1] = (-1.0) ** _b


def _apply_per_qubit(K: np.ndarray, x: np.ndarray, n: int) -> np.ndarray:
    """Apply ``K`` to every qubit axis of ``x``: contract the leading axis, rotate it to the back."""
    T = np.asarray(x, dtype=float)
    for _ in range(n):
        T = (K @ T.reshape(K.shape[1], -1)).T
    return T.reshape(-1)


def _interleaved_to_settings(T: np.ndarray, n: int) -> np.ndarray:
    """``(6,)*n`` tensor over (letter, bit) pairs to a ``(3**n, 2**n)`` table."""
    T = T.reshape((3, 2) * n)
    return T.transpose(list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))).reshape(3**n, 2**n)


def _settings_to_interleaved(table: np.ndarray, n: int) -> np.ndarray:
    T = table.reshape((3,) * n + (2,) * n)
    return T.transpose([ax for k in range(n) for ax in (k, n + k)]).reshape((6,) * n)


def outcome_coordinates(y: np.ndarray, n: int) -> np.ndarray:
    """``g[U, b] = sum_P E[U,b](P) y_P`` for all settings at once.

    ``E[U,b](P) = tr(V_U^dag |b><b| V_U P) / sqrt(d)`` are the Pauli coordinates
    of the unweighted elements; one 6x4 contraction per qubit replaces the
    dense ``(6**n, 4**n)`` product.
    """
    return _interleaved_to_settings(_apply_per_qubit(_KERNEL, y, n), n) / math.sqrt(2**n)


def setting_column(table: np.ndarray, n: int) -> np.ndarray:
    """Pauli coordinates of ``sum_{U,b} table[U,b] V_U^dag |b><b| V_U`` (adjoint of the above)."""
    T = _settings_to_interleaved(np.asarray(table, dtype=float), n)
    return _apply_per_qubit(_KERNEL.T, T, n) / math.sqrt(2**n)


def element_matrix(povm: PovmEnsemble) -> np.ndarray:
    """Pauli coordinates of every weighted element ``Pi[U,b]``, shape ``(6**n, 4**n)``."""
    n = povm.n
    if n > MAX_ENUM_QUBITS:
        raise ValueError(f"dense element matrix limited to n <= {MAX_ENUM_QUBITS}")
    M = np.ones((1, 1))
    for _ in range(n):
        M = np.kron(M, _KERNEL)
    perm = _interleaved_to_settings(np.arange(6**n), n).reshape(-1)
    return M[perm] * np.repeat(povm.default_probs, povm.d)[:, None] / math.sqrt(povm.d)


def hermitian_coordinates(M: np.ndarray) -> np.ndarray:
    """Real coordinates of Hermitian matrices: diagonal, then Re and Im of the strict upper triangle.

    Works on stacks of shape ``(..., d, d)`` and returns ``(..., d**2)``.
    """
    M = np.asarray(M)
    d = M.shape[-1]
    iu = np.triu_indices(d, k=1)
    diag = np.real(np.diagonal(M, axis1=-2, axis2=-1))
    upper = M[..., iu[0], iu[1]]
    return np.concatenate([diag, upper.real, upper.imag], axis=-1)


def assemble_lp(povm: PovmEnsemble, O: np.ndarray) -> lp.StandardLp:
    """The weight-optimisation LP with variables ``[w (settings x outcomes), t (settings)]``.

    ``sum w Pi = O`` becomes ``d**2`` real equalities through
    :func:`hermitian_coordinates`; the box ``-t_U <= w <= t_U`` gives two
    inequality rows per weight.
    """
    O = np.asarray(O)
    if O.shape != (povm.d, povm.d):
        raise ValueError("target and POVM act on different systems")
    if povm.n > MAX_ENUM_QUBITS:
        raise ValueError(f"the dense LP is limited to n <= {MAX_ENUM_QUBITS}")
    K, S, d = povm.num_elements, povm.num_settings, povm.d
    E = hermitian_coordinates(povm.elements().reshape(K, d, d))  # (K, d*d)
    owner = np.repeat(np.eye(S), d, axis=0)  # (K, S): weight k belongs to setting k // d
    A_eq = np.hstack([E.T, np.zeros((d * d, S))])
    A_ub = np.vstack([np.hstack([np.eye(K), -owner]), np.hstack([-np.eye(K), -owner])])
    c = np.concatenate([np.zeros(K), povm.default_probs])
    lower = np.concatenate([np.full(K, -np.inf), np.zeros(S)])
    return lp.StandardLp(c, A_eq, hermitian_coordinates(O), A_ub, np.zeros(2 * K), lower, None)


@dataclass(frozen=True)
class WeightTable:
    settings: tuple
    default_probs: np.ndarray
    omega: np.ndarray  # (num_settings, d)

    @property
    def n(self) -> int:
        return len(self.settings[0])

    @property
    def maxima(self) -> np.ndarray:
        """Per-setting ``M_U = max_b |w[U,b]|``."""
        return np.max(np.abs(self.omega), axis=1)

    def reconstruct(self, povm: PovmEnsemble) -> np.ndarray:
        """Dense ``sum w Pi``; meant for small ``n``."""
        return np.einsum("ub,ubij->ij", self.omega, povm.elements())

    def to_text(self) -> str:
        n = self.n
        lines = [f"# n {n}", "# setting outcome p(U) omega"]
        for u, s in enumerate(self.settings):
            for b, w in enumerate(self.omega[u]):
                lines.append(f"{s} {format(b, f'0{n}b')} {float(self.default_probs[u])!r} {float(w)!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "WeightTable":
        settings: list = []
        probs: list = []
        rows: dict = {}
        for line in text.splitlines():
            if not line.strip() or line.startswith("#"):
                continue
            s, bits, p, w = line.split()
            if s not in rows:
                settings.append(s)
                probs.append(float(p))
                rows[s] = np.zeros(2 ** len(s))
            rows[s][int(bits, 2)] = float(w)
        return cls(tuple(settings), np.array(probs), np.array([rows[s] for s in settings]))

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path) -> "WeightTable":
        return cls.from_text(Path(path).read_text())


@dataclass(frozen=True)
class SamplingLaw:
    q: np.ndarray
    normalizer: float

    @classmethod
    def from_weights(cls, weights: WeightTable, zero_tol: float = 1e-12) -> "SamplingLaw":
        M = weights.maxima
        M = np.where(M > zero_tol, M, 0.0)
        mass = weights.default_probs * M
        Z = float(mass.sum())
        if Z <= 0:
            raise ValueError("all weights vanish")
        return cls(mass / Z, Z)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.q > 0)


def weight_cone(povm: PovmEnsemble, O: np.ndarray) -> lp.SignCone:
    """The weight LP as a cone over per-setting sign patterns.

    A column is ``sum_b sigma_b V_U^dag |b><b| V_U`` in Pauli coordinates, with
    unit cost. Any feasible ``w`` splits as ``w_U = sum_sigma lam sigma / p(U)``
    with ``sum_sigma lam = p(U) max_b |w[U,b]|``, so both problems share the
    optimal value ``sum_U p(U) M_U``.
    """
    n = povm.n
    return lp.SignCone(
        b=char_vector(O),
        costs=np.ones(povm.num_settings),
        transpose=lambda y: outcome_coordinates(y, n),
        apply=lambda table: setting_column(table, n),
    )


def optimize_weights(
    povm: PovmEnsemble,
    O: np.ndarray,
    method: str = "cone",
    feas_tol: float = lp.FEAS_TOL,
    opt_tol: float = lp.OPT_TOL,
    allow_large: bool = False,
) -> tuple[WeightTable, SamplingLaw, float]:
    """Solve the weight LP and derive the sampling law.

    ``method="explicit"`` solves the LP built by :func:`assemble_lp`;
    ``method="cone"`` solves the equivalent problem whose variables are
    nonnegative multiples of sign patterns ``(U, sigma)``, which keeps the basis
    at ``d**2`` rows and is much faster. Both return an optimal weight table;
    the objective ``sum_U p(U) max_b |w[U,b]|`` agrees, individual weights may not.

    Above ``n = 4`` the cone LP has ``4**n`` rows and a dense ``4**n x 4**n``
    basis inverse, so it must be requested with ``allow_large=True``. GHZ at
    ``n = 5`` took about 15 s on one core; a Haar-random ``n = 5`` target ran
    for well over an hour without finishing. At ``n = 6`` the inverse alone
    needs about 128 MB.
    """
    O = np.asarray(O)
    if O.shape != (povm.d, povm.d):
        raise ValueError("target and POVM act on different systems")
    if povm.n > MAX_ENUM_QUBITS and not allow_large:
        raise ValueError(f"n = {povm.n} > {MAX_ENUM_QUBITS} needs allow_large=True (slow, see docstring)")
    S, d = povm.num_settings, povm.d
    if method == "explicit":
        sol = lp.solve(assemble_lp(povm, O), feas_tol=feas_tol, opt_tol=opt_tol)
        if not sol.ok:
            raise lp.LpError(f"weight LP {sol.status}")
        omega = sol.x[: S * d].reshape(S, d)
    elif method == "cone":
        sol = lp.solve_sign_cone(weight_cone(povm, O), feas_tol=feas_tol, opt_tol=opt_tol)
        if not sol.ok:
            raise lp.LpError(f"weight LP {sol.status}")
        omega = np.zeros((S, d))
        for lam, (u, sigma) in zip(sol.weights, sol.keys):
            omega[u] += lam * np.array(sigma) / povm.default_probs[u]
    else:
        raise ValueError(f"unknown method {method!r}")
    weights = WeightTable(povm.settings, povm.default_probs.copy(), omega)
    err = reconstruction_error(weights, O)
    if err > RECONSTRUCTION_TOL:
        raise lp.LpError(f"weights reconstruct the target only to {err:.2e}")
    law = SamplingLaw.from_weights(weights)
    return weights, law, law.normalizer


def reconstruction_error(weights: WeightTable, O: np.ndarray) -> float:
    """Frobenius norm of ``sum w Pi - O``, computed in Pauli coordinates."""
    table = weights.omega * weights.default_probs[:, None]
    return float(np.linalg.norm(setting_column(table, weights.n) - char_vector(O)))


def _setting_tables(rho: np.ndarray, weights: WeightTable, law: SamplingLaw):
    support = law.support
    dists = np.array([outcome_distribution(rho, weights.settings[u]) for u in support])
    scores = weights.omega[support] * (weights.default_probs[support] / law.q[support])[:, None]
    return support, dists, scores


def gt_estimate(
    rho: np.ndarray, weights: WeightTable, law: SamplingLaw, shots: int, rng: np.random.Generator
) -> EstimateReport:
    """Average of ``shots`` importance-sampled single-shot values."""
    if shots < 1:
        raise ValueError("need at least one shot")
    rho = np.asarray(rho)
    support, dists, scores = _setting_tables(rho, weights, law)
    cdf = np.cumsum(law.q[support])
    cdf /= cdf[-1]
    picks = np.minimum(np.searchsorted(cdf, rng.random(shots), side="right"), len(support) - 1)
    if np.any(law.q[support[picks]] <= 0):
        raise RuntimeError("sampled a setting with q(U) = 0")
    outcomes = sample_from_table(cdf_table(dists), picks, rng)
    values = scores[picks, outcomes]
    return EstimateReport(float(values.mean()), shots, shots, {"settings": int(len(support))})


def exact_moments_gt(rho: np.ndarray, weights: WeightTable, law: SamplingLaw) -> tuple[float, float]:
    """Exact single-shot mean and variance by summing over every ``(U, b)``."""
    if weights.n > MAX_ENUM_QUBITS:
        raise ValueError(f"exact enumeration limited to n <= {MAX_ENUM_QUBITS}")
    support, dists, scores = _setting_tables(np.asarray(rho), weights, law)
    q = law.q[support][:, None]
    mean = float(np.sum(q * dists * scores))
    second = float(np.sum(q * dists * scores**2))
    return mean, max(second - mean**2, 0.0)


def surrogate_bound(law: SamplingLaw) -> float:
    """Optimised bound ``(sum_U p(U) M_U)**2`` on the single-shot second moment."""
    return law.normalizer**2


def lp_size(n: int) -> tuple[int, int]:
    """(variables, equality rows) of the explicit weight LP."""
    return 6**n + 3**n, 4**n


__all__ = [
    "PovmEnsemble",
    "WeightTable",
    "SamplingLaw",
    "build_pauli_povm",
    "assemble_lp",
    "optimize_weights",
    "gt_estimate",
    "exact_moments_gt",
    "surrogate_bound",
    "element_matrix",
    "hermitian_coordinates",
    "outcome_coordinates",
    "setting_column",
    "reconstruction_error",
    "lp_size",
]
