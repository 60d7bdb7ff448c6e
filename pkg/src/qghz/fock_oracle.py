"""Brute-force truncated-Fock-space simulator of the heralding stage.

This module is the independent ground truth against which every closed-form
fidelity and probability in :mod:`qghz.loss_analytics` is checked. It builds
the exact joint state of d emitter qubits and d photonic modes, applies the
DFT interferometer as the induced unitary on the truncated Fock space, loses
photons through per-mode pure-loss Kraus channels, and projects detector
click patterns.

Each emitter releases at most one photon per round, so truncating the total
photon number at d makes the representation exact rather than approximate.
Dense matrices throughout: the largest case exercised (d = 4) has a
70-dimensional photonic space times 16 spin configurations, i.e. side 1120.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from .model import DetectorKind, DetectorModel, EmitterArrayConfig

__all__ = [
    "FockDensity",
    "NegligibleBranchError",
    "apply_dft",
    "apply_loss",
    "build_initial_state",
    "oracle_w_metrics",
    "project_click",
]

_SIZE_GUARD = 4096


class NegligibleBranchError(ValueError):
    """Requested projection branch has probability below 1e-14."""


@lru_cache(maxsize=None)
def _photon_basis(d: int) -> tuple[tuple[tuple[int, ...], ...], dict]:
    """All occupation tuples over d modes with total photon number <= d."""
    occs: list[tuple[int, ...]] = []

    def rec(prefix: tuple[int, ...], remaining: int) -> None:
        if len(prefix) == d:
            occs.append(prefix)
            return
        for n in range(remaining + 1):
            rec(prefix + (n,), remaining - n)

    rec((), d)
    occs.sort()
    index = {occ: i for i, occ in enumerate(occs)}
    return tuple(occs), index


@dataclass
class FockDensity:
    """Dense density operator on (photonic Fock space) x (d emitter qubits).

    Photonic basis: occupation tuples with total number <= d. Spin basis:
    integers 0..2^d-1 with bit j set when emitter j is bright. Combined
    index = photon_index * 2^d + spin_index.
    """

    d: int
    matrix: np.ndarray

    @property
    def n_spin(self) -> int:
        return 1 << self.d

    @property
    def photon_basis(self) -> tuple[tuple[int, ...], ...]:
        return _photon_basis(self.d)[0]

    def check(self, tol: float = 1e-10) -> "FockDensity":
        m = self.matrix
        herm = np.max(np.abs(m - m.conj().T))
        if herm > tol:
            raise ValueError(f"not Hermitian: {herm:.3e}")
        tr = m.trace()
        if abs(tr - 1.0) > tol:
            raise ValueError(f"trace = {tr}")
        min_eig = float(np.linalg.eigvalsh(m).min())
        if min_eig < -tol:
            raise ValueError(f"not PSD: min eigenvalue {min_eig:.3e}")
        return self


def _guard(d: int) -> None:
    occs, _ = _photon_basis(d)
    side = len(occs) * (1 << d)
    if side > _SIZE_GUARD:
        raise ValueError(f"state side {side} exceeds the size guard {_SIZE_GUARD}")


def build_initial_state(d: int, p: float) -> FockDensity:
    """Joint state after the pi-pulse and emission map.

    Each emitter independently contributes sqrt(1-p)|0>_spin|0>_phot +
    sqrt(p)|1>_spin|1>_phot in its own mode; the global state is the pure
    product, returned as a density operator.
    """
    _guard(d)
    occs, occ_index = _photon_basis(d)
    n_spin = 1 << d
    psi = np.zeros(len(occs) * n_spin, dtype=complex)
    for spin in range(n_spin):
        bits = [(spin >> j) & 1 for j in range(d)]
        amp = math.prod(math.sqrt(p) if b else math.sqrt(1.0 - p) for b in bits)
        if amp == 0.0:
            continue
        occ = tuple(bits)
        psi[occ_index[occ] * n_spin + spin] = amp
    return FockDensity(d, np.outer(psi, psi.conj()))


@lru_cache(maxsize=None)
def _dft_photon_unitary(d: int) -> np.ndarray:
    """Induced unitary of a_j^dag -> d^{-1/2} sum_k e^{i 2 pi j k / d} a_k^dag.

    Built column by column: expand each input occupation's creation-operator
    monomial in terms of the transformed operators. Total photon number is
    conserved, so the truncated space is exactly invariant and the matrix is
    exactly unitary.
    """
    occs, occ_index = _photon_basis(d)
    F = np.array(
        [[np.exp(2j * math.pi * j * k / d) / math.sqrt(d) for k in range(d)]
         for j in range(d)]
    )
    U = np.zeros((len(occs), len(occs)), dtype=complex)
    for col, occ in enumerate(occs):
        # Start from vacuum amplitude 1, apply b_j^dag = sum_k F[j,k] a_k^dag
        # occ[j] times for each j, then divide by sqrt(prod occ[j]!).
        vec: dict[tuple[int, ...], complex] = {(0,) * d: 1.0 + 0.0j}
        for j, n_j in enumerate(occ):
            for _ in range(n_j):
                nxt: dict[tuple[int, ...], complex] = {}
                for o, a in vec.items():
                    for k in range(d):
                        o2 = o[:k] + (o[k] + 1,) + o[k + 1:]
                        nxt[o2] = nxt.get(o2, 0.0) + a * F[j, k] * math.sqrt(o[k] + 1)
                vec = nxt
        norm = math.sqrt(math.prod(math.factorial(n) for n in occ))
        for o, a in vec.items():
            U[occ_index[o], col] = a / norm
    return U


def _sandwich_photonic(rho: np.ndarray, A: np.ndarray, n_spin: int) -> np.ndarray:
    """(A x 1_spin) rho (A x 1_spin)^dag without forming the Kronecker product."""
    n_ph = A.shape[0]
    r = rho.reshape(n_ph, n_spin, n_ph, n_spin)
    r = np.tensordot(A, r, axes=([1], [0]))          # a, i, c, j
    r = np.tensordot(r, A.conj(), axes=([2], [1]))   # a, i, j, c'
    return r.transpose(0, 1, 3, 2).reshape(rho.shape)


def apply_dft(state: FockDensity) -> FockDensity:
    """Interfere all modes on the d-mode DFT."""
    U_ph = _dft_photon_unitary(state.d)
    return FockDensity(
        state.d, _sandwich_photonic(state.matrix, U_ph, state.n_spin)
    )


@lru_cache(maxsize=None)
def _loss_kraus(d: int, mode: int, eta: float) -> tuple[np.ndarray, ...]:
    """Kraus operators of the pure-loss channel on one mode.

    K_m takes n photons to n - m with amplitude
    sqrt(C(n, m) eta^{n-m} (1-eta)^m).
    """
    occs, occ_index = _photon_basis(d)
    ops = []
    for m in range(d + 1):
        K = np.zeros((len(occs), len(occs)), dtype=complex)
        for col, occ in enumerate(occs):
            n = occ[mode]
            if n < m:
                continue
            amp = math.sqrt(
                math.comb(n, m) * (eta ** (n - m)) * ((1.0 - eta) ** m)
            )
            out = occ[:mode] + (n - m,) + occ[mode + 1:]
            K[occ_index[out], col] = amp
        if np.any(K):
            ops.append(K)
    return tuple(ops)


def apply_loss(state: FockDensity, eta: float) -> FockDensity:
    """Independent transmission-eta pure-loss channel on every mode."""
    if not (0.0 <= eta <= 1.0):
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    if eta == 1.0:
        return state
    n_spin = state.n_spin
    rho = state.matrix
    for mode in range(state.d):
        acc = np.zeros_like(rho)
        for K_ph in _loss_kraus(state.d, mode, eta):
            acc += _sandwich_photonic(rho, K_ph, n_spin)
        rho = acc
    return FockDensity(state.d, rho)


def vacuum_branch_prob(state: FockDensity) -> float:
    """Probability that no photon reaches any detector."""
    occs, occ_index = _photon_basis(state.d)
    n_spin = state.n_spin
    vac = occ_index[(0,) * state.d]
    idx = vac * n_spin + np.arange(n_spin)
    return float(np.real(state.matrix[idx, idx].sum()))


def project_click(
    state: FockDensity, mode: int, detector: DetectorModel
) -> tuple[np.ndarray, float]:
    """Condition on a click in one mode and vacuum everywhere else.

    Number-resolving detectors accept exactly one photon in the clicked
    mode; threshold detectors accept any nonzero number. Returns the
    normalized reduced spin density matrix (2^d x 2^d) and the outcome
    probability. This projection is not time-resolved; spectral effects are
    validated separately.
    """
    occs, occ_index = _photon_basis(state.d)
    n_spin = state.n_spin
    if detector.kind is DetectorKind.NUMBER_RESOLVING:
        selected = [occ for occ in occs
                    if occ[mode] == 1 and sum(occ) == 1]
    else:
        selected = [occ for occ in occs
                    if occ[mode] >= 1 and sum(occ) == occ[mode]]
    rho_spin = np.zeros((n_spin, n_spin), dtype=complex)
    for occ in selected:
        base = occ_index[occ] * n_spin
        rho_spin += state.matrix[base:base + n_spin, base:base + n_spin]
    prob = float(np.real(np.trace(rho_spin)))
    if prob < 1e-14:
        raise NegligibleBranchError(
            f"click branch (mode {mode}, {detector.kind.value}) has "
            f"probability {prob:.3e}"
        )
    return rho_spin / prob, prob


@lru_cache(maxsize=32)
def _heralding_state(d: int, p: float, eta: float) -> FockDensity:
    """Post-loss stage-I state, shared across herald modes and detector kinds."""
    return apply_loss(apply_dft(build_initial_state(d, p)), eta)


def _w_spin_vector(d: int, herald_mode: int) -> np.ndarray:
    """|W_d> with the herald phases e^{i 2 pi j l / d} of a mode-l click."""
    n_spin = 1 << d
    v = np.zeros(n_spin, dtype=complex)
    for j in range(d):
        v[1 << j] = np.exp(2j * math.pi * j * herald_mode / d) / math.sqrt(d)
    return v


def oracle_w_metrics(
    config: EmitterArrayConfig, detector: DetectorModel, eta: float | None = None
) -> tuple[float, float]:
    """(F_W, P_W) by exhaustive simulation of stage I.

    Emission, DFT interference, loss with transmission eta (defaults to
    config.eta1), then projection onto a single-detector click for each of
    the d herald modes. P_W sums the d mode probabilities (the modes are
    exclusive outcomes, so no double counting); F_W is the
    probability-weighted fidelity against the phase-matched W state.
    """
    if config.d > 4:
        raise ValueError("oracle limited to d <= 4 by the size guard")
    if eta is None:
        eta = config.eta1
    state = _heralding_state(config.d, config.p, eta)
    P_W = 0.0
    F_acc = 0.0
    for mode in range(config.d):
        rho_spin, prob = project_click(state, mode, detector)
        w = _w_spin_vector(config.d, mode)
        fid = float(np.real(w.conj() @ rho_spin @ w))
        P_W += prob
        F_acc += prob * fid
    return F_acc / P_W, P_W
