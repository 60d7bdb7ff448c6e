"""Domain types shared by every compute module.

The physical picture: d solid-state emitters, each prepared in
sqrt(1-p)|0> + sqrt(p)|1>, emit single photons that interfere on a d-mode
DFT interferometer. A single detector click heralds the shared-excitation
W state; N further emission rounds and an X-basis measurement of the
emitters leave an N-photon qudit GHZ state. The types below carry every
physical symbol of that protocol: emitter parameters, the detector model,
the single-excitation density matrix, and the loss-partitioned noisy W
mixture.

Internally all frequencies are angular (rad/s). The TOML loader accepts
ordinary frequencies in Hz and multiplies by 2*pi at this boundary.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

__all__ = [
    "ConfigError",
    "DetectorKind",
    "DetectorModel",
    "EmitterArrayConfig",
    "HeraldRecord",
    "NoisyWState",
    "ProtocolOutcome",
    "SingleExcitationDM",
    "load_config",
    "validate",
]

TWO_PI = 2.0 * math.pi


class ConfigError(ValueError):
    """One or more configuration invariants are violated.

    ``violations`` lists every broken invariant with its field name, so a
    caller sees all problems at once rather than fixing them one by one.
    """

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


class DetectorKind(enum.Enum):
    """Photon-number-resolving vs click/no-click detectors."""

    NUMBER_RESOLVING = "number_resolving"
    THRESHOLD = "threshold"


@dataclass(frozen=True)
class EmitterArrayConfig:
    """All physical parameters of the d-emitter array and its channels.

    Attributes
    ----------
    d : emitter count (equals mode count and qudit dimension).
    p : bright-state weight of each emitter's initial superposition.
    linewidths : per-emitter decay rates Gamma_j in rad/s, length d.
    frequencies : per-emitter carrier frequencies omega_j in rad/s, length d.
    dephasing_rate : dephasing probability gamma per pump round.
    relaxation : amplitude-damping probability lambda per round.
    eta1 : photon capture probability during W-state generation.
    eta2 : capture probability during GHZ emission / distribution.
    """

    d: int
    p: float
    linewidths: tuple[float, ...]
    frequencies: tuple[float, ...]
    dephasing_rate: float = 0.0
    relaxation: float = 0.0
    eta1: float = 1.0
    eta2: float = 1.0

    @classmethod
    def uniform(
        cls,
        d: int,
        p: float,
        linewidth: float = 1.0,
        frequency: float = 0.0,
        **kwargs,
    ) -> "EmitterArrayConfig":
        """Identical emitters: one linewidth and one carrier for all d."""
        return cls(
            d=d,
            p=p,
            linewidths=(float(linewidth),) * d,
            frequencies=(float(frequency),) * d,
            **kwargs,
        )

    def with_(self, **kwargs) -> "EmitterArrayConfig":
        return replace(self, **kwargs)

    def detunings(self) -> np.ndarray:
        """Pairwise detunings Delta_{j,k} = omega_j - omega_k (rad/s)."""
        w = np.asarray(self.frequencies)
        return w[:, None] - w[None, :]


def _violations(config: EmitterArrayConfig) -> list[str]:
    v: list[str] = []
    if config.d < 2:
        v.append(f"d: must be >= 2, got {config.d}")
    for name in ("p", "dephasing_rate", "relaxation", "eta1", "eta2"):
        value = getattr(config, name)
        if not (0.0 <= value <= 1.0):
            v.append(f"{name}: must lie in [0, 1], got {value}")
    if len(config.linewidths) != config.d:
        v.append(
            f"linewidths: expected length d={config.d}, got {len(config.linewidths)}"
        )
    if len(config.frequencies) != config.d:
        v.append(
            f"frequencies: expected length d={config.d}, got {len(config.frequencies)}"
        )
    for j, g in enumerate(config.linewidths):
        if not g > 0:
            v.append(f"linewidths[{j}]: must be > 0, got {g}")
    return v


def validate(config: EmitterArrayConfig) -> EmitterArrayConfig:
    """Return the config unchanged, or raise listing every violated invariant."""
    v = _violations(config)
    if v:
        raise ConfigError(v)
    return config


@dataclass(frozen=True)
class DetectorModel:
    """Detector response model.

    ``jitter`` is the Gaussian timing-response width sigma in seconds;
    ``dead_time`` is the integration window of a threshold detector (the
    closed forms extend it to infinity, which is safe once it exceeds the
    photon coherence time).
    """

    kind: DetectorKind = DetectorKind.NUMBER_RESOLVING
    jitter: float = 0.0
    time_resolved: bool = False
    dead_time: float = math.inf

    def __post_init__(self) -> None:
        if self.jitter < 0:
            raise ConfigError(["jitter: must be >= 0"])
        if self.dead_time <= 0:
            raise ConfigError(["dead_time: must be > 0"])


class SingleExcitationDM:
    """Density matrix over the single-excitation basis {|s_j>}.

    |s_j> is the spin configuration with emitter j alone in the bright
    state. Construction asserts Hermiticity (1e-12), unit trace (1e-10) and
    positivity (min eigenvalue >= -1e-10); every dm produced anywhere in the
    package passes through here.
    """

    __slots__ = ("d", "matrix")

    def __init__(self, matrix: np.ndarray):
        m = np.asarray(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {m.shape}")
        herm = np.max(np.abs(m - m.conj().T))
        if herm > 1e-12:
            raise ValueError(f"not Hermitian: max |rho - rho^dag| = {herm:.3e}")
        tr = m.trace()
        if abs(tr - 1.0) > 1e-10:
            raise ValueError(f"trace = {tr}, expected 1")
        min_eig = float(np.linalg.eigvalsh(m).min())
        if min_eig < -1e-10:
            raise ValueError(f"not PSD: min eigenvalue = {min_eig:.3e}")
        self.d = m.shape[0]
        self.matrix = m
        self.matrix.setflags(write=False)

    @classmethod
    def w_state(cls, d: int) -> "SingleExcitationDM":
        """|W_d><W_d| with uniform phases."""
        amp = np.full(d, 1.0 / math.sqrt(d), dtype=complex)
        return cls(np.outer(amp, amp.conj()))

    def fidelity_to_w(self) -> float:
        """<W_d| rho |W_d> = (1/d) sum_{j,k} rho_{j,k}.

        The imaginary residue of the sum must vanish (asserted below 1e-10)
        and is dropped.
        """
        val = self.matrix.sum() / self.d
        if abs(val.imag) > 1e-10:
            raise ValueError(f"fidelity has imaginary residue {val.imag:.3e}")
        return float(val.real)


@dataclass(frozen=True)
class NoisyWState:
    """Loss-partitioned mixture of heralded-state components.

    Keys are excitation signatures (delta_s, delta_xi): delta_s photons
    lost before the interferometer (their emitters are bright but revealed),
    delta_xi photons reaching the clicked detector. The ideal W state is the
    (0, 1) component, whose coherent block is carried explicitly; by
    symmetry all components of equal signature share one weight.
    """

    d: int
    weights: Mapping[tuple[int, int], float]
    coherent_block: SingleExcitationDM | None = None

    def __post_init__(self) -> None:
        total = 0.0
        for (ds, dx), a in self.weights.items():
            if a < 0:
                raise ValueError(f"weight for ({ds},{dx}) is negative: {a}")
            if dx < 1 or ds < 0 or ds + dx > self.d:
                raise ValueError(f"invalid excitation signature ({ds},{dx})")
            total += a
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"weights sum to {total}, expected 1")

    def excitation_weights(self) -> dict[int, float]:
        """Weights aggregated by total bright-emitter count nu = ds + dx."""
        out: dict[int, float] = {}
        for (ds, dx), a in self.weights.items():
            out[ds + dx] = out.get(ds + dx, 0.0) + a
        return out


@dataclass(frozen=True)
class HeraldRecord:
    """Classical record of a successful herald.

    ``mode`` is the detector l that clicked (imprinting phases 2*pi*j*l/d on
    term j of the W state), ``click_time`` the resolved detection time when
    available, and ``spin_outcomes`` the X-basis results m_j fixing the
    (-1)^{m_j} sign pattern of the final GHZ state.
    """

    mode: int
    click_time: float | None = None
    spin_outcomes: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.mode < 0:
            raise ValueError("herald mode must be a non-negative index")
        if any(m not in (0, 1) for m in self.spin_outcomes):
            raise ValueError("spin outcomes must be bits")


@dataclass(frozen=True)
class ProtocolOutcome:
    """Headline numbers of one protocol configuration."""

    F_GHZ: float
    P_GHZ: float
    expected_attempts: float
    wall_rounds: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.F_GHZ <= 1.0 + 1e-12):
            raise ValueError(f"F_GHZ out of range: {self.F_GHZ}")
        if not (0.0 <= self.P_GHZ <= 1.0 + 1e-12):
            raise ValueError(f"P_GHZ out of range: {self.P_GHZ}")
        if self.expected_attempts < 1.0:
            raise ValueError("expected_attempts must be >= 1")


# --------------------------------------------------------------------------
# TOML configuration
# --------------------------------------------------------------------------
#
# Schema (all keys optional unless noted):
#
#   [emitters]
#   d = 3                      # required
#   p = 0.1                    # required
#   linewidths_hz = 1.0e9      # scalar or length-d list, ordinary frequency
#   frequencies_hz = [ ... ]   # scalar or length-d list
#   dephasing_rate = 0.0
#   relaxation = 0.0
#   eta1 = 1.0
#   eta2 = 1.0
#
#   [detector]
#   kind = "number_resolving"  # or "threshold"
#   jitter_s = 0.0
#   time_resolved = false
#   dead_time_s = inf
#
#   [protocol]
#   n_photons = 2              # GHZ photon number N
#   n_success = 1              # consecutive-single-click policy
#   shots = 100000
#   seed = 0
#   pump_rate_hz = 76.0e6
#
# Frequency-like emitter fields are ordinary frequencies in Hz and are
# converted to angular frequencies (rad/s) here.


def _broadcast(value, d: int, name: str) -> tuple[float, ...]:
    if isinstance(value, (int, float)):
        return (float(value),) * d
    seq = tuple(float(x) for x in value)
    if len(seq) != d:
        raise ConfigError([f"{name}: expected scalar or length-{d} list"])
    return seq


def load_config(path: str | Path) -> tuple[EmitterArrayConfig, DetectorModel, dict]:
    """Load (emitters, detector, protocol) from a TOML file.

    Returns the validated emitter config, the detector model, and the raw
    ``[protocol]`` table (consumed by the CLI).
    """
    with open(path, "rb") as fh:
        doc = tomllib.load(fh)

    em = doc.get("emitters", {})
    if "d" not in em or "p" not in em:
        raise ConfigError(["emitters: keys 'd' and 'p' are required"])
    d = int(em["d"])
    config = EmitterArrayConfig(
        d=d,
        p=float(em["p"]),
        linewidths=tuple(
            TWO_PI * g for g in _broadcast(em.get("linewidths_hz", 1.0), d, "linewidths_hz")
        ),
        frequencies=tuple(
            TWO_PI * w for w in _broadcast(em.get("frequencies_hz", 0.0), d, "frequencies_hz")
        ),
        dephasing_rate=float(em.get("dephasing_rate", 0.0)),
        relaxation=float(em.get("relaxation", 0.0)),
        eta1=float(em.get("eta1", 1.0)),
        eta2=float(em.get("eta2", 1.0)),
    )
    validate(config)

    det = doc.get("detector", {})
    kind_name = str(det.get("kind", "number_resolving")).lower()
    try:
        kind = DetectorKind(kind_name)
    except ValueError:
        raise ConfigError(
            [f"detector.kind: unknown kind '{kind_name}' "
             f"(expected 'number_resolving' or 'threshold')"]
        ) from None
    detector = DetectorModel(
        kind=kind,
        jitter=float(det.get("jitter_s", 0.0)),
        time_resolved=bool(det.get("time_resolved", False)),
        dead_time=float(det.get("dead_time_s", math.inf)),
    )

    return config, detector, dict(doc.get("protocol", {}))
