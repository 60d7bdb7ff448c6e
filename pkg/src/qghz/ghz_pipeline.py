"""Composition of channel fidelities into GHZ-state metrics, and the
Monte-Carlo trajectory simulator that serves as the end-to-end oracle.

The protocol in full: stage I pumps the d-emitter array until a single
detector click behind the DFT heralds a (possibly noisy) W state; stage II
extracts N photons, one per round, postselecting on exactly one arrival per
time bin; stage III measures every emitter in the X basis, leaving the
photons in a qudit GHZ state up to known sign and phase corrections.

The analytic path composes F_GHZ = F_dist * F_loss * F_dephase (a lower
bound); the stochastic path samples every emission, loss, click, phase
flip, and measurement outcome and scores the exact branch-amplitude overlap
with the corrected GHZ target. Wherever the closed forms make a structural
assumption (which multi-excitation branches stay coherent, what a threshold
detector accepts), the trajectory simulator is the authority.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .loss_analytics import (
    SuccessPolicy,
    expected_attempts,
    next_click_prob,
)
from .model import (
    DetectorKind,
    EmitterArrayConfig,
    HeraldRecord,
    NoisyWState,
)
from .numerics import rng_stream

__all__ = [
    "MCResult",
    "ZeroAcceptedError",
    "apply_corrections",
    "compose_fidelity",
    "dephasing_budget",
    "ghz_loss_fidelity",
    "mc_protocol",
    "mc_w_state",
    "worker_count",
]


class ZeroAcceptedError(RuntimeError):
    """No trajectory survived postselection; carries the acceptance count."""

    def __init__(self, shots: int):
        super().__init__(f"0 of {shots} trajectories accepted")
        self.accepted = 0
        self.shots = shots


def worker_count() -> int:
    """Worker cap from QGHZ_THREADS (default 1)."""
    raw = os.environ.get("QGHZ_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"QGHZ_THREADS must be an integer, got '{raw}'") from None
    return max(1, n)


def compose_fidelity(*factors: float) -> float:
    """Product of independent channel fidelities (a lower bound on F_GHZ)."""
    out = 1.0
    for f in factors:
        if not (0.0 <= f <= 1.0 + 1e-12):
            raise ValueError(f"fidelity factor out of range: {f}")
        out *= min(f, 1.0)
    return out


def dephasing_budget(
    config: EmitterArrayConfig, attempts: float, n_photons: int
) -> float:
    """Fidelity cost of dephasing over the protocol's expected runtime.

    Each emitter dephases for k = attempts + N pump rounds before the
    X measurement; the W-state (and hence GHZ-state) fidelity retains
    (1/d) + ((d-1)/d) (1-gamma)^{2k}.
    """
    if attempts < 0:
        raise ValueError("attempts must be >= 0")
    gamma = config.dephasing_rate
    k = attempts + n_photons
    d = config.d
    return 1.0 / d + (d - 1) / d * (1.0 - gamma) ** (2.0 * k)


def ghz_loss_fidelity(
    noisy: NoisyWState,
    eta2: float,
    n_photons: int,
    kind: DetectorKind = DetectorKind.NUMBER_RESOLVING,
) -> float:
    """GHZ fidelity after N postselected emission rounds from a noisy W.

    A component with excitation signature (delta_s, delta_xi) holds
    nu = delta_s + delta_xi bright emitters. Passing all N rounds costs
    P_next(nu, d, eta2)^N; its overlap with the corrected GHZ target comes
    from the paths in which one fixed emitter supplies every detected
    photon while the other nu - 1 photons are lost each round. The loss
    record distinguishes most branches, but branches differing only in the
    emitter that absorbed the herald click stay mutually coherent, giving
    the coherent weight (delta_s + delta_xi (d - delta_s - delta_xi + 1))/d
    (equal to 1 on the ideal component). Validated against mc_protocol.
    """
    if n_photons < 1:
        raise ValueError("n_photons must be >= 1")
    d = noisy.d
    num = 0.0
    den = 0.0
    for (ds, dx), alpha in noisy.weights.items():
        nu = ds + dx
        single = (eta2 * (1.0 - eta2) ** (nu - 1)) ** n_photons
        coherent_weight = (ds + dx * (d - ds - dx + 1)) / d
        num += alpha * single * coherent_weight
        den += alpha * next_click_prob(nu, d, eta2, kind) ** n_photons
    if den == 0.0:
        return 0.0
    return num / den


def apply_corrections(
    amplitudes: dict[int, complex], herald: HeraldRecord, d: int
) -> dict[int, complex]:
    """Undo the herald-mode phases and X-outcome signs on qudit amplitudes.

    Branch j carries e^{i 2 pi j l / d} from the mode-l herald and
    (-1)^{m_j} from the emitter measurement pattern; removing both makes
    the uniform-phase GHZ state the universal target.
    """
    m = herald.spin_outcomes
    out: dict[int, complex] = {}
    for j, a in amplitudes.items():
        a = a * np.exp(-2j * math.pi * j * herald.mode / d)
        if m and m[j]:
            a = -a
        out[j] = a
    return out


@dataclass(frozen=True)
class MCResult:
    """Monte-Carlo estimates with one-sigma standard errors."""

    F_GHZ: float
    F_err: float
    P_GHZ: float
    P_err: float
    accepted: int
    shots: int
    mean_attempts: float


# --------------------------------------------------------------------------
# Trajectory simulation
#
# A trajectory tracks the heralded superposition as a list of branches
# (bright-emitter set, complex amplitude of equal magnitude, running sign
# and phase). Classical records (which photons were lost, which detector
# clicked) restrict and re-phase the branch list; quantum coherence lives in
# the which-branch amplitudes and in the single-photon-per-round records of
# stage II.
# --------------------------------------------------------------------------


def _stage1_once(rng, d, p, eta1, kind):
    """One pump round. Returns (outcome, lost, captured) with outcome in
    {'vacuum', 'invalid', 'valid'}: lost is the set of emitters whose photon
    vanished before the DFT, captured the number reaching the detectors."""
    u = rng.random(d)
    lost = [j for j in range(d) if u[j] < p * (1.0 - eta1)]
    captured = [
        j for j in range(d) if p * (1.0 - eta1) <= u[j] < p
    ]
    m = len(captured)
    if m == 0:
        return "vacuum", lost, captured
    if kind is DetectorKind.NUMBER_RESOLVING:
        if m != 1:
            return "invalid", lost, captured
        return "valid", lost, captured
    # Threshold: all m photons must exit one DFT port together.
    if m == 1 or rng.random() < math.factorial(m) * d ** (1 - m):
        return "valid", lost, captured
    return "invalid", lost, captured


def _purify_round(rng, branches, d, eta1, kind):
    """One extra single-click round of a consecutive-success policy.

    branches: list of (frozenset S, phase). Returns (ok, new_branches,
    herald_mode, lost_set); ok=False means the sequence failed.
    """
    # Sample the loss record through one representative branch (weights are
    # uniform), then keep every branch consistent with it.
    S_star = branches[rng.integers(len(branches))][0]
    lost = frozenset(j for j in S_star if rng.random() < 1.0 - eta1)
    y = len(S_star) - len(lost)
    if y == 0:
        return False, branches, 0, lost
    if kind is DetectorKind.NUMBER_RESOLVING:
        if y != 1:
            return False, branches, 0, lost
    else:
        if y > 1 and not rng.random() < math.factorial(y) * d ** (1 - y):
            return False, branches, 0, lost
    mode = int(rng.integers(d))
    kept = []
    for S, phase in branches:
        if lost <= S:
            survivors = S - lost
            # Bunched exit at `mode` imprints e^{i 2 pi mode sum(survivors)/d};
            # the known-mode correction removes the full-S phase, leaving the
            # lost-set part, common to every surviving branch.
            phase = phase * np.exp(2j * math.pi * mode * sum(survivors) / d)
            phase = phase * np.exp(-2j * math.pi * mode * sum(S) / d)
            kept.append((S, phase))
    return True, kept, mode, lost


def _run_shot(shot_args):
    """One full GHZ generation attempt. Returns
    (accepted, F_traj, n_first_clicks, n_valid, attempts_to_herald)."""
    (master_seed, shot, d, p, eta1, eta2, gamma, lam, n_photons, kind,
     n_policy, k_deph) = shot_args
    rng = rng_stream(master_seed, shot)

    nonvacuum = 0
    valid = 0
    attempts = 0
    while True:
        # ---- stage I: repeat until a valid herald sequence ----
        branches = None
        while True:
            attempts += 1
            outcome, lost, captured = _stage1_once(rng, d, p, eta1, kind)
            if outcome == "vacuum":
                continue
            nonvacuum += 1
            if outcome == "valid":
                valid += 1
                break
        herald_mode = int(rng.integers(d))
        q = frozenset(lost)
        # Branch superposition over which emitters fed the click; the click
        # count |captured| is fixed, the identity is not.
        others = [j for j in range(d) if j not in q]
        m = len(captured)
        branches = []
        for xi in combinations(others, m):
            phase = np.exp(2j * math.pi * herald_mode * sum(xi) / d)
            # Emitter-local correction for the known herald mode.
            phase *= np.exp(-2j * math.pi * herald_mode * (sum(xi) + sum(q)) / d)
            branches.append((q | frozenset(xi), phase))

        ok = True
        for _ in range(n_policy - 1):
            ok, branches, _, _ = _purify_round(rng, branches, d, eta1, kind)
            if not ok:
                break
        if ok:
            break
        # Failed consecutive-click sequence: re-initialize everything.

    amp = 1.0 / math.sqrt(len(branches))
    nu = len(next(iter(branches))[0])

    # ---- stage II: N emission rounds over the distribution channel ----
    records = [[] for _ in branches]  # surviving-photon mode per round
    clean = True  # no multi-photon time bin so far
    for _ in range(n_photons):
        if lam > 0.0:
            # Relaxation: each bright emitter may decay; the event reveals
            # the emitter, collapsing to branches that contain it.
            bright = set()
            for S, _ in branches:
                bright |= S
            for j in sorted(bright):
                frac = sum(1 for S, _ in branches if j in S) / len(branches)
                if rng.random() < lam * frac:
                    kept = [
                        (S - {j}, ph, rec)
                        for (S, ph), rec in zip(branches, records)
                        if j in S
                    ]
                    branches = [(S, ph) for S, ph, _ in kept]
                    records = [rec for _, _, rec in kept]
                    amp = 1.0 / math.sqrt(len(branches))
                    nu -= 1
            if nu == 0:
                return False, 0.0, nonvacuum, valid, attempts
        S_star = branches[int(rng.integers(len(branches)))][0]
        lost = frozenset(j for j in S_star if rng.random() < 1.0 - eta2)
        y = nu - len(lost)
        if y == 0:
            return False, 0.0, nonvacuum, valid, attempts
        if kind is DetectorKind.NUMBER_RESOLVING:
            if y != 1:
                return False, 0.0, nonvacuum, valid, attempts
        else:
            if y > 1:
                if not rng.random() < math.factorial(y) * d ** (1 - y):
                    return False, 0.0, nonvacuum, valid, attempts
                clean = False
        kept_b, kept_r = [], []
        for (S, ph), rec in zip(branches, records):
            if lost <= S:
                survivors = sorted(S - lost)
                kept_b.append((S, ph))
                kept_r.append(rec + [tuple(survivors)])
        branches, records = kept_b, kept_r
        amp = 1.0 / math.sqrt(len(branches))

    # ---- dephasing: Z flips charged over the budgeted round count ----
    if gamma > 0.0:
        signs = np.ones(len(branches))
        k_full = int(math.floor(k_deph))
        frac = k_deph - k_full
        qflip = gamma / 2.0
        for r in range(k_full + (1 if frac > 0 else 0)):
            qr = qflip if r < k_full else (1.0 - (1.0 - gamma) ** frac) / 2.0
            flips = {j for j in range(d) if rng.random() < qr}
            if not flips:
                continue
            for i, (S, _) in enumerate(branches):
                if len(S & flips) % 2:
                    signs[i] = -signs[i]
        branches = [
            (S, ph * s) for (S, ph), s in zip(branches, signs)
        ]

    # ---- stage III: X measurement of every emitter ----
    # Branch records are mutually orthogonal, so outcomes are uniform.
    m_bits = tuple(int(b) for b in rng.integers(0, 2, d))
    herald = HeraldRecord(mode=0, spin_outcomes=m_bits)

    # Qualifying branches: every round's survivor is the same single mode.
    qudit_amp: dict[int, complex] = {}
    for (S, ph), rec in zip(branches, records):
        sign = -1.0 if sum(m_bits[j] for j in S) % 2 else 1.0
        if clean and all(len(r) == 1 for r in rec) and len({r[0] for r in rec}) == 1:
            j = rec[0][0]
            qudit_amp[j] = qudit_amp.get(j, 0.0) + amp * ph * sign
    qudit_amp = apply_corrections(qudit_amp, herald, d)
    overlap = sum(qudit_amp.values()) / math.sqrt(d)
    return True, abs(overlap) ** 2, nonvacuum, valid, attempts


def mc_protocol(
    config: EmitterArrayConfig,
    n_photons: int,
    kind: DetectorKind = DetectorKind.NUMBER_RESOLVING,
    policy: SuccessPolicy = SuccessPolicy(1),
    shots: int = 10_000,
    master_seed: int = 0,
    distinguishability_factor: float = 1.0,
    attempts_convention: str = "non_vacuum",
) -> MCResult:
    """Full stochastic simulation of the protocol.

    Every shot runs repeat-until-herald stage I (Bernoulli emission,
    per-photon loss, exact DFT click statistics with bunching), the
    consecutive-single-click policy, N postselected emission rounds, Z-flip
    dephasing over the budgeted round count, relaxation, and the X-basis
    measurement, then scores the exact overlap of the corrected branch
    amplitudes with the GHZ target. Deterministic given
    (master_seed, shots) and independent of the worker count: each shot
    owns substream (master_seed, shot) and results merge in shot order.

    Spectral distinguishability enters through the multiplicative
    ``distinguishability_factor`` computed by :mod:`qghz.spectral`, matching
    the product composition of the analytic pipeline.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    # Dephasing is charged over the expected rounds of the analytic budget
    # so the stochastic and closed-form channels agree exactly (the
    # (1-gamma)^{2k} factor is convex in the attempt count, so charging
    # per-trajectory actual attempts would bias the comparison).
    k_deph = (
        expected_attempts(config.d, config.p, config.eta1, attempts_convention)
        + (policy.n - 1)
        + n_photons
    )
    args = [
        (
            master_seed, shot, config.d, config.p, config.eta1, config.eta2,
            config.dephasing_rate, config.relaxation, n_photons, kind,
            policy.n, k_deph,
        )
        for shot in range(shots)
    ]
    workers = worker_count()
    if workers == 1:
        rows = [_run_shot(a) for a in args]
    else:
        chunk = max(1, len(args) // (workers * 4))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_shot, args, chunksize=chunk))

    acc_F = [r[1] for r in rows if r[0]]
    n_acc = len(acc_F)
    if n_acc == 0:
        raise ZeroAcceptedError(shots)
    nonvac = sum(r[2] for r in rows)
    valid = sum(r[3] for r in rows)
    attempts = sum(r[4] for r in rows)

    F = float(np.mean(acc_F)) * distinguishability_factor
    F_err = (
        float(np.std(acc_F, ddof=1)) / math.sqrt(n_acc) if n_acc > 1 else 1.0
    ) * distinguishability_factor
    P = valid / nonvac
    P_err = math.sqrt(max(P * (1.0 - P), 1e-300) / nonvac)
    return MCResult(
        F_GHZ=F,
        F_err=F_err,
        P_GHZ=P,
        P_err=P_err,
        accepted=n_acc,
        shots=shots,
        mean_attempts=attempts / shots,
    )


def mc_w_state(
    config: EmitterArrayConfig,
    kind: DetectorKind = DetectorKind.NUMBER_RESOLVING,
    policy: SuccessPolicy = SuccessPolicy(1),
    shots: int = 10_000,
    master_seed: int = 0,
) -> tuple[float, float, float, float]:
    """Single-sequence sampler of the stage-I metrics.

    Each shot pumps once from a fresh array and, on a valid first click,
    plays the remaining n-1 single-click rounds without retry. Returns
    (F_W, F_err, P_W, P_err): P_W is the per-sequence success probability
    of the closed form P_W(n); F_W is the surviving weight of the true
    single-excitation component.
    """
    d, p, eta1 = config.d, config.p, config.eta1
    successes = 0
    pure = 0
    for shot in range(shots):
        rng = rng_stream(master_seed, shot)
        outcome, lost, captured = _stage1_once(rng, d, p, eta1, kind)
        if outcome != "valid":
            continue
        q = frozenset(lost)
        others = [j for j in range(d) if j not in q]
        branches = [
            (q | frozenset(xi), 1.0 + 0.0j)
            for xi in combinations(others, len(captured))
        ]
        ok = True
        for _ in range(policy.n - 1):
            ok, branches, _, _ = _purify_round(rng, branches, d, eta1, kind)
            if not ok:
                break
        if not ok:
            continue
        successes += 1
        if len(next(iter(branches))[0]) == 1:
            pure += 1
    P = successes / shots
    P_err = math.sqrt(max(P * (1.0 - P), 1e-300) / shots)
    if successes == 0:
        raise ZeroAcceptedError(shots)
    F = pure / successes
    F_err = math.sqrt(max(F * (1.0 - F), 1e-300) / successes)
    return F, F_err, P, P_err
