"""Closed-form fidelity and probability calculators for the lossy protocol.

Stage I heralds a W state from a single detector click; photon loss opens
false-herald paths in which extra emitters are left bright. The calculators
here enumerate those paths by their excitation signature (delta_s photons
lost before the interferometer, delta_xi photons absorbed in the click) and
sum the resulting fidelities and probabilities in closed form, for both
photon-number-resolving (PNRD) and threshold detectors, for policies that
demand n consecutive single clicks, and for the dephasing and
amplitude-damping channels acting on the heralded state.

All formulas are validated against :mod:`qghz.fock_oracle` to 1e-9 on a
(d, p, eta) grid; the Monte-Carlo trajectories in :mod:`qghz.ghz_pipeline`
provide an independent end-to-end check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import DetectorKind, NoisyWState, SingleExcitationDM

__all__ = [
    "SuccessPolicy",
    "amplitude_damp_w",
    "dephase_w",
    "expected_attempts",
    "many_success_metrics",
    "next_click_prob",
    "noisy_w_state",
    "p_ghz",
    "qudit_emission_prob",
    "vacuum_prob",
    "w_fidelity_ad",
    "w_fidelity_loss",
    "w_metrics_threshold",
    "w_success_loss",
]


@dataclass(frozen=True)
class SuccessPolicy:
    """Demand n consecutive single-click events before accepting a herald."""

    n: int = 1

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("policy requires n >= 1")


def _check_ranges(d: int, p: float, eta: float) -> None:
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    if not (0.0 <= p <= 1.0) or not (0.0 <= eta <= 1.0):
        raise ValueError(f"p and eta must lie in [0, 1], got p={p}, eta={eta}")
    if p == 1.0:
        raise ValueError(
            "p = 1 is singular in the closed forms (no dark component); "
            "use p < 1"
        )


def w_fidelity_loss(d: int, p: float, eta: float) -> float:
    """Heralded W fidelity with loss and a number-resolving detector.

    F_W = [sum_{delta=0}^{d-1} C(d-1, delta) (p/(1-p))^delta
           (1-eta)^delta]^{-1}:
    each lost-photon count delta adds a false-herald path whose weight
    grows binomially in the number of extra bright emitters.
    """
    _check_ranges(d, p, eta)
    r = p * (1.0 - eta) / (1.0 - p)
    total = sum(math.comb(d - 1, delta) * r**delta for delta in range(d))
    return 1.0 / total


def w_success_loss(d: int, p: float, eta: float) -> float:
    """Single-click herald probability with loss (number-resolving).

    P_W = sum_delta d!/(delta! (d-delta-1)!) p^{delta+1} (1-p)^{d-delta-1}
          eta (1-eta)^delta.
    """
    _check_ranges(d, p, eta)
    return sum(
        (math.factorial(d) // (math.factorial(delta) * math.factorial(d - delta - 1)))
        * p ** (delta + 1)
        * (1.0 - p) ** (d - delta - 1)
        * eta
        * (1.0 - eta) ** delta
        for delta in range(d)
    )


def _threshold_success_terms(d: int, p: float, eta: float):
    """Yield (delta_s, delta_xi, probability) for threshold heralds.

    delta_s emitters lose their photon before the interferometer, delta_xi
    photons bunch into the clicked detector; d * C(d, delta_s)
    C(d - delta_s, delta_xi) counts mode and emitter assignments, and
    delta_xi!/d^{delta_xi} is the bunching amplitude of delta_xi photons
    exiting one DFT port together.
    """
    for delta_s in range(d):
        for delta_xi in range(1, d - delta_s + 1):
            prob = (
                d
                * math.comb(d, delta_s)
                * math.comb(d - delta_s, delta_xi)
                * (math.factorial(delta_xi) / d**delta_xi)
                * (p * (1.0 - eta)) ** delta_s
                * (p * eta) ** delta_xi
                * (1.0 - p) ** (d - delta_s - delta_xi)
            )
            yield delta_s, delta_xi, prob


def w_metrics_threshold(
    d: int, p: float, eta: float, max_detected: int | None = None
) -> tuple[float, float]:
    """(F_W, P_W) for a threshold (click/no-click) detector.

    Bunched multi-photon events masquerade as single clicks, so the success
    probability gains a double sum over (delta_s, delta_xi) and the fidelity
    drops to the weight of the true single-excitation path:
    F_W = d p eta (1-p)^{d-1} / P_W.

    Restricting ``max_detected`` to 1 removes the bunched paths and
    recovers the number-resolving formulas exactly.
    """
    _check_ranges(d, p, eta)
    cap = d if max_detected is None else max_detected
    P_W = sum(
        prob
        for delta_s, delta_xi, prob in _threshold_success_terms(d, p, eta)
        if delta_xi <= cap
    )
    F_W = d * p * eta * (1.0 - p) ** (d - 1) / P_W
    return F_W, P_W


def next_click_prob(nu: int, d: int, eta: float, kind: DetectorKind) -> float:
    """Probability that nu bright emitters yield one more single click.

    All nu emitters fire; y photons survive loss and must bunch into one
    detector: P_next = d sum_y C(nu, y) (y!/d^y) eta^y (1-eta)^{nu-y}.
    A number-resolving detector accepts only y = 1.
    """
    if not (1 <= nu <= d):
        raise ValueError(f"nu must lie in [1, d], got nu={nu}, d={d}")
    ys = range(1, nu + 1) if kind is DetectorKind.THRESHOLD else (1,)
    return d * sum(
        math.comb(nu, y)
        * (math.factorial(y) / d**y)
        * eta**y
        * (1.0 - eta) ** (nu - y)
        for y in ys
    )


def many_success_metrics(
    d: int, p: float, eta: float, policy: SuccessPolicy, kind: DetectorKind
) -> tuple[float, float]:
    """(F_W(n), P_W(n)) after n consecutive single-click events.

    Each false-herald component must keep producing single clicks, which is
    increasingly unlikely for multi-excitation components; demanding more
    clicks therefore purifies the state at the cost of success probability:

    P_W(n) = sum over first-click signatures of
             prob * (P_next(nu)/d)^{n-1} * d^{n-1},
    F_W(n) = d p (1-p)^{d-1} eta^n / P_W(n).
    """
    _check_ranges(d, p, eta)
    if kind is DetectorKind.NUMBER_RESOLVING:
        first = [
            (ds, 1, prob)
            for ds, dx, prob in _threshold_success_terms(d, p, eta)
            if dx == 1
        ]
    else:
        first = list(_threshold_success_terms(d, p, eta))
    P_n = sum(
        prob * next_click_prob(ds + dx, d, eta, kind) ** (policy.n - 1)
        for ds, dx, prob in first
    )
    F_n = d * p * (1.0 - p) ** (d - 1) * eta**policy.n / P_n
    return F_n, P_n


def qudit_emission_prob(
    d: int,
    p: float,
    eta1: float,
    eta2: float,
    n: int = 1,
    kind: DetectorKind = DetectorKind.NUMBER_RESOLVING,
) -> float:
    """Probability that a heralded array emits one more heralded photon.

    P_q = P_W(n+1)/P_W(n) with the transmission of the final round replaced
    by eta2 (the distribution channel differs from the local heralding
    channel).
    """
    _check_ranges(d, p, eta1)
    if kind is DetectorKind.NUMBER_RESOLVING:
        first = [
            (ds, 1, prob)
            for ds, dx, prob in _threshold_success_terms(d, p, eta1)
            if dx == 1
        ]
    else:
        first = list(_threshold_success_terms(d, p, eta1))
    num = sum(
        prob
        * next_click_prob(ds + dx, d, eta1, kind) ** (n - 1)
        * next_click_prob(ds + dx, d, eta2, kind)
        for ds, dx, prob in first
    )
    den = sum(
        prob * next_click_prob(ds + dx, d, eta1, kind) ** (n - 1)
        for ds, dx, prob in first
    )
    return num / den


def noisy_w_state(
    d: int,
    p: float,
    eta: float,
    kind: DetectorKind = DetectorKind.NUMBER_RESOLVING,
    policy: SuccessPolicy = SuccessPolicy(1),
) -> NoisyWState:
    """Heralded mixture over excitation signatures after stage I.

    Weights are the normalized herald-path probabilities; the coherent
    block of the ideal (0, 1) component is the uniform-phase W state.
    """
    _check_ranges(d, p, eta)
    if kind is DetectorKind.NUMBER_RESOLVING:
        terms = [
            (ds, dx, prob)
            for ds, dx, prob in _threshold_success_terms(d, p, eta)
            if dx == 1
        ]
    else:
        terms = list(_threshold_success_terms(d, p, eta))
    weights = {
        (ds, dx): prob * next_click_prob(ds + dx, d, eta, kind) ** (policy.n - 1)
        for ds, dx, prob in terms
    }
    total = sum(weights.values())
    weights = {k: v / total for k, v in weights.items()}
    return NoisyWState(
        d=d, weights=weights, coherent_block=SingleExcitationDM.w_state(d)
    )


def dephase_w(state: SingleExcitationDM, gamma: float, k: float) -> SingleExcitationDM:
    """Apply k rounds of per-emitter dephasing at rate gamma per round.

    Off-diagonal elements pick up (1-gamma)^{2k}; populations are
    untouched. k may be fractional when charging an expected round count.
    """
    if not (0.0 <= gamma <= 1.0):
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    factor = (1.0 - gamma) ** (2.0 * k)
    m = state.matrix.copy()
    off = ~np.eye(state.d, dtype=bool)
    m[off] *= factor
    return SingleExcitationDM(m)


def amplitude_damp_w(state: SingleExcitationDM, lam: float) -> tuple[float, float]:
    """Post-herald relaxation of the stored W state.

    Each emitter decays with probability lam; the single shared excitation
    is lost with total probability lam, leaving (1-lam)|W><W| + lam |0><0|.
    Returns (w_fidelity, all_dark_weight).
    """
    if not (0.0 <= lam <= 1.0):
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    return (1.0 - lam) * state.fidelity_to_w(), lam


def w_fidelity_ad(d: int, p: float, lam: float, eta: float) -> float:
    """Heralded W fidelity with pre-herald relaxation and loss.

    Relaxation before the click is indistinguishable from photon loss, so
    it enters through the substitution eta -> 1 - lam, composed
    multiplicatively with the optical-loss fidelity.
    """
    if not (0.0 <= lam <= 1.0):
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    if lam == 1.0:
        return 0.0
    return w_fidelity_loss(d, p, eta) * w_fidelity_loss(d, p, 1.0 - lam)


def vacuum_prob(d: int, p: float, eta: float) -> float:
    """Probability that a pump round produces no detected photon.

    Each emitter independently contributes nothing with probability
    (1-p) + p(1-eta), so P_vac = (1 - p eta)^d.
    """
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    return (1.0 - p * eta) ** d


def p_ghz(
    d: int, p: float, eta: float, kind: DetectorKind = DetectorKind.NUMBER_RESOLVING
) -> float:
    """Probability that the first non-vacuum round is a valid herald.

    P_GHZ = P_W / (1 - P_vac): conditioned on something being detected, the
    click pattern must be a single-detector event.
    """
    if p <= 0.0:
        raise ValueError("p must be > 0 for a herald to ever occur")
    if kind is DetectorKind.NUMBER_RESOLVING:
        P_W = w_success_loss(d, p, eta)
    else:
        _, P_W = w_metrics_threshold(d, p, eta)
    return P_W / (1.0 - vacuum_prob(d, p, eta))


def expected_attempts(
    d: int, p: float, eta: float, convention: str = "non_vacuum"
) -> float:
    """Expected pump rounds until a herald.

    ``"non_vacuum"`` counts rounds to the first non-vacuum detection,
    N_W = 1/(1 - P_vac) (the convention used for the attempt-count figure
    axis); ``"herald"`` counts rounds to a valid single-click herald,
    1/P_W. Both are geometric means; the dephasing budget consumes whichever
    the caller selects.
    """
    if p <= 0.0:
        raise ValueError("p must be > 0")
    if convention == "non_vacuum":
        return 1.0 / (1.0 - vacuum_prob(d, p, eta))
    if convention == "herald":
        return 1.0 / w_success_loss(d, p, eta)
    raise ValueError(f"unknown attempts convention '{convention}'")
