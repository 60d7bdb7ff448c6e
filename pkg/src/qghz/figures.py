"""Data generators for the package's reference figures.

Each builder returns a mapping from CSV basename to a (columns, rows) table;
the CLI writes the tables and the rendering frontend consumes them. One CSV
per plotted curve or scatter series, so the renderer never recomputes
physics. All builders are deterministic given their parameters (and, for the
Monte-Carlo scatter, the master seed), which is what makes byte-identical
replay possible.

Default parameters follow the reference operating points: quantum-dot-class
emitters with 2*pi * 1 GHz linewidth, 3 ps detector resolution, gamma =
0.0088 dephasing per round, and 53% end-to-end efficiency.
"""

from __future__ import annotations

import math
from typing import Callable, Mapping

import numpy as np

from . import keyrate as kr
from .ghz_pipeline import (
    compose_fidelity,
    dephasing_budget,
    ghz_loss_fidelity,
    mc_protocol,
)
from .loss_analytics import (
    SuccessPolicy,
    expected_attempts,
    many_success_metrics,
    noisy_w_state,
    p_ghz,
    w_metrics_threshold,
)
from .model import DetectorKind, DetectorModel, EmitterArrayConfig
from .spectral import (
    avg_fidelity_corrected,
    avg_fidelity_uncorrected,
    threshold_time_resolved,
    tilted_profile,
)

__all__ = ["FIGURES", "Table", "build_figure"]

TWO_PI = 2.0 * math.pi

#: (column names, rows) of one CSV file.
Table = tuple[tuple[str, ...], list[tuple]]

_GHZ_DEFAULTS = {
    "d": 3,
    "p": 0.06,
    "linewidth_hz": 1.0e9,
    "splitting_hz": 10.0e9,
    "sigma_s": 3.0e-12,
    "gamma": 0.0088,
    "n_photons": 3,
}


def _sym_config(d: int, p: float, linewidth_hz: float, splitting_hz: float,
                **kwargs) -> EmitterArrayConfig:
    """d emitters at omega_0 and omega_0 +/- multiples of the splitting."""
    freqs = sorted(
        TWO_PI * splitting_hz * ((j + 1) // 2) * (-1 if j % 2 else 1)
        for j in range(d)
    )
    return EmitterArrayConfig(
        d=d,
        p=p,
        linewidths=(TWO_PI * linewidth_hz,) * d,
        frequencies=tuple(freqs),
        **kwargs,
    )


def fig2a(params: Mapping) -> dict[str, Table]:
    """Time-averaged W fidelity vs detector resolution, per splitting.

    d = 3 emitters at omega_0, omega_0 +/- Delta with equal 1 GHz
    linewidths. One corrected (sigma-dependent) and one uncorrected
    (sigma-free, drawn dashed) curve per splitting.
    """
    d = int(params.get("d", 3))
    linewidth_hz = float(params.get("linewidth_hz", 1.0e9))
    splittings = params.get("splittings_hz", (1.0e9, 2.0e9, 5.0e9, 10.0e9, 20.0e9))
    sigmas = np.linspace(0.0, 100.0e-12, int(params.get("n_sigma", 101)))

    out: dict[str, Table] = {}
    for delta_hz in splittings:
        config = _sym_config(d, 0.1, linewidth_hz, float(delta_hz))
        rows = [
            (float(s), avg_fidelity_corrected(config, float(s)))
            for s in sigmas
        ]
        flat = avg_fidelity_uncorrected(config)
        label = f"{delta_hz / 1e9:g}GHz"
        out[f"corrected_{label}.csv"] = (("sigma_s", "fidelity"), rows)
        out[f"uncorrected_{label}.csv"] = (
            ("sigma_s", "fidelity"),
            [(float(s), flat) for s in (sigmas[0], sigmas[-1])],
        )
    return out


def fig2b(params: Mapping) -> dict[str, Table]:
    """Mismatched linewidths: detection-time profile of the tilted state.

    Five emitters with linewidths [0.6 .. 1.4] Gamma_0 and equal carriers.
    One probability-density curve per linewidth (the red curves) and the
    heralded fidelity vs detection time (black), time in 1/Gamma_0.
    """
    ratios = params.get("linewidth_ratios", (0.6, 0.8, 1.0, 1.2, 1.4))
    d = len(ratios)
    gamma0 = 1.0  # time axis is in units of 1/Gamma_0
    times = np.linspace(1e-4, float(params.get("t_max", 4.0)),
                        int(params.get("n_t", 201)))
    config = EmitterArrayConfig(
        d=d,
        p=0.1,
        linewidths=tuple(r * gamma0 for r in ratios),
        frequencies=(0.0,) * d,
    )
    detector = DetectorModel(time_resolved=True, jitter=0.0)
    profile = tilted_profile(config, detector, times)

    out: dict[str, Table] = {}
    for r in ratios:
        g = r * gamma0
        out[f"pdf_{r:g}.csv"] = (
            ("t", "pdf"),
            [(float(t), 2.0 * g * math.exp(-2.0 * g * t)) for t in times],
        )
    out["fidelity.csv"] = (
        ("t", "fidelity"),
        [(float(t), float(f)) for t, f in zip(times, profile.fidelity)],
    )
    out["summary.csv"] = (
        ("peak_time", "peak_fidelity", "avg_fidelity"),
        [(profile.peak_time, profile.peak_fidelity, profile.avg_fidelity)],
    )
    return out


def _fig3a_point(config: EmitterArrayConfig, sigma: float, n_photons: int,
                 corrected: bool) -> float:
    """Analytic F_GHZ at one capture efficiency."""
    f_dist = (
        avg_fidelity_corrected(config, sigma)
        if corrected
        else avg_fidelity_uncorrected(config)
    )
    noisy = noisy_w_state(config.d, config.p, config.eta1)
    f_loss = ghz_loss_fidelity(noisy, config.eta2, n_photons)
    attempts = expected_attempts(config.d, config.p, config.eta1)
    f_deph = dephasing_budget(config, attempts, n_photons)
    return compose_fidelity(f_dist, f_loss, f_deph)


def fig3a(params: Mapping) -> dict[str, Table]:
    """3-qutrit GHZ fidelity vs capture efficiency.

    Solid: 3 ps-resolved detection (corrected distinguishability factor).
    Dashed: no time resolution. Dots: Monte-Carlo trajectories at a few
    efficiencies, scaled by the same distinguishability factor.
    """
    q = {**_GHZ_DEFAULTS, **params}
    d, p, n_photons = int(q["d"]), float(q["p"]), int(q["n_photons"])
    sigma = float(q["sigma_s"])
    etas = np.linspace(0.2, 1.0, int(q.get("n_eta", 33)))
    mc_etas = q.get("mc_etas", (0.4, 0.53, 0.7, 0.9))
    shots = int(q.get("shots", 20_000))
    seed = int(q.get("seed", 0))

    base = _sym_config(d, p, float(q["linewidth_hz"]), float(q["splitting_hz"]),
                       dephasing_rate=float(q["gamma"]))

    solid, dashed = [], []
    for eta in etas:
        config = base.with_(eta1=float(eta), eta2=float(eta))
        solid.append((float(eta), _fig3a_point(config, sigma, n_photons, True)))
        dashed.append((float(eta), _fig3a_point(config, sigma, n_photons, False)))

    dots = []
    for eta in mc_etas:
        config = base.with_(eta1=float(eta), eta2=float(eta))
        f_dist = avg_fidelity_corrected(config, sigma)
        res = mc_protocol(
            config, n_photons, shots=shots, master_seed=seed,
            distinguishability_factor=f_dist,
        )
        dots.append((float(eta), res.F_GHZ, res.F_err))

    return {
        "corrected.csv": (("eta", "F_GHZ"), solid),
        "uncorrected.csv": (("eta", "F_GHZ"), dashed),
        "mc.csv": (("eta", "F_GHZ", "F_err"), dots),
    }


def fig3b(params: Mapping) -> dict[str, Table]:
    """Success probability and attempt count vs the pump parameter p."""
    q = {**_GHZ_DEFAULTS, **params}
    d = int(q["d"])
    eta = float(q.get("eta", 0.53))
    ps = np.linspace(0.01, float(q.get("p_max", 0.5)), int(q.get("n_p", 50)))
    rows_p = [(float(p), p_ghz(d, float(p), eta)) for p in ps]
    rows_n = [(float(p), expected_attempts(d, float(p), eta)) for p in ps]
    return {
        "p_ghz.csv": (("p", "P_GHZ"), rows_p),
        "attempts.csv": (("p", "N_W"), rows_n),
    }


def si_losses(params: Mapping) -> dict[str, Table]:
    """Fidelity vs success probability for n consecutive single clicks.

    d = 3, both detector kinds, eta_1 in {0.9, 0.5}; p varies along each
    curve (high fidelity, low rate at small p).
    """
    d = int(params.get("d", 3))
    etas = params.get("etas", (0.9, 0.5))
    ns = params.get("ns", (1, 2, 3))
    ps = np.linspace(0.005, float(params.get("p_max", 0.6)),
                     int(params.get("n_p", 80)))
    out: dict[str, Table] = {}
    for eta in etas:
        for kind in DetectorKind:
            tag = "pnrd" if kind is DetectorKind.NUMBER_RESOLVING else "threshold"
            for n in ns:
                rows = []
                for p in ps:
                    F, P = many_success_metrics(
                        d, float(p), float(eta), SuccessPolicy(int(n)), kind
                    )
                    rows.append((float(p), F, P))
                out[f"eta{eta:g}_{tag}_n{n}.csv"] = (("p", "F_W", "P_W"), rows)
    return out


def si_threshold_time(params: Mapping) -> dict[str, Table]:
    """Time-resolved threshold detection with distinguishable emitters.

    d = 3 emitters at omega_0, omega_0 +/- 10 Gamma; fidelity and click
    density vs detection time (1/Gamma units), against the
    time-integrated indistinguishable-emitter threshold value (dashed).
    """
    d = int(params.get("d", 3))
    p = float(params.get("p", 0.3))
    gamma0 = 1.0
    config = EmitterArrayConfig(
        d=d,
        p=p,
        linewidths=(gamma0,) * d,
        frequencies=tuple(
            sorted(10.0 * gamma0 * ((j + 1) // 2) * (-1 if j % 2 else 1)
                   for j in range(d))
        ),
    )
    times = np.linspace(1e-3, float(params.get("t_max", 4.0)),
                        int(params.get("n_t", 161)))
    rows_f, rows_p = [], []
    for t in times:
        F, pdf = threshold_time_resolved(config, float(t))
        rows_f.append((float(t), F))
        rows_p.append((float(t), pdf))
    F_flat, _ = w_metrics_threshold(d, p, 1.0)
    return {
        "fidelity.csv": (("t", "F_W"), rows_f),
        "pdf.csv": (("t", "pdf"), rows_p),
        "indistinguishable.csv": (
            ("t", "F_W"),
            [(float(times[0]), F_flat), (float(times[-1]), F_flat)],
        ),
    }


def _si_keyrate(params: Mapping, gamma: float) -> dict[str, Table]:
    eta1 = float(params.get("eta1", 0.9))
    target = float(params.get("target_F_W", 0.95))
    d_list = params.get("d_list", (2, 3, 4, 5))
    eta2s = np.linspace(0.02, 1.0, int(params.get("n_eta2", 50)))
    template = EmitterArrayConfig.uniform(
        2, 0.1, dephasing_rate=gamma, eta1=eta1
    )
    rows = kr.rate_sweep(template, eta2s, d_list, target)
    out: dict[str, Table] = {}
    cols = ("d", "eta2", "p", "F_W", "F_GHZ", "Qz", "Qx", "K", "RK_over_Rpi")
    for d in d_list:
        d_rows = [
            (r.d, r.eta2, r.p, r.F_W, r.F_GHZ, r.Q_z, r.Q_x, r.K, r.RK_over_Rpi)
            for r in rows
            if r.d == d
        ]
        out[f"rate_d{d}.csv"] = (cols, d_rows)
    return out


def si_keyrate_a(params: Mapping) -> dict[str, Table]:
    """Key rate per pump pulse vs channel transmission, no dephasing."""
    return _si_keyrate(params, float(params.get("gamma", 0.0)))


def si_keyrate_b(params: Mapping) -> dict[str, Table]:
    """Key rate with gamma = 0.01 per round (T2/Tpi = 100)."""
    return _si_keyrate(params, float(params.get("gamma", 0.01)))


FIGURES: dict[str, Callable[[Mapping], dict[str, Table]]] = {
    "fig2a": fig2a,
    "fig2b": fig2b,
    "fig3a": fig3a,
    "fig3b": fig3b,
    "si-losses": si_losses,
    "si-threshold-time": si_threshold_time,
    "si-keyrate-a": si_keyrate_a,
    "si-keyrate-b": si_keyrate_b,
}


def build_figure(name: str, params: Mapping | None = None) -> dict[str, Table]:
    """Compute the data tables of one named figure."""
    if name not in FIGURES:
        raise KeyError(
            f"unknown figure '{name}' (expected one of {sorted(FIGURES)})"
        )
    return FIGURES[name](params or {})
