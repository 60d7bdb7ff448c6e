"""Special functions, quadrature, and deterministic random streams.

Everything downstream of this module funnels its numerics through the three
entry points here: the complex complementary error function (which appears in
the closed-form time-resolved matrix elements), adaptive 1-D quadrature over
finite or semi-infinite ranges (used to verify every closed-form time
integral), and seeded random substreams for the Monte-Carlo trajectory
simulator.

All angular frequencies elsewhere in the package are rad/s; conversion from
Hz happens once, at the configuration boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate
from scipy.special import wofz

__all__ = [
    "QuadratureSpec",
    "QuadratureError",
    "ErfcOverflowError",
    "erfc_complex",
    "erfc_complex_scaled",
    "erfcx_complex",
    "integrate_1d",
    "rng_stream",
]

# Largest exponent for which exp() stays inside double range with headroom.
_EXP_MAX = 700.0


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for adaptive quadrature.

    Defaults sit two digits below the tightest tolerance any consumer
    asserts, so quadrature error never dominates a comparison.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 2000

    def __post_init__(self) -> None:
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance.

    Carries the best available estimate and the achieved error bound so the
    caller can decide whether the partial result is still usable.
    """

    def __init__(self, message: str, best_estimate: complex, achieved_error: float):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.achieved_error = achieved_error


class ErfcOverflowError(OverflowError):
    """erfc(z) exceeds double range; the scaled value is attached.

    The true value is ``mantissa * exp(exponent)``.
    """

    def __init__(self, z: complex, mantissa: complex, exponent: float):
        super().__init__(
            f"erfc({z}) overflows double precision; "
            f"use erfc_complex_scaled (value = {mantissa} * exp({exponent}))"
        )
        self.mantissa = mantissa
        self.exponent = exponent


def erfcx_complex(z: complex) -> complex:
    """Scaled complementary error function erfcx(z) = exp(z^2) erfc(z).

    Valid for Re z >= 0 without overflow; evaluated through the Faddeeva
    function, erfcx(z) = w(iz).
    """
    return complex(wofz(1j * complex(z)))


def _erfc_scaled_right(z: complex) -> tuple[complex, float]:
    """(mantissa, exponent) of erfc(z) for Re z >= 0.

    erfc(z) = w(iz) exp(-z^2); the exponent of the modulus is Re(-z^2),
    which can be large and positive when |Im z| > |Re z|.
    """
    x, y = z.real, z.imag
    exponent = y * y - x * x  # Re(-z^2)
    phase = complex(math.cos(2.0 * x * y), -math.sin(2.0 * x * y))  # exp(-2ixy)
    return complex(wofz(1j * z)) * phase, exponent


def erfc_complex_scaled(z: complex) -> tuple[complex, float]:
    """erfc(z) as (mantissa, exponent) with erfc(z) = mantissa * exp(exponent).

    Never overflows for |z| < 1e6; the exponent absorbs the exp(|Im z|^2)
    growth away from the real axis.
    """
    z = complex(z)
    if z.real >= 0.0:
        return _erfc_scaled_right(z)
    m, e = _erfc_scaled_right(-z)
    # erfc(z) = 2 - erfc(-z); fold the constant into whichever scale wins.
    if e <= 0.0:
        return 2.0 - m * math.exp(e), 0.0
    if e >= _EXP_MAX:
        # The reflected term dwarfs the constant beyond double range anyway.
        return -m, e
    return 2.0 * math.exp(-e) - m, e


def erfc_complex(z: complex) -> complex:
    """Complementary error function of a complex argument.

    Uses the Faddeeva function w(z) (scipy's ``wofz``) with the reflection
    erfc(z) = 2 - erfc(-z) for Re z < 0. Relative error is at the 1e-13
    level across the strip |Im z| <= 50 wherever the result is
    representable; for arguments whose result exceeds double range an
    :class:`ErfcOverflowError` carrying the scaled value is raised instead
    of returning Inf.
    """
    if abs(z) >= 1e6:
        raise ValueError(f"|z| = {abs(z):.3g} outside supported range |z| < 1e6")
    m, e = erfc_complex_scaled(z)
    if e > _EXP_MAX:
        raise ErfcOverflowError(complex(z), m, e)
    value = m * math.exp(e)
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise ErfcOverflowError(complex(z), m, e)
    # Real arguments must come back exactly real (wofz(ix) is real up to
    # rounding); clamp the dust so downstream Hermiticity checks stay clean.
    if complex(z).imag == 0.0 and abs(value.imag) < 1e-14:
        value = complex(value.real, 0.0)
    return value


def integrate_1d(
    f: Callable[[float], complex],
    a: float,
    b: float,
    spec: QuadratureSpec | None = None,
    breakpoints: Sequence[float] = (),
) -> complex:
    """Adaptive quadrature of a complex-valued integrand over [a, b].

    Either endpoint may be infinite. ``breakpoints`` lists interior points
    where the integrand is non-smooth (the step of a Heaviside cutoff); the
    interval is split there rather than smoothed over.

    Raises :class:`QuadratureError` carrying the best estimate when the
    subdivision budget is exhausted before reaching tolerance.
    """
    if spec is None:
        spec = QuadratureSpec()

    cuts = sorted(t for t in breakpoints if a < t < b)
    edges = [a, *cuts, b]

    total = 0.0 + 0.0j
    err_total = 0.0
    failures: list[str] = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        for part, pick in (("re", lambda t: f(t).real), ("im", lambda t: f(t).imag)):
            val, err, ok, msg = _quad_part(pick, lo, hi, spec)
            total += val if part == "re" else 1j * val
            err_total += err
            if not ok:
                failures.append(f"[{lo}, {hi}] ({part}): {msg}")

    if failures:
        raise QuadratureError(
            "quadrature tolerance not reached: " + "; ".join(failures),
            total,
            err_total,
        )
    return total


def _quad_part(
    g: Callable[[float], float], a: float, b: float, spec: QuadratureSpec
) -> tuple[float, float, bool, str]:
    out = integrate.quad(
        g,
        a,
        b,
        epsabs=spec.abs_tol,
        epsrel=spec.rel_tol,
        limit=spec.max_subdivisions,
        full_output=1,
    )
    val, err = out[0], out[1]
    if len(out) >= 4:  # warning message present
        return val, err, False, str(out[3]).splitlines()[0]
    tol = max(spec.abs_tol, spec.rel_tol * abs(val))
    return val, err, err <= tol * 10.0, ""


def rng_stream(master_seed: int, stream_id: int) -> np.random.Generator:
    """Independent, reproducible random substream.

    Streams are derived from a :class:`numpy.random.SeedSequence` keyed on
    the (master_seed, stream_id) pair, so the same pair yields the same
    sequence on every platform and distinct ids give statistically
    independent generators. Each stream must be consumed by a single owner.
    """
    if master_seed < 0 or stream_id < 0:
        raise ValueError("master_seed and stream_id must be non-negative")
    return np.random.default_rng(np.random.SeedSequence((master_seed, stream_id)))
