"""Gram-Schmidt quadrature and phase-step estimation for two fringe frames.

Given background-free frames ``u1 = b cos(phi)`` and ``u2 = b cos(phi + delta)``,
Gram-Schmidt produces a quadrature pair from which both the wrapped phase and
the unknown step ``delta`` follow.

Two step estimators are provided:

``tan``
    Robust expectation of the per-pixel ratio
    ``m(x) = u1t(x) * u2h(x) / (u1(x) * u2t(x))``, which estimates
    ``sin(delta)`` without needing the wrapped phase. Tolerates a spatially
    varying amplitude ``b(x)``.
``sin``
    Closed-form least-squares fit of ``u2h ~ -sin(delta) * sin(phi_hat)``,
    valid when the amplitude has been normalized to ``b = 1``.

``sin(delta)`` cannot tell ``delta`` from ``pi - delta``; both estimators
report ``|arcsin(.)|`` in ``[0, pi/2]`` and keep the sign of the argument.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .field import ScalarField, as_field, inner_product, median, norm, percentile

# relative size of the orthogonal residual below which u2 counts as parallel to u1
DEGENERACY_TOL = 1e-10
MASK_PERCENTILE = 10.0
MIN_MASK_FRACTION = 0.01


class DegeneratePairError(ValueError):
    """Blank first frame, or second frame parallel to the first."""


class MaskStarvationError(ValueError):
    """Too few pixels survive the delta-map denominator mask."""


class Estimator(str, enum.Enum):
    TAN = "tan"
    SIN = "sin"


class Aggregator(str, enum.Enum):
    MEAN = "mean"
    MEDIAN = "median"


@dataclass(frozen=True)
class GSDecomposition:
    u1_tilde: ScalarField
    u2_hat: ScalarField
    u2_tilde: ScalarField
    proj_coeff: float


@dataclass(frozen=True)
class StepEstimate:
    """Phase-step estimate plus diagnostics.

    ``argument`` is the raw arcsin argument before clamping; when it falls
    outside [-1, 1] there is no real solution and ``saturated`` is true.
    """

    delta_hat: float
    sign: int
    estimator: Estimator
    kappa_ratio: float
    mask_fraction: float
    argument: float

    @property
    def saturated(self) -> bool:
        return abs(self.argument) > 1.0

    @property
    def delta_hat_deg(self) -> float:
        return float(np.degrees(self.delta_hat))


def _pair(u1, u2) -> tuple[ScalarField, ScalarField]:
    u1 = as_field(u1, "u1")
    u2 = as_field(u2, "u2")
    if u1.shape != u2.shape:
        raise ValueError(f"dimension mismatch: {u1.shape} vs {u2.shape}")
    return u1, u2


def gs_decompose(u1, u2) -> GSDecomposition:
    """Normalize ``u1``, orthogonalize ``u2`` against it, normalize the residual."""
    u1, u2 = _pair(u1, u2)
    n1 = norm(u1)
    if n1 == 0.0:
        raise DegeneratePairError("degenerate pair: first frame has zero norm")
    u1_tilde = u1 / n1
    proj = inner_product(u2, u1_tilde)
    u2_hat = u2 - proj * u1_tilde
    n2 = norm(u2_hat)
    if n2 <= DEGENERACY_TOL * max(norm(u2), np.finfo(float).tiny):
        raise DegeneratePairError("degenerate pair: frames are parallel (step is 0 mod pi)")
    return GSDecomposition(u1_tilde=u1_tilde, u2_hat=u2_hat, u2_tilde=u2_hat / n2, proj_coeff=proj)


def wrapped_phase(d: GSDecomposition) -> ScalarField:
    """``atan2(-u2_tilde, u1_tilde)`` in (-pi, pi]; 0 where both vanish."""
    phi = np.arctan2(-d.u2_tilde, d.u1_tilde)
    # atan2(-0.0, x<0) gives -pi; fold onto the half-open range
    phi[phi <= -np.pi] = np.pi
    phi[undefined_phase_mask(d)] = 0.0
    return phi


def undefined_phase_mask(d: GSDecomposition) -> np.ndarray:
    """Pixels where both quadrature components vanish and the phase is undefined."""
    return (d.u1_tilde == 0.0) & (d.u2_tilde == 0.0)


def demodulate(u1, u2) -> ScalarField:
    return wrapped_phase(gs_decompose(u1, u2))


def compute_kappa_ratio(u1, d: GSDecomposition) -> float:
    """Magnitude of the cross-term that Gram-Schmidt quadrature neglects.

    Estimates ``|<b cos phi, sin phi>| / <b cos phi, cos phi>`` by projecting
    ``u1`` onto unit-amplitude quadrature built from the recovered phase.
    (Projections onto ``u2_hat`` itself are identically zero, so they cannot
    serve as the diagnostic.) Small values mean many fringes and a reliable
    quadrature.
    """
    u1 = as_field(u1, "u1")
    if norm(u1) == 0.0:
        raise DegeneratePairError("degenerate pair: first frame has zero norm")
    phi_hat = wrapped_phase(d)
    den = inner_product(u1, np.cos(phi_hat))
    if den == 0.0:
        raise DegeneratePairError("degenerate pair: recovered phase has no cosine component")
    return abs(inner_product(u1, np.sin(phi_hat))) / abs(den)


def delta_map(u1, d: GSDecomposition) -> tuple[ScalarField, np.ndarray]:
    """Per-pixel ``sin(delta)`` map and the boolean mask of excluded pixels.

    Pixels whose denominator ``|u1 * u2_tilde|`` is zero or below its 10th
    percentile are excluded (set to 0 in the returned map).
    """
    u1 = as_field(u1, "u1")
    den = u1 * d.u2_tilde
    mag = np.abs(den)
    threshold = percentile(mag, MASK_PERCENTILE)
    excluded = (mag < threshold) | (mag == 0.0)
    kept = ~excluded
    if kept.sum() < MIN_MASK_FRACTION * mag.size:
        raise MaskStarvationError(
            f"mask starvation: only {int(kept.sum())} of {mag.size} pixels usable"
        )
    m = np.zeros_like(u1)
    m[kept] = d.u1_tilde[kept] * d.u2_hat[kept] / den[kept]
    return m, excluded


def _fold(argument: float) -> tuple[float, int]:
    clamped = min(1.0, max(-1.0, argument))
    sign = -1 if clamped < 0 else 1
    return abs(float(np.arcsin(clamped))), sign


def estimate_step_tan(u1, u2, aggregator: Aggregator | str = Aggregator.MEDIAN) -> StepEstimate:
    """Step from the robust expectation of the delta-map."""
    aggregator = Aggregator(aggregator)
    u1, u2 = _pair(u1, u2)
    d = gs_decompose(u1, u2)
    m, excluded = delta_map(u1, d)
    values = m[~excluded]
    if aggregator is Aggregator.MEDIAN:
        argument = median(values)
    else:
        argument = float(np.mean(values))
    delta_hat, sign = _fold(argument)
    return StepEstimate(
        delta_hat=delta_hat,
        sign=sign,
        estimator=Estimator.TAN,
        kappa_ratio=compute_kappa_ratio(u1, d),
        mask_fraction=float(values.size / m.size),
        argument=argument,
    )


def estimate_step_sin(u1, u2) -> StepEstimate:
    """Closed-form least-squares step for unit-amplitude frames."""
    u1, u2 = _pair(u1, u2)
    d = gs_decompose(u1, u2)
    s = np.sin(wrapped_phase(d))
    ss = inner_product(s, s)
    if ss == 0.0:
        raise DegeneratePairError("degenerate pair: recovered phase has no sine component")
    argument = -inner_product(d.u2_hat, s) / ss
    delta_hat, sign = _fold(argument)
    return StepEstimate(
        delta_hat=delta_hat,
        sign=sign,
        estimator=Estimator.SIN,
        kappa_ratio=compute_kappa_ratio(u1, d),
        mask_fraction=1.0,
        argument=argument,
    )


def estimate_step(u1, u2, estimator: Estimator | str = Estimator.TAN,
                  aggregator: Aggregator | str = Aggregator.MEDIAN) -> StepEstimate:
    if Estimator(estimator) is Estimator.TAN:
        return estimate_step_tan(u1, u2, aggregator)
    return estimate_step_sin(u1, u2)
