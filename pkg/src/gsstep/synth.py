"""Synthetic two-frame fringe patterns.

Frames follow ``I_k = A + B cos(phi + delta_k) + eta_k`` with ``delta_1 = 0``
and ``delta_2 = delta``. The three cases differ only in which of the
background ``A`` and the amplitude ``B`` vary across the field:

=====  ========  ========
case   A         B
=====  ========  ========
I      0         1
II     0         b(x)
III    a(x)      b(x)
=====  ========  ========
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .field import ScalarField

DEFAULT_SIZE = 256
DEFAULT_FRINGE_SCALE = 20.0


class Case(str, enum.Enum):
    I = "I"
    II = "II"
    III = "III"


def _check_dims(width: int, height: int) -> None:
    if int(width) < 2 or int(height) < 2:
        raise ValueError(f"field dimensions must be >= 2, got {width}x{height}")


def normalized_coords(width: int, height: int) -> tuple[np.ndarray, np.ndarray]:
    """Pixel-center coordinates mapped onto [-1, 1] along each axis."""
    _check_dims(width, height)
    x1 = np.linspace(-1.0, 1.0, int(width))
    x2 = np.linspace(-1.0, 1.0, int(height))
    return np.meshgrid(x1, x2)


def phase_function(width: int, height: int, fringe_scale: float) -> ScalarField:
    """Closed-fringe test phase: a centered paraboloid plus an off-axis bump.

    ``phi = fringe_scale * (x1^2 + x2^2) + 3 exp(-((x1-0.3)^2 + (x2+0.2)^2) / 0.18)``
    """
    x1, x2 = normalized_coords(width, height)
    bowl = fringe_scale * (x1**2 + x2**2)
    bump = 3.0 * np.exp(-((x1 - 0.3) ** 2 + (x2 + 0.2) ** 2) / 0.18)
    return bowl + bump


def background_function(width: int, height: int) -> ScalarField:
    x1, x2 = normalized_coords(width, height)
    return 0.5 * np.exp(-(x1**2 + x2**2) / 0.8)


def amplitude_function(width: int, height: int) -> ScalarField:
    x1, x2 = normalized_coords(width, height)
    return 0.2 + 0.8 * np.exp(-(x1**2 + x2**2) / 1.2)


def noise_generator(stream_seed) -> np.random.Generator:
    """PCG64 stream keyed by an int or a tuple of ints (e.g. ``(seed, k)``)."""
    key = stream_seed if isinstance(stream_seed, (tuple, list)) else (stream_seed,)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(k) for k in key])))


def gaussian_noise(width: int, height: int, sigma: float, stream_seed) -> ScalarField:
    """I.i.d. ``N(0, sigma^2)`` field; deterministic in ``stream_seed``.

    Normal variates come from numpy's ziggurat transform of the PCG64
    uniform stream.
    """
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    _check_dims(width, height)
    if sigma == 0:
        return np.zeros((int(height), int(width)))
    rng = noise_generator(stream_seed)
    return sigma * rng.standard_normal((int(height), int(width)))


@dataclass(frozen=True)
class SynthSpec:
    case: Case
    delta: float
    sigma: float = 0.0
    seed: int = 0
    width: int = DEFAULT_SIZE
    height: int = DEFAULT_SIZE
    fringe_scale: float = DEFAULT_FRINGE_SCALE

    def __post_init__(self):
        object.__setattr__(self, "case", Case(self.case))
        _check_dims(self.width, self.height)
        if not 0.0 < self.delta < np.pi:
            raise ValueError(f"delta must lie in (0, pi), got {self.delta}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if self.fringe_scale <= 0:
            raise ValueError(f"fringe_scale must be > 0, got {self.fringe_scale}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


@dataclass(frozen=True)
class Truth:
    phi: ScalarField
    a: ScalarField
    b: ScalarField
    delta: float


@dataclass(frozen=True)
class FringePair:
    i1: ScalarField
    i2: ScalarField
    truth: Optional[Truth] = None

    def __post_init__(self):
        if self.i1.shape != self.i2.shape:
            raise ValueError(f"frame dimensions differ: {self.i1.shape} vs {self.i2.shape}")


def case_fields(case: Case, width: int, height: int) -> tuple[ScalarField, ScalarField]:
    """Background and amplitude fields selected by ``case``."""
    case = Case(case)
    shape = (int(height), int(width))
    a = background_function(width, height) if case is Case.III else np.zeros(shape)
    b = np.ones(shape) if case is Case.I else amplitude_function(width, height)
    return a, b


def synthesize(spec: SynthSpec) -> FringePair:
    phi = phase_function(spec.width, spec.height, spec.fringe_scale)
    a, b = case_fields(spec.case, spec.width, spec.height)
    frames = []
    for k, step in ((1, 0.0), (2, spec.delta)):
        eta = gaussian_noise(spec.width, spec.height, spec.sigma, (spec.seed, k))
        frames.append(a + b * np.cos(phi + step) + eta)
    return FringePair(frames[0], frames[1], Truth(phi=phi, a=a, b=b, delta=spec.delta))
