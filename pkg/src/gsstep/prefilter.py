"""Fringe normalization applied before Gram-Schmidt.

Two backends remove the background and flatten the fringe contrast:

* :func:`isotropic_normalize` divides the high-passed fringe by the envelope
  obtained from its spiral-phase (vortex) quadrature.
* :func:`gabor_filter_bank` keeps, per pixel, the strongest response of an
  oriented multi-frequency Gabor bank and returns its unit-modulus real part.

Both work in the spectral domain with periodic boundaries; the high-passed
fringe is windowed by a raised-cosine border taper before the quadrature or
bank transforms to limit wraparound ringing.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass

import numpy as np

from .field import ScalarField, as_field

Spectrum = np.ndarray

# about two cycles across a 256-pixel field; above the synthetic background band
DEFAULT_CUTOFF = 0.008
TAPER_FRACTION = 0.1
AMPLITUDE_FLOOR = 1e-3
GFB_RESPONSE_FLOOR = 1e-6


class Prefilter(str, enum.Enum):
    NONE = "none"
    ISOTROPIC = "isotropic"
    GFB = "gfb"


@dataclass(frozen=True)
class GfbParams:
    """Gabor bank layout.

    Frequencies are geometrically spaced in cycles/pixel over
    ``[freq_min, freq_max]``; orientations are uniform over [0, pi) since a
    real fringe has a point-symmetric spectrum. ``bandwidth`` is the full
    width at half maximum of each radial response, in octaves.
    """

    n_orientations: int = 8
    n_frequencies: int = 5
    freq_min: float = 0.01
    freq_max: float = 0.1
    bandwidth: float = 1.0

    def __post_init__(self):
        if self.n_orientations < 2:
            raise ValueError("n_orientations must be >= 2")
        if self.n_frequencies < 1:
            raise ValueError("empty Gabor bank: n_frequencies must be >= 1")
        if not 0 < self.freq_min < self.freq_max <= 0.5:
            raise ValueError("need 0 < freq_min < freq_max <= 0.5 (Nyquist)")
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be > 0")

    def frequencies(self) -> np.ndarray:
        if self.n_frequencies == 1:
            return np.array([np.sqrt(self.freq_min * self.freq_max)])
        return np.geomspace(self.freq_min, self.freq_max, self.n_frequencies)

    def orientations(self) -> np.ndarray:
        return np.arange(self.n_orientations) * np.pi / self.n_orientations


def dft2_forward(f) -> Spectrum:
    return np.fft.fft2(as_field(f))


def dft2_inverse(s: Spectrum) -> np.ndarray:
    """Inverse of :func:`dft2_forward`; returns a complex field."""
    return np.fft.ifft2(s)


def spectral_frequencies(shape: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    """Horizontal and vertical frequency grids (cycles/pixel) in FFT order."""
    fy = np.fft.fftfreq(shape[0])
    fx = np.fft.fftfreq(shape[1])
    return np.meshgrid(fx, fy)


def remove_background(i, cutoff: float = DEFAULT_CUTOFF) -> ScalarField:
    """Zero every spectral component with radial frequency below ``cutoff``.

    The mask is binary, so the operation is an exact projection and
    applying it twice changes nothing.
    """
    if not 0 < cutoff < 0.5:
        raise ValueError(f"cutoff must be in (0, 0.5), got {cutoff}")
    spec = dft2_forward(i)
    fx, fy = spectral_frequencies(spec.shape)
    stop = np.hypot(fx, fy) < cutoff
    stop[0, 0] = True
    spec[stop] = 0.0
    return dft2_inverse(spec).real


def _taper_1d(n: int, fraction: float) -> np.ndarray:
    m = max(1, int(round(fraction * n)))
    w = np.ones(n)
    ramp = 0.5 - 0.5 * np.cos(np.pi * (np.arange(m) + 0.5) / m)
    w[:m] = ramp
    w[n - m:] = np.minimum(w[n - m:], ramp[::-1])
    return w


def border_taper(shape: tuple[int, int], fraction: float = TAPER_FRACTION) -> ScalarField:
    """Separable raised-cosine window rising over ``fraction`` of each side."""
    return np.outer(_taper_1d(shape[0], fraction), _taper_1d(shape[1], fraction))


def spiral_quadrature(h) -> np.ndarray:
    """Spiral-phase (vortex) transform: multiply the spectrum by exp(i*theta)."""
    spec = dft2_forward(h)
    fx, fy = spectral_frequencies(spec.shape)
    vortex = np.exp(1j * np.arctan2(fy, fx))
    vortex[0, 0] = 0.0
    return dft2_inverse(vortex * spec)


def _check_not_constant(i: ScalarField) -> None:
    if np.ptp(i) == 0.0:
        raise ValueError("constant input has no fringes to normalize")


def isotropic_normalize(i, cutoff: float = DEFAULT_CUTOFF) -> ScalarField:
    """Background-free, unit-contrast fringe via spiral-phase quadrature."""
    i = as_field(i)
    _check_not_constant(i)
    h = remove_background(i, cutoff) * border_taper(i.shape)
    q = spiral_quadrature(h)
    envelope = np.sqrt(h**2 + np.abs(q) ** 2)
    floor = AMPLITUDE_FLOOR * envelope.max()
    if floor == 0.0:
        raise ValueError("input has no content above the background cutoff")
    return h / np.maximum(envelope, floor)


@functools.lru_cache(maxsize=8)
def _gabor_kernels(shape: tuple[int, int], params: GfbParams) -> np.ndarray:
    fx, fy = spectral_frequencies(shape)
    b = 2.0 ** params.bandwidth
    width = (b - 1.0) / ((b + 1.0) * np.sqrt(2.0 * np.log(2.0)))
    kernels = []
    for f0 in params.frequencies():
        sf = width * f0
        for theta in params.orientations():
            d2 = (fx - f0 * np.cos(theta)) ** 2 + (fy - f0 * np.sin(theta)) ** 2
            kernels.append(np.exp(-d2 / (2.0 * sf * sf)))
    out = np.stack(kernels)
    out.setflags(write=False)
    return out


def _gabor_select(frames, params: GfbParams, cutoff: float) -> list[ScalarField]:
    """Unit-modulus responses of the bank channel chosen per pixel.

    The channel maximizing the summed response magnitude over ``frames`` is
    used for every frame, so all frames see the same filter at a pixel.
    """
    shape = frames[0].shape
    taper = border_taper(shape)
    spectra = [dft2_forward(remove_background(f, cutoff) * taper) for f in frames]
    best = [np.zeros(shape, dtype=complex) for _ in frames]
    best_mag = np.zeros(shape)
    for kernel in _gabor_kernels(shape, params):
        responses = [dft2_inverse(s * kernel) for s in spectra]
        mag = sum(np.abs(g) for g in responses)
        take = mag > best_mag
        for b, g in zip(best, responses):
            b[take] = g[take]
        best_mag[take] = mag[take]
    if best_mag.max() == 0.0:
        raise ValueError("input has no content inside the Gabor bank passband")
    out = []
    for b in best:
        modulus = np.abs(b)
        keep = modulus >= GFB_RESPONSE_FLOOR * modulus.max()
        n = np.zeros(shape)
        n[keep] = b[keep].real / modulus[keep]
        out.append(n)
    return out


def gabor_filter_bank(i, params: GfbParams = GfbParams(), cutoff: float = DEFAULT_CUTOFF) -> ScalarField:
    """Unit-amplitude fringe from the per-pixel strongest Gabor response.

    Pixels whose best response is below ``1e-6`` of the global maximum are
    set to 0.
    """
    i = as_field(i)
    _check_not_constant(i)
    return _gabor_select([i], params, cutoff)[0]


def gabor_filter_bank_pair(i1, i2, params: GfbParams = GfbParams(),
                           cutoff: float = DEFAULT_CUTOFF) -> tuple[ScalarField, ScalarField]:
    """Gabor-normalize two frames with a shared per-pixel channel choice.

    Selecting channels independently lets the frames pick filters with
    different phase responses at the same pixel (a curved fringe shifts the
    response phase by an amount that depends on the filter width), which
    corrupts their phase difference. A shared choice keeps it intact.
    """
    i1 = as_field(i1, "i1")
    i2 = as_field(i2, "i2")
    if i1.shape != i2.shape:
        raise ValueError(f"dimension mismatch: {i1.shape} vs {i2.shape}")
    _check_not_constant(i1)
    _check_not_constant(i2)
    n1, n2 = _gabor_select([i1, i2], params, cutoff)
    return n1, n2


def apply_prefilter(name: Prefilter | str, i) -> ScalarField:
    """Pre-filter a single frame."""
    name = Prefilter(name)
    if name is Prefilter.ISOTROPIC:
        return isotropic_normalize(i)
    if name is Prefilter.GFB:
        return gabor_filter_bank(i)
    return as_field(i)


def prefilter_pair(name: Prefilter | str, i1, i2) -> tuple[ScalarField, ScalarField]:
    """Pre-filter both frames of a pair (jointly, for the Gabor bank)."""
    name = Prefilter(name)
    if name is Prefilter.GFB:
        return gabor_filter_bank_pair(i1, i2)
    return apply_prefilter(name, i1), apply_prefilter(name, i2)
