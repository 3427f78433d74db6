"""Complex spectral transfer function of the resonant absorber.

The amplitude transmission at baseband offset u (rad/ns from the rest
carrier) is

    H(u) = exp(-depth) * exp(-T / (1 + i*(u_a - u)/gamma_a)),

with u_a the absorber line position (``rest_detuning``), T the amplitude
optical thickness and ``depth`` the nonresonant loss exponent.  The
resonant factor only attenuates (|H| <= exp(-depth)) and is transparent far
off resonance.

The causal impulse response of the resonant factor has the closed form

    h(t) = delta(t) + k(t),
    k(t) = -T*gamma_a * exp(-(gamma_a + i*u_a)*t) * phi(T*gamma_a*t),
    phi(x) = J1(2*sqrt(x))/sqrt(x)   (entire, phi(0) = 1),

used by the time-domain oracle; ``impulse_response_quadrature`` recomputes
k(t) by direct adaptive quadrature of H so the two can be cross-checked.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import j1

from .exceptions import GridError, ToleranceError
from .spectrum import ComplexSpectrum, FrequencyGrid
from .units import AbsorberSpec


@dataclass(frozen=True)
class TransferFunction:
    grid: FrequencyGrid
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.grid.n_samples,):
            raise GridError("transfer values must match grid size")


def resonant_exponent(u: np.ndarray, absorber: AbsorberSpec) -> np.ndarray:
    """The complex exponent -T / (1 + i*(u_a - u)/gamma_a)."""
    x = (absorber.rest_detuning - np.asarray(u, dtype=float)) / absorber.line_halfwidth
    return -absorber.amplitude_thickness / (1.0 + 1j * x)


def transfer_function(grid: FrequencyGrid, absorber: AbsorberSpec) -> TransferFunction:
    if grid.spacing > absorber.line_halfwidth / 8.0:
        raise GridError(
            f"frequency spacing {grid.spacing:.3e} rad/ns too coarse: must be "
            f"<= gamma_a/8 = {absorber.line_halfwidth / 8.0:.3e} rad/ns"
        )
    vals = np.exp(-absorber.nonresonant_depth) * np.exp(resonant_exponent(grid.omegas, absorber))
    return TransferFunction(grid, vals)


def absorption_spectrum(tf: TransferFunction) -> np.ndarray:
    """Pointwise |H|^2: the conventional transmission spectrum."""
    return np.abs(tf.values) ** 2


def _phi(x: np.ndarray) -> np.ndarray:
    """J1(2*sqrt(x))/sqrt(x), series-continued through x = 0."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x < 1e-8
    rt = np.sqrt(np.where(small, 1.0, x))
    out = np.where(small, 1.0 - x / 2.0 + x * x / 12.0, j1(2.0 * rt) / rt)
    return out


def impulse_response(t: np.ndarray, absorber: AbsorberSpec) -> np.ndarray:
    """Closed-form scattered part k(t) of the resonant impulse response.

    Does not include the nonresonant prefactor exp(-depth) or the delta
    term; zero for t < 0.
    """
    t = np.asarray(t, dtype=float)
    a = absorber.amplitude_thickness * absorber.line_halfwidth
    tc = np.maximum(t, 0.0)
    k = -a * np.exp(-(absorber.line_halfwidth + 1j * absorber.rest_detuning) * tc) * _phi(a * tc)
    return np.where(t >= 0.0, k, 0.0)


def impulse_response_quadrature(
    t: float, absorber: AbsorberSpec, eps_abs: float = 1e-9
) -> complex:
    """k(t) by adaptive quadrature of the transfer function itself.

    The integrand exp(-a/(g - i s)) - 1 decays only as 1/s, so the first two
    terms of its Laurent-type expansion are transformed analytically and the
    O(1/s^3) remainder is integrated numerically (oscillatory weights).
    Intended for spot-checking ``impulse_response``; cost grows with t.
    """
    if t < 0:
        return 0.0 + 0.0j
    g = absorber.line_halfwidth
    a = absorber.amplitude_thickness * g

    def remainder(s):
        d = g - 1j * s
        return np.exp(-a / d) - 1.0 + a / d - 0.5 * (a / d) ** 2

    if a == 0.0:
        return 0.0 + 0.0j
    # tail bound: |remainder| <= a^3/(6|s|^3), integrated tail a^3/(12 s_max^2)
    s_max = max(30.0 * g, (a**3 / (12.0 * eps_abs)) ** 0.5)
    kw = dict(limit=2000, epsabs=eps_abs / 4.0, epsrel=1e-10)
    re_c, re_err = quad(lambda s: remainder(s).real, 0.0, s_max, weight="cos", wvar=t, **kw)
    im_s, im_err = quad(lambda s: remainder(s).imag, 0.0, s_max, weight="sin", wvar=t, **kw)
    total_err = re_err + im_err + a**3 / (12.0 * s_max**2)
    if total_err > 10.0 * eps_abs:
        raise ToleranceError(
            f"kernel quadrature reached {total_err:.2e}, wanted {eps_abs:.2e}",
            achieved=total_err,
        )
    # conjugate-symmetric integrand: full-line integral is twice the real combination
    reduced = (re_c + im_s) / np.pi
    analytic = -a * np.exp(-g * t) + 0.5 * a**2 * t * np.exp(-g * t)
    return (reduced + analytic) * np.exp(-1j * absorber.rest_detuning * t)
