"""Physical constants, unit helpers, and the input parameter records.

Internal unit system (used by every module unless stated otherwise):
angular frequencies in rad/ns, times in ns, lengths in angstrom,
velocities in mm/s.  These keep typical magnitudes near unity for the
regime of interest (MHz linewidths, ~100 ns lifetimes, sub-angstrom
vibration amplitudes).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

from .exceptions import DomainError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA values (exact in the 2019 SI).  Not configurable."""

    c: float = 299792458.0            # speed of light, m/s
    h: float = 6.62607015e-34         # Planck constant, J s
    hbar: float = 6.62607015e-34 / TWO_PI  # reduced Planck constant, J s
    e_charge: float = 1.602176634e-19  # elementary charge, C (keV -> J)

    @property
    def hc_kev_angstrom(self) -> float:
        """h*c expressed in keV*angstrom (about 12.3984)."""
        return self.h * self.c / (self.e_charge * 1e3) * 1e10


CONSTANTS = PhysicalConstants()

MHZ_TO_RAD_NS = TWO_PI * 1e-3   # nu [MHz] -> omega [rad/ns]
RAD_NS_TO_MHZ = 1.0 / MHZ_TO_RAD_NS


def photon_wavelength(energy_kev: float) -> float:
    """Wavelength (angstrom) of a photon of the given energy (keV)."""
    if energy_kev <= 0:
        raise DomainError(f"photon energy must be positive, got {energy_kev} keV")
    return CONSTANTS.hc_kev_angstrom / energy_kev


def modulation_index(amplitude_angstrom: float, wavelength_angstrom: float) -> float:
    """Peak phase excursion p = 2*pi*R/lambda of sinusoidal motion."""
    if wavelength_angstrom <= 0:
        raise DomainError(f"wavelength must be positive, got {wavelength_angstrom} A")
    if amplitude_angstrom < 0:
        raise DomainError(f"vibration amplitude must be >= 0, got {amplitude_angstrom} A")
    return TWO_PI * amplitude_angstrom / wavelength_angstrom


def angular_carrier_frequency(energy_kev: float) -> float:
    """Carrier angular frequency E/hbar in rad/ns."""
    if energy_kev <= 0:
        raise DomainError(f"photon energy must be positive, got {energy_kev} keV")
    return energy_kev * 1e3 * CONSTANTS.e_charge / CONSTANTS.hbar * 1e-9


def doppler_shift(energy_kev: float, velocity_mm_s: float) -> float:
    """First-order Doppler shift (rad/ns) of the carrier for a source moving
    at ``velocity_mm_s`` (positive = toward the absorber)."""
    beta = velocity_mm_s * 1e-3 / CONSTANTS.c
    if abs(beta) >= 1e-6:
        raise DomainError(
            f"|V|/c = {abs(beta):.3e} exceeds the nonrelativistic bound 1e-6"
        )
    return angular_carrier_frequency(energy_kev) * beta


def resonance_tuning_velocity(n: int, omega_rad_ns: float, energy_kev: float) -> float:
    """Constant source velocity (mm/s) that Doppler-tunes sideband ``n`` onto
    an absorber line that coincides with the source line at rest.

    Sideband ``n`` sits at a carrier offset of ``-n*Omega`` before the shift,
    so a velocity of ``n*Omega*c/omega_r`` moves it onto the line.
    """
    if omega_rad_ns <= 0:
        raise DomainError(f"vibration frequency must be positive, got {omega_rad_ns}")
    omega_r = angular_carrier_frequency(energy_kev)
    return n * omega_rad_ns / omega_r * CONSTANTS.c * 1e3


def validate_thin_absorber(
    thickness_um: float, sound_speed_m_s: float, omega_rad_ns: float
) -> tuple[bool, float]:
    """Check the rigid-motion condition L << 2*pi*V_s/Omega.

    Returns ``(ok, margin)`` where ``margin = L / (2*pi*V_s/Omega)`` and the
    check passes when the margin is below 0.1 (a factor-of-ten reading of
    "much smaller"; the margin is reported so callers can apply their own).
    """
    if thickness_um < 0 or sound_speed_m_s <= 0 or omega_rad_ns <= 0:
        raise DomainError("thickness >= 0 and positive sound speed / frequency required")
    omega_rad_s = omega_rad_ns * 1e9
    acoustic_length_um = TWO_PI * sound_speed_m_s / omega_rad_s * 1e6
    margin = thickness_um / acoustic_length_um
    return margin < 0.1, margin


@dataclass(frozen=True)
class EmitterSpec:
    """Source transition parameters.

    ``velocity_mm_s`` is the constant drive velocity, positive toward the
    absorber.  ``carrier_phase`` is the random phase of the emitted wave;
    it never affects intensities.
    """

    photon_energy_kev: float = 14.4
    lifetime_ns: float = 141.0
    velocity_mm_s: float = 0.0
    carrier_phase: float = 0.0

    def __post_init__(self):
        if self.lifetime_ns <= 0:
            raise DomainError(f"radiative lifetime must be positive, got {self.lifetime_ns} ns")
        if self.photon_energy_kev <= 0:
            raise DomainError(f"photon energy must be positive, got {self.photon_energy_kev} keV")
        # validates the nonrelativistic bound
        doppler_shift(self.photon_energy_kev, self.velocity_mm_s)

    @property
    def decay_halfrate(self) -> float:
        """Field decay rate Gamma_r = 1/(2*T_r) in rad/ns."""
        return 1.0 / (2.0 * self.lifetime_ns)

    @property
    def wavelength_angstrom(self) -> float:
        return photon_wavelength(self.photon_energy_kev)

    @property
    def doppler_rad_ns(self) -> float:
        """Carrier offset produced by the constant drive velocity."""
        return doppler_shift(self.photon_energy_kev, self.velocity_mm_s)


#: half-linewidth (rad/ns) corresponding to the 1.13 MHz FWHM absorber line
DEFAULT_LINE_HALFWIDTH = math.pi * 1.13e-3


@dataclass(frozen=True)
class AbsorberSpec:
    """Single-Lorentzian resonant absorber.

    ``optical_thickness`` follows the amplitude convention: the on-resonance
    transmission amplitude is exp(-T_M), i.e. intensity exp(-2*T_M).  The
    conventional "effective thickness" T_a (intensity attenuating as
    exp(-T_a) with amplitude exp(-T_a/2)) relates as T_a = 2*T_M.  Set
    ``thickness_convention="intensity"`` to have the stored value read as
    T_a instead (amplitude exponent T_a/2).

    Only the product delta_e*L enters the physics of nonresonant loss, so it
    is stored directly as ``nonresonant_depth``; ``thickness_um`` is kept
    solely for the rigid-vibration validity check.
    """

    line_halfwidth: float = DEFAULT_LINE_HALFWIDTH  # gamma_a, rad/ns
    rest_detuning: float = 0.0                      # rad/ns, relative to source at rest
    optical_thickness: float = 5.18                 # T_M, dimensionless
    nonresonant_depth: float = 0.0                  # delta_e * L, dimensionless
    thickness_um: float = 25.0
    sound_speed_m_s: float = 5000.0
    epsilon: float = 1.0                            # background permittivity, fixed
    thickness_convention: str = "amplitude"

    def __post_init__(self):
        if self.line_halfwidth <= 0:
            raise DomainError(f"line halfwidth must be positive, got {self.line_halfwidth}")
        if self.optical_thickness < 0:
            raise DomainError(f"optical thickness must be >= 0, got {self.optical_thickness}")
        if self.nonresonant_depth < 0:
            raise DomainError(f"nonresonant depth must be >= 0, got {self.nonresonant_depth}")
        if self.epsilon != 1.0:
            raise DomainError("background permittivity is fixed to 1")
        if self.thickness_convention not in ("amplitude", "intensity"):
            raise DomainError(
                f"thickness_convention must be 'amplitude' or 'intensity', "
                f"got {self.thickness_convention!r}"
            )

    @property
    def amplitude_thickness(self) -> float:
        """Exponent of the on-resonance amplitude attenuation."""
        if self.thickness_convention == "intensity":
            return 0.5 * self.optical_thickness
        return self.optical_thickness


@dataclass(frozen=True)
class VibrationSpec:
    """Harmonic absorber motion z(t) = R*sin(Omega*t + theta_0)."""

    angular_frequency: float      # Omega, rad/ns
    amplitude_angstrom: float     # R
    phase: float = 0.0            # theta_0, rad

    def __post_init__(self):
        if self.angular_frequency <= 0:
            raise DomainError(
                f"vibration frequency must be positive, got {self.angular_frequency}"
            )
        if self.amplitude_angstrom < 0:
            raise DomainError(
                f"vibration amplitude must be >= 0, got {self.amplitude_angstrom}"
            )

    @property
    def period_ns(self) -> float:
        return TWO_PI / self.angular_frequency

    def modulation_index(self, wavelength_angstrom: float) -> float:
        return modulation_index(self.amplitude_angstrom, wavelength_angstrom)

    @classmethod
    def from_mhz(cls, frequency_mhz: float, amplitude_angstrom: float, phase: float = 0.0):
        return cls(frequency_mhz * MHZ_TO_RAD_NS, amplitude_angstrom, phase)


def warn_if_not_thin(absorber: AbsorberSpec, vib: VibrationSpec) -> float:
    """Emit a warning when the rigid-motion condition fails; return the margin."""
    ok, margin = validate_thin_absorber(
        absorber.thickness_um, absorber.sound_speed_m_s, vib.angular_frequency
    )
    if not ok:
        warnings.warn(
            f"absorber thickness is {margin:.2f} of the acoustic length "
            f"2*pi*V_s/Omega; uniform-vibration model is questionable",
            stacklevel=2,
        )
    return margin
