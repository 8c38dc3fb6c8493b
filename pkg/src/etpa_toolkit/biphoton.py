"""SPDC entangled-photon source model.

Covers energy bookkeeping of the down-converted pair, entanglement time from
the biphoton bandwidth, pair rate from pump power, the entangled area, and
the overlap volume of two crossing beams.

The linear-in-flux ETPA rate assumes strongly bunched pairs (g2(0) >> 1);
g2 itself is not modelled. The pump linewidth is carried as metadata only:
the sum frequency of a pair inherits it, independent of the (broad) pair
bandwidth that sets the entanglement time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError
from .quantities import (
    AREA, CONSTANTS, FREQUENCY, POWER, WAVELENGTH,
    Quantity, photon_frequency,
)

TYPE_I = "I"
TYPE_II = "II"
COLLINEAR = "collinear"
NON_COLLINEAR = "non-collinear"

POLARIZATION = {TYPE_I: "parallel", TYPE_II: "perpendicular"}


@dataclass(frozen=True)
class PumpLaser:
    wavelength: Quantity
    power: Quantity
    linewidth: Quantity = Quantity(0.0, "Hz")

    def __post_init__(self):
        if self.wavelength.dimension != WAVELENGTH or self.wavelength.magnitude <= 0:
            raise DomainError("pump wavelength must be a positive wavelength")
        if self.power.dimension != POWER:
            raise DomainError("pump power must have dimension power")
        if self.linewidth.dimension != FREQUENCY or self.linewidth.magnitude < 0:
            raise DomainError("pump linewidth must be a non-negative frequency")

    @property
    def frequency(self):
        return photon_frequency(self.wavelength)


@dataclass(frozen=True)
class SPDCConfig:
    """Down-conversion setup.

    ``crossing_angle`` is required (radians) for the non-collinear geometry
    and must be ``None`` for collinear. ``entangled_area`` overrides the
    circular-beam area computed from ``beam_diameter``.
    """

    bandwidth: Quantity
    beam_diameter: Quantity | None = None
    spdc_type: str = TYPE_I
    geometry: str = COLLINEAR
    crossing_angle: float | None = None
    conversion_efficiency: float = 0.0
    time_bandwidth_factor: float = 1.0
    entangled_area: Quantity | None = None

    def __post_init__(self):
        if self.spdc_type not in POLARIZATION:
            raise DomainError(f"spdc_type must be 'I' or 'II', got {self.spdc_type!r}")
        if self.geometry == NON_COLLINEAR:
            if self.crossing_angle is None or not 0 < self.crossing_angle <= math.pi / 2:
                raise DomainError("non-collinear crossing angle must be in (0, pi/2]")
        elif self.geometry == COLLINEAR:
            if self.crossing_angle is not None:
                raise DomainError("collinear geometry takes no crossing angle")
        else:
            raise DomainError(f"unknown geometry {self.geometry!r}")
        if self.bandwidth.dimension != FREQUENCY or not self.bandwidth.magnitude > 0:
            raise DomainError("biphoton bandwidth must be a positive frequency")
        if not 0 <= self.conversion_efficiency <= 1:
            raise DomainError("conversion efficiency must lie in [0, 1]")
        if not self.time_bandwidth_factor > 0:
            raise DomainError("time-bandwidth factor must be > 0")
        if self.beam_diameter is None and self.entangled_area is None:
            raise DomainError("need a beam diameter or an explicit entangled area")
        if self.beam_diameter is not None and (
                self.beam_diameter.dimension != WAVELENGTH or not self.beam_diameter.magnitude > 0):
            raise DomainError("beam diameter must be a positive length")
        if self.entangled_area is not None and (
                self.entangled_area.dimension != AREA or not self.entangled_area.magnitude > 0):
            raise DomainError("entangled area must be a positive area")

    @property
    def polarization(self):
        return POLARIZATION[self.spdc_type]


@dataclass(frozen=True)
class BiphotonField:
    degenerate_wavelength: Quantity
    entanglement_time: Quantity
    entangled_area: Quantity
    pair_rate: Quantity
    pair_flux: Quantity
    polarization: str
    sum_frequency_linewidth: Quantity
    crossing_volume: Quantity | None = None


def entanglement_time(bandwidth, kappa=1.0):
    """``tau_e = kappa / bandwidth`` (kappa=1 is a bare reciprocal)."""
    if bandwidth.dimension != FREQUENCY:
        raise DomainError("bandwidth must be a frequency")
    if not bandwidth.si > 0:
        raise DomainError(f"bandwidth must be > 0, got {bandwidth}")
    if not kappa > 0:
        raise DomainError("kappa must be > 0")
    return Quantity(kappa / bandwidth.si, "s")


def pair_energies(pump_frequency, detuning):
    """Signal/idler frequencies ``f_p/2 -+ detuning/2``.

    ``f2`` is formed as ``f_p - f1`` so the pair sums to the pump frequency
    to within one ulp.
    """
    fp = pump_frequency.si
    d = detuning.si
    if abs(d) >= fp:
        raise DomainError("|detuning| must be below the pump frequency (negative photon frequency)")
    f1 = fp / 2 - d / 2
    f2 = fp - f1
    return Quantity(f1, "Hz"), Quantity(f2, "Hz")


def pair_rate(pump, cfg):
    """Pairs per second, ``eta * P / (h f_p)``."""
    if not pump.power.si > 0:
        raise DomainError("pump power must be > 0")
    photons = pump.power.si * pump.wavelength.si / CONSTANTS.hc
    return Quantity(cfg.conversion_efficiency * photons, "s-1")


def entangled_area(cfg):
    if cfg.entangled_area is not None:
        return cfg.entangled_area
    d = cfg.beam_diameter.si
    return Quantity(math.pi * d * d / 4, "m2")


def crossing_volume(diameter, angle):
    """Intersection volume of two equal circular cylinders crossing at ``angle``.

    ``V = 2 d^3 / (3 sin(angle))``; at 90 degrees this is the Steinmetz
    solid ``16 r^3 / 3``.
    """
    if diameter.dimension != WAVELENGTH or not diameter.magnitude > 0:
        raise DomainError("diameter must be a positive length")
    if angle == 0:
        raise DomainError("collinear beams have unbounded overlap")
    if not 0 < angle <= math.pi / 2:
        raise DomainError("crossing angle must lie in (0, pi/2]")
    d = diameter.si
    return Quantity(2 * d**3 / (3 * math.sin(angle)), "m3")


def biphoton_field(pump, cfg):
    area = entangled_area(cfg)
    rate = pair_rate(pump, cfg) if pump.power.si > 0 else Quantity(0.0, "s-1")
    vol = None
    if cfg.geometry == NON_COLLINEAR and cfg.beam_diameter is not None:
        vol = crossing_volume(cfg.beam_diameter, cfg.crossing_angle)
    return BiphotonField(
        degenerate_wavelength=Quantity(2 * pump.wavelength.magnitude, pump.wavelength.unit),
        entanglement_time=entanglement_time(cfg.bandwidth, cfg.time_bandwidth_factor),
        entangled_area=area,
        pair_rate=rate,
        pair_flux=Quantity(rate.si / area.si, "m-2 s-1"),
        polarization=cfg.polarization,
        sum_frequency_linewidth=pump.linewidth,
        crossing_volume=vol,
    )

