"""Photon fluxes and classical / entangled two-photon absorption rates.

Rate law per atom: ``R = sigma_e * phi + sigma_c * phi**2``. The classical
cross-section ``sigma_c`` has dimension L^4 T, the entangled one ``sigma_e``
has L^2, and ``phi`` is a photon flux (L^-2 T^-1). Formulas that multiply a
cross-section by a flux refuse to mix cgs and SI tags; see
:func:`mixed_unit_reproduction` for what such mixing produces.

Beam profile is top-hat over ``pi d^2 / 4`` and pulses are rectangular.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .biphoton import BiphotonField
from .errors import DimensionError, DomainError, UnitSystemError
from .quantities import (
    AREA, CGS, CONSTANTS, ENERGY, FREQUENCY, PHOTON_FLUX, POWER, SI, TIME,
    WAVELENGTH, XS_CLASSICAL, XS_ENTANGLED, Quantity,
)

_FLUX_UNIT = {SI: "m-2 s-1", CGS: "cm-2 s-1"}
_XS_E_UNIT = {SI: "m2", CGS: "cm2"}
_AREA_UNIT = {SI: "m2", CGS: "cm2"}


def _expect(q, dimension, name):
    if not isinstance(q, Quantity):
        raise TypeError(f"{name} must be a Quantity")
    if q.dimension != dimension:
        raise DimensionError(q.dimension, dimension)


def _positive(q, name):
    if not q.magnitude > 0:
        raise DomainError(f"{name} must be > 0, got {q}")


def _same_system(*named):
    systems = {q.system for _, q in named}
    if len(systems) > 1:
        desc = ", ".join(f"{n} in {q.unit}" for n, q in named)
        raise UnitSystemError(f"mixed cgs/SI units: {desc}; convert to one system first")
    return systems.pop()


@dataclass(frozen=True)
class CWLaser:
    average_power: Quantity
    wavelength: Quantity

    def __post_init__(self):
        _expect(self.average_power, POWER, "average_power")
        _expect(self.wavelength, WAVELENGTH, "wavelength")
        _positive(self.average_power, "average power")
        _positive(self.wavelength, "wavelength")

    @property
    def peak_power(self):
        return self.average_power

    @property
    def duty(self):
        return 1.0


@dataclass(frozen=True)
class PulsedLaser:
    pulse_energy: Quantity
    pulse_width: Quantity
    rep_rate: Quantity
    wavelength: Quantity

    def __post_init__(self):
        _expect(self.pulse_energy, ENERGY, "pulse_energy")
        _expect(self.pulse_width, TIME, "pulse_width")
        _expect(self.rep_rate, FREQUENCY, "rep_rate")
        _expect(self.wavelength, WAVELENGTH, "wavelength")
        for name in ("pulse_energy", "pulse_width", "rep_rate", "wavelength"):
            _positive(getattr(self, name), name.replace("_", " "))
        if self.duty > 1:
            raise DomainError(f"duty cycle {self.duty:g} exceeds 1")

    @property
    def duty(self):
        return self.pulse_width.si * self.rep_rate.si

    @property
    def average_power(self):
        return Quantity(self.pulse_energy.si * self.rep_rate.si, "W")

    @property
    def peak_power(self):
        return Quantity(self.pulse_energy.si / self.pulse_width.si, "W")


@dataclass(frozen=True)
class BeamGeometry:
    spot_diameter: Quantity

    def __post_init__(self):
        _expect(self.spot_diameter, WAVELENGTH, "spot_diameter")
        _positive(self.spot_diameter, "spot diameter")

    @property
    def area(self):
        d = self.spot_diameter.si
        return Quantity(math.pi * d * d / 4, "m2")


@dataclass(frozen=True)
class TargetSpecies:
    name: str
    sigma_c: Quantity

    def __post_init__(self):
        _expect(self.sigma_c, XS_CLASSICAL, "sigma_c")
        _positive(self.sigma_c, "sigma_c")


@dataclass(frozen=True)
class Flux:
    average: Quantity
    peak: Quantity


def photon_flux(src, geom):
    """Average and peak photon flux ``P lambda / (h c A)`` in m^-2 s^-1."""
    per_watt = src.wavelength.si / (CONSTANTS.hc * geom.area.si)
    avg = src.average_power.si * per_watt
    if isinstance(src, PulsedLaser):
        peak = avg / src.duty
    else:
        peak = avg
    return Flux(Quantity(avg, "m-2 s-1"), Quantity(peak, "m-2 s-1"))


def classical_tpa_rate(sigma_c, flux):
    """Per-atom rate ``sigma_c * phi**2`` (1/s)."""
    _expect(sigma_c, XS_CLASSICAL, "sigma_c")
    _expect(flux, PHOTON_FLUX, "flux")
    _same_system(("sigma_c", sigma_c), ("flux", flux))
    phi = flux.magnitude
    return Quantity(sigma_c.magnitude * phi * phi, "s-1")


def time_averaged_pulsed_rate(sigma_c, src, geom):
    """``sigma_c * phi_peak**2 * duty`` for a rectangular pulse train."""
    _expect(sigma_c, XS_CLASSICAL, "sigma_c")
    if src.duty > 1:
        raise DomainError(f"duty cycle {src.duty:g} exceeds 1")
    peak = photon_flux(src, geom).peak.to(_FLUX_UNIT[sigma_c.system])
    return Quantity(classical_tpa_rate(sigma_c, peak).magnitude * src.duty, "s-1")


def etpa_cross_section(sigma_c, entangled_area, entanglement_time):
    """``sigma_e ~ sigma_c / (A_e tau_e)``, returned in the unit system of ``sigma_c``."""
    _expect(sigma_c, XS_CLASSICAL, "sigma_c")
    _expect(entangled_area, AREA, "entangled_area")
    _expect(entanglement_time, TIME, "entanglement_time")
    for q, name in ((sigma_c, "sigma_c"), (entangled_area, "entangled area"),
                    (entanglement_time, "entanglement time")):
        _positive(q, name)
    system = sigma_c.system
    area = entangled_area.to(_AREA_UNIT[system]).magnitude
    value = sigma_c.magnitude / (area * entanglement_time.si)
    return Quantity(value, _XS_E_UNIT[system], XS_ENTANGLED)


def etpa_rate_terms(sigma_e, sigma_c, flux):
    """Linear and quadratic parts of the rate law, each in 1/s."""
    _expect(sigma_e, XS_ENTANGLED, "sigma_e")
    _expect(sigma_c, XS_CLASSICAL, "sigma_c")
    _expect(flux, PHOTON_FLUX, "flux")
    _same_system(("sigma_e", sigma_e), ("sigma_c", sigma_c), ("flux", flux))
    phi = flux.magnitude
    return (Quantity(sigma_e.magnitude * phi, "s-1"),
            Quantity(sigma_c.magnitude * phi * phi, "s-1"))


def etpa_rate(sigma_e, sigma_c, flux):
    """Per-atom rate ``sigma_e * phi + sigma_c * phi**2`` (1/s)."""
    lin, quad = etpa_rate_terms(sigma_e, sigma_c, flux)
    return Quantity(lin.magnitude + quad.magnitude, "s-1")


def critical_flux(sigma_e, sigma_c):
    """Flux ``sigma_e / sigma_c`` at which both rate-law terms are equal."""
    _expect(sigma_e, XS_ENTANGLED, "sigma_e")
    _expect(sigma_c, XS_CLASSICAL, "sigma_c")
    system = _same_system(("sigma_e", sigma_e), ("sigma_c", sigma_c))
    _positive(sigma_c, "sigma_c")
    return Quantity(sigma_e.magnitude / sigma_c.magnitude, _FLUX_UNIT[system])


def mixed_unit_reproduction(src, geom, sigma_c):
    """Rates obtained by inserting an m^-2 s^-1 flux into a cm^4 s cross-section.

    This is dimensionally wrong by (100 cm/m)^4 but reproduces the orders of
    magnitude sometimes quoted for CW (~1e8/s) and pulsed (~1e17/s) cases.
    Returned for transparency only; nothing else in the toolkit uses it.
    """
    flux = photon_flux(src, geom)
    xs = sigma_c.value_in("cm4 s")
    phi = flux.average.value_in("m-2 s-1")
    if isinstance(src, PulsedLaser):
        mixed = xs * flux.peak.value_in("m-2 s-1") ** 2 * src.duty
    else:
        mixed = xs * phi**2
    consistent = (time_averaged_pulsed_rate(sigma_c, src, geom) if isinstance(src, PulsedLaser)
                  else classical_tpa_rate(sigma_c, flux.average.to(_FLUX_UNIT[sigma_c.system])))
    return {
        "mixed_unit_rate_s-1": mixed,
        "consistent_rate_s-1": consistent.magnitude,
        "discrepancy_factor": mixed / consistent.magnitude,
        "note": ("mixed-unit value uses flux in m^-2 s^-1 with sigma_c in cm^4 s; "
                 "the consistent-unit value is the physical rate"),
    }


@dataclass(frozen=True)
class RateReport:
    laser_mode: str
    wavelength: Quantity
    flux_average: Quantity
    flux_peak: Quantity
    peak_to_average: float
    classical_rate_average: Quantity
    classical_rate_peak: Quantity
    sigma_c: Quantity
    entangled_cross_section: Quantity | None = None
    critical_flux: Quantity | None = None
    entanglement_time: Quantity | None = None
    entangled_area: Quantity | None = None
    pair_flux: Quantity | None = None
    entangled_rate: Quantity | None = None
    notes: tuple = field(default_factory=tuple)

    def quantities(self):
        """``(name, Quantity)`` pairs in a fixed order, skipping absent fields."""
        out = []
        for name in ("wavelength", "flux_average", "flux_peak", "classical_rate_average",
                     "classical_rate_peak", "sigma_c", "entangled_cross_section",
                     "critical_flux", "entanglement_time", "entangled_area", "pair_flux",
                     "entangled_rate"):
            q = getattr(self, name)
            if q is not None:
                out.append((name, q))
        return out

    def to_dict(self):
        d = {"laser_mode": self.laser_mode}
        for name, q in self.quantities():
            d[name] = {"value": q.magnitude, "unit": q.unit}
        d["peak_to_average"] = {"value": self.peak_to_average, "unit": "1"}
        d["notes"] = list(self.notes)
        return d


def build_rate_report(src, geom, species, biphoton=None):
    """Assemble every rate-related quantity for one scenario."""
    system = species.sigma_c.system
    flux = photon_flux(src, geom)
    avg = flux.average.to(_FLUX_UNIT[system])
    peak = flux.peak.to(_FLUX_UNIT[system])
    if isinstance(src, PulsedLaser):
        mode = "pulsed"
        r_avg = time_averaged_pulsed_rate(species.sigma_c, src, geom)
    else:
        mode = "cw"
        r_avg = classical_tpa_rate(species.sigma_c, avg)
    r_peak = classical_tpa_rate(species.sigma_c, peak)
    extra = {}
    notes = []
    if biphoton is not None:
        if not isinstance(biphoton, BiphotonField):
            raise TypeError("biphoton must be a BiphotonField")
        sigma_e = etpa_cross_section(species.sigma_c, biphoton.entangled_area,
                                     biphoton.entanglement_time)
        pair_flux = biphoton.pair_flux.to(_FLUX_UNIT[system])
        extra = dict(
            entangled_cross_section=sigma_e,
            critical_flux=critical_flux(sigma_e, species.sigma_c),
            entanglement_time=biphoton.entanglement_time,
            entangled_area=biphoton.entangled_area,
            pair_flux=pair_flux,
            entangled_rate=etpa_rate(sigma_e, species.sigma_c, pair_flux),
        )
    mixed = mixed_unit_reproduction(src, geom, species.sigma_c)
    notes.append(
        f"classical rate with flux in m^-2 s^-1 inserted into sigma_c in cm^4 s would read "
        f"{mixed['mixed_unit_rate_s-1']:.3g} s-1 (factor {mixed['discrepancy_factor']:.3g} "
        f"too large); the consistent-unit value {mixed['consistent_rate_s-1']:.3g} s-1 is reported")
    return RateReport(
        laser_mode=mode,
        wavelength=src.wavelength,
        flux_average=flux.average,
        flux_peak=flux.peak,
        peak_to_average=flux.peak.si / flux.average.si,
        classical_rate_average=r_avg,
        classical_rate_peak=r_peak,
        sigma_c=species.sigma_c,
        notes=tuple(notes),
        **extra,
    )
