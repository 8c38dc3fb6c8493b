"""Tagged physical quantities with explicit unit bookkeeping.

Only the handful of dimensions needed by the toolkit are supported. Every
``Quantity`` carries its dimension and unit; cgs and SI variants are both
first-class because TPA cross-sections are conventionally quoted in
cm^4 s while fluxes often come out of SI arithmetic in m^-2 s^-1.

Energy, wavelength and frequency are spectroscopically equivalent: a
wavelength converts to a photon energy (``E = hc/lambda``) and vice versa.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

from scipy import constants as _sc

from .errors import DimensionError, DomainError, ParseError


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA 2018 values (exact SI definitions where applicable)."""

    h: float  # J s
    c: float  # m / s
    eV_to_J: float
    eV_to_cm1: float

    @property
    def hc(self):
        return self.h * self.c


CONSTANTS = PhysicalConstants(
    h=_sc.h,  # 6.62607015e-34
    c=_sc.c,  # 299792458.0
    eV_to_J=_sc.e,  # 1.602176634e-19
    eV_to_cm1=_sc.e / (_sc.h * _sc.c * 100.0),  # 8065.543937...
)

ENERGY = "energy"
WAVELENGTH = "wavelength"  # also used for any length (spot diameter, ...)
FREQUENCY = "frequency"
TIME = "time"
POWER = "power"
AREA = "area"
VOLUME = "volume"
PHOTON_FLUX = "photon-flux"
XS_CLASSICAL = "cross-section-classical"
XS_ENTANGLED = "cross-section-entangled"
RATE = "rate"
NUMBER_DENSITY = "number-density"
ANGLE = "angle"

DIMENSIONS = (
    ENERGY, WAVELENGTH, FREQUENCY, TIME, POWER, AREA, VOLUME,
    PHOTON_FLUX, XS_CLASSICAL, XS_ENTANGLED, RATE, NUMBER_DENSITY, ANGLE,
)
_SPECTROSCOPIC = frozenset({ENERGY, WAVELENGTH, FREQUENCY})
_NON_NEGATIVE = frozenset({TIME, POWER, AREA, VOLUME, PHOTON_FLUX,
                           XS_CLASSICAL, XS_ENTANGLED, RATE, NUMBER_DENSITY})

SI = "si"
CGS = "cgs"


@dataclass(frozen=True)
class _Unit:
    name: str
    dimension: str
    scale: float  # multiply by this to reach the SI base of the dimension
    system: str | None = None


def _units():
    cm = 1e-2
    table = [
        # energy: SI base is J; cm-1 handled by scale since E = hc * 100 * k
        _Unit("J", ENERGY, 1.0),
        _Unit("mJ", ENERGY, 1e-3),
        _Unit("eV", ENERGY, CONSTANTS.eV_to_J),
        _Unit("cm-1", ENERGY, CONSTANTS.hc * 100.0),
        # lengths
        _Unit("m", WAVELENGTH, 1.0, SI),
        _Unit("cm", WAVELENGTH, cm, CGS),
        _Unit("mm", WAVELENGTH, 1e-3, SI),
        _Unit("um", WAVELENGTH, 1e-6, SI),
        _Unit("nm", WAVELENGTH, 1e-9, SI),
        _Unit("Hz", FREQUENCY, 1.0),
        _Unit("kHz", FREQUENCY, 1e3),
        _Unit("MHz", FREQUENCY, 1e6),
        _Unit("GHz", FREQUENCY, 1e9),
        _Unit("THz", FREQUENCY, 1e12),
        _Unit("s", TIME, 1.0),
        _Unit("ms", TIME, 1e-3),
        _Unit("us", TIME, 1e-6),
        _Unit("ns", TIME, 1e-9),
        _Unit("ps", TIME, 1e-12),
        _Unit("fs", TIME, 1e-15),
        _Unit("W", POWER, 1.0),
        _Unit("mW", POWER, 1e-3),
        _Unit("m2", AREA, 1.0, SI),
        _Unit("cm2", AREA, cm**2, CGS),
        _Unit("mm2", AREA, 1e-6, SI),
        _Unit("um2", AREA, 1e-12, SI),
        _Unit("m3", VOLUME, 1.0, SI),
        _Unit("cm3", VOLUME, cm**3, CGS),
        _Unit("mm3", VOLUME, 1e-9, SI),
        _Unit("m-2 s-1", PHOTON_FLUX, 1.0, SI),
        _Unit("cm-2 s-1", PHOTON_FLUX, cm**-2, CGS),
        _Unit("m4 s", XS_CLASSICAL, 1.0, SI),
        _Unit("cm4 s", XS_CLASSICAL, cm**4, CGS),
        _Unit("m2", XS_ENTANGLED, 1.0, SI),
        _Unit("cm2", XS_ENTANGLED, cm**2, CGS),
        _Unit("s-1", RATE, 1.0),
        _Unit("m-3", NUMBER_DENSITY, 1.0, SI),
        _Unit("cm-3", NUMBER_DENSITY, cm**-3, CGS),
        _Unit("rad", ANGLE, 1.0),
        _Unit("deg", ANGLE, math.pi / 180),
    ]
    return {(u.dimension, u.name): u for u in table}


_UNITS = _units()

# default dimension for a bare unit string (area wins over entangled XS)
_DEFAULT_DIM = {}
for (_dim, _name) in _UNITS:
    _DEFAULT_DIM.setdefault(_name, _dim)

_ALIASES = {
    "cm^-1": "cm-1", "1/cm": "cm-1", "kayser": "cm-1",
    "µm": "um", "micron": "um",
    "1/s": "s-1", "/s": "s-1",
    "m-2s-1": "m-2 s-1", "1/m2/s": "m-2 s-1", "photons/m2/s": "m-2 s-1",
    "cm-2s-1": "cm-2 s-1", "1/cm2/s": "cm-2 s-1", "photons/cm2/s": "cm-2 s-1",
    "cm4s": "cm4 s", "m4s": "m4 s",
    "1/cm3": "cm-3", "1/m3": "m-3", "cm^-3": "cm-3", "m^-3": "m-3",
    "degree": "deg", "degrees": "deg", "radian": "rad",
}


def _normalize_unit(text):
    key = text.strip().replace("^", "").replace("·", " ").replace("*", " ")
    key = re.sub(r"\s+", " ", key)
    if key in _ALIASES:
        return _ALIASES[key]
    compact = key.replace(" ", "")
    if compact in _ALIASES:
        return _ALIASES[compact]
    for (_, name) in _UNITS:
        if name.replace(" ", "") == compact:
            return name
    return key


def units_for(dimension):
    """Unit names accepted for ``dimension``."""
    return [name for (dim, name) in _UNITS if dim == dimension]


def _lookup(unit, dimension=None):
    name = _normalize_unit(unit)
    if dimension is None:
        try:
            dimension = _DEFAULT_DIM[name]
        except KeyError:
            raise ParseError(f"unknown unit {unit!r}") from None
    try:
        return _UNITS[(dimension, name)]
    except KeyError:
        if name in _DEFAULT_DIM:
            raise DimensionError(_DEFAULT_DIM[name], dimension) from None
        raise ParseError(f"unknown unit {unit!r}") from None


@dataclass(frozen=True)
class Quantity:
    """A finite magnitude tagged with a dimension and unit.

    ``dimension`` may be omitted when the unit string is unambiguous;
    ``cm2``/``m2`` default to area, pass ``dimension=XS_ENTANGLED`` for an
    entangled cross-section.
    """

    magnitude: float
    unit: str
    dimension: str | None = None

    def __post_init__(self):
        u = _lookup(self.unit, self.dimension)
        object.__setattr__(self, "unit", u.name)
        object.__setattr__(self, "dimension", u.dimension)
        mag = float(self.magnitude)
        if not math.isfinite(mag):
            raise DomainError(f"non-finite magnitude {self.magnitude!r}")
        if self.dimension in _NON_NEGATIVE and mag < 0:
            raise DomainError(f"{self.dimension} must be >= 0, got {mag}")
        object.__setattr__(self, "magnitude", mag)

    @property
    def system(self):
        """``"si"``, ``"cgs"`` or ``None`` for system-neutral units."""
        return _UNITS[(self.dimension, self.unit)].system

    @property
    def si(self):
        """Magnitude in the SI base unit of this dimension."""
        return self.magnitude * _UNITS[(self.dimension, self.unit)].scale

    def to(self, unit):
        return convert(self, unit)

    def value_in(self, unit):
        return convert(self, unit).magnitude

    def __str__(self):
        return f"{self.magnitude:.6g} {self.unit}"


def convert(q, target_unit):
    """Convert ``q`` to ``target_unit``.

    Energy, wavelength and frequency interconvert through the photon
    relations; any other change of dimension raises ``DimensionError``.

    >>> convert(Quantity(400, "nm"), "cm-1").magnitude
    25000.0
    """
    target_name = _normalize_unit(target_unit)
    dims = [d for (d, n) in _UNITS if n == target_name]
    if not dims:
        raise ParseError(f"unknown unit {target_unit!r}")
    if q.dimension in dims:
        target = _UNITS[(q.dimension, target_name)]
        src = _UNITS[(q.dimension, q.unit)]
        if src is target:
            return q
        return Quantity(q.magnitude * (src.scale / target.scale), target.name, target.dimension)
    target_dim = dims[0]
    if q.dimension in _SPECTROSCOPIC and target_dim in _SPECTROSCOPIC:
        target = _UNITS[(target_dim, target_name)]
        joules = _to_joules(q)
        return Quantity(_from_joules(joules, target_dim) / target.scale, target.name, target_dim)
    raise DimensionError(q.dimension, target_dim)


def _to_joules(q):
    if q.dimension == ENERGY:
        return q.si
    if q.dimension == FREQUENCY:
        return CONSTANTS.h * q.si
    if q.si <= 0:
        raise DomainError("wavelength must be > 0 to convert to energy")
    return CONSTANTS.hc / q.si


def _from_joules(joules, dimension):
    if dimension == ENERGY:
        return joules
    if dimension == FREQUENCY:
        return joules / CONSTANTS.h
    if joules <= 0:
        raise DomainError("energy must be > 0 to convert to wavelength")
    return CONSTANTS.hc / joules


_QTY_RE = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(.+?)\s*$")


def parse_quantity(text, dimension=None):
    """Parse strings such as ``"1e-48 cm4 s"`` or ``"400nm"``."""
    if isinstance(text, Quantity):
        if dimension is not None and text.dimension != dimension:
            raise DimensionError(text.dimension, dimension)
        return text
    m = _QTY_RE.match(str(text))
    if not m:
        raise ParseError(f"cannot parse quantity {text!r}; expected '<number> <unit>'")
    return Quantity(float(m.group(1)), m.group(2), dimension)


def _require(q, dimension, name):
    if not isinstance(q, Quantity):
        raise TypeError(f"{name} must be a Quantity, got {type(q).__name__}")
    if q.dimension != dimension:
        raise DimensionError(q.dimension, dimension)


def photon_energy(wavelength):
    """Photon energy ``hc/lambda`` in eV."""
    _require(wavelength, WAVELENGTH, "wavelength")
    if wavelength.magnitude <= 0:
        raise DomainError(f"wavelength must be > 0, got {wavelength}")
    return Quantity(CONSTANTS.hc / wavelength.si / CONSTANTS.eV_to_J, "eV")


def photon_frequency(wavelength):
    _require(wavelength, WAVELENGTH, "wavelength")
    if wavelength.magnitude <= 0:
        raise DomainError(f"wavelength must be > 0, got {wavelength}")
    return Quantity(CONSTANTS.c / wavelength.si, "Hz")


def _check_center(center):
    _require(center, WAVELENGTH, "center wavelength")
    if center.magnitude <= 0:
        raise DomainError(f"center wavelength must be > 0, got {center}")


def linewidth_convert(width, center):
    """Wavelength width to frequency width, ``df = c * dlambda / lambda0**2``.

    Valid only for narrow lines; widths above half the center wavelength are
    rejected.
    """
    _require(width, WAVELENGTH, "linewidth")
    _check_center(center)
    if width.magnitude < 0:
        raise DomainError("linewidth must be >= 0")
    if width.si > center.si / 2:
        raise DomainError(
            f"linewidth {width} exceeds half the center wavelength {center}; "
            "small-width approximation invalid")
    return Quantity(CONSTANTS.c * width.si / center.si**2, "Hz")


def frequency_width_to_linewidth(width, center, unit="nm"):
    """Inverse of :func:`linewidth_convert`."""
    _require(width, FREQUENCY, "frequency width")
    _check_center(center)
    if width.magnitude < 0:
        raise DomainError("frequency width must be >= 0")
    dlam = width.si * center.si**2 / CONSTANTS.c
    if dlam > center.si / 2:
        raise DomainError("equivalent linewidth exceeds half the center wavelength")
    return Quantity(dlam, "m").to(unit)
