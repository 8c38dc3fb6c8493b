"""Run configuration: a JSON document with one section per computation.

Every dimensioned value is a string with an explicit unit, e.g.
``"power": "1 W"``. Precedence, lowest first: built-in defaults, the config
file, then ``--set section.key=value`` overrides on the command line.
File paths are resolved relative to the config file; the prefix
``sample:`` selects a bundled data file.
"""
from __future__ import annotations

import copy
import json
import math
from pathlib import Path

from . import sample_path
from .atomic import parse_level_table, parse_line_table
from .biphoton import NON_COLLINEAR, PumpLaser, SPDCConfig
from .errors import ConfigError, EtpaError
from .populations import CollisionTable, RateCoefficientTable
from .quantities import (
    ANGLE, AREA, ENERGY, FREQUENCY, NUMBER_DENSITY, POWER, TIME, WAVELENGTH,
    XS_CLASSICAL, linewidth_convert, parse_quantity,
)
from .rates import BeamGeometry, CWLaser, PulsedLaser, TargetSpecies
from .transitions import SearchConstraints

DEFAULTS = {
    "search": {
        "window": ["350 nm", "400 nm"],
        "require_intermediate_path": True,
        "relax_intermediate_energy": False,
        "apply_J_rule": False,
    },
}


def _merge(base, top):
    out = copy.deepcopy(base)
    for k, v in top.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


class RunConfig:
    """Validated access to configuration sections with field-path errors."""

    def __init__(self, data=None, base_dir=None):
        data = data or {}
        if not isinstance(data, dict):
            raise ConfigError("<root>", "configuration must be a JSON object")
        self.data = _merge(DEFAULTS, data)
        self.base_dir = Path(base_dir) if base_dir else Path.cwd()

    @classmethod
    def load(cls, path=None, overrides=()):
        data = {}
        base = None
        if path is not None:
            p = Path(path)
            try:
                data = json.loads(p.read_text(encoding="utf-8"))
            except FileNotFoundError:
                raise ConfigError("--config", f"file not found: {p}") from None
            except json.JSONDecodeError as exc:
                raise ConfigError("--config", f"invalid JSON: {exc}") from None
            base = p.parent
        cfg = cls(data, base)
        for item in overrides:
            cfg.set(item)
        return cfg

    def set(self, assignment):
        """Apply ``section.key=value``; the value is parsed as JSON when possible."""
        if "=" not in assignment:
            raise ConfigError("--set", f"expected key=value, got {assignment!r}")
        key, raw = assignment.split("=", 1)
        parts = key.strip().split(".")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = self.data
        for p in parts[:-1]:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise ConfigError(key, "cannot descend into a non-section value")
        node[parts[-1]] = value

    # -- generic field access ------------------------------------------------

    def section(self, name, required=True):
        sec = self.data.get(name)
        if sec is None:
            if required:
                raise ConfigError(name, "section missing")
            return None
        if not isinstance(sec, dict):
            raise ConfigError(name, "must be an object")
        return sec

    def raw(self, path, default=...):
        node = self.data
        for part in path.split("."):
            if not isinstance(node, dict) or part not in node:
                if default is ...:
                    raise ConfigError(path, "required field missing")
                return default
            node = node[part]
        return node

    def quantity(self, path, dimension, default=...):
        value = self.raw(path, default)
        if value is None:
            return None
        if isinstance(value, (int, float)):
            raise ConfigError(path, f"bare number {value!r}; state the unit, e.g. \"{value} <unit>\"")
        try:
            return parse_quantity(value, dimension)
        except EtpaError as exc:
            raise ConfigError(path, str(exc)) from None

    def number(self, path, default=..., value=...):
        if value is ...:
            value = self.raw(path, default)
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ConfigError(path, f"expected a dimensionless number, got {value!r}")
        return float(value)

    def flag(self, path, default=False):
        value = self.raw(path, default)
        if not isinstance(value, bool):
            raise ConfigError(path, f"expected true/false, got {value!r}")
        return value

    def file(self, path, required=True):
        value = self.raw(path, None)
        if value is None:
            if required:
                raise ConfigError(path, "required file missing")
            return None
        if not isinstance(value, str):
            raise ConfigError(path, "file reference must be a string")
        if value.startswith("sample:"):
            p = Path(str(sample_path(value[len("sample:"):])))
        else:
            p = Path(value)
            if not p.is_absolute():
                p = self.base_dir / p
        if not p.is_file():
            raise ConfigError(path, f"file not found: {p}")
        return p

    def _wrap(self, path, fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigError:
            raise
        except EtpaError as exc:
            raise ConfigError(path, str(exc)) from None

    # -- builders --------------------------------------------------------------

    def laser(self):
        self.section("laser")
        mode = self.raw("laser.mode", "cw")
        wl = self.quantity("laser.wavelength", WAVELENGTH)
        if mode == "cw":
            return self._wrap("laser", CWLaser, self.quantity("laser.power", POWER), wl)
        if mode == "pulsed":
            return self._wrap(
                "laser", PulsedLaser,
                self.quantity("laser.pulse_energy", ENERGY),
                self.quantity("laser.pulse_width", TIME),
                self.quantity("laser.rep_rate", FREQUENCY),
                wl,
            )
        raise ConfigError("laser.mode", f"expected 'cw' or 'pulsed', got {mode!r}")

    def geometry(self):
        return self._wrap("laser.spot_diameter", BeamGeometry,
                          self.quantity("laser.spot_diameter", WAVELENGTH))

    def species(self):
        self.section("species")
        return self._wrap("species", TargetSpecies, str(self.raw("species.name", "")),
                          self.quantity("species.sigma_c", XS_CLASSICAL))

    def has(self, name):
        return isinstance(self.data.get(name), dict) and bool(self.data[name])

    def spdc(self):
        """``(PumpLaser, SPDCConfig)`` from the ``spdc`` section."""
        self.section("spdc")
        pump = self._wrap(
            "spdc.pump_wavelength", PumpLaser,
            self.quantity("spdc.pump_wavelength", WAVELENGTH),
            self.quantity("spdc.pump_power", POWER, "0 W"),
            self.quantity("spdc.pump_linewidth", FREQUENCY, "0 Hz"),
        )
        if self.raw("spdc.bandwidth", None) is not None:
            bandwidth = self.quantity("spdc.bandwidth", FREQUENCY)
        elif self.raw("spdc.linewidth", None) is not None:
            bandwidth = self._wrap("spdc.linewidth", linewidth_convert,
                                   self.quantity("spdc.linewidth", WAVELENGTH),
                                   self.quantity("spdc.center", WAVELENGTH))
        else:
            raise ConfigError("spdc.bandwidth", "give bandwidth, or linewidth with center")
        geometry = self.raw("spdc.geometry", "collinear")
        angle = None
        if geometry == NON_COLLINEAR:
            angle = self.quantity("spdc.crossing_angle", ANGLE).si
        cfg = self._wrap(
            "spdc", SPDCConfig,
            bandwidth=bandwidth,
            beam_diameter=self.quantity("spdc.beam_diameter", WAVELENGTH, None),
            spdc_type=str(self.raw("spdc.type", "I")),
            geometry=geometry,
            crossing_angle=angle,
            conversion_efficiency=self.number("spdc.efficiency", 0.0),
            time_bandwidth_factor=self.number("spdc.kappa", 1.0),
            entangled_area=self.quantity("spdc.entangled_area", AREA, None),
        )
        return pump, cfg

    def levels(self):
        path = self.file("files.levels")
        return self._wrap("files.levels", parse_level_table, path)

    def lines(self, levels):
        path = self.file("files.lines", required=False)
        if path is None:
            return self._wrap("files.lines", parse_line_table, _Empty(), levels)
        return self._wrap("files.lines", parse_line_table, path, levels)

    def collisions(self, levels, required=True):
        path = self.file("files.collisions", required)
        if path is None:
            return None
        return self._wrap("files.collisions", CollisionTable.from_csv, path, levels)

    def rate_table(self):
        path = self.file("files.rate_coefficients")
        density = self.quantity("plasma.n_e", NUMBER_DENSITY, None)
        return self._wrap("files.rate_coefficients", RateCoefficientTable.from_csv, path,
                          species=str(self.raw("plasma.species", "")),
                          density=None if density is None else density.value_in("cm-3"))

    def te(self):
        return self.quantity("plasma.Te", ENERGY).value_in("eV")

    def density(self):
        return self.quantity("plasma.n_e", NUMBER_DENSITY).value_in("cm-3")

    def constraints(self):
        window = self.raw("search.window")
        if not isinstance(window, list) or len(window) != 2:
            raise ConfigError("search.window", "expected [min, max] wavelengths")
        lo, hi = (self._wrap("search.window", parse_quantity, w, WAVELENGTH).value_in("nm")
                  for w in window)
        return self._wrap(
            "search", SearchConstraints,
            pump_window_nm=(lo, hi),
            require_intermediate_path=self.flag("search.require_intermediate_path"),
            relax_intermediate_energy=self.flag("search.relax_intermediate_energy"),
            apply_J_rule=self.flag("search.apply_J_rule"),
        )


class _Empty:
    def read(self):
        return "upper_id,lower_id,A_s1,wavelength_nm\n"
