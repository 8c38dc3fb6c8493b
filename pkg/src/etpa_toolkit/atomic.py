"""Atomic level/line tables, LS term symbols and selection rules.

Level CSV columns: ``id,configuration,term,J,energy_cm1`` (extra columns are
kept as string annotations). Line CSV columns:
``upper_id,lower_id,A_s1,wavelength_nm`` with the wavelength optional.
Lines starting with ``#`` are comments.
"""
from __future__ import annotations

import csv
import io
import re
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from types import MappingProxyType

from .errors import ParseError, ValidationError
from .quantities import Quantity

L_LETTERS = "SPDFGHIKLMNOQ"  # L = 0..12, J is skipped by convention
EVEN = "even"
ODD = "odd"
_ODD_MARKS = ("*", "°")

# relative tolerance between a tabulated wavelength and the level spacing
WAVELENGTH_TOLERANCE = 5e-3


class DataWarning(UserWarning):
    """Non-fatal inconsistency found while validating atomic data."""


@dataclass(frozen=True)
class TermSymbol:
    multiplicity: int
    L: int
    parity: str

    def __post_init__(self):
        if self.multiplicity < 1:
            raise ValueError("multiplicity must be >= 1")
        if not 0 <= self.L < len(L_LETTERS):
            raise ValueError(f"L must be in 0..{len(L_LETTERS) - 1}")
        if self.parity not in (EVEN, ODD):
            raise ValueError(f"parity must be 'even' or 'odd', got {self.parity!r}")

    @property
    def S(self):
        return Fraction(self.multiplicity - 1, 2)

    @property
    def odd(self):
        return self.parity == ODD

    def render(self):
        return f"{self.multiplicity}{L_LETTERS[self.L]}{'*' if self.odd else ''}"

    def __str__(self):
        return self.render()


def parse_term(text):
    """Parse ``<multiplicity><L letter>[*]``, e.g. ``"2P*"`` or ``"4D"``."""
    if not isinstance(text, str):
        raise ParseError(f"term must be a string, got {type(text).__name__}")
    s = text.strip()
    lead = len(text) - len(text.lstrip())
    m = re.match(r"\d+", s)
    if not m:
        raise ParseError(f"term {text!r} must start with the multiplicity", offset=lead)
    mult = int(m.group())
    if mult == 0:
        raise ParseError(f"zero multiplicity in term {text!r}", offset=lead)
    pos = m.end()
    if pos >= len(s):
        raise ParseError(f"missing L letter in term {text!r}", offset=lead + pos)
    letter = s[pos]
    L = L_LETTERS.find(letter.upper()) if letter.isalpha() else -1
    if L < 0:
        raise ParseError(f"unknown L letter {letter!r} in term {text!r}", offset=lead + pos)
    pos += 1
    rest = s[pos:]
    if rest == "":
        parity = EVEN
    elif rest in _ODD_MARKS:
        parity = ODD
    else:
        raise ParseError(f"unexpected trailing text {rest!r} in term {text!r}",
                         offset=lead + pos)
    return TermSymbol(mult, L, parity)


def parse_j(text):
    """Return twice J from ``"1.5"`` or ``"3/2"``."""
    s = str(text).strip()
    try:
        value = Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"invalid J value {text!r}") from None
    twice = value * 2
    if twice.denominator != 1 or twice < 0:
        raise ParseError(f"J must be a non-negative half-integer, got {text!r}")
    return int(twice)


def format_j(twice_j):
    return str(twice_j // 2) if twice_j % 2 == 0 else f"{twice_j}/2"


@dataclass(frozen=True)
class LevelRecord:
    """One fine-structure level; ``twice_j`` stores 2J as an integer."""

    id: str
    configuration: str
    term: TermSymbol
    twice_j: int
    energy: Quantity
    annotations: MappingProxyType = field(default_factory=lambda: MappingProxyType({}),
                                          compare=False)

    def __post_init__(self):
        if self.energy.dimension != "energy":
            raise ValidationError(f"level {self.id}: energy has dimension {self.energy.dimension}")
        if self.energy.unit != "cm-1":
            object.__setattr__(self, "energy", self.energy.to("cm-1"))
        if self.energy.magnitude < 0:
            raise ValidationError(f"level {self.id}: negative energy {self.energy}")
        twice_s = self.term.multiplicity - 1
        lo, hi = abs(2 * self.term.L - twice_s), 2 * self.term.L + twice_s
        if not (lo <= self.twice_j <= hi and (self.twice_j - lo) % 2 == 0):
            raise ValidationError(
                f"level {self.id}: J={format_j(self.twice_j)} not allowed for term {self.term}")

    @property
    def J(self):
        return self.twice_j / 2

    @property
    def g(self):
        """Statistical weight 2J+1."""
        return self.twice_j + 1

    @property
    def energy_cm1(self):
        return self.energy.magnitude

    @property
    def parity(self):
        return self.term.parity


@dataclass(frozen=True)
class LineRecord:
    upper: str
    lower: str
    A: float
    wavelength: Quantity

    def __post_init__(self):
        if not self.A > 0:
            raise ValidationError(f"line {self.upper}->{self.lower}: A must be > 0")


class LevelTable:
    """Levels sorted by energy with unique ids and a single ground level."""

    def __init__(self, levels):
        levels = sorted(levels, key=lambda lv: (lv.energy_cm1, lv.id))
        if not levels:
            raise ValidationError("no levels")
        by_id = {}
        for lv in levels:
            if lv.id in by_id:
                raise ValidationError(f"duplicate level id {lv.id!r}")
            by_id[lv.id] = lv
        grounds = [lv.id for lv in levels if lv.energy_cm1 == 0.0]
        if len(grounds) > 1:
            raise ValidationError(f"multiple ground levels: {', '.join(grounds)}")
        if not grounds:
            raise ValidationError("no ground level (no level at energy 0)")
        self._levels = tuple(levels)
        self._by_id = by_id

    @property
    def ground(self):
        return self._levels[0]

    def __getitem__(self, level_id):
        try:
            return self._by_id[level_id]
        except KeyError:
            raise KeyError(f"unknown level id {level_id!r}") from None

    def __contains__(self, level_id):
        return level_id in self._by_id

    def __iter__(self):
        return iter(self._levels)

    def __len__(self):
        return len(self._levels)

    @property
    def ids(self):
        return [lv.id for lv in self._levels]

    def index(self, level_id):
        return self.ids.index(level_id)


class LineTable:
    """Radiative lines whose endpoints resolve in a :class:`LevelTable`."""

    def __init__(self, lines, levels):
        seen = set()
        self.warnings = []
        checked = []
        for ln in lines:
            for end in (ln.upper, ln.lower):
                if end not in levels:
                    raise ValidationError(f"line {ln.upper}->{ln.lower}: unknown level {end!r}")
            up, lo = levels[ln.upper], levels[ln.lower]
            if not up.energy_cm1 > lo.energy_cm1:
                raise ValidationError(
                    f"line {ln.upper}->{ln.lower}: upper level {ln.upper} is not above {ln.lower}")
            pair = frozenset((ln.upper, ln.lower))
            if pair in seen:
                raise ValidationError(f"duplicate line between {ln.upper} and {ln.lower}")
            seen.add(pair)
            expected_nm = 1e7 / (up.energy_cm1 - lo.energy_cm1)
            got_nm = ln.wavelength.value_in("nm")
            if abs(got_nm - expected_nm) > WAVELENGTH_TOLERANCE * expected_nm:
                msg = (f"line {ln.upper}->{ln.lower}: wavelength {got_nm:.4f} nm differs from "
                       f"level spacing {expected_nm:.4f} nm by more than 0.5%")
                self.warnings.append(msg)
                warnings.warn(msg, DataWarning, stacklevel=2)
            checked.append(ln)
        self._lines = tuple(checked)

    def __iter__(self):
        return iter(self._lines)

    def __len__(self):
        return len(self._lines)

    def from_upper(self, level_id):
        return [ln for ln in self._lines if ln.upper == level_id]


def _open_text(source):
    if isinstance(source, (str, Path)) and not isinstance(source, io.IOBase):
        return Path(source).read_text(encoding="utf-8")
    return source.read()


def _csv_rows(text, required, optional=()):
    """Yield ``(row_number, dict)`` skipping comments; validates the header."""
    numbered = [(i, ln) for i, ln in enumerate(text.splitlines(), start=1)
                if ln.strip() and not ln.lstrip().startswith("#")]
    if not numbered:
        return None, []
    header_row, header_line = numbered[0]
    header = [h.strip() for h in next(csv.reader([header_line]))]
    missing = [c for c in required if c not in header]
    if missing:
        raise ParseError(f"missing column(s) {', '.join(missing)}", row=header_row)
    rows = []
    for rownum, line in numbered[1:]:
        values = [v.strip() for v in next(csv.reader([line]))]
        if len(values) > len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(values)}", row=rownum)
        values += [""] * (len(header) - len(values))
        rec = dict(zip(header, values))
        for col in required:
            if col not in optional and rec[col] == "":
                raise ParseError("empty required field", row=rownum, column=col)
        rows.append((rownum, rec))
    return header, rows


LEVEL_COLUMNS = ("id", "configuration", "term", "J", "energy_cm1")
LINE_COLUMNS = ("upper_id", "lower_id", "A_s1", "wavelength_nm")


def parse_level_table(source, fmt="csv"):
    """Read a level table from a path or text stream."""
    if fmt != "csv":
        raise ValueError(f"unsupported level table format {fmt!r}")
    header, rows = _csv_rows(_open_text(source), LEVEL_COLUMNS)
    if not rows:
        raise ValidationError("no levels")
    extras = [h for h in header if h not in LEVEL_COLUMNS]
    levels = []
    for rownum, rec in rows:
        try:
            term = parse_term(rec["term"])
        except ParseError as exc:
            raise ParseError(str(exc), row=rownum, column="term") from None
        try:
            twice_j = parse_j(rec["J"])
        except ParseError as exc:
            raise ParseError(str(exc), row=rownum, column="J") from None
        try:
            energy = float(rec["energy_cm1"])
        except ValueError:
            raise ParseError(f"invalid energy {rec['energy_cm1']!r}",
                             row=rownum, column="energy_cm1") from None
        levels.append(LevelRecord(
            id=rec["id"],
            configuration=rec["configuration"],
            term=term,
            twice_j=twice_j,
            energy=Quantity(energy, "cm-1"),
            annotations=MappingProxyType({k: rec[k] for k in extras}),
        ))
    return LevelTable(levels)


def parse_line_table(source, levels, fmt="csv"):
    """Read a line table, resolving ids against ``levels``.

    A blank wavelength is filled with the vacuum wavelength of the level
    spacing.
    """
    if fmt != "csv":
        raise ValueError(f"unsupported line table format {fmt!r}")
    _, rows = _csv_rows(_open_text(source), LINE_COLUMNS, optional=("wavelength_nm",))
    lines = []
    for rownum, rec in rows:
        up, lo = rec["upper_id"], rec["lower_id"]
        try:
            A = float(rec["A_s1"])
        except ValueError:
            raise ParseError(f"invalid A value {rec['A_s1']!r}", row=rownum, column="A_s1") from None
        for col, end in (("upper_id", up), ("lower_id", lo)):
            if end not in levels:
                raise ParseError(f"unknown level {end!r}", row=rownum, column=col)
        if rec["wavelength_nm"]:
            try:
                wl = float(rec["wavelength_nm"])
            except ValueError:
                raise ParseError(f"invalid wavelength {rec['wavelength_nm']!r}",
                                 row=rownum, column="wavelength_nm") from None
        else:
            de = levels[up].energy_cm1 - levels[lo].energy_cm1
            if de <= 0:
                raise ValidationError(f"line {up}->{lo}: upper level {up} is not above {lo}")
            wl = 1e7 / de
        lines.append(LineRecord(up, lo, A, Quantity(wl, "nm")))
    return LineTable(lines, levels)


# -- selection rules ---------------------------------------------------------

def single_photon_violations(a, b):
    """Names of the electric-dipole rules broken by the pair ``(a, b)``."""
    ta, tb = a.term, b.term
    out = []
    if ta.parity == tb.parity:
        out.append("parity rule")
    if ta.multiplicity != tb.multiplicity:
        out.append("spin rule")
    if abs(ta.L - tb.L) > 1 or (ta.L == 0 and tb.L == 0):
        out.append("orbital rule")
    if abs(a.twice_j - b.twice_j) > 2 or (a.twice_j == 0 and b.twice_j == 0):
        out.append("J rule")
    return out


def single_photon_allowed(a, b):
    """LS-coupling E1 selection rules."""
    return not single_photon_violations(a, b)


def two_photon_violations(g, e, require_J_rule=False):
    tg, te = g.term, e.term
    out = []
    if tg.multiplicity != te.multiplicity:
        out.append("spin rule")
    if abs(tg.L - te.L) not in (0, 2):
        out.append("orbital rule")
    if tg.parity != te.parity:
        out.append("parity rule")
    if require_J_rule and abs(g.twice_j - e.twice_j) > 4:
        out.append("J rule")
    return out


def two_photon_allowed(g, e, require_J_rule=False):
    """dS = 0, dL in {0, +-2}, equal parity; optionally dJ in {0, +-1, +-2}."""
    return not two_photon_violations(g, e, require_J_rule)
