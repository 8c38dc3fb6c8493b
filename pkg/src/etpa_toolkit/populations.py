"""Steady-state ionization balance and collisional-radiative level populations.

Rate coefficients and collision strengths are user supplied (long-format
CSV). Interpolation is log-log between grid points and never extrapolates.
"""
from __future__ import annotations

import csv
import io
import math
from collections import defaultdict, deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import linalg

from .atomic import single_photon_allowed
from .errors import DomainError, ParseError, RangeError, SingularityError, ValidationError
from .quantities import CONSTANTS

# Maxwellian-averaged collision rate prefactor, cm^3 s^-1 eV^1/2
COLLISION_PREFACTOR = 8.629e-6
# relative tolerance below which a slightly negative population is clamped
NEGATIVE_TOLERANCE = 1e-12

IONIZATION = "S"
RECOMBINATION = "alpha"


def _loglog(grid, values, x):
    """Log-log linear interpolation on an ascending grid; ``x`` must be inside it."""
    if x < grid[0] or x > grid[-1]:
        raise RangeError(f"Te={x:g} eV outside tabulated range [{grid[0]:g}, {grid[-1]:g}] eV")
    i = int(np.searchsorted(grid, x))
    if grid[i] == x:
        return float(values[i])
    lx0, lx1 = math.log(grid[i - 1]), math.log(grid[i])
    ly0, ly1 = math.log(values[i - 1]), math.log(values[i])
    t = (math.log(x) - lx0) / (lx1 - lx0)
    return math.exp(ly0 + t * (ly1 - ly0))


def _read_text(source):
    if isinstance(source, (str, Path)):
        return Path(source).read_text(encoding="utf-8")
    return source.read()


def _records(text, columns):
    lines = [(i, ln) for i, ln in enumerate(text.splitlines(), start=1)
             if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ParseError("empty table")
    header = [h.strip() for h in next(csv.reader([lines[0][1]]))]
    missing = [c for c in columns if c not in header]
    if missing:
        raise ParseError(f"missing column(s) {', '.join(missing)}", row=lines[0][0])
    for rownum, line in lines[1:]:
        values = [v.strip() for v in next(csv.reader([line]))]
        rec = dict(zip(header, values))
        for c in columns:
            if not rec.get(c):
                raise ParseError("empty required field", row=rownum, column=c)
        yield rownum, rec


def _float(rec, col, rownum):
    try:
        return float(rec[col])
    except ValueError:
        raise ParseError(f"invalid number {rec[col]!r}", row=rownum, column=col) from None


# -- ionization balance ------------------------------------------------------

@dataclass(frozen=True)
class RateCoefficientTable:
    """Effective ionization ``S[z]`` (z < Z) and recombination ``alpha[z]`` (z > 0).

    ``ionization`` has Z rows and ``recombination`` has Z rows, the latter
    indexed so that ``recombination[z - 1]`` is alpha for charge z. Both are
    arrays over ``te_grid`` in cm^3/s.
    """

    species: str
    te_grid: np.ndarray
    ionization: np.ndarray
    recombination: np.ndarray
    density: float | None = None

    def __post_init__(self):
        grid = np.asarray(self.te_grid, dtype=float)
        S = np.atleast_2d(np.asarray(self.ionization, dtype=float))
        a = np.atleast_2d(np.asarray(self.recombination, dtype=float))
        if grid.ndim != 1 or grid.size < 2:
            raise ValidationError("Te grid needs at least 2 points")
        if not np.all(np.diff(grid) > 0) or grid[0] <= 0:
            raise ValidationError("Te grid must be positive and strictly ascending")
        if S.shape != a.shape or S.shape[1] != grid.size:
            raise ValidationError("coefficient arrays must be (Z, len(Te grid))")
        if not (np.all(np.isfinite(S)) and np.all(np.isfinite(a))):
            raise ValidationError("coefficients must be finite")
        if np.any(S <= 0) or np.any(a <= 0):
            raise ValidationError("coefficients must be > 0 on the grid")
        for name, val in (("te_grid", grid), ("ionization", S), ("recombination", a)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @property
    def Z(self):
        return self.ionization.shape[0]

    @classmethod
    def from_csv(cls, source, species="", density=None):
        """Long format ``z,kind,Te_eV,coeff_cm3s``; kind is ``S`` or ``alpha``."""
        points = defaultdict(dict)
        for rownum, rec in _records(_read_text(source), ("z", "kind", "Te_eV", "coeff_cm3s")):
            try:
                z = int(rec["z"])
            except ValueError:
                raise ParseError(f"invalid charge {rec['z']!r}", row=rownum, column="z") from None
            kind = rec["kind"]
            if kind not in (IONIZATION, RECOMBINATION):
                raise ParseError(f"kind must be S or alpha, got {kind!r}", row=rownum, column="kind")
            te = _float(rec, "Te_eV", rownum)
            if te in points[(z, kind)]:
                raise ParseError(f"duplicate point z={z} {kind} Te={te:g}", row=rownum)
            points[(z, kind)][te] = _float(rec, "coeff_cm3s", rownum)
        if not points:
            raise ValidationError("no rate coefficients")
        Z = max(z for z, _ in points)
        grids = {tuple(sorted(v)) for v in points.values()}
        if len(grids) != 1:
            raise ValidationError("all coefficient series must share one Te grid")
        grid = np.array(grids.pop())
        S, alpha = [], []
        for z in range(Z):
            if (z, IONIZATION) not in points:
                raise ValidationError(f"missing ionization coefficient for z={z}")
            if (z + 1, RECOMBINATION) not in points:
                raise ValidationError(f"missing recombination coefficient for z={z + 1}")
            S.append([points[(z, IONIZATION)][t] for t in grid])
            alpha.append([points[(z + 1, RECOMBINATION)][t] for t in grid])
        extra = set(points) - {(z, IONIZATION) for z in range(Z)} \
            - {(z, RECOMBINATION) for z in range(1, Z + 1)}
        if extra:
            raise ValidationError(f"unexpected coefficient series {sorted(extra)}")
        return cls(species, grid, np.array(S), np.array(alpha), density)


def interpolate_coefficient(table, z, kind, te):
    """Coefficient for charge ``z`` at ``te`` (eV), log-log interpolated."""
    if kind == IONIZATION:
        if not 0 <= z < table.Z:
            raise DomainError(f"no ionization coefficient for z={z}")
        row = table.ionization[z]
    elif kind == RECOMBINATION:
        if not 0 < z <= table.Z:
            raise DomainError(f"no recombination coefficient for z={z}")
        row = table.recombination[z - 1]
    else:
        raise DomainError(f"unknown coefficient kind {kind!r}")
    return _loglog(table.te_grid, row, te)


@dataclass(frozen=True)
class ChargeStateDistribution:
    te: float
    fractions: np.ndarray

    def __getitem__(self, z):
        return self.fractions[z]


def fractional_abundance(table, te):
    """Steady-state charge-state fractions at ``te`` (eV).

    Adjacent stages balance, ``f[z+1] / f[z] = S[z] / alpha[z+1]``; the chain
    is accumulated in log space so that very small fractions underflow to
    zero instead of overflowing the large ones.
    """
    log_ratio = np.empty(table.Z)
    for z in range(table.Z):
        s = interpolate_coefficient(table, z, IONIZATION, te)
        a = interpolate_coefficient(table, z + 1, RECOMBINATION, te)
        if a == 0:
            raise SingularityError(f"recombination coefficient for z={z + 1} is zero")
        log_ratio[z] = math.log(s) - math.log(a)
    log_f = np.concatenate(([0.0], np.cumsum(log_ratio)))
    w = np.exp(log_f - log_f.max())
    return ChargeStateDistribution(te, w / w.sum())


def scan_abundance(table, te_values):
    out = []
    for te in te_values:
        try:
            out.append(fractional_abundance(table, float(te)))
        except RangeError as exc:
            raise RangeError(f"Te={float(te):g} eV: {exc}") from None
    return out


# -- collisional-radiative model --------------------------------------------

def excitation_rate_coefficient(upsilon, delta_e, te, g_lower):
    """Electron-impact excitation rate, cm^3/s (energies in eV)."""
    _check_collision_args(upsilon, delta_e, te, g_lower)
    return COLLISION_PREFACTOR / math.sqrt(te) * upsilon / g_lower * math.exp(-delta_e / te)


def deexcitation_rate_coefficient(upsilon, delta_e, te, g_upper):
    """Electron-impact de-excitation rate, cm^3/s; independent of ``delta_e``."""
    _check_collision_args(upsilon, delta_e, te, g_upper)
    return COLLISION_PREFACTOR / math.sqrt(te) * upsilon / g_upper


def _check_collision_args(upsilon, delta_e, te, g):
    if not te > 0:
        raise DomainError("Te must be > 0")
    if not delta_e >= 0:
        raise DomainError("energy gap must be >= 0")
    if not g >= 1:
        raise DomainError("statistical weight must be >= 1")
    if not upsilon > 0:
        raise DomainError("collision strength must be > 0")


class CollisionTable:
    """Effective collision strengths keyed by unordered level pair.

    A pair tabulated at a single temperature is treated as Te-independent.
    """

    def __init__(self, data=None):
        self._data = {}
        for (i, j), series in (data or {}).items():
            self.add(i, j, series)

    def add(self, i, j, series):
        if i == j:
            raise ValidationError(f"collision strength between {i} and itself")
        key = frozenset((i, j))
        if key in self._data:
            raise ValidationError(f"duplicate collision data for {i}-{j}")
        pts = sorted((float(t), float(u)) for t, u in dict(series).items())
        if not pts or any(u <= 0 for _, u in pts) or any(t <= 0 for t, _ in pts):
            raise ValidationError(f"collision strengths for {i}-{j} must be positive")
        self._data[key] = (np.array([t for t, _ in pts]), np.array([u for _, u in pts]))

    def pairs(self):
        return [tuple(sorted(k)) for k in self._data]

    def __len__(self):
        return len(self._data)

    def upsilon(self, i, j, te):
        grid, vals = self._data[frozenset((i, j))]
        if grid.size == 1:
            return float(vals[0])
        try:
            return _loglog(grid, vals, te)
        except RangeError as exc:
            raise RangeError(f"collision strength {i}-{j}: {exc}") from None

    @classmethod
    def from_csv(cls, source, levels=None):
        """Long format ``lower_id,upper_id,Te_eV,upsilon``."""
        series = defaultdict(dict)
        order = []
        for rownum, rec in _records(_read_text(source), ("lower_id", "upper_id", "Te_eV", "upsilon")):
            lo, up = rec["lower_id"], rec["upper_id"]
            if levels is not None:
                for col, lid in (("lower_id", lo), ("upper_id", up)):
                    if lid not in levels:
                        raise ParseError(f"unknown level {lid!r}", row=rownum, column=col)
            key = frozenset((lo, up))
            if key not in series:
                order.append((lo, up))
            te = _float(rec, "Te_eV", rownum)
            if te in series[key]:
                raise ParseError(f"duplicate point {lo}-{up} Te={te:g}", row=rownum)
            series[key][te] = _float(rec, "upsilon", rownum)
        table = cls()
        for lo, up in order:
            table.add(lo, up, series[frozenset((lo, up))])
        return table


@dataclass
class CRSystem:
    levels: object  # LevelTable
    lines: object  # LineTable
    collisions: CollisionTable
    density: float  # cm^-3
    te: float  # eV
    drivers: tuple

    def __post_init__(self):
        self.drivers = tuple(self.drivers)
        if not self.drivers:
            raise ValidationError("at least one driver level is required")
        if self.levels.ground.id not in self.drivers:
            raise ValidationError("drivers must include the ground level")
        for d in self.drivers:
            if d not in self.levels:
                raise ValidationError(f"unknown driver level {d!r}")
        if len(set(self.drivers)) != len(self.drivers):
            raise ValidationError("duplicate driver level")
        if not self.density >= 0 or not self.te > 0:
            raise DomainError("need n_e >= 0 and Te > 0")


def rate_matrix(system):
    """Dense ``M`` with ``M[i, j]`` the rate (1/s) from level j into level i.

    Columns sum to zero: the diagonal holds minus the total loss rate.
    """
    ids = system.levels.ids
    idx = {lid: k for k, lid in enumerate(ids)}
    n = len(ids)
    M = np.zeros((n, n))
    cm1_to_ev = 1.0 / CONSTANTS.eV_to_cm1
    for a, b in system.collisions.pairs():
        la, lb = system.levels[a], system.levels[b]
        lo, up = (la, lb) if la.energy_cm1 <= lb.energy_cm1 else (lb, la)
        ups = system.collisions.upsilon(a, b, system.te)
        de = (up.energy_cm1 - lo.energy_cm1) * cm1_to_ev
        M[idx[up.id], idx[lo.id]] += system.density * excitation_rate_coefficient(
            ups, de, system.te, lo.g)
        M[idx[lo.id], idx[up.id]] += system.density * deexcitation_rate_coefficient(
            ups, de, system.te, up.g)
    for ln in system.lines:
        M[idx[ln.lower], idx[ln.upper]] += ln.A
    np.fill_diagonal(M, 0.0)
    M[np.diag_indices(n)] = -M.sum(axis=0)
    return M


def _unreachable(M, driver_idx):
    n = M.shape[0]
    seen = set(driver_idx)
    queue = deque(driver_idx)
    while queue:
        j = queue.popleft()
        for i in np.nonzero(M[:, j] > 0)[0]:
            if i not in seen:
                seen.add(int(i))
                queue.append(int(i))
    return [k for k in range(n) if k not in seen]


@dataclass(frozen=True)
class PopulationResult:
    """Solved populations relative to the fixed driver populations."""

    level_ids: tuple
    drivers: tuple
    driver_populations: dict
    total: dict
    contributions: dict  # level id -> {driver id: population}
    clamped: tuple = ()

    def population(self, level_id):
        if level_id in self.driver_populations:
            return self.driver_populations[level_id]
        return self.total[level_id]

    def as_dict(self):
        return {lid: self.population(lid) for lid in self.level_ids}


def solve_cr_populations(system, driver_populations):
    """Quasi-static excited-level populations driven by ground and metastables.

    Solves ``M_XX N_X = -M_XD N_D`` for the non-driver levels X, once with
    all drivers and once per driver so the contributions can be reported
    separately (the system is linear, so they add up to the total).
    """
    pops = {d: float(driver_populations.get(d, 0.0)) for d in system.drivers}
    unknown = set(driver_populations) - set(system.drivers)
    if unknown:
        raise ValidationError(f"populations given for non-driver levels {sorted(unknown)}")
    if any(not math.isfinite(p) or p < 0 for p in pops.values()):
        raise DomainError("driver populations must be finite and >= 0")
    if not any(p > 0 for p in pops.values()):
        raise DomainError("driver populations are all zero")

    ids = system.levels.ids
    M = rate_matrix(system)
    d_idx = [ids.index(d) for d in system.drivers]
    x_idx = [k for k in range(len(ids)) if k not in set(d_idx)]
    lost = _unreachable(M, d_idx)
    if lost:
        names = [ids[k] for k in lost]
        raise SingularityError(f"unreachable level set: {', '.join(names)}", names)
    level_ids = tuple(ids)
    if not x_idx:
        return PopulationResult(level_ids, system.drivers, pops, {}, {})

    Mxx = M[np.ix_(x_idx, x_idx)]
    Mxd = M[np.ix_(x_idx, d_idx)]
    outflow = -np.diag(Mxx)
    dead = [ids[x_idx[k]] for k in np.nonzero(outflow <= 0)[0]]
    if dead:
        raise SingularityError(f"levels with no loss channel: {', '.join(dead)}", dead)
    lu, piv = linalg.lu_factor(Mxx, check_finite=True)
    threshold = 1e3 * np.finfo(float).eps * np.linalg.norm(Mxx, 1)
    if np.min(np.abs(np.diag(lu))) <= threshold:
        raise SingularityError("rate matrix for excited levels is numerically singular")

    # column k of the right-hand side: driver k alone
    rhs = -Mxd * np.array([pops[d] for d in system.drivers])[None, :]
    per_driver = linalg.lu_solve((lu, piv), rhs)
    total_vec = linalg.lu_solve((lu, piv), rhs.sum(axis=1))

    scale = max(pops.values())
    for arr in (per_driver, total_vec):
        bad = arr < -NEGATIVE_TOLERANCE * scale
        if np.any(bad):
            raise SingularityError("solver produced negative populations beyond tolerance")
    neg = np.nonzero(total_vec < 0)[0]
    clamped = tuple(ids[x_idx[k]] for k in neg)
    total_vec = np.clip(total_vec, 0.0, None)
    per_driver = np.clip(per_driver, 0.0, None)

    total = {}
    contributions = {}
    for row, k in enumerate(x_idx):
        lid = ids[k]
        total[lid] = float(total_vec[row])
        contributions[lid] = {d: float(per_driver[row, c]) for c, d in enumerate(system.drivers)}
    return PopulationResult(level_ids, system.drivers, pops, total, contributions, clamped)


def find_metastables(levels, lines):
    """Excited levels with no E1-allowed line to a lower level in ``lines``."""
    decays = defaultdict(bool)
    for ln in lines:
        if single_photon_allowed(levels[ln.upper], levels[ln.lower]):
            decays[ln.upper] = True
    ground = levels.ground.id
    return [lv.id for lv in levels if lv.id != ground and not decays[lv.id]]


def boltzmann_populations(levels, te, ids=None):
    """``(g_i / g_0) exp(-E_i / Te)`` relative to ground, for the requested ids."""
    g0 = levels.ground.g
    out = {}
    for lv in levels:
        if ids is None or lv.id in ids:
            out[lv.id] = lv.g / g0 * math.exp(-lv.energy_cm1 / CONSTANTS.eV_to_cm1 / te)
    return out


def abundance_csv(distributions):
    """CSV text with header ``Te_eV,f0,...,fZ``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    nz = len(distributions[0].fractions) if distributions else 0
    w.writerow(["Te_eV"] + [f"f{z}" for z in range(nz)])
    for d in distributions:
        w.writerow([repr(float(d.te))] + [repr(float(f)) for f in d.fractions])
    return buf.getvalue()
