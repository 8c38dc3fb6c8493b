"""Two-photon transition search and ranking.

A candidate is a (lower, upper) level pair obeying the two-photon LS rules
whose full transition energy corresponds to an SPDC pump wavelength inside
the search window. The degenerate biphotons then sit at twice the pump
wavelength.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, replace

from .atomic import single_photon_allowed, two_photon_violations
from .errors import DomainError, ValidationError


@dataclass(frozen=True)
class SearchConstraints:
    pump_window_nm: tuple = (350.0, 400.0)
    require_intermediate_path: bool = True
    relax_intermediate_energy: bool = False
    apply_J_rule: bool = False

    def __post_init__(self):
        lo, hi = (float(x) for x in self.pump_window_nm)
        if not (0 < lo < hi):
            raise DomainError(f"pump window must satisfy 0 < min < max, got {self.pump_window_nm}")
        object.__setattr__(self, "pump_window_nm", (lo, hi))


@dataclass(frozen=True)
class ScoreWeights:
    """Exponents on the lower population, best branching fraction and upper/lower penalty."""

    lower: float = 1.0
    branching: float = 1.0
    penalty: float = 1.0


@dataclass(frozen=True)
class CandidateTransition:
    lower: str
    upper: str
    transition_energy: float  # cm^-1
    pump_wavelength: float  # nm
    degenerate_photon_wavelength: float  # nm
    intermediates: tuple  # ((level id, detuning cm^-1), ...)
    lower_population: float | None = None
    upper_population: float | None = None
    fluorescence: tuple = ()  # ((LineRecord, branching fraction), ...)
    score: float = 0.0
    ranked: bool = False

    @property
    def best_fluorescence(self):
        return self.fluorescence[0] if self.fluorescence else None

    def to_dict(self):
        best = self.best_fluorescence
        return {
            "lower_id": self.lower,
            "upper_id": self.upper,
            "E_cm1": self.transition_energy,
            "pump_nm": self.pump_wavelength,
            "biphoton_nm": self.degenerate_photon_wavelength,
            "intermediates": [{"id": i, "detuning_cm1": d} for i, d in self.intermediates],
            "lower_population": self.lower_population,
            "upper_population": self.upper_population,
            "fluorescence": [
                {"upper_id": ln.upper, "lower_id": ln.lower, "wavelength_nm": ln.wavelength.value_in("nm"),
                 "A_s1": ln.A, "branching": b}
                for ln, b in self.fluorescence
            ],
            "best_fluor_nm": best[0].wavelength.value_in("nm") if best else None,
            "best_branch": best[1] if best else None,
            "score": self.score,
            "ranked": self.ranked,
        }


def pump_wavelength(energy_cm1):
    """Pump wavelength (nm) carrying the full two-photon energy."""
    if not energy_cm1 > 0:
        raise DomainError(f"transition energy must be > 0, got {energy_cm1}")
    return 1e7 / energy_cm1


def fluorescence_lines(upper, lines):
    """Decay lines of ``upper`` with branching fractions, strongest first."""
    decays = [ln for ln in lines if ln.upper == upper]
    if not decays:
        return []
    total = sum(ln.A for ln in decays)
    decays.sort(key=lambda ln: (-ln.A, ln.lower))
    return [(ln, ln.A / total) for ln in decays]


def score_candidate(c, weights=ScoreWeights()):
    """``N_lower * b_max / (1 + N_upper / N_lower)`` with per-factor exponents.

    Returns 0 when the lower population is unknown or zero.
    """
    nl, nu = c.lower_population, c.upper_population
    if nl is None or nl <= 0:
        return 0.0
    nu = nu or 0.0
    b = c.fluorescence[0][1] if c.fluorescence else 0.0
    return nl**weights.lower * b**weights.branching / (1.0 + nu / nl) ** weights.penalty


def intermediate_levels(levels, g, e, relax_energy=False):
    """Levels one E1 step from both ``g`` and ``e``, with detuning from E/2."""
    mid = g.energy_cm1 + (e.energy_cm1 - g.energy_cm1) / 2
    out = []
    for lv in levels:
        if lv.id in (g.id, e.id):
            continue
        if not relax_energy and not (g.energy_cm1 < lv.energy_cm1 < e.energy_cm1):
            continue
        if single_photon_allowed(g, lv) and single_photon_allowed(lv, e):
            out.append((lv.id, lv.energy_cm1 - mid))
    return out


def explain_pair(levels, lower_id, upper_id, constraints=SearchConstraints()):
    """Reasons why a pair is not a candidate; empty when it is one."""
    g, e = levels[lower_id], levels[upper_id]
    if g.energy_cm1 > e.energy_cm1:
        g, e = e, g
    reasons = list(two_photon_violations(g, e, constraints.apply_J_rule))
    de = e.energy_cm1 - g.energy_cm1
    if de <= 0:
        reasons.append("zero transition energy")
    else:
        lam = pump_wavelength(de)
        lo, hi = constraints.pump_window_nm
        if not lo <= lam <= hi:
            reasons.append(f"pump window ({lam:.3f} nm outside {lo:g}-{hi:g} nm)")
    if constraints.require_intermediate_path and not intermediate_levels(
            levels, g, e, constraints.relax_intermediate_energy):
        reasons.append("no intermediate path")
    return reasons


def _population_lookup(populations):
    if populations is None:
        return None
    if hasattr(populations, "as_dict"):
        return populations.as_dict()
    return dict(populations)


def find_candidates(levels, lines, populations=None, constraints=SearchConstraints(),
                    weights=ScoreWeights()):
    """Ranked two-photon candidates.

    Sorted by descending score; ties go to the larger lower-level population,
    then the smaller transition energy, then lexical (lower, upper) ids.
    """
    if levels is None or len(levels) == 0:
        raise ValidationError("empty level table")
    pops = _population_lookup(populations)
    lo_nm, hi_nm = constraints.pump_window_nm
    ordered = list(levels)
    found = []
    for a, g in enumerate(ordered):
        for e in ordered[a + 1:]:
            de = e.energy_cm1 - g.energy_cm1
            if de <= 0:
                continue
            if two_photon_violations(g, e, constraints.apply_J_rule):
                continue
            lam = pump_wavelength(de)
            if not lo_nm <= lam <= hi_nm:
                continue
            inter = intermediate_levels(levels, g, e, constraints.relax_intermediate_energy)
            if constraints.require_intermediate_path and not inter:
                continue
            nl = pops.get(g.id) if pops is not None else None
            nu = pops.get(e.id) if pops is not None else None
            cand = CandidateTransition(
                lower=g.id, upper=e.id, transition_energy=de, pump_wavelength=lam,
                degenerate_photon_wavelength=2 * lam, intermediates=tuple(inter),
                lower_population=nl, upper_population=nu,
                fluorescence=tuple(fluorescence_lines(e.id, lines)),
            )
            ranked = nl is not None and nl > 0
            found.append(replace(cand, score=score_candidate(cand, weights), ranked=ranked))
    found.sort(key=lambda c: (-c.score, -(c.lower_population or 0.0),
                              c.transition_energy, c.lower, c.upper))
    return found


CSV_COLUMNS = ("lower_id", "upper_id", "E_cm1", "pump_nm", "biphoton_nm", "n_intermediates",
               "best_fluor_nm", "best_branch", "score")


def candidates_csv(candidates):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for c in candidates:
        d = c.to_dict()
        w.writerow([c.lower, c.upper, repr(c.transition_energy), repr(c.pump_wavelength),
                    repr(c.degenerate_photon_wavelength), len(c.intermediates),
                    "" if d["best_fluor_nm"] is None else repr(d["best_fluor_nm"]),
                    "" if d["best_branch"] is None else repr(d["best_branch"]),
                    repr(c.score)])
    return buf.getvalue()


def candidates_json(candidates):
    return json.dumps([c.to_dict() for c in candidates], indent=2)
