"""Regenerate the synthetic sample tables shipped in etpa_toolkit/data.

The argon rate coefficients come from simple textbook fits (a Lotz-like
ionization formula, Seaton radiative recombination, and a three-body term
evaluated at n_e = 3e13 cm^-3). They reproduce the qualitative charge-state
structure of argon only and must not be used for quantitative work.
"""
import csv
import math
from pathlib import Path

import numpy as np

from etpa_toolkit.atomic import parse_level_table, single_photon_allowed

DATA = Path(__file__).resolve().parents[1] / "src" / "etpa_toolkit" / "data"

# ionization potentials of Ar^z+ (eV), rounded
IP = [15.760, 27.630, 40.735, 59.58, 74.84, 91.29, 124.41, 143.46, 422.60,
      479.76, 540.4, 619.0, 685.5, 755.1, 855.5, 918.4, 4120.7, 4426.2]
DENSITY = 3e13
# tables must stay positive for log-log interpolation
FLOOR = 1e-300


def outer_electrons(z):
    n = 18 - z
    if n > 10:
        return n - 10 if n <= 12 else n - 12  # 3p, else 3s
    if n > 2:
        return n - 2  # L shell
    return n


def ionization(z, te):
    i = IP[z]
    x = te / i
    value = 1e-5 * outer_electrons(z) * math.sqrt(x) / (i**1.5 * (6.0 + x)) * math.exp(-i / te)
    return max(value, FLOOR)


def recombination(z, te):
    """Effective recombination into Ar^(z-1)+ from Ar^z+."""
    x = IP[z - 1] / te
    radiative = 5.2e-14 * z * math.sqrt(x) * (0.43 + 0.5 * math.log(x) + 0.469 * x ** (-1 / 3))
    three_body = 8.75e-27 * z**3 * te**-4.5 * DENSITY
    return radiative + three_body


def write_rates():
    grid = np.geomspace(0.5, 5000.0, 61)
    with open(DATA / "ar_rate_coefficients.csv", "w", newline="") as fh:
        fh.write("# Synthetic Ar effective rate coefficients at n_e = 3e13 cm^-3.\n")
        fh.write("# Qualitative only; generated by scripts/make_sample_data.py.\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["z", "kind", "Te_eV", "coeff_cm3s"])
        for z in range(18):
            for te in grid:
                w.writerow([z, "S", f"{te:.6g}", f"{ionization(z, te):.6e}"])
        for z in range(1, 19):
            for te in grid:
                w.writerow([z, "alpha", f"{te:.6g}", f"{recombination(z, te):.6e}"])


def write_collisions():
    levels = parse_level_table(DATA / "ar_ii_levels.csv")
    ids = list(levels)
    with open(DATA / "ar_ii_collisions.csv", "w", newline="") as fh:
        fh.write("# Synthetic effective collision strengths for the Ar II sample levels.\n")
        fh.write("# Dipole-allowed pairs get larger values; generated by scripts/make_sample_data.py.\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lower_id", "upper_id", "Te_eV", "upsilon"])
        for a, lo in enumerate(ids):
            for up in ids[a + 1:]:
                base = 2.0 if single_photon_allowed(lo, up) else 0.3
                for te in (1.0, 3.0, 10.0):
                    w.writerow([lo.id, up.id, f"{te:g}", f"{base * te**0.1:.4f}"])


if __name__ == "__main__":
    write_rates()
    write_collisions()
