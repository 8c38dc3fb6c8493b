import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from etpa_toolkit.errors import DimensionError, DomainError, UnitSystemError
from etpa_toolkit.quantities import XS_ENTANGLED, Quantity
from etpa_toolkit.rates import (
    BeamGeometry, CWLaser, PulsedLaser, TargetSpecies, build_rate_report, classical_tpa_rate,
    critical_flux, etpa_cross_section, etpa_rate, etpa_rate_terms, mixed_unit_reproduction,
    photon_flux, time_averaged_pulsed_rate,
)

PLANCK = 6.62607015e-34
LIGHT = 299792458.0
SIGMA_C = Quantity(1e-48, "cm4 s")
CW = CWLaser(Quantity(1, "W"), Quantity(400, "nm"))
PULSED = PulsedLaser(Quantity(100, "mJ"), Quantity(100, "ps"), Quantity(10, "Hz"),
                     Quantity(400, "nm"))
SPOT = BeamGeometry(Quantity(10, "um"))


def xs_e(v, unit="cm2"):
    return Quantity(v, unit, XS_ENTANGLED)


def flux_oracle(power, wl, d):
    return power * wl / (PLANCK * LIGHT * math.pi * d * d / 4)


def test_cw_flux():
    avg = photon_flux(CW, SPOT).average.value_in("m-2 s-1")
    assert avg == pytest.approx(flux_oracle(1.0, 400e-9, 10e-6), rel=1e-12)
    assert avg == pytest.approx(2.56e28, rel=0.01)
    assert 1e28 <= avg <= 5e28


def test_pulsed_flux():
    f_cw, f_p = photon_flux(CW, SPOT), photon_flux(PULSED, SPOT)
    assert PULSED.average_power.si == pytest.approx(1.0, rel=1e-12)
    assert f_p.average.si == pytest.approx(f_cw.average.si, rel=1e-12)
    assert f_p.peak.si / f_p.average.si == pytest.approx(1e9, rel=1e-12)
    assert f_cw.peak.si == f_cw.average.si


def test_flux_area_scaling():
    half = BeamGeometry(Quantity(5, "um"))
    assert photon_flux(CW, half).average.si == pytest.approx(4 * photon_flux(CW, SPOT).average.si,
                                                             rel=1e-12)


def test_source_invariants():
    with pytest.raises(DomainError):
        PulsedLaser(Quantity(1, "J"), Quantity(1, "s"), Quantity(10, "Hz"), Quantity(400, "nm"))
    with pytest.raises(DomainError):
        CWLaser(Quantity(0, "W"), Quantity(400, "nm"))
    with pytest.raises(DomainError):
        BeamGeometry(Quantity(0, "um"))
    with pytest.raises(DomainError):
        TargetSpecies("x", Quantity(0, "cm4 s"))
    with pytest.raises(DimensionError):
        CWLaser(Quantity(1, "J"), Quantity(400, "nm"))


def test_classical_rate_cw_consistent_units():
    phi = photon_flux(CW, SPOT).average.to("cm-2 s-1")
    assert phi.magnitude == pytest.approx(2.56e24, rel=0.01)
    r = classical_tpa_rate(SIGMA_C, phi).value_in("s-1")
    assert r == pytest.approx(1e-48 * phi.magnitude**2, rel=1e-12)
    assert r == pytest.approx(6.6, rel=0.01)


def test_classical_rate_unit_invariance():
    phi = photon_flux(CW, SPOT).average
    r_si = classical_tpa_rate(SIGMA_C.to("m4 s"), phi).si
    r_cgs = classical_tpa_rate(SIGMA_C, phi.to("cm-2 s-1")).si
    assert r_si == pytest.approx(r_cgs, rel=1e-10)


def test_mixed_systems_rejected():
    with pytest.raises(UnitSystemError):
        classical_tpa_rate(SIGMA_C, photon_flux(CW, SPOT).average)
    with pytest.raises(UnitSystemError):
        etpa_rate(xs_e(1e-28), SIGMA_C, Quantity(1, "m-2 s-1"))
    with pytest.raises(UnitSystemError):
        critical_flux(xs_e(1e-32, "m2"), SIGMA_C)


def test_classical_rate_trivial_cases():
    assert classical_tpa_rate(SIGMA_C, Quantity(0, "cm-2 s-1")).si == 0.0
    r1 = classical_tpa_rate(SIGMA_C, Quantity(1e20, "cm-2 s-1")).si
    r2 = classical_tpa_rate(SIGMA_C, Quantity(2e20, "cm-2 s-1")).si
    assert r2 == pytest.approx(4 * r1, rel=1e-14)


def test_pulsed_average_rate():
    r = time_averaged_pulsed_rate(SIGMA_C, PULSED, SPOT).value_in("s-1")
    peak = photon_flux(PULSED, SPOT).peak.value_in("cm-2 s-1")
    assert peak == pytest.approx(2.56e33, rel=0.01)
    assert r == pytest.approx(1e-48 * peak**2 * 1e-9, rel=1e-12)
    assert r == pytest.approx(6.6e9, rel=0.01)
    r_cw = classical_tpa_rate(SIGMA_C, photon_flux(CW, SPOT).average.to("cm-2 s-1")).si
    assert r / r_cw == pytest.approx(1e9, rel=1e-10)


def test_duty_one_is_cw_limit():
    src = PulsedLaser(Quantity(1, "J"), Quantity(0.1, "s"), Quantity(10, "Hz"), Quantity(400, "nm"))
    assert src.duty == pytest.approx(1.0)
    peak = photon_flux(src, SPOT).peak.to("cm-2 s-1")
    assert time_averaged_pulsed_rate(SIGMA_C, src, SPOT).si == pytest.approx(
        classical_tpa_rate(SIGMA_C, peak).si, rel=1e-12)


def test_etpa_cross_section_examples():
    s = etpa_cross_section(SIGMA_C, Quantity(1e-6, "cm2"), Quantity(10, "fs"))
    assert s.unit == "cm2" and s.dimension == XS_ENTANGLED
    assert s.magnitude == pytest.approx(1e-28, rel=1e-12)
    s_half = etpa_cross_section(SIGMA_C, Quantity(1e-6, "cm2"), Quantity(5, "fs"))
    assert s_half.magnitude == pytest.approx(2e-28, rel=1e-12)
    s_si = etpa_cross_section(Quantity(1e-56, "m4 s"), Quantity(1e-10, "m2"), Quantity(1e-14, "s"))
    assert s_si.value_in("m2") == pytest.approx(1e-32, rel=1e-12)
    assert s_si.value_in("cm2") == pytest.approx(1e-28, rel=1e-12)
    with pytest.raises(DomainError):
        etpa_cross_section(SIGMA_C, Quantity(0, "cm2"), Quantity(10, "fs"))


def test_critical_flux_examples():
    assert critical_flux(xs_e(1e-28), SIGMA_C).value_in("cm-2 s-1") == pytest.approx(1e20, rel=1e-12)
    assert critical_flux(xs_e(0.0), SIGMA_C).si == 0.0


def test_rate_law_regimes():
    se = xs_e(1e-28)
    lin, quad = etpa_rate_terms(se, SIGMA_C, Quantity(1e15, "cm-2 s-1"))
    r = etpa_rate(se, SIGMA_C, Quantity(1e15, "cm-2 s-1")).si
    assert r == pytest.approx(lin.si, rel=0.01)
    phic = critical_flux(se, SIGMA_C)
    lin, quad = etpa_rate_terms(se, SIGMA_C, phic)
    assert lin.si == pytest.approx(quad.si, rel=1e-12)
    assert etpa_rate(se, SIGMA_C, phic).si == pytest.approx(2 * 1e-48 * 1e40, rel=1e-12)
    phi = Quantity(3e22, "cm-2 s-1")
    assert etpa_rate(xs_e(0.0), SIGMA_C, phi).si == classical_tpa_rate(SIGMA_C, phi).si


@given(st.floats(1e10, 1e30))
def test_rate_monotone_in_flux(phi):
    se = xs_e(1e-28)
    a = etpa_rate(se, SIGMA_C, Quantity(phi, "cm-2 s-1")).si
    b = etpa_rate(se, SIGMA_C, Quantity(phi * 1.5, "cm-2 s-1")).si
    assert b > a


@given(st.floats(-60, -40), st.floats(-32, -24), st.floats(10, 30))
def test_rate_unit_invariance(lxc, lxe, lphi):
    sc, se, phi = 10.0**lxc, 10.0**lxe, 10.0**lphi
    r_cgs = etpa_rate(xs_e(se), Quantity(sc, "cm4 s"), Quantity(phi, "cm-2 s-1")).si
    r_si = etpa_rate(xs_e(se).to("m2"), Quantity(sc, "cm4 s").to("m4 s"),
                     Quantity(phi, "cm-2 s-1").to("m-2 s-1")).si
    assert r_si == pytest.approx(r_cgs, rel=1e-10)


def test_mixed_unit_reproduction():
    cw = mixed_unit_reproduction(CW, SPOT, SIGMA_C)
    assert cw["discrepancy_factor"] == pytest.approx(1e8, rel=1e-10)
    assert 1e8 <= cw["mixed_unit_rate_s-1"] < 1e9
    pulsed = mixed_unit_reproduction(PULSED, SPOT, SIGMA_C)
    assert pulsed["discrepancy_factor"] == pytest.approx(1e8, rel=1e-10)
    assert 1e17 <= pulsed["mixed_unit_rate_s-1"] < 1e18


def test_rate_report_units():
    from etpa_toolkit.biphoton import PumpLaser, SPDCConfig, biphoton_field
    bp = biphoton_field(PumpLaser(Quantity(400, "nm"), Quantity(1, "W")),
                        SPDCConfig(Quantity(1e14, "Hz"), entangled_area=Quantity(1e-6, "cm2"),
                                   conversion_efficiency=1e-10))
    rep = build_rate_report(CW, SPOT, TargetSpecies("Ar+", SIGMA_C), bp)
    for _, q in rep.quantities():
        assert isinstance(q, Quantity) and q.unit
    assert rep.entangled_cross_section.value_in("cm2") == pytest.approx(1e-28, rel=1e-12)
    assert rep.critical_flux.value_in("cm-2 s-1") == pytest.approx(1e20, rel=1e-12)
    assert rep.peak_to_average == 1.0
    d = rep.to_dict()
    assert d["laser_mode"] == "cw" and any("1e+08" in n for n in d["notes"])
