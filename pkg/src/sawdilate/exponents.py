"""Exact critical exponents for the planar self-avoiding walk.

All values are exact rationals.  ``nu`` is the size exponent, ``gamma`` the
entropic exponent and ``rho`` the half-plane survival exponent; the two
dilation powers follow from them and are the exponents applied to the
per-sample dilation when reweighting boundary statistics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction


@dataclass(frozen=True)
class CriticalExponents:
    nu: Fraction = Fraction(3, 4)
    gamma: Fraction = Fraction(43, 32)
    rho: Fraction = Fraction(25, 64)
    p_radial: Fraction = field(default=Fraction(-61, 48))
    p_chordal: Fraction = field(default=Fraction(-3, 4))

    def __post_init__(self):
        if (self.rho - self.gamma) / self.nu != self.p_radial:
            raise ValueError("p_radial inconsistent with (rho - gamma)/nu")
        if (2 * self.rho - self.gamma) / self.nu != self.p_chordal:
            raise ValueError("p_chordal inconsistent with (2*rho - gamma)/nu")


EXPONENTS = CriticalExponents()

NU = float(EXPONENTS.nu)
GAMMA = float(EXPONENTS.gamma)
RHO = float(EXPONENTS.rho)
P_RADIAL = float(EXPONENTS.p_radial)
P_CHORDAL = float(EXPONENTS.p_chordal)
