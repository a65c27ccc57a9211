"""Fast exact rationals for inner loops.

``gmpy2.mpq`` when available, else ``fractions.Fraction``. Values leaving
the inner loops are converted back to ``Fraction`` so public results never
depend on which one was used.
"""

from fractions import Fraction

try:
    from gmpy2 import mpq as Q
except ImportError:  # pragma: no cover - exercised only without gmpy2
    Q = Fraction


def q(p: Fraction):
    return Q(p.numerator, p.denominator)


def frac(x) -> Fraction:
    return Fraction(int(x.numerator), int(x.denominator))
