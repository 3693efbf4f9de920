"""Exact 2x2 rational linear algebra: matrices, Smith forms, label classes,
and canonical coset representatives modulo GL(2,Z).

All arithmetic is exact; entries are `fractions.Fraction` values.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm

from .errors import SingularMatrixError, ZeroMatrixError

Rational = Fraction


@dataclass(frozen=True)
class Mat2:
    """A 2x2 matrix over the rationals with exact arithmetic."""

    a11: Fraction
    a12: Fraction
    a21: Fraction
    a22: Fraction

    def __mul__(self, other: "Mat2") -> "Mat2":
        return Mat2(
            self.a11 * other.a11 + self.a12 * other.a21,
            self.a11 * other.a12 + self.a12 * other.a22,
            self.a21 * other.a11 + self.a22 * other.a21,
            self.a21 * other.a12 + self.a22 * other.a22,
        )

    def __rmul__(self, scalar) -> "Mat2":
        s = Fraction(scalar)
        return Mat2(s * self.a11, s * self.a12, s * self.a21, s * self.a22)

    def __neg__(self) -> "Mat2":
        return Mat2(-self.a11, -self.a12, -self.a21, -self.a22)

    def det(self) -> Fraction:
        return self.a11 * self.a22 - self.a12 * self.a21

    def entries(self):
        return (self.a11, self.a12, self.a21, self.a22)

    def entry(self, i: int, j: int) -> Fraction:
        return self.entries()[2 * (i - 1) + (j - 1)]

    def is_zero(self) -> bool:
        return not any(self.entries())

    def is_identity(self) -> bool:
        return self == IDENTITY

    def is_integral(self) -> bool:
        return all(x.denominator == 1 for x in self.entries())

    def is_central(self) -> bool:
        return self.a12 == 0 and self.a21 == 0 and self.a11 == self.a22

    def inverse(self) -> "Mat2":
        d = self.det()
        if d == 0:
            raise SingularMatrixError(f"matrix {self} is singular")
        return Mat2(self.a22 / d, -self.a12 / d, -self.a21 / d, self.a11 / d)

    def int_entries(self):
        """Entries as plain ints; caller must ensure integrality."""
        return tuple(int(x) for x in self.entries())

    def __repr__(self):
        return f"[[{self.a11},{self.a12}],[{self.a21},{self.a22}]]"


def mat2(a11, a12, a21, a22) -> Mat2:
    return Mat2(Fraction(a11), Fraction(a12), Fraction(a21), Fraction(a22))


def central(r) -> Mat2:
    return mat2(r, 0, 0, r)


def diag(a, b) -> Mat2:
    return mat2(a, 0, 0, b)


IDENTITY = mat2(1, 0, 0, 1)
ZERO = mat2(0, 0, 0, 0)
# Standard generators of GL(2,Z): order-4 rotation, shear, reflection.
GEN_S = mat2(0, -1, 1, 0)
GEN_T = mat2(1, 1, 0, 1)
GEN_J = mat2(1, 0, 0, -1)
S0 = mat2(1, 0, 0, 0)


def mat_mul(a: Mat2, b: Mat2) -> Mat2:
    return a * b


def mat_inverse(a: Mat2) -> Mat2:
    return a.inverse()


def mat_pow(a: Mat2, n: int) -> Mat2:
    if n < 0:
        return mat_pow(a.inverse(), -n)
    result = IDENTITY
    base = a
    while n:
        if n & 1:
            result = result * base
        base = base * base
        n >>= 1
    return result


def in_gl2z(g: Mat2) -> bool:
    return g.is_integral() and abs(g.det()) == 1


def in_sl2z(g: Mat2) -> bool:
    return g.is_integral() and g.det() == 1


class LabelClass(enum.Enum):
    """Mutually exclusive matrix classes, tested in a fixed order so that
    overlapping predicates resolve deterministically."""

    IDENTITY = "Identity"
    GL2Z = "GL2Z"
    CENTRAL_NATURAL = "CentralNatural"
    CENTRAL_RATIONAL = "CentralRational"
    ZERO_MATRIX = "ZeroMatrix"
    SINGULAR_INTEGER = "SingularInteger"
    DET_ABS_GREATER_ONE = "DetAbsGreaterOne"
    OTHER_GL2Q = "OtherGL2Q"


def classify_label(g: Mat2) -> LabelClass:
    if g.is_identity():
        return LabelClass.IDENTITY
    if in_gl2z(g):
        return LabelClass.GL2Z
    if g.is_central() and g.a11.denominator == 1 and g.a11 >= 1:
        return LabelClass.CENTRAL_NATURAL
    if g.is_central() and g.a11 > 0:
        return LabelClass.CENTRAL_RATIONAL
    if g.is_zero():
        return LabelClass.ZERO_MATRIX
    if g.det() == 0 and g.is_integral():
        return LabelClass.SINGULAR_INTEGER
    if abs(g.det()) > 1:
        return LabelClass.DET_ABS_GREATER_ONE
    return LabelClass.OTHER_GL2Q


# Monoid tags for label validation.  A label is admitted if it is one of the
# generators of the monoid (expressions present their atoms at generator
# granularity).
MONOID_GL2Z = "GL2Z"
MONOID_P2Q = "P2Q"
MONOID_P = "P"
MONOID_PPRIME = "Pprime"

MONOIDS = (MONOID_GL2Z, MONOID_P2Q, MONOID_P, MONOID_PPRIME)


def label_in_monoid(g: Mat2, monoid: str) -> bool:
    """Whether a single matrix is an admissible atom for the given monoid.

    GL2Z: integer matrices of determinant +-1.
    P2Q:  GL2Z together with all rational matrices of |det| > 1.
    P:    generated by all central matrices, GL2Z, and integer det-0 matrices.
    Pprime: as P but only central matrices with a natural scalar.
    """
    if monoid == MONOID_GL2Z:
        return in_gl2z(g)
    if monoid == MONOID_P2Q:
        return in_gl2z(g) or abs(g.det()) > 1
    if monoid == MONOID_P:
        return g.is_central() or in_gl2z(g) or (g.is_integral() and g.det() == 0)
    if monoid == MONOID_PPRIME:
        if g.is_central():
            return g.a11.denominator == 1 and g.a11 >= 0
        return in_gl2z(g) or (g.is_integral() and g.det() == 0)
    raise ValueError(f"unknown monoid tag {monoid!r}")


@dataclass(frozen=True)
class SmithForm:
    """Factorization g = r * e * diag(1, q) * f with r > 0 rational,
    e and f in SL(2,Z), and q an integer.  (r, q) is unique."""

    r: Fraction
    e: Mat2
    q: int
    f: Mat2

    def reconstruct(self) -> Mat2:
        return self.r * (self.e * (diag(1, self.q) * self.f))


def _scalar_split(g: Mat2):
    """Write g = s * A with s > 0 rational and A a primitive integer matrix."""
    d = lcm(*(x.denominator for x in g.entries()))
    ints = [int(x * d) for x in g.entries()]
    c = gcd(*ints)
    a = Mat2(*(Fraction(x // c) for x in ints))
    return Fraction(c, d), a


def smith_normal_form(g: Mat2) -> SmithForm:
    """Exact Smith normal form of a nonzero rational 2x2 matrix.

    The integer part is reduced by extended-gcd row/column operations; the
    unimodular transforms are accumulated as products of SL(2,Z) elementary
    matrices, and any leftover sign is folded into q.
    """
    if g.is_zero():
        raise ZeroMatrixError("the zero matrix has no Smith normal form")
    s, a = _scalar_split(g)
    w = list(a.int_entries())  # [w11, w12, w21, w22]
    e = IDENTITY
    f = IDENTITY

    def row_op(x, y, z, t):
        # w <- L*w for L = [[x,y],[z,t]] in SL(2,Z); e <- e*L^-1.
        nonlocal w, e
        w = [
            x * w[0] + y * w[2],
            x * w[1] + y * w[3],
            z * w[0] + t * w[2],
            z * w[1] + t * w[3],
        ]
        e = e * mat2(t, -y, -z, x)

    def col_op(x, y, z, t):
        # w <- w*R for R = [[x,y],[z,t]] in SL(2,Z); f <- R^-1*f.
        nonlocal w, f
        w = [
            w[0] * x + w[1] * z,
            w[0] * y + w[1] * t,
            w[2] * x + w[3] * z,
            w[2] * y + w[3] * t,
        ]
        f = mat2(t, -y, -z, x) * f

    def ext_gcd(p, q):
        # returns (g, x, y) with x*p + y*q = g
        if q == 0:
            return (abs(p), 1 if p >= 0 else -1, 0)
        g0, x0, y0 = ext_gcd(q, p % q)
        return (g0, y0, x0 - (p // q) * y0)

    while True:
        if w[0] == 0:
            if w[2] != 0:
                row_op(0, -1, 1, 0)
            elif w[1] != 0:
                col_op(0, -1, 1, 0)
            elif w[3] != 0:
                row_op(0, -1, 1, 0)
                col_op(0, -1, 1, 0)
            else:
                break  # zero matrix cannot occur: a is primitive
        # clear the first column, then the first row; repeat until stable.
        # shears leave the opposite triangle untouched, so prefer them when
        # the pivot divides the entry; the gcd transform strictly shrinks
        # the pivot otherwise, which bounds the loop.
        if w[2] != 0:
            if w[2] % w[0] == 0:
                row_op(1, 0, -(w[2] // w[0]), 1)
            else:
                d0, x, y = ext_gcd(w[0], w[2])
                row_op(x, y, -(w[2] // d0), w[0] // d0)
            continue
        if w[1] != 0:
            if w[1] % w[0] == 0:
                col_op(1, -(w[1] // w[0]), 0, 1)
            else:
                d0, x, y = ext_gcd(w[0], w[1])
                col_op(x, -(w[1] // d0), y, w[0] // d0)
            continue
        if w[3] % w[0] != 0:
            col_op(1, 0, 1, 1)
            continue
        break

    if w[0] < 0:
        row_op(-1, 0, 0, -1)
    if w[0] != 1:
        # a is primitive, so the first invariant factor is 1
        raise AssertionError(f"primitive part reduced to diag({w[0]},{w[3]})")
    return SmithForm(r=s, e=e, q=w[3], f=f)


def coset_canonical(g: Mat2) -> Mat2:
    """Canonical representative of the coset g*GL(2,Z).

    Writes g = s*A with s > 0 and A primitive integral, then column-reduces A
    by right GL(2,Z) action to the unique lower-triangular form [[a,0],[c,d]]
    with a,d > 0 and 0 <= c < d.  Two matrices get equal representatives
    exactly when they differ by right multiplication with GL(2,Z).
    """
    if g.det() == 0:
        raise SingularMatrixError("coset representative requires det != 0")
    s, mat = _scalar_split(g)
    w = list(mat.int_entries())

    def col_op(x, y, z, t):
        nonlocal w
        w = [
            w[0] * x + w[1] * z,
            w[0] * y + w[1] * t,
            w[2] * x + w[3] * z,
            w[2] * y + w[3] * t,
        ]

    # zero out the top-right entry via a gcd transform on the top row
    p, q = w[0], w[1]
    if q != 0:
        def ext_gcd(p0, q0):
            if q0 == 0:
                return (abs(p0), 1 if p0 >= 0 else -1, 0)
            g0, x0, y0 = ext_gcd(q0, p0 % q0)
            return (g0, y0, x0 - (p0 // q0) * y0)

        d0, x, y = ext_gcd(p, q)
        col_op(x, -(q // d0), y, p // d0)
    if w[0] < 0:
        col_op(-1, 0, 0, 1)
    if w[3] < 0:
        col_op(1, 0, 0, -1)
    w[2] %= w[3]
    return s * mat2(*w)
