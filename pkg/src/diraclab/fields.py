"""Sparse polynomial fields with values in the spaces of the complex.

A field is a finite sum of monomials ``x^alpha`` times a coefficient array.
The exponent tuple has length k*n, indexed row-major by (vector variable A,
direction j).  Coefficient arrays carry the tensor axes of the value space
first and the spinor axis last, so a V2 coefficient has shape (k, k, k, s).

Differentiation and the gamma contractions are exact in double precision
(derivatives multiply by small integers and the gamma entries lie in
{0, +-1, +-i}), which is what makes polynomial fields the right test bed for
the algebraic operator identities.
"""

from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from . import weyl

#: space tag -> (tensor order, chirality (+1 for S+, -1 for S-), membership tag)
SPACE_INFO = {
    "V0": (0, +1, None),
    "V1": (1, -1, None),
    "V2": (3, -1, "21"),
    "V3p": (4, +1, "22"),
    "V3pp": (5, -1, "311"),
    "S+": (0, +1, None),
    "S-": (0, -1, None),
}

MEMBERSHIP_TOL = 1e-10


@dataclass
class PolyField:
    """Polynomial map R^{kn} -> (value space) x S+/-.

    Attributes
    ----------
    k, n : int
        Number of vector variables and spatial dimension.
    space : str
        Value-space tag, a key of :data:`SPACE_INFO`.
    terms : dict
        Exponent tuple (length k*n) -> complex coefficient array of shape
        ``(k,)*order + (s,)``.  Zero coefficients are never stored.
    """

    k: int
    n: int
    space: str
    terms: Dict[Tuple[int, ...], np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if self.space not in SPACE_INFO:
            raise ValueError(f"unknown value space {self.space!r}")

    @property
    def order(self):
        return SPACE_INFO[self.space][0]

    @property
    def chirality(self):
        return SPACE_INFO[self.space][1]

    def coeff_shape(self, s_dim):
        return (self.k,) * self.order + (s_dim,)

    def norm(self):
        return float(
            np.sqrt(sum(float((np.abs(v) ** 2).sum()) for v in self.terms.values()))
        )

    def degree(self):
        return max((sum(e) for e in self.terms), default=-1)

    def copy(self):
        return PolyField(self.k, self.n, self.space, {e: v.copy() for e, v in self.terms.items()})

    def __add__(self, other):
        return _linear_combination(self, other, 1.0)

    def __sub__(self, other):
        return _linear_combination(self, other, -1.0)

    def scale(self, a):
        return PolyField(self.k, self.n, self.space, {e: a * v for e, v in self.terms.items()})

    def membership_residual(self):
        """Largest characterization residual among the coefficient arrays."""
        lam = SPACE_INFO[self.space][2]
        if lam is None or not self.terms:
            return 0.0
        return max(weyl.check_membership(lam, v) for v in self.terms.values())

    def validate(self, tol=MEMBERSHIP_TOL):
        res = self.membership_residual()
        if res > tol:
            raise ValueError(
                f"coefficients violate the {self.space} characterization "
                f"(residual {res:.3e} > {tol:.1e})"
            )
        return self


def _linear_combination(f, g, sign):
    # V0 and S+ (etc.) are the same underlying space; compare structure
    if (f.k, f.n, SPACE_INFO[f.space]) != (g.k, g.n, SPACE_INFO[g.space]):
        raise ValueError("fields live in different spaces")
    space = f.space if f.space == g.space else ("S+" if f.chirality > 0 else "S-")
    if f.order > 0 and f.space != g.space:
        raise ValueError("fields live in different spaces")
    terms = {e: v.copy() for e, v in f.terms.items()}
    for e, v in g.terms.items():
        if e in terms:
            terms[e] = terms[e] + sign * v
        else:
            terms[e] = sign * v
    return make_field(f.k, f.n, space, terms, validate=False)


def make_field(k, n, space, terms, validate=True, tol=MEMBERSHIP_TOL):
    """Build a field in canonical sparse form (exact zero coefficients dropped)."""
    clean = {}
    for e, v in terms.items():
        v = np.asarray(v, dtype=complex)
        if np.any(v != 0):
            clean[tuple(int(x) for x in e)] = v
    out = PolyField(k, n, space, clean)
    if validate and SPACE_INFO[space][2] is not None:
        out.validate(tol)
    return out


def zero_field(k, n, space):
    return PolyField(k, n, space, {})


def random_field(rng, k, n, space, rep, degree=3, nterms=8):
    """Seeded random field; V2/V3 coefficients are projected into the module.

    Monomials are drawn with total degree <= `degree`; coefficients are
    standard complex Gaussians, with the membership projector applied when
    the value space requires it.
    """
    order, _, lam = SPACE_INFO[space]
    s = rep.s_dim
    terms = {}
    for _ in range(nterms):
        d = int(rng.integers(0, degree + 1))
        expo = [0] * (k * n)
        for _ in range(d):
            expo[int(rng.integers(0, k * n))] += 1
        expo = tuple(expo)
        coeff = rng.standard_normal((k,) * order + (s,)) + 1j * rng.standard_normal(
            (k,) * order + (s,)
        )
        if lam is not None:
            letters = weyl.PARTITIONS[lam][2]
            coeff = np.ascontiguousarray(
                _project(coeff, lam, letters)
            )
        terms[expo] = terms.get(expo, 0) + coeff
    return make_field(k, n, space, terms)


def _project(coeff, lam, letters):
    from .tensoridx import apply_terms

    return apply_terms(coeff, weyl.projector_terms(lam), letters)


def evaluate(f, x):
    """Evaluate a field at a point x (flat array of length k*n)."""
    x = np.asarray(x, dtype=float)
    out = 0.0
    for e, v in f.terms.items():
        mono = np.prod([xi**p for xi, p in zip(x, e)])
        out = out + mono * v
    return out
