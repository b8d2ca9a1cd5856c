"""GL(k) Weyl-module projectors and Young symmetrizers for the value spaces.

Three irreducible modules appear in the first segment of the complex, labeled
by the partitions (2,1), (2,2) and (3,1,1).  Each is realized inside a tensor
power of C^k in two independent ways:

* as the image of an index-formula projector ``C_lam`` written with
  skew-symmetrized brackets (:func:`projector_c21` and friends), and
* as the image of the normalized Young symmetrizer ``c_lam`` acting on basis
  tensors from the right (:func:`young_symmetrizer`).

Letter/slot convention, frozen throughout the package: tensor components are
written ``h[A,B,C]``, ``h[D,A,B,C]``, ``h[E,D,A,B,C]`` with the first axis
most significant under row-major flattening.  The tableau letters map to
group-algebra positions ``m, m-1, ..., 1`` from the left, so right actions on
basis tensors become explicit slot permutations.
"""

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .tensoridx import (
    apply_terms,
    combine_terms,
    perm_sign,
    relabel_sum,
    scale_terms,
    skew_bracket,
    terms_matrix,
)

#: partition tag -> (partition, tensor order, output letters)
PARTITIONS = {
    "21": ((2, 1), 3, "ABC"),
    "22": ((2, 2), 4, "DABC"),
    "311": ((3, 1, 1), 5, "EDABC"),
}

# tableau data: 1-based position sets for row symmetrization and column
# antisymmetrization, plus the factor making the symmetrizer idempotent
_TABLEAU = {
    "21": ([(1, 2)], [(1, 3)], 3),
    "22": ([(1, 2), (3, 4)], [(1, 3), (2, 4)], 12),
    "311": ([(1, 2, 4)], [(1, 3, 5)], 20),
}

_RANK_RTOL = 1e-9  # relative singular-value cutoff, shared across the package
_FULL_SVD_MAX = 1300  # above this, use trace rank + randomized range finding


@dataclass(frozen=True)
class TensorSpace:
    """Flattened tensor power (C^k)^{(x) m}, first index most significant."""

    k: int
    m: int

    @property
    def dim(self):
        return self.k**self.m

    def flatten(self, tensor):
        tensor = np.asarray(tensor)
        return tensor.reshape((self.dim,) + tensor.shape[self.m :])

    def unflatten(self, vec):
        vec = np.asarray(vec)
        return vec.reshape((self.k,) * self.m + vec.shape[1:])


@dataclass(frozen=True)
class WeylSpace:
    """A Weyl module: projector matrix plus an orthonormal image basis.

    Attributes
    ----------
    k : int
        Number of vector variables.
    lam : str
        Partition tag, one of ``"21"``, ``"22"``, ``"311"``.
    m : int
        Tensor order (3, 4 or 5).
    projector : ndarray, shape (k**m, k**m)
        The index-formula projector, idempotent.
    basis : ndarray, shape (k**m, dim)
        Orthonormal columns spanning the image.
    dim : int
        Module dimension.
    """

    k: int
    lam: str
    m: int
    projector: np.ndarray
    basis: np.ndarray
    dim: int


@lru_cache(maxsize=None)
def projector_terms(lam):
    """Signed-permutation expansion of the index-formula projector."""
    if lam == "21":
        base = skew_bracket("ABC", [0, 2])
        terms = scale_terms(relabel_sum(base, ("B", "C")), Fraction(2, 3))
    elif lam == "22":
        base = skew_bracket("DABC", [1, 3]) + skew_bracket("BCDA", [1, 3])
        terms = relabel_sum(base, ("A", "D"))
        terms = scale_terms(relabel_sum(terms, ("B", "C")), Fraction(1, 6))
    elif lam == "311":
        base = skew_bracket("EDABC", [0, 2, 4])
        terms = scale_terms(relabel_sum(base, ("D", "B", "C")), Fraction(3, 10))
    else:
        raise ValueError(f"unsupported partition tag {lam!r}")
    return tuple(combine_terms(terms))


def _image_basis(proj, rtol=_RANK_RTOL):
    """Orthonormal basis of the column space of an idempotent matrix.

    Small matrices go through a full SVD.  Large ones use the fact that an
    idempotent has eigenvalues in {0, 1}: the rank equals round(trace), and a
    seeded random sketch of that width captures the column space, certified
    afterwards by ``P @ B == B``.
    """
    size = proj.shape[0]
    if size <= _FULL_SVD_MAX:
        u, s, _ = np.linalg.svd(proj)
        if s.size == 0 or s[0] == 0.0:
            return np.zeros((size, 0))
        d = int((s > rtol * s[0]).sum())
        basis = u[:, :d]
    else:
        rank = int(round(np.trace(proj)))
        if rank == 0:
            return np.zeros((size, 0))
        rng = np.random.default_rng(0x5EED)  # fixed seed: bases are reproducible
        sketch = proj @ rng.standard_normal((size, min(size, rank + 16)))
        u, s, _ = np.linalg.svd(sketch, full_matrices=False)
        d = int((s > rtol * s[0]).sum())
        if d != rank:
            raise ArithmeticError(
                f"sketch rank {d} disagrees with trace rank {rank}"
            )
        basis = u[:, :d]
    defect = np.abs(proj @ basis - basis).max() if basis.size else 0.0
    if defect > 1e-8:
        raise ArithmeticError(f"image basis certification failed ({defect:.2e})")
    return basis


@lru_cache(maxsize=None)
def weyl_space(k, lam):
    """Build the Weyl module for partition `lam` over C^k."""
    if lam not in PARTITIONS:
        raise ValueError(f"unsupported partition tag {lam!r}")
    if k < 2:
        raise ValueError(f"need k >= 2 vector variables, got {k}")
    _, m, letters = PARTITIONS[lam]
    proj = terms_matrix(projector_terms(lam), letters, k)
    basis = _image_basis(proj)
    proj.setflags(write=False)
    basis.setflags(write=False)
    return WeylSpace(k=k, lam=lam, m=m, projector=proj, basis=basis, dim=basis.shape[1])


def projector_c21(k):
    return weyl_space(k, "21")


def projector_c22(k):
    return weyl_space(k, "22")


def projector_c311(k):
    return weyl_space(k, "311")


def _slot_map(sigma, m):
    # right action on basis tensors: the label at position p moves to
    # position sigma(p); slots count from the left, slot s <-> position m-s
    return tuple(m - sigma[m - t] for t in range(m))


def _group_terms(position_sets, m, signed):
    """Terms of the (anti)symmetrizer over products of position sets."""
    terms = [(1, tuple(range(m)))]
    for support in position_sets:
        elems = []
        for perm in itertools.permutations(support):
            sigma = {p: p for p in range(1, m + 1)}
            for a, b in zip(support, perm):
                sigma[a] = b
            sign = perm_sign([support.index(b) for b in perm]) if signed else 1
            elems.append((sign, _slot_map(sigma, m)))
        terms = [
            (c1 * c2, tuple(g1[g2[t]] for t in range(m)))
            for c1, g1 in terms
            for c2, g2 in elems
        ]
    return terms


@lru_cache(maxsize=None)
def young_terms(lam, normalized=True):
    """Signed-permutation expansion of the Young symmetrizer right action.

    The column antisymmetrizer acts first, the row symmetrizer second, as in
    the defining right action on basis tensors.
    """
    if lam not in _TABLEAU:
        raise ValueError(f"unsupported partition tag {lam!r}")
    rows, cols, norm = _TABLEAU[lam]
    m = PARTITIONS[lam][1]
    col_terms = _group_terms(cols, m, signed=True)
    row_terms = _group_terms(rows, m, signed=False)
    letters = PARTITIONS[lam][2]
    out = []
    for c_r, g_r in row_terms:
        for c_c, g_c in col_terms:
            g = tuple(g_r[g_c[t]] for t in range(m))
            coeff = Fraction(c_r * c_c, norm if normalized else 1)
            out.append((coeff, "".join(letters[p] for p in g)))
    return tuple(combine_terms(out))


def young_symmetrizer(k, lam, normalized=True):
    """Matrix of the Young symmetrizer on the flattened tensor space.

    With ``normalized=True`` the idempotency factor (3, 12 or 20 depending on
    the partition) is included, making the result a projection matrix.
    """
    if k < 2:
        raise ValueError(f"need k >= 2 vector variables, got {k}")
    if lam not in PARTITIONS:
        raise ValueError(f"unsupported partition tag {lam!r}")
    letters = PARTITIONS[lam][2]
    return terms_matrix(young_terms(lam, normalized=normalized), letters, k)


def young_eigenvalue(k, lam):
    """Measured nonzero eigenvalue of the unnormalized symmetrizer.

    For an operator satisfying ``M @ M = n M`` this is ``trace(M @ M) /
    trace(M)``; returns nan for the zero operator (degenerate small-k cases).
    """
    mat = young_symmetrizer(k, lam, normalized=False)
    tr = np.trace(mat)
    if abs(tr) < 1e-12:
        return float("nan")
    tr_sq = np.einsum("ij,ji->", mat, mat)
    return float(tr_sq / tr)


def check_membership(lam, h, k=None):
    """Characterization residual of a tensor against the module `lam`.

    Parameters
    ----------
    lam : str
        Partition tag.
    h : ndarray
        Either tensor-shaped, ``(k,)*m`` plus optional trailing axes, or flat
        of length ``k**m`` (then `k` must be given or inferable).

    Returns
    -------
    float
        Norm of (characterization left side) - (characterization right side);
        at most ~1e-10 exactly when h lies in the module.  For lam="21" the
        symmetry of the last two indices is included in the residual.
    """
    if lam not in PARTITIONS:
        raise ValueError(f"unsupported partition tag {lam!r}")
    _, m, letters = PARTITIONS[lam]
    h = np.asarray(h)
    if h.ndim >= m and len(set(h.shape[:m])) == 1:
        k = h.shape[0]
    elif k is not None:
        h = h.reshape((k,) * m + h.shape[1:])
    else:
        raise ValueError(f"tensor of order {m} expected, got shape {h.shape}")
    if h.shape[:m] != (k,) * m:
        raise ValueError(f"order mismatch: {lam} needs {m} tensor axes")
    proj = apply_terms(h, projector_terms(lam), letters)
    # prefactor of the characterization display: 3/2 for (2,1), 1 for (2,2),
    # 10/3 for (3,1,1)
    prefactor = {"21": 1.5, "22": 1.0, "311": 10.0 / 3.0}[lam]
    residual = prefactor * np.linalg.norm(proj - h)
    if lam == "21":
        sym_defect = np.linalg.norm(h - np.swapaxes(h, 1, 2))
        residual = max(residual, sym_defect)
    return float(residual)


def weyl_dim(k, lam):
    """Dimension of the GL(k) module for partition `lam` (product formula).

    Independent of the projector construction; serves as the rank oracle.
    """
    parts = list(PARTITIONS[lam][0]) if lam in PARTITIONS else list(lam)
    if len([p for p in parts if p > 0]) > k:
        return 0
    parts = parts + [0] * (k - len(parts))
    out = Fraction(1)
    for i in range(k):
        for j in range(i + 1, k):
            out *= Fraction(parts[i] - parts[j] + j - i, j - i)
    assert out.denominator == 1
    return int(out)


def principal_angles(basis_a, basis_b):
    """Principal angles (radians) between two orthonormal column spans.

    Computed from the sine (projection defect), which keeps full precision
    for nearly identical subspaces where the cosine formula saturates.
    """
    if basis_a.shape[1] != basis_b.shape[1]:
        raise ValueError(
            f"subspace dimensions differ: {basis_a.shape[1]} vs {basis_b.shape[1]}"
        )
    if basis_a.shape[1] == 0:
        return np.zeros(0)
    defect = basis_b - basis_a @ (basis_a.conj().T @ basis_b)
    sines = np.linalg.svd(defect, compute_uv=False)
    return np.arcsin(np.clip(sines, 0.0, 1.0))
