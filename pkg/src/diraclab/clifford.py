"""Spinor modules S+/S- and Dirac gamma matrices for arbitrary n >= 1.

Construction convention (fixed so results are reproducible bit for bit):

* For even n = 2m, build 2m Hermitian anticommuting involutions E_1..E_2m on
  (C^2)^{tensor m} by the standard tensor recursion

      E_{2l-1} = s3^{(l-1)} (x) s1 (x) 1^{(m-l)}
      E_{2l}   = s3^{(l-1)} (x) s2 (x) 1^{(m-l)}

  with s1, s2, s3 the Pauli matrices.  The gamma matrices are g_j = i E_j,
  which square to -1 and are skew-adjoint.  The volume element of this family
  is s3^{(x)m}, already diagonal in the computational basis: a basis vector
  indexed by the bit string b has chirality (-1)^popcount(b).  S+ is spanned
  by the even-parity basis vectors (in increasing index order), S- by the
  odd-parity ones, and gamma_plus[j] / gamma_minus[j] are the two
  off-diagonal blocks of g_j in that ordering.

* For odd n, the even-case family for n+1 is built and the last generator is
  dropped; both blocks are taken over the resulting half-spin spaces, which
  makes S+ and S- the same coordinate space.

All matrix entries lie in {0, +-1, +-i}, so the algebraic identities below
hold exactly in double precision.
"""

from dataclasses import dataclass

import numpy as np

_PAULI1 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_PAULI2 = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
_PAULI3 = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
_ID2 = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class CliffordRep:
    """Gamma matrices of the half-spin representations.

    Attributes
    ----------
    n : int
        Spatial dimension.
    s_dim : int
        Dimension of S+ (equal to that of S-).
    gamma_plus : ndarray, shape (n, s_dim, s_dim)
        Blocks mapping S+ -> S-, one per generator.
    gamma_minus : ndarray, shape (n, s_dim, s_dim)
        Blocks mapping S- -> S+.

    The generators satisfy, blockwise,

        gamma_minus[j] @ gamma_plus[k] + gamma_minus[k] @ gamma_plus[j]
            = -2 delta_jk Id   on S+  (and symmetrically on S-),

    and skew-adjointness ``gamma_plus[j].conj().T == -gamma_minus[j]``.
    """

    n: int
    s_dim: int
    gamma_plus: np.ndarray
    gamma_minus: np.ndarray


def _kron_chain(mats):
    out = np.array([[1.0 + 0.0j]])
    for m in mats:
        out = np.kron(out, m)
    return out


def _hermitian_generators(m):
    gens = []
    for l in range(m):
        head = [_PAULI3] * l
        tail = [_ID2] * (m - 1 - l)
        gens.append(_kron_chain(head + [_PAULI1] + tail))
        gens.append(_kron_chain(head + [_PAULI2] + tail))
    return gens


def build_clifford(n):
    """Construct the spinor modules and gamma blocks for dimension n.

    Parameters
    ----------
    n : int
        Spatial dimension, n >= 1.

    Returns
    -------
    CliffordRep
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"spatial dimension must be a positive integer, got {n!r}")
    n = int(n)
    m = n // 2 if n % 2 == 0 else (n + 1) // 2
    gens = _hermitian_generators(m)[:n]
    dim = 2**m
    parity = np.array([bin(b).count("1") % 2 for b in range(dim)])
    plus = np.where(parity == 0)[0]
    minus = np.where(parity == 1)[0]
    gp = np.stack([(1j * e)[np.ix_(minus, plus)] for e in gens])
    gm = np.stack([(1j * e)[np.ix_(plus, minus)] for e in gens])
    gp.setflags(write=False)
    gm.setflags(write=False)
    return CliffordRep(n=n, s_dim=dim // 2, gamma_plus=gp, gamma_minus=gm)


def dirac_symbol(rep, xi):
    """Symbol of the Dirac operator in one vector variable at frequency xi.

    Returns the pair ``(xi_plus, xi_minus)`` with
    ``xi_plus = -i sum_j gamma_plus[j] xi[j]`` mapping S+ -> S- and
    ``xi_minus`` the S- -> S+ counterpart.  Their composition in either order
    is ``|xi|^2`` times the identity.
    """
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (rep.n,):
        raise ValueError(f"xi must have shape ({rep.n},), got {xi.shape}")
    xi_plus = -1j * np.einsum("j,jst->st", xi, rep.gamma_plus)
    xi_minus = -1j * np.einsum("j,jst->st", xi, rep.gamma_minus)
    return xi_plus, xi_minus


def delta_symbol(rep, xi_b, xi_c):
    """Scalar multiplier of the anticommutator symbol at two frequencies.

    Forms ``xi_b xi_c + xi_c xi_b`` from :func:`dirac_symbol` output, which
    is a multiple of the identity, and returns that multiple (equal to
    ``2 <xi_b, xi_c>``).
    """
    bp, bm = dirac_symbol(rep, xi_b)
    cp, cm = dirac_symbol(rep, xi_c)
    anti = bm @ cp + cm @ bp
    return float(np.trace(anti).real / rep.s_dim)
