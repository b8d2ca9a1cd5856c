"""Frequency-domain symbol bundles and their fourth-order Hodge operators.

At a frequency vector xi (k blocks of length n) the bundle holds the symbol
matrices of the operators in compressed coordinates: the tensor parts of the
higher value spaces are expressed in the orthonormal Weyl-module bases, so
ranks and kernels are computed on small matrices while the componentwise
formulas are transcribed on full tensors.

The fourth-order combinations

    L0 = (sigma0* sigma0)^2
    L1 = (sigma0 sigma0*)^2 + sigma1* sigma1
    L2 = sigma1 sigma1* + (sigma2'* sigma2')^2 + sigma2''* sigma2''

are conjugate-symmetric, homogeneous of degree 4 in xi, and positive definite
away from xi = 0; their inverses realize the Green operators frequency by
frequency.  For k = 2 the order-5 branch does not exist and L2 degenerates to
sigma1 sigma1* (recorded by ``has_order5 = False``).
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import weyl

RANK_RTOL = 1e-9


@dataclass(frozen=True)
class SymbolBundle:
    k: int
    n: int
    xi: np.ndarray
    s_dim: int
    sigma0: np.ndarray
    sigma1: np.ndarray
    sigma2p: Optional[np.ndarray]
    sigma2pp: Optional[np.ndarray]
    L0: np.ndarray
    L1: np.ndarray
    L2: np.ndarray
    dims: dict

    @property
    def has_order5(self):
        return self.sigma2p is not None


def _symbol_blocks(rep, k, xi):
    xi = np.asarray(xi, dtype=float).reshape(k, rep.n)
    xp = -1j * np.einsum("Aj,jst->Ast", xi, rep.gamma_plus)
    xm = -1j * np.einsum("Aj,jst->Ast", xi, rep.gamma_minus)
    scal = 2.0 * xi @ xi.T
    return xp, xm, scal


def _sigma1_full(k, s, xp, xm, scal):
    out = np.zeros((k, k, k, s, k, s), dtype=complex)
    eye = np.eye(s)
    pp = np.einsum("Ast,Btu->ABsu", xp, xm)
    for a in range(k):
        for b in range(k):
            for c in range(k):
                out[a, b, c, :, c, :] += 0.5 * pp[a, b]
                out[a, b, c, :, b, :] += 0.5 * pp[a, c]
                out[a, b, c, :, a, :] += -0.5 * scal[b, c] * eye
    return out.reshape(k**3 * s, k * s)


def _sigma2p_full(theta, xm):
    u = np.einsum("Dst,ABCt->DABCs", xm, theta)
    base = 0.5 * (u - np.einsum("dcbas->dabcs", u)) + 0.5 * (
        np.einsum("bcdas->dabcs", u) - np.einsum("badcs->dabcs", u)
    )
    return (
        base
        + np.einsum("adbcs->dabcs", base)
        + np.einsum("dacbs->dabcs", base)
        + np.einsum("adcbs->dabcs", base)
    )


def _sigma2pp_full(theta, xp, xm, scal):
    pp = np.einsum("Est,Dtu->EDsu", xp, xm)
    t = np.einsum("EDsu,ABCu->EDABCs", pp, theta)
    tp = np.einsum("DEsu,ABCu->EDABCs", pp, theta)
    x = np.einsum("bc,edas->edabcs", scal, theta)
    t1 = t - np.einsum("adebcs->edabcs", t)
    t2 = 0.5 * (tp - np.einsum("adebcs->edabcs", tp))
    t3 = 0.5 * (x - np.einsum("adebcs->edabcs", x))
    core = t1 + t2 + t3
    out = np.zeros_like(core)
    for sub in ("edabcs", "ebadcs", "ecabds", "edacbs", "ebacds", "ecadbs"):
        out += np.einsum(f"{sub}->edabcs", core)
    return 0.5 * out


def build_bundle(rep, k, xi):
    """Assemble the symbol bundle at a frequency vector.

    Parameters
    ----------
    rep : CliffordRep
    k : int
        Number of vector variables (k >= 2).
    xi : array_like, shape (k*n,)
        Frequency vector, grouped as k blocks of n; may be zero.
    """
    if k < 2:
        raise ValueError(f"need k >= 2 vector variables, got {k}")
    s = rep.s_dim
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (k * rep.n,):
        raise ValueError(f"xi must have shape ({k * rep.n},), got {xi.shape}")
    xp, xm, scal = _symbol_blocks(rep, k, xi)
    sigma0 = xp.reshape(k * s, s)

    ws2 = weyl.weyl_space(k, "21")
    iso2 = np.kron(ws2.basis, np.eye(s))
    sigma1 = iso2.conj().T @ _sigma1_full(k, s, xp, xm, scal)

    dims = {"V0": s, "V1": k * s, "V2": ws2.dim * s}
    if k >= 3:
        ws3p = weyl.weyl_space(k, "22")
        ws3pp = weyl.weyl_space(k, "311")
        iso3p = np.kron(ws3p.basis, np.eye(s))
        iso3pp = np.kron(ws3pp.basis, np.eye(s))
        cols_p = np.empty((k**4 * s, ws2.dim * s), dtype=complex)
        cols_pp = np.empty((k**5 * s, ws2.dim * s), dtype=complex)
        for c in range(ws2.dim * s):
            theta = iso2[:, c].reshape((k, k, k, s))
            cols_p[:, c] = _sigma2p_full(theta, xm).reshape(-1)
            cols_pp[:, c] = _sigma2pp_full(theta, xp, xm, scal).reshape(-1)
        sigma2p = iso3p.conj().T @ cols_p
        sigma2pp = iso3pp.conj().T @ cols_pp
        dims["V3p"] = ws3p.dim * s
        dims["V3pp"] = ws3pp.dim * s
    else:
        sigma2p = sigma2pp = None

    s0h = sigma0.conj().T
    s1h = sigma1.conj().T
    L0 = (s0h @ sigma0) @ (s0h @ sigma0)
    L1 = (sigma0 @ s0h) @ (sigma0 @ s0h) + s1h @ sigma1
    L2 = sigma1 @ s1h
    if k >= 3:
        g = sigma2p.conj().T @ sigma2p
        L2 = L2 + g @ g + sigma2pp.conj().T @ sigma2pp
    return SymbolBundle(
        k=k,
        n=rep.n,
        xi=xi,
        s_dim=s,
        sigma0=sigma0,
        sigma1=sigma1,
        sigma2p=sigma2p,
        sigma2pp=sigma2pp,
        L0=L0,
        L1=L1,
        L2=L2,
        dims=dims,
    )


def nullspace_basis(mat, rtol=RANK_RTOL):
    """Orthonormal basis of the numeric kernel (relative SV cutoff)."""
    u, sv, vh = np.linalg.svd(mat, full_matrices=True)
    del u
    if sv.size == 0 or sv[0] == 0.0:
        return np.eye(mat.shape[1], dtype=complex)
    rank = int((sv > rtol * sv[0]).sum())
    return vh[rank:].conj().T


def numeric_rank(mat, rtol=RANK_RTOL):
    sv = np.linalg.svd(mat, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int((sv > rtol * sv[0]).sum())


@dataclass(frozen=True)
class ExactnessReport:
    dims: dict
    rank_sigma0: int
    dim_ker_sigma1: int
    rank_sigma1: int
    dim_ker_order5: Optional[int]
    injective: bool
    exact_slot1: bool
    exact_slot2: Optional[bool]

    @property
    def ok(self):
        slot2 = True if self.exact_slot2 is None else self.exact_slot2
        return self.injective and self.exact_slot1 and slot2


def verify_exactness(bundle, rtol=RANK_RTOL):
    """Measure ranks and certify exactness of the symbol sequence at xi != 0."""
    if np.linalg.norm(bundle.xi) == 0.0:
        raise ValueError("exactness is only defined at nonzero frequencies")
    rank0 = numeric_rank(bundle.sigma0, rtol)
    ker1 = nullspace_basis(bundle.sigma1, rtol).shape[1]
    rank1 = bundle.dims["V1"] - ker1
    if bundle.has_order5:
        stacked = np.vstack([bundle.sigma2p, bundle.sigma2pp])
        ker2 = nullspace_basis(stacked, rtol).shape[1]
        exact2 = ker2 == rank1
    else:
        ker2 = None
        exact2 = None
    return ExactnessReport(
        dims=dict(bundle.dims),
        rank_sigma0=rank0,
        dim_ker_sigma1=ker1,
        rank_sigma1=rank1,
        dim_ker_order5=ker2,
        injective=rank0 == bundle.dims["V0"],
        exact_slot1=ker1 == rank0,
        exact_slot2=exact2,
    )


def kernel_identity_check(bundle, rep, rtol=RANK_RTOL):
    """Kernel identity for the order-5 branch, on an orthonormal kernel basis.

    For every unit element Theta of ker sigma2' n ker sigma2'', checks
    componentwise that

        |xi_0|^2 Theta[A,B,C] = xi_A xi_B Theta[0,0,C]
                              + xi_A xi_C Theta[0,0,B]
                              - (xi_B xi_C + xi_C xi_B) Theta[0,0,A]

    and returns the largest residual entry.  Requires a nonzero first block.
    """
    if not bundle.has_order5:
        raise ValueError("the kernel identity lives on the order-5 branch (k >= 3)")
    k, s = bundle.k, bundle.s_dim
    xiv = bundle.xi.reshape(k, rep.n)
    if np.linalg.norm(xiv[0]) == 0.0:
        raise ValueError("the identity requires a nonzero first frequency block")
    xp, xm, scal = _symbol_blocks(rep, k, bundle.xi)
    ws2 = weyl.weyl_space(k, "21")
    iso2 = np.kron(ws2.basis, np.eye(s))
    kernel = nullspace_basis(np.vstack([bundle.sigma2p, bundle.sigma2pp]), rtol)
    n0sq = float((xiv[0] ** 2).sum())
    pp = np.einsum("Ast,Btu->ABsu", xp, xm)
    worst = 0.0
    for c in range(kernel.shape[1]):
        theta = (iso2 @ kernel[:, c]).reshape(k, k, k, s)
        lhs = n0sq * theta
        rhs = (
            np.einsum("ABst,Ct->ABCs", pp, theta[0, 0])
            + np.einsum("ACst,Bt->ABCs", pp, theta[0, 0])
            - np.einsum("BC,As->ABCs", scal, theta[0, 0])
        )
        worst = max(worst, float(np.abs(lhs - rhs).max()))
    return worst


def intertwine_check(bundle):
    """Frobenius norm of L2 sigma1 - sigma1 L1 (the Green intertwining)."""
    return float(np.linalg.norm(bundle.L2 @ bundle.sigma1 - bundle.sigma1 @ bundle.L1))


def hodge_eig_bounds(bundle):
    """Extreme eigenvalues of each L_j (conjugate-symmetric by construction)."""
    out = {}
    for name, mat in (("L0", bundle.L0), ("L1", bundle.L1), ("L2", bundle.L2)):
        if mat.shape[0] == 0:
            out[name] = (float("nan"), float("nan"))
            continue
        ev = np.linalg.eigvalsh(mat)
        out[name] = (float(ev[0]), float(ev[-1]))
    return out


def green_inverse_residual(bundle):
    """max_j || L_j @ L_j^{-1} - I ||_max for the invertible L_j."""
    worst = 0.0
    mats = [bundle.L0, bundle.L1]
    if bundle.has_order5:
        mats.append(bundle.L2)
    for mat in mats:
        inv = np.linalg.inv(mat)
        worst = max(worst, float(np.abs(mat @ inv - np.eye(mat.shape[0])).max()))
    return worst
