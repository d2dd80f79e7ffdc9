"""Strong-commutation certificates for commuting CP-map pairs on M_n(C).

A pair Theta, Phi with Kraus families {T_i} (length m) and {S_j} (length n)
commutes strongly exactly when there is an mn x mn unitary u with

    T_i S_j = sum_{(p,q)} u[(i,j),(p,q)] S_q T_p ,

rows indexed by (i, j) and columns by (p, q), both flattened lexicographically.
On a finite-dimensional space every commuting pair admits such a unitary; it
is found here by relating the two composite Kraus families of the (equal) maps
Theta∘Phi and Phi∘Theta through their common Choi eigenbasis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chan import (
    DEFAULT_TOL,
    DimensionMismatchError,
    KrausFamily,
    compose,
    kraus_equivalence_unitary,
    kraus_to_super,
)
from .linalg import Array, dagger, fro


class NonCommutingError(ValueError):
    pass


class CertificateError(RuntimeError):
    pass


@dataclass(frozen=True)
class CommutationReport:
    commute: bool
    residual: float
    tol: float


@dataclass(frozen=True)
class StrongCommutationCertificate:
    """Unitary witness u for strong commutation, with its residuals.

    m and n are the Kraus lengths of Theta and Phi; u is mn x mn with the
    index convention u[(i,j), (p,q)] -> i*n + j rows, p*n + q columns.
    """

    m: int
    n: int
    u: Array
    unitarity_residual: float
    intertwining_residual: float


@dataclass(frozen=True)
class CertificateCheck:
    passed: bool
    unitarity_residual: float
    intertwining_residual: float
    tol: float


def check_commute(theta: KrausFamily, phi: KrausFamily, tol: float = DEFAULT_TOL) -> CommutationReport:
    """Compare the superoperators of Theta∘Phi and Phi∘Theta."""
    if theta.dim != phi.dim:
        raise DimensionMismatchError(f"dims {theta.dim} and {phi.dim} differ")
    s1 = kraus_to_super(compose(theta, phi))
    s2 = kraus_to_super(compose(phi, theta))
    residual = fro(s1 - s2)
    return CommutationReport(commute=residual <= tol, residual=residual, tol=tol)


def _right_composite(theta: KrausFamily, phi: KrausFamily) -> KrausFamily:
    """Family S_q T_p at flat index p*n + q (same indexing as the certificate columns)."""
    return KrausFamily(
        theta.dim, tuple(s @ t for t in theta.ops for s in phi.ops)
    )


def intertwining_residual(theta: KrausFamily, phi: KrausFamily, u: Array) -> float:
    """max over (i,j) of || T_i S_j - sum_{(p,q)} u[(i,j),(p,q)] S_q T_p ||_F."""
    m, n = len(theta), len(phi)
    if u.shape != (m * n, m * n):
        raise DimensionMismatchError(f"certificate has shape {u.shape}, expected {(m * n, m * n)}")
    right = _right_composite(theta, phi).ops
    worst = 0.0
    for i, t in enumerate(theta.ops):
        for j, s in enumerate(phi.ops):
            row = u[i * n + j]
            recon = sum(row[c] * right[c] for c in range(m * n))
            worst = max(worst, fro(t @ s - recon))
    return worst


def strong_commutation_certificate(
    theta: KrausFamily, phi: KrausFamily, tol: float = DEFAULT_TOL
) -> StrongCommutationCertificate:
    """Produce the unitary witness for a commuting pair.

    Raises NonCommutingError when the pair does not commute within tol, and
    CertificateError if the numeric construction leaves a large residual
    (which would indicate a bug, not a mathematical obstruction).
    """
    rep = check_commute(theta, phi, tol)
    if not rep.commute:
        raise NonCommutingError(
            f"maps do not commute (superoperator residual {rep.residual:.3e})"
        )
    left = compose(theta, phi)        # T_i S_j, flat index i*n + j
    right = _right_composite(theta, phi)  # S_q T_p, flat index p*n + q
    u = kraus_equivalence_unitary(left, right, tol)
    m, n = len(theta), len(phi)
    unit = fro(dagger(u) @ u - np.eye(m * n))
    intw = intertwining_residual(theta, phi, u)
    if max(unit, intw) > max(100 * tol, 1e-7):
        raise CertificateError(
            f"certificate construction failed (unitarity {unit:.3e}, intertwining {intw:.3e})"
        )
    return StrongCommutationCertificate(
        m=m, n=n, u=u, unitarity_residual=unit, intertwining_residual=intw
    )


def verify_certificate(
    theta: KrausFamily,
    phi: KrausFamily,
    cert: StrongCommutationCertificate,
    tol: float = DEFAULT_TOL,
) -> CertificateCheck:
    """Recompute both residual fields from scratch; pass iff both are within tol."""
    m, n = len(theta), len(phi)
    if cert.u.shape != (m * n, m * n):
        raise DimensionMismatchError(
            f"certificate is {cert.u.shape}, families give mn = {m * n}"
        )
    unit = fro(dagger(cert.u) @ cert.u - np.eye(m * n))
    intw = intertwining_residual(theta, phi, cert.u)
    return CertificateCheck(
        passed=unit <= tol and intw <= tol,
        unitarity_residual=unit,
        intertwining_residual=intw,
        tol=tol,
    )
