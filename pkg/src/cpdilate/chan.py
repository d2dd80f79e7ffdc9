"""Completely positive maps on M_n(C): Kraus, Choi and superoperator forms.

Conventions:

* A map acts as a |-> sum_i T_i a T_i^*.
* vec() is column-stacking, so the superoperator is sum_i conj(T_i) tensor T_i
  acting on vec(a).
* The Choi matrix is sum_i vec(T_i) vec(T_i)^*; it is PSD exactly when the map
  is completely positive.
* Unital means sum_i T_i T_i^* = I; contractive means sum_i T_i T_i^* <= I.

Everything here is a pure function over immutable inputs; identical inputs
give identical outputs on one platform.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .linalg import (
    Array,
    complete_orthonormal,
    dagger,
    eigh_desc,
    fro,
    hermitize,
    phase_fix,
    require_finite,
    unvec,
    vec,
)

DEFAULT_TOL = 1e-9

# Structural guard at construction; predicates use the caller's tolerance.
_CONTRACTIVITY_GUARD = 1e-7


class DimensionMismatchError(ValueError):
    pass


class NotCompletelyPositiveError(ValueError):
    def __init__(self, eigenvalue: float):
        self.eigenvalue = eigenvalue
        super().__init__(f"Choi matrix has negative eigenvalue {eigenvalue:.3e}")


class NotSameChannelError(ValueError):
    def __init__(self, deviation: float):
        self.deviation = deviation
        super().__init__(f"Kraus families define different maps (Choi deviation {deviation:.3e})")


class EquivalenceCompletionError(RuntimeError):
    def __init__(self, residual: float):
        self.residual = residual
        super().__init__(f"unitary completion failed (residual {residual:.3e})")


def _freeze(a: Array) -> Array:
    out = np.array(a, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class KrausFamily:
    """Ordered family of n x n operators presenting a CP map a |-> sum T a T^*."""

    dim: int
    ops: tuple[Array, ...]

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if len(self.ops) < 1:
            raise ValueError("a Kraus family needs at least one operator")
        frozen = []
        for t in self.ops:
            t = np.asarray(t)
            if t.shape != (self.dim, self.dim):
                raise DimensionMismatchError(
                    f"Kraus operator has shape {t.shape}, expected {(self.dim, self.dim)}"
                )
            require_finite(t, "Kraus operator")
            frozen.append(_freeze(t))
        object.__setattr__(self, "ops", tuple(frozen))
        top = float(np.linalg.eigvalsh(hermitize(self.op_sum()))[-1])
        if top > 1.0 + _CONTRACTIVITY_GUARD:
            raise ValueError(f"family is not contractive: lambda_max(sum T T*) = {top:.6f}")

    def __len__(self) -> int:
        return len(self.ops)

    def op_sum(self) -> Array:
        """sum_i T_i T_i^*."""
        return sum(t @ dagger(t) for t in self.ops)


@dataclass(frozen=True)
class ChannelReport:
    is_cp: bool
    is_unital: bool
    is_contractive: bool
    min_choi_eigenvalue: float
    unitality_residual: float
    tol: float


def identity_channel(dim: int) -> KrausFamily:
    return KrausFamily(dim, (np.eye(dim, dtype=complex),))


def conjugation(u: Array) -> KrausFamily:
    """The map a |-> u a u^* for a single operator u."""
    u = np.asarray(u, dtype=complex)
    return KrausFamily(u.shape[0], (u,))


def pad(k: KrausFamily, length: int) -> KrausFamily:
    """Pad with zero operators up to the requested length."""
    if length < len(k):
        raise ValueError("cannot pad to a shorter length")
    if length == len(k):
        return k
    z = np.zeros((k.dim, k.dim), dtype=complex)
    return KrausFamily(k.dim, k.ops + (z,) * (length - len(k)))


def kraus_to_choi(k: KrausFamily) -> Array:
    """Choi matrix sum_i vec(T_i) vec(T_i)^*; Hermitian PSD by construction."""
    n2 = k.dim * k.dim
    c = np.zeros((n2, n2), dtype=complex)
    for t in k.ops:
        v = vec(t)
        c += np.outer(v, np.conj(v))
    return c


def choi_to_kraus(choi: Array, tol: float = DEFAULT_TOL) -> KrausFamily:
    """Kraus family from eigenvectors of a Choi matrix.

    Eigenvalues above tol are kept in descending order, each eigenvector's
    global phase normalized for reproducibility. Any eigenvalue below -tol
    means the map is not completely positive.
    """
    choi = np.asarray(choi, dtype=complex)
    n2 = choi.shape[0]
    n = int(round(np.sqrt(n2)))
    if choi.shape != (n2, n2) or n * n != n2:
        raise DimensionMismatchError(f"Choi matrix shape {choi.shape} is not (n^2, n^2)")
    herm_dev = fro(choi - dagger(choi))
    if herm_dev > tol * max(1.0, fro(choi)):
        raise ValueError(f"Choi matrix is not Hermitian (deviation {herm_dev:.3e})")
    w, v = eigh_desc(choi)
    if w[-1] < -tol:
        raise NotCompletelyPositiveError(float(w[-1]))
    ops = [
        unvec(np.sqrt(lam) * phase_fix(v[:, i]), n)
        for i, lam in enumerate(w)
        if lam > tol
    ]
    if not ops:
        ops = [np.zeros((n, n), dtype=complex)]
    return KrausFamily(n, tuple(ops))


def kraus_to_super(k: KrausFamily) -> Array:
    """Superoperator on column-vectorized matrices: sum_i conj(T_i) tensor T_i."""
    n2 = k.dim * k.dim
    s = np.zeros((n2, n2), dtype=complex)
    for t in k.ops:
        s += np.kron(np.conj(t), t)
    return s


def _reshuffle(m: Array) -> Array:
    n2 = m.shape[0]
    n = int(round(np.sqrt(n2)))
    return np.transpose(m.reshape(n, n, n, n), (3, 1, 2, 0)).reshape(n2, n2)


def choi_to_super(choi: Array) -> Array:
    return _reshuffle(np.asarray(choi, dtype=complex))


def super_to_choi(s: Array) -> Array:
    return _reshuffle(np.asarray(s, dtype=complex))


def apply_kraus(k: KrausFamily, a: Array) -> Array:
    a = np.asarray(a, dtype=complex)
    if a.shape != (k.dim, k.dim):
        raise DimensionMismatchError(f"argument has shape {a.shape}, expected {(k.dim, k.dim)}")
    return sum(t @ a @ dagger(t) for t in k.ops)


def apply_super(s: Array, a: Array) -> Array:
    n = int(round(np.sqrt(s.shape[0])))
    return unvec(s @ vec(np.asarray(a, dtype=complex)), n)


def compose(k1: KrausFamily, k2: KrausFamily) -> KrausFamily:
    """Kraus family of k1 after k2: operators T_i S_j in lexicographic (i, j) order."""
    if k1.dim != k2.dim:
        raise DimensionMismatchError(f"dims {k1.dim} and {k2.dim} differ")
    return KrausFamily(k1.dim, tuple(t @ s for t in k1.ops for s in k2.ops))


def classify(k: KrausFamily, tol: float = DEFAULT_TOL) -> ChannelReport:
    w_min = float(np.linalg.eigvalsh(hermitize(kraus_to_choi(k)))[0])
    osum = hermitize(k.op_sum())
    unitality = fro(osum - np.eye(k.dim))
    lam_max = float(np.linalg.eigvalsh(osum)[-1])
    return ChannelReport(
        is_cp=w_min >= -tol,
        is_unital=unitality <= tol,
        is_contractive=lam_max <= 1.0 + tol,
        min_choi_eigenvalue=w_min,
        unitality_residual=unitality,
        tol=tol,
    )


def kraus_equivalence_unitary(
    a: KrausFamily, b: KrausFamily, tol: float = DEFAULT_TOL
) -> Array:
    """L x L unitary u with A_i = sum_j u[i, j] B_j for two families of one map.

    Families are zero-padded to a common length L. Writing Ma, Mb for the
    n^2 x L matrices of vectorized operators, the relation reads Ma = Mb u^T;
    the system is consistent exactly when both families present one map, so
    the support part of u is the minimum-norm least-squares solution, and the
    kernel parts are joined by deterministic orthonormal completions. Singular
    values at or below sqrt(tol) (the Choi-eigenvalue cutoff) count as kernel.
    """
    if a.dim != b.dim:
        raise DimensionMismatchError(f"dims {a.dim} and {b.dim} differ")
    length = max(len(a), len(b))
    a, b = pad(a, length), pad(b, length)
    ma = np.column_stack([vec(t) for t in a.ops])
    mb = np.column_stack([vec(t) for t in b.ops])
    deviation = fro(ma @ dagger(ma) - mb @ dagger(mb))  # Choi distance
    if deviation > tol * max(1.0, float(np.linalg.norm(ma @ dagger(ma)))):
        raise NotSameChannelError(deviation)
    wa, sa, vah = np.linalg.svd(ma, full_matrices=False)
    wb, sb, vbh = np.linalg.svd(mb, full_matrices=False)
    cut = np.sqrt(tol) * max(1.0, float(sa[0]) if sa.size else 1.0)
    rank = int(np.sum(sb > cut))
    if rank == 0:
        return np.eye(length, dtype=complex)
    pinv_mb = dagger(vbh[:rank]) @ ((1.0 / sb[:rank])[:, None] * dagger(wb[:, :rank]))
    u = (pinv_mb @ ma).T
    if rank < length:
        # Operator-coefficient supports are spanned by conj(right singular vectors).
        pa = complete_orthonormal(vah[:rank].T, length)
        pb = complete_orthonormal(vbh[:rank].T, length)
        u = u + pa @ dagger(pb)
    unitarity = fro(dagger(u) @ u - np.eye(length))
    if unitarity > 1e-6:
        raise EquivalenceCompletionError(unitarity)
    return u


# ---------------------------------------------------------------------------
# JSON encoding: complex scalar = [re, im]; matrix = array of rows;
# channel = {"dim": n, "kraus": [matrix, ...]} or {"dim": n, "choi": matrix}.
# ---------------------------------------------------------------------------


def matrix_to_json(a: Array) -> list:
    a = np.asarray(a, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def matrix_from_json(obj: Sequence) -> Array:
    rows = []
    for row in obj:
        r = []
        for entry in row:
            if isinstance(entry, (int, float)):
                r.append(complex(entry))
            else:
                re, im = entry
                r.append(complex(re, im))
        rows.append(r)
    out = np.array(rows, dtype=complex)
    require_finite(out, "matrix")
    return out


def channel_to_json(k: KrausFamily) -> dict:
    return {"dim": k.dim, "kraus": [matrix_to_json(t) for t in k.ops]}


def channel_from_json(d: dict, tol: float = DEFAULT_TOL) -> KrausFamily:
    if "dim" not in d:
        raise ValueError("channel JSON needs a 'dim' field")
    dim = int(d["dim"])
    if "kraus" in d:
        ops = tuple(matrix_from_json(m) for m in d["kraus"])
        fam = KrausFamily(dim, ops)
    elif "choi" in d:
        fam = choi_to_kraus(matrix_from_json(d["choi"]), tol)
        if fam.dim != dim:
            raise DimensionMismatchError("'dim' does not match the Choi matrix size")
    else:
        raise ValueError("channel JSON needs a 'kraus' or 'choi' field")
    return fam
