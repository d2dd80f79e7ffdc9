"""Discrete two-parameter twisted product systems over the grid N^2.

For a strongly commuting pair on M_n(C) with Kraus families {T_i} (length m)
and {S_j} (length k), the fiber over (a, b) is the plain Hilbert space
E^{tensor a} tensor F^{tensor b} with E = C^m and F = C^k; because the
algebra is all of B(H) the commutant is trivial and no module structure
survives, which is the simplification that makes everything concrete.

Multiplication reorders mixed words E^a F^b E^c F^d into sorted form by
applying the elementary flip

    tau : F tensor E -> E tensor F ,   tau = conj(u) o swap ,

to adjacent (F, E) slot pairs, where u is the strong-commutation certificate.
The sweep always moves the leftmost out-of-order adjacent pair first; the
block-sort permutation is fully commutative, so any sweep order agrees, and
fixing one keeps results bit-reproducible.

The covariant representation sends the basis word (i_1..i_a, j_1..j_b) to
T_{i_1} .. T_{i_a} S_{j_1} .. S_{j_b}; the flip convention above is exactly
what makes it multiplicative across fibers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chan import DEFAULT_TOL, KrausFamily, apply_kraus, classify
from .linalg import Array, dagger, fro
from .strongcomm import StrongCommutationCertificate, verify_certificate


class CapExceededError(RuntimeError):
    pass


class InvalidCertificateError(ValueError):
    pass


DEFAULT_FIBER_CAP = 4096


@dataclass(frozen=True)
class GridPoint:
    a: int
    b: int

    def __post_init__(self):
        if self.a < 0 or self.b < 0:
            raise ValueError(f"grid points are nonnegative, got {(self.a, self.b)}")

    def __add__(self, other: "GridPoint") -> "GridPoint":
        return GridPoint(self.a + other.a, self.b + other.b)

    def __sub__(self, other: "GridPoint") -> "GridPoint":
        return GridPoint(self.a - other.a, self.b - other.b)

    def __le__(self, other: "GridPoint") -> bool:
        return self.a <= other.a and self.b <= other.b

    def __ge__(self, other: "GridPoint") -> bool:
        return other <= self

    def key(self) -> tuple[int, int]:
        return (self.a, self.b)


ZERO = GridPoint(0, 0)
E_STEP = GridPoint(1, 0)
F_STEP = GridPoint(0, 1)


def grid_points(horizon: GridPoint) -> list[GridPoint]:
    """All grid points below the horizon, in lexicographic order."""
    return [GridPoint(a, b) for a in range(horizon.a + 1) for b in range(horizon.b + 1)]


def join(s: GridPoint, u: GridPoint) -> GridPoint:
    return GridPoint(max(s.a, u.a), max(s.b, u.b))


def split_difference(u: GridPoint, s: GridPoint) -> tuple[GridPoint, GridPoint]:
    """Positive and negative parts of u - s, both grid points."""
    d = (u.a - s.a, u.b - s.b)
    plus = GridPoint(max(d[0], 0), max(d[1], 0))
    minus = GridPoint(max(-d[0], 0), max(-d[1], 0))
    return plus, minus


@dataclass(frozen=True)
class TwistedProductSystem:
    dim_h: int
    m: int                 # dim of the E fiber = Kraus length of the first map
    k: int                 # dim of the F fiber = Kraus length of the second map
    flip: Array            # mk x mk unitary, F tensor E -> E tensor F
    kraus_t: tuple[Array, ...]
    kraus_s: tuple[Array, ...]

    def fiber_dim(self, g: GridPoint) -> int:
        return self.m**g.a * self.k**g.b

    def theta(self) -> KrausFamily:
        return KrausFamily(self.dim_h, self.kraus_t)

    def phi(self) -> KrausFamily:
        return KrausFamily(self.dim_h, self.kraus_s)


@dataclass(frozen=True)
class FiberVector:
    grid: GridPoint
    coords: Array


@dataclass(frozen=True)
class RepresentationReport:
    horizon: GridPoint
    identity_residual: float     # covariance with Theta^a Phi^b on matrix units
    homomorphism_residual: float
    coisometry_residual: float   # only meaningful when both maps are unital
    unital: bool
    tol: float

    @property
    def passed(self) -> bool:
        worst = max(self.identity_residual, self.homomorphism_residual)
        if self.unital:
            worst = max(worst, self.coisometry_residual)
        return worst <= self.tol


def flip_from_certificate(u: Array, m: int, k: int) -> Array:
    """tau with tau[p*k+q, j*m+i] = conj(u[p*k+q, i*k+j]).

    Derived from the certificate identity by inverting the unitary: the word
    f_j e_i must be sent to the combination of words e_p f_q whose
    representation reproduces S_j T_i.
    """
    swap = np.zeros((m * k, m * k))
    for i in range(m):
        for j in range(k):
            swap[i * k + j, j * m + i] = 1.0
    return np.conj(u) @ swap


def build_product_system(
    theta: KrausFamily,
    phi: KrausFamily,
    cert: StrongCommutationCertificate,
    tol: float = DEFAULT_TOL,
    check: bool = True,
) -> TwistedProductSystem:
    if check:
        result = verify_certificate(theta, phi, cert, tol)
        if not result.passed:
            raise InvalidCertificateError(
                "certificate fails verification "
                f"(unitarity {result.unitarity_residual:.3e}, "
                f"intertwining {result.intertwining_residual:.3e})"
            )
    m, k = len(theta), len(phi)
    return TwistedProductSystem(
        dim_h=theta.dim,
        m=m,
        k=k,
        flip=flip_from_certificate(cert.u, m, k),
        kraus_t=theta.ops,
        kraus_s=phi.ops,
    )


def _sort_word(sys: TwistedProductSystem, coords: Array, layout: list[str]) -> Array:
    """Reorder a mixed word space to sorted (all E before all F) layout.

    coords may carry a trailing batch axis: shape (prod(dims),) or
    (prod(dims), batch).
    """
    types = list(layout)
    dims = [sys.m if t == "E" else sys.k for t in types]
    batch = 1 if coords.ndim == 1 else coords.shape[1]
    arr = coords.reshape(dims + [batch])
    flip4 = sys.flip.reshape(sys.m, sys.k, sys.k, sys.m)
    while True:
        pos = next(
            (p for p in range(len(types) - 1) if types[p] == "F" and types[p + 1] == "E"),
            None,
        )
        if pos is None:
            break
        pre = int(np.prod(dims[:pos], dtype=int))
        post = int(np.prod(dims[pos + 2 :], dtype=int)) * batch
        work = arr.reshape(pre, sys.k, sys.m, post)
        work = np.einsum("efxy,pxyr->pefr", flip4, work)
        types[pos], types[pos + 1] = "E", "F"
        dims[pos], dims[pos + 1] = sys.m, sys.k
        arr = work.reshape(dims + [batch])
    out = arr.reshape(-1, batch)
    return out[:, 0] if coords.ndim == 1 else out


def multiply(sys: TwistedProductSystem, x: FiberVector, y: FiberVector) -> FiberVector:
    """Product of fiber vectors; lands at the componentwise sum of grid points."""
    if x.coords.shape[0] != sys.fiber_dim(x.grid) or y.coords.shape[0] != sys.fiber_dim(y.grid):
        raise ValueError("fiber vector length does not match its grid point")
    g = x.grid + y.grid
    raw = np.kron(x.coords, y.coords)
    layout = ["E"] * x.grid.a + ["F"] * x.grid.b + ["E"] * y.grid.a + ["F"] * y.grid.b
    return FiberVector(g, _sort_word(sys, raw.astype(complex), layout))


def reorder_unitary(sys: TwistedProductSystem, layout: list[str]) -> Array:
    """Matrix of the sorting sweep: mixed-layout coordinates to sorted ones."""
    d = int(np.prod([sys.m if t == "E" else sys.k for t in layout], dtype=int))
    return _sort_word(sys, np.eye(d, dtype=complex), list(layout))


def product_unitary(sys: TwistedProductSystem, g1: GridPoint, g2: GridPoint) -> Array:
    """Multiplication map X(g1) tensor X(g2) -> X(g1+g2) on coordinates."""
    layout = ["E"] * g1.a + ["F"] * g1.b + ["E"] * g2.a + ["F"] * g2.b
    return reorder_unitary(sys, layout)


def representation_matrix(sys: TwistedProductSystem, g: GridPoint) -> Array:
    """The n x (fiber_dim * n) matrix with column block T_{i_1}..T_{i_a}S_{j_1}..S_{j_b}."""
    n = sys.dim_h
    mats = [np.eye(n, dtype=complex)]
    for _ in range(g.a):
        mats = [w @ t for w in mats for t in sys.kraus_t]
    for _ in range(g.b):
        mats = [w @ s for w in mats for s in sys.kraus_s]
    return np.hstack(mats)


def representation_of_vector(sys: TwistedProductSystem, x: FiberVector) -> Array:
    """T(x) = sum over words of x_word * (word matrix)."""
    rep = representation_matrix(sys, x.grid)
    n = sys.dim_h
    return rep @ np.kron(x.coords.reshape(-1, 1), np.eye(n, dtype=complex))


def _iterated_map(sys: TwistedProductSystem, g: GridPoint, x: Array) -> Array:
    """Theta^a(Phi^b(x)) computed by repeated Kraus application."""
    out = np.asarray(x, dtype=complex)
    phi = sys.phi()
    theta = sys.theta()
    for _ in range(g.b):
        out = apply_kraus(phi, out)
    for _ in range(g.a):
        out = apply_kraus(theta, out)
    return out


def _matrix_units(n: int) -> list[Array]:
    units = []
    for r in range(n):
        for c in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[r, c] = 1.0
            units.append(e)
    return units


def verify_representation(
    sys: TwistedProductSystem,
    horizon: GridPoint,
    tol: float = DEFAULT_TOL,
    cap: int = DEFAULT_FIBER_CAP,
) -> RepresentationReport:
    """Check the three representation contracts on the full grid rectangle.

    (1) covariance: rep_g (I tensor x) rep_g^* = Theta^a Phi^b (x) on matrix
        units; (2) multiplicativity across every split g1 + g2 <= horizon, as
        the single matrix identity rep_{g1+g2} (U_{g1,g2} tensor I) =
        rep_{g1} (I tensor rep_{g2}); (3) when both maps are unital, each
        rep_g is a coisometry.
    """
    n = sys.dim_h
    for g in grid_points(horizon):
        if sys.fiber_dim(g) * n > cap:
            raise CapExceededError(
                f"fiber space at {g.key()} has dimension {sys.fiber_dim(g) * n} > cap {cap}"
            )
    reps = {g: representation_matrix(sys, g) for g in grid_points(horizon)}

    unital = classify(sys.theta(), tol).is_unital and classify(sys.phi(), tol).is_unital
    units = _matrix_units(n)

    ident = 0.0
    coiso = 0.0
    for g, rep in reps.items():
        fd = sys.fiber_dim(g)
        for x in units:
            lhs = rep @ np.kron(np.eye(fd, dtype=complex), x) @ dagger(rep)
            ident = max(ident, fro(lhs - _iterated_map(sys, g, x)))
        if unital:
            coiso = max(coiso, fro(rep @ dagger(rep) - np.eye(n)))

    hom = 0.0
    for g1 in grid_points(horizon):
        for g2 in grid_points(horizon - g1):
            u = product_unitary(sys, g1, g2)
            lhs = reps[g1 + g2] @ np.kron(u, np.eye(n, dtype=complex))
            rhs = reps[g1] @ np.kron(np.eye(sys.fiber_dim(g1), dtype=complex), reps[g2])
            hom = max(hom, fro(lhs - rhs))

    return RepresentationReport(
        horizon=horizon,
        identity_residual=ident,
        homomorphism_residual=hom,
        coisometry_residual=coiso,
        unital=unital,
        tol=tol,
    )
