"""Dense complex operator arithmetic on multi-site Hilbert spaces.

Everything is stored as a dense complex128 matrix tagged with its site
structure (d, n).  Site 1 is the leftmost, slowest-varying Kronecker factor;
all public site indices are 1-based.  At d = 2 the hard ceiling is 14 sites
(dim 16384); the sweeps in this package stop at 12 (dim 4096).

Eigendecomposition and norms delegate to LAPACK through numpy, with exact
dispatch fast paths (diagonal input, exactly-real input) that matter on a
single core at dim 4096.  Every fast path computes the same quantity as the
generic route and is cross-checked against it in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TOL_EIG = 1e-10    # relative tolerance for spectral decompositions
TOL_HERM = 1e-12   # absolute tolerance for hermiticity checks
MAX_DIM = 16384    # allocation cap: d**n may not exceed this


class MacrofieldError(Exception):
    """Base class for every error raised by this package."""


class MismatchedLocalDimension(MacrofieldError):
    pass


class SiteOutOfRange(MacrofieldError):
    pass


class NotHermitian(MacrofieldError):
    pass


class EigFailed(MacrofieldError):
    pass


class SpaceMismatch(MacrofieldError):
    pass


class DimensionOverflow(MacrofieldError):
    pass


@dataclass(frozen=True)
class SiteSpace:
    """Shape tag for an n-site space with one-site dimension d."""

    d: int
    n: int

    def __post_init__(self) -> None:
        if self.d < 2:
            raise MismatchedLocalDimension(f"one-site dimension must be >= 2, got {self.d}")
        if self.n < 1:
            raise SiteOutOfRange(f"site count must be >= 1, got {self.n}")
        if self.d ** self.n > MAX_DIM:
            raise DimensionOverflow(
                f"d**n = {self.d}**{self.n} exceeds the dense cap {MAX_DIM}"
            )

    @property
    def dim(self) -> int:
        return self.d ** self.n


class Operator:
    """A dense complex matrix living on a SiteSpace.

    Entries are frozen (read-only) after construction; every function in this
    package treats operators as immutable values.
    """

    __slots__ = ("space", "entries")

    def __init__(self, space: SiteSpace, entries, *, copy: bool = True):
        arr = np.asarray(entries, dtype=np.complex128)
        if arr.shape != (space.dim, space.dim):
            raise SpaceMismatch(
                f"entries shape {arr.shape} does not match space dim {space.dim}"
            )
        if copy and arr is entries:
            arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "entries", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Operator is immutable")

    @property
    def dim(self) -> int:
        return self.space.dim

    def __repr__(self) -> str:
        return f"Operator(d={self.space.d}, n={self.space.n}, dim={self.dim})"


@dataclass(frozen=True)
class SpectralData:
    """Eigenvalues (ascending) and eigenvector columns of a Hermitian operator."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self) -> None:
        w = np.asarray(self.eigenvalues, dtype=np.float64)
        v = np.asarray(self.eigenvectors, dtype=np.complex128)
        if v.shape != (w.size, w.size):
            raise SpaceMismatch("eigenvector matrix shape does not match eigenvalue count")
        if np.any(np.diff(w) < 0):
            raise EigFailed("eigenvalues not sorted ascending")
        object.__setattr__(self, "eigenvalues", w)
        object.__setattr__(self, "eigenvectors", v)


def _is_diagonal(arr: np.ndarray) -> bool:
    # all nonzeros on the diagonal <=> the two counts agree
    return np.count_nonzero(arr) == np.count_nonzero(np.diagonal(arr))


def _is_real(arr: np.ndarray) -> bool:
    return not np.any(arr.imag)


def hermiticity_defect(a: Operator) -> float:
    """max |A - A^dagger| over entries."""
    e = a.entries
    return float(np.abs(e - e.conj().T).max())


def is_hermitian(a: Operator, tol: float = TOL_HERM) -> bool:
    return hermiticity_defect(a) <= tol


def _embed_view(out: np.ndarray, d: int, k: int, n: int) -> np.ndarray:
    """Writable (dl, dr, d, d) view of the nonzero pattern of a one-site embed.

    out must be a fresh C-contiguous (dim, dim) complex array.  The view
    addresses exactly the entries out[(a,i,b), (a,j,b)] where a runs over the
    d^(k-1) left indices and b over the d^(n-k) right ones; assigning a (d, d)
    block through it realizes 1 x ... x B_k x ... x 1 without touching the
    d^2n zero entries.
    """
    dim = d ** n
    dl = d ** (k - 1)
    dr = d ** (n - k)
    item = out.itemsize
    strides = (
        (d * dr * dim + d * dr) * item,
        (dim + 1) * item,
        (dr * dim) * item,
        dr * item,
    )
    return np.lib.stride_tricks.as_strided(out, shape=(dl, dr, d, d), strides=strides)


def tensor(a: Operator, b: Operator) -> Operator:
    """Kronecker product with a's sites leftmost."""
    if a.space.d != b.space.d:
        raise MismatchedLocalDimension(
            f"local dimensions differ: {a.space.d} vs {b.space.d}"
        )
    space = SiteSpace(a.space.d, a.space.n + b.space.n)
    return Operator(space, np.kron(a.entries, b.entries), copy=False)


def embed_at_site(b: Operator, k: int, n: int) -> Operator:
    """Place a one-site operator at site k of an n-site space, identity elsewhere."""
    if b.space.n != 1:
        raise SpaceMismatch(f"embed_at_site takes a one-site operator, got n={b.space.n}")
    if not 1 <= k <= n:
        raise SiteOutOfRange(f"site index {k} outside 1..{n}")
    d = b.space.d
    space = SiteSpace(d, n)
    out = np.zeros((space.dim, space.dim), dtype=np.complex128)
    _embed_view(out, d, k, n)[...] = b.entries
    return Operator(space, out, copy=False)


def site_sum(b: Operator, n: int) -> Operator:
    """Sum of embed_at_site(b, k, n) over k = 1..n, assembled in one pass."""
    if b.space.n != 1:
        raise SpaceMismatch(f"site_sum takes a one-site operator, got n={b.space.n}")
    d = b.space.d
    space = SiteSpace(d, n)
    out = np.zeros((space.dim, space.dim), dtype=np.complex128)
    for k in range(1, n + 1):
        _embed_view(out, d, k, n)[...] += b.entries
    return Operator(space, out, copy=False)


def _matmul(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    # dgemm is ~4x cheaper than zgemm on this hardware; exploit exactly-real operands
    if _is_real(x) and _is_real(y):
        return (np.ascontiguousarray(x.real) @ np.ascontiguousarray(y.real)).astype(
            np.complex128
        )
    return x @ y


def hermitian_eig(a: Operator, tol: float = TOL_HERM) -> SpectralData:
    """Full spectral decomposition of a Hermitian operator.

    Raises NotHermitian if the hermiticity defect exceeds tol.  Diagonal input
    is decomposed exactly by sorting; exactly-real input goes through the real
    symmetric solver.
    """
    defect = hermiticity_defect(a)
    if defect > tol:
        raise NotHermitian(f"hermiticity defect {defect:.3e} exceeds {tol:.1e}")
    e = a.entries
    dim = a.dim
    if _is_diagonal(e):
        diag = np.diagonal(e).real
        order = np.argsort(diag, kind="stable")
        w = diag[order].astype(np.float64)
        v = np.zeros((dim, dim), dtype=np.complex128)
        v[order, np.arange(dim)] = 1.0
        return SpectralData(w, v)
    try:
        if _is_real(e):
            w, v = np.linalg.eigh(e.real)
            v = v.astype(np.complex128)
        else:
            w, v = np.linalg.eigh(e)
    except np.linalg.LinAlgError as err:
        raise EigFailed(str(err)) from err
    return SpectralData(w, v)


def _power_norm(e: np.ndarray, tol: float = 1e-10, max_iter: int = 10000) -> float:
    # power iteration on A^dagger A; fixed-seed start for determinism
    dim = e.shape[0]
    rng = np.random.Generator(np.random.Philox(0x5EED))
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    adj = e.conj().T
    lam = 0.0
    for _ in range(max_iter):
        u = adj @ (e @ v)
        norm_u = float(np.linalg.norm(u))
        if norm_u == 0.0:
            return 0.0
        if abs(norm_u - lam) <= tol * max(1.0, norm_u):
            return float(np.sqrt(norm_u))
        lam = norm_u
        v = u / norm_u
    raise EigFailed(f"power iteration did not converge in {max_iter} steps")


def spectral_norm(a: Operator, *, dense_limit: int = 4096) -> float:
    """Largest singular value.

    Hermitian input reduces to max |eigenvalue|; anti-Hermitian input to the
    Hermitian problem for iA; general input goes through A^dagger A.  Above
    dense_limit the A^dagger A route switches to power iteration (tolerance
    1e-10, at most 10000 steps).
    """
    e = a.entries
    dim = a.dim
    if _is_diagonal(e):
        return float(np.abs(np.diagonal(e)).max())
    try:
        if _is_real(e):
            r = e.real
            if np.abs(r - r.T).max() <= TOL_HERM:
                return float(np.abs(np.linalg.eigvalsh(r)).max())
            if dim > dense_limit:
                return _power_norm(e)
            g = np.ascontiguousarray(r).T @ np.ascontiguousarray(r)
            return float(np.sqrt(max(np.linalg.eigvalsh(g)[-1], 0.0)))
        if np.abs(e - e.conj().T).max() <= TOL_HERM:
            return float(np.abs(np.linalg.eigvalsh(e)).max())
        if np.abs(e + e.conj().T).max() <= TOL_HERM:
            return float(np.abs(np.linalg.eigvalsh(1j * e)).max())
        if dim > dense_limit:
            return _power_norm(e)
        g = e.conj().T @ e
        return float(np.sqrt(max(np.linalg.eigvalsh(g)[-1], 0.0)))
    except np.linalg.LinAlgError as err:
        raise EigFailed(str(err)) from err


def commutator(a: Operator, b: Operator) -> Operator:
    """ab - ba on a shared space."""
    if a.space != b.space:
        raise SpaceMismatch(f"spaces differ: {a.space} vs {b.space}")
    ea, eb = a.entries, b.entries
    # for Hermitian pairs ba = (ab)^dagger, which saves one large gemm
    if a.dim >= 2048 and is_hermitian(a) and is_hermitian(b):
        p = _matmul(ea, eb)
        c = p - p.conj().T
    else:
        c = _matmul(ea, eb) - _matmul(eb, ea)
    return Operator(a.space, c, copy=False)


def _check_perm(perm, n: int) -> tuple[int, ...]:
    perm = tuple(int(x) for x in perm)
    if sorted(perm) != list(range(1, n + 1)):
        raise SiteOutOfRange(f"{perm} is not a permutation of 1..{n}")
    return perm


def permute_sites(a: Operator, perm) -> Operator:
    """Conjugate by the site permutation sending site k to site perm[k-1].

    Equivalent to permutation_unitary(space, perm) @ A @ its adjoint, computed
    as an axis transpose without building the unitary.
    """
    n = a.space.n
    d = a.space.d
    perm = _check_perm(perm, n)
    inv = [0] * n
    for k, target in enumerate(perm):
        inv[target - 1] = k
    axes = inv + [x + n for x in inv]
    t = a.entries.reshape((d,) * (2 * n)).transpose(axes)
    return Operator(a.space, np.ascontiguousarray(t).reshape(a.dim, a.dim), copy=False)


def permutation_unitary(space: SiteSpace, perm) -> Operator:
    """0/1 unitary realizing a site permutation on the computational basis.

    Basis index digits are shuffled so that the digit at site k lands at site
    perm[k-1]; no factorial-sized structure is built.
    """
    n, d, dim = space.n, space.d, space.dim
    perm = _check_perm(perm, n)
    idx = np.arange(dim)
    new_idx = np.zeros(dim, dtype=np.int64)
    for k in range(1, n + 1):
        digit = (idx // d ** (n - k)) % d
        new_idx += digit * d ** (n - perm[k - 1])
    u = np.zeros((dim, dim), dtype=np.complex128)
    u[new_idx, idx] = 1.0
    return Operator(space, u, copy=False)


def _op1(entries) -> Operator:
    return Operator(SiteSpace(2, 1), np.asarray(entries, dtype=np.complex128))


PAULI_X = _op1([[0, 1], [1, 0]])
PAULI_Y = _op1([[0, -1j], [1j, 0]])
PAULI_Z = _op1([[1, 0], [0, -1]])
IDENTITY_1 = _op1([[1, 0], [0, 1]])
PROJ_0 = _op1([[1, 0], [0, 0]])
PROJ_1 = _op1([[0, 0], [0, 1]])

PAULI = {
    "X": PAULI_X,
    "Y": PAULI_Y,
    "Z": PAULI_Z,
    "I": IDENTITY_1,
    "P0": PROJ_0,
    "P1": PROJ_1,
}


def identity(space: SiteSpace) -> Operator:
    return Operator(space, np.eye(space.dim, dtype=np.complex128), copy=False)
