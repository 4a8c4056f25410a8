"""States: one-site density matrices, the Bloch-ball chart, product powers,
expectations, and the seed-level limit value of a symmetric section.

Pure states are a convenience wrapper; everything of substance happens at the
density-matrix level.  N-site states carry an is_symmetric flag set by the
constructors that guarantee it (product powers, mixtures of product powers);
is_permutation_invariant checks the actual property, not the flag.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    MacrofieldError,
    NotHermitian,
    Operator,
    SiteSpace,
    SpaceMismatch,
    TOL_HERM,
    hermiticity_defect,
    permute_sites,
)
from .sections import SymmetricSection


class OutsideBall(MacrofieldError):
    pass


class InvalidState(MacrofieldError):
    pass


# re-exported here because state constructors are where it typically surfaces
from .linalg import DimensionOverflow  # noqa: E402  (intentional re-export)


@dataclass(frozen=True)
class DensityMatrix:
    """One-site state: Hermitian, unit trace, positive semidefinite."""

    d: int
    entries: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.entries, dtype=np.complex128)
        if arr.shape != (self.d, self.d):
            raise SpaceMismatch(f"entries shape {arr.shape} does not match d={self.d}")
        if np.abs(arr - arr.conj().T).max() > TOL_HERM:
            raise InvalidState("density matrix is not Hermitian")
        if abs(arr.trace().real - 1.0) > 1e-12 or abs(arr.trace().imag) > 1e-12:
            raise InvalidState(f"trace {arr.trace():.6g} != 1")
        if np.linalg.eigvalsh(arr)[0] < -1e-10:
            raise InvalidState("density matrix has a negative eigenvalue")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "entries", arr)


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        if self.x**2 + self.y**2 + self.z**2 > 1.0 + 1e-12:
            raise OutsideBall(f"({self.x}, {self.y}, {self.z}) lies outside the unit ball")


@dataclass(frozen=True)
class PureState:
    """Unit vector of amplitudes; measurement statistics only ever use |psi><psi|."""

    d: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.amplitudes, dtype=np.complex128)
        if v.shape != (self.d,):
            raise SpaceMismatch(f"amplitude shape {v.shape} does not match d={self.d}")
        norm = float(np.linalg.norm(v))
        if abs(norm - 1.0) > 1e-12:
            raise InvalidState(f"amplitude norm {norm!r} != 1")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "amplitudes", v)

    def as_density(self) -> DensityMatrix:
        return DensityMatrix(self.d, np.outer(self.amplitudes, self.amplitudes.conj()))


class NSiteState:
    """Density matrix on an n-site space, tagged with a symmetry flag."""

    __slots__ = ("space", "rho", "is_symmetric")

    def __init__(
        self,
        space: SiteSpace,
        rho,
        *,
        is_symmetric: bool = False,
        validate: bool = True,
    ):
        arr = np.asarray(rho, dtype=np.complex128)
        if arr.shape != (space.dim, space.dim):
            raise SpaceMismatch(f"rho shape {arr.shape} does not match dim {space.dim}")
        if validate:
            if np.abs(arr - arr.conj().T).max() > TOL_HERM:
                raise InvalidState("rho is not Hermitian")
            if abs(arr.trace().real - 1.0) > 1e-12:
                raise InvalidState(f"trace {arr.trace().real:.6g} != 1")
            if np.linalg.eigvalsh(arr)[0] < -1e-10:
                raise InvalidState("rho has a negative eigenvalue")
        if arr is rho:
            arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "rho", arr)
        object.__setattr__(self, "is_symmetric", bool(is_symmetric))

    def __setattr__(self, name, value):
        raise AttributeError("NSiteState is immutable")


def bloch_to_density(v: BlochVector) -> DensityMatrix:
    """Qubit state at Bloch point (x, y, z); pure exactly on the sphere."""
    m = 0.5 * np.array(
        [[1 + v.z, v.x - 1j * v.y], [v.x + 1j * v.y, 1 - v.z]], dtype=np.complex128
    )
    return DensityMatrix(2, m)


def density_to_bloch(rho: DensityMatrix) -> BlochVector:
    if rho.d != 2:
        raise SpaceMismatch("Bloch chart exists only for d = 2")
    e = rho.entries
    x = float((e[0, 1] + e[1, 0]).real)
    y = float((1j * (e[0, 1] - e[1, 0])).real)
    z = float((e[0, 0] - e[1, 1]).real)
    return BlochVector(x, y, z)


def product_power(rho: DensityMatrix, n: int) -> NSiteState:
    """n-fold Kronecker power rho (x) ... (x) rho; always permutation-symmetric."""
    if n < 1:
        raise SpaceMismatch(f"need n >= 1, got {n}")
    space = SiteSpace(rho.d, n)  # raises DimensionOverflow beyond the dense cap
    out = rho.entries
    for _ in range(n - 1):
        out = np.kron(out, rho.entries)
    # positivity and unit trace are inherited from the factor, skip re-validation
    return NSiteState(space, out, is_symmetric=True, validate=False)


def power_vector(psi: PureState, n: int) -> np.ndarray:
    """Amplitude vector of the n-fold product of a pure state."""
    space = SiteSpace(psi.d, n)
    out = psi.amplitudes
    for _ in range(n - 1):
        out = np.kron(out, psi.amplitudes)
    assert out.size == space.dim
    return out


def pure_power(psi: PureState, n: int) -> NSiteState:
    v = power_vector(psi, n)
    return NSiteState(
        SiteSpace(psi.d, n), np.outer(v, v.conj()), is_symmetric=True, validate=False
    )


def expect(state: NSiteState, a: Operator) -> float:
    """Tr(rho A) for Hermitian A; the vanishing imaginary part is discarded."""
    if a.space != state.space:
        raise SpaceMismatch(f"operator space {a.space} does not match state {state.space}")
    if hermiticity_defect(a) > TOL_HERM:
        raise NotHermitian("expectation target is not Hermitian")
    val = complex(np.einsum("ij,ji->", state.rho, a.entries))
    if abs(val.imag) > 1e-10:
        raise InvalidState(f"expectation has imaginary part {val.imag:.3e}")
    return float(val.real)


def a_infinity(section: SymmetricSection, rho: DensityMatrix) -> float:
    """Limit value of a symmetric section on the product state built from rho.

    Product-state expectations of a symmetric section are independent of n,
    so the n -> infinity limit is the seed-order expectation itself.
    """
    return expect(product_power(rho, section.m), section.seed)


def is_permutation_invariant(state: NSiteState, tol: float = 1e-10) -> bool:
    """True iff rho is fixed by every adjacent site transposition."""
    n = state.space.n
    if n == 1:
        return True
    as_op = Operator(state.space, state.rho, copy=False)
    for k in range(1, n):
        perm = list(range(1, n + 1))
        perm[k - 1], perm[k] = perm[k], perm[k - 1]
        moved = permute_sites(as_op, perm)
        if np.abs(moved.entries - state.rho).max() > tol:
            return False
    return True


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """Half the trace norm of the difference; the standard state metric."""
    if a.d != b.d:
        raise SpaceMismatch(f"dimensions differ: {a.d} vs {b.d}")
    w = np.linalg.eigvalsh(a.entries - b.entries)
    return 0.5 * float(np.abs(w).sum())
