"""Symmetrization calculus on multi-site operators.

A "section" is a rule n |-> A_n built from a fixed m-site seed: the seed is
padded with identities to n sites and averaged over all site permutations.
The three extension routes here (one-site accumulation, pair decomposition
with collective sums, literal subset placement) evaluate the same average and
are cross-checked against each other and against direct permutation
averaging in the tests.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .linalg import (
    MacrofieldError,
    Operator,
    SiteSpace,
    SpaceMismatch,
    TOL_HERM,
    _embed_view,
    _matmul,
    hermiticity_defect,
    site_sum,
    spectral_norm,
)


class OrderTooLarge(MacrofieldError):
    pass


class BadOrder(MacrofieldError):
    pass


class DecayBoundViolated(MacrofieldError):
    pass


# direct permutation averaging is n! work; beyond this an extension route is required
DEFAULT_SYMMETRIZE_ORDER = 8
DEFAULT_SEED_ORDER = 3


def symmetrize(a: Operator, max_order: int = DEFAULT_SYMMETRIZE_ORDER) -> Operator:
    """Average a over all n! site permutations.

    Each permutation acts as an axis transpose of the 2n-legged tensor, so no
    permutation matrices are built; still n! terms, hence the order cap.
    """
    n = a.space.n
    if n > 20:
        raise OrderTooLarge(f"{n}! does not fit in 64-bit arithmetic")
    if n > max_order:
        raise OrderTooLarge(f"direct permutation sum capped at order {max_order}, got {n}")
    if n == 1:
        return a
    d = a.space.d
    t = a.entries.reshape((d,) * (2 * n))
    acc = np.zeros_like(t)
    for perm in itertools.permutations(range(n)):
        axes = perm + tuple(p + n for p in perm)
        acc += t.transpose(axes)
    acc /= math.factorial(n)
    return Operator(a.space, acc.reshape(a.dim, a.dim), copy=False)


def _pair_terms(seed: np.ndarray, d: int) -> list[tuple[np.ndarray, np.ndarray]]:
    # operator-Schmidt split of a two-site operator: seed = sum_r L_r (x) M_r
    r = seed.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)
    u, sig, vh = np.linalg.svd(r)
    cut = 1e-14 * max(1.0, float(sig[0]) if sig.size else 1.0)
    terms = []
    for i, s in enumerate(sig):
        if s <= cut:
            break
        scale = math.sqrt(float(s))
        terms.append((scale * u[:, i].reshape(d, d), scale * vh[i, :].reshape(d, d)))
    return terms


def _site_sum_arr(b: np.ndarray, d: int, n: int) -> np.ndarray:
    out = np.zeros((d**n, d**n), dtype=np.complex128)
    for k in range(1, n + 1):
        _embed_view(out, d, k, n)[...] += b
    return out


def _extend_pair(seed_sym: np.ndarray, d: int, n: int) -> np.ndarray:
    # sum over ordered pairs i != j of L at site i, M at site j, via
    # collective sums: sum_{i!=j} L^(i) M^(j) = S(L) S(M) - S(LM)
    dim = d**n
    acc = np.zeros((dim, dim), dtype=np.complex128)
    for left, right in _pair_terms(seed_sym, d):
        acc += _matmul(_site_sum_arr(left, d, n), _site_sum_arr(right, d, n))
        acc -= _site_sum_arr(left @ right, d, n)
    acc /= n * (n - 1)
    return acc


def _extend_placement(seed_sym: np.ndarray, d: int, m: int, n: int) -> np.ndarray:
    # literal sum over the C(n, m) site subsets; the seed is already
    # permutation-averaged, so unordered subsets suffice
    pad = np.kron(seed_sym, np.eye(d ** (n - m), dtype=np.complex128))
    t = pad.reshape((d,) * (2 * n))
    acc = np.zeros_like(t)
    for combo in itertools.combinations(range(n), m):
        rest = [q for q in range(n) if q not in combo]
        axes = [0] * n
        for src, dst in enumerate(combo):
            axes[dst] = src
        for src, dst in enumerate(rest):
            axes[dst] = m + src
        acc += t.transpose(axes + [x + n for x in axes])
    acc /= math.comb(n, m)
    return acc.reshape(d**n, d**n)


def j_nm(n: int, m: int, a_m: Operator, *, max_seed_order: int = DEFAULT_SEED_ORDER) -> Operator:
    """Extend an m-site seed to the permutation-averaged n-site operator.

    Equals the n-site symmetrization of a_m padded with identities.  Unital,
    positive, and norm-nonincreasing; j_nm(n, n, a) is plain symmetrization.
    """
    if m < 1 or n < m:
        raise BadOrder(f"need n >= m >= 1, got n={n}, m={m}")
    if a_m.space.n != m:
        raise SpaceMismatch(f"seed lives on {a_m.space.n} sites, expected {m}")
    if n == m:
        return symmetrize(a_m)
    if m > max_seed_order:
        raise OrderTooLarge(f"seed order {m} beyond the configured cap {max_seed_order}")
    d = a_m.space.d
    space = SiteSpace(d, n)
    if m == 1:
        arr = site_sum(a_m, n).entries / n
        return Operator(space, arr, copy=False)
    seed_sym = symmetrize(a_m).entries
    if m == 2:
        arr = _extend_pair(seed_sym, d, n)
    else:
        arr = _extend_placement(seed_sym, d, m, n)
    return Operator(space, arr, copy=False)


@dataclass(frozen=True)
class SymmetricSection:
    """Constant-tail section: n |-> j_nm(n, m, seed) for every n >= m."""

    d: int
    m: int
    seed: Operator

    def __post_init__(self) -> None:
        if self.seed.space != SiteSpace(self.d, self.m):
            raise SpaceMismatch(
                f"seed space {self.seed.space} does not match (d={self.d}, m={self.m})"
            )

    def materialize(self, n: int) -> Operator:
        return j_nm(n, self.m, self.seed)


@dataclass(frozen=True)
class PerturbedSection:
    """A symmetric section plus a caller-declared decaying perturbation.

    The caller promises spectral_norm(perturbation(n)) <= c * n**(-gamma);
    the bound is verified at every materialized n, never inferred.
    """

    base: SymmetricSection
    perturbation: Callable[[int], Operator]
    c: float
    gamma: float

    def __post_init__(self) -> None:
        if self.gamma <= 0:
            raise BadOrder(f"decay exponent must be positive, got {self.gamma}")

    def materialize(self, n: int) -> Operator:
        body = self.base.materialize(n)
        pert = self.perturbation(n)
        if pert.space != body.space:
            raise SpaceMismatch("perturbation space does not match the base section")
        bound = self.c * n ** (-self.gamma)
        norm = spectral_norm(pert)
        if norm > bound + 1e-12:
            raise DecayBoundViolated(
                f"perturbation norm {norm:.3e} exceeds declared bound {bound:.3e} at n={n}"
            )
        return Operator(body.space, body.entries + pert.entries, copy=False)


def materialize(section: SymmetricSection | PerturbedSection, n: int) -> Operator:
    return section.materialize(n)


@dataclass(frozen=True)
class FrequencySpec:
    """One-site projector whose n-site average counts outcome frequency."""

    d: int
    projector: Operator

    def __post_init__(self) -> None:
        p = self.projector
        if p.space != SiteSpace(self.d, 1):
            raise SpaceMismatch(f"projector must live on one site of dimension {self.d}")
        if hermiticity_defect(p) > TOL_HERM:
            raise SpaceMismatch("projector is not Hermitian")
        defect = np.abs(p.entries @ p.entries - p.entries).max()
        if defect > 100 * TOL_HERM:
            raise SpaceMismatch(f"projector is not idempotent (defect {defect:.2e})")


def frequency_operator(spec: FrequencySpec, n: int) -> Operator:
    """Site average of the outcome projector: eigenvalues k/n, k = 0..n."""
    if n < 1:
        raise BadOrder(f"need n >= 1, got {n}")
    arr = site_sum(spec.projector, n).entries / n
    return Operator(SiteSpace(spec.d, n), arr, copy=False)


def frequency_section(spec: FrequencySpec) -> SymmetricSection:
    """The frequency operator as an order-1 symmetric section."""
    return SymmetricSection(spec.d, 1, spec.projector)
