"""Shared test helpers.

Oracles here are deliberately independent of the library internals: naive
Kronecker chains, explicit permutation matrices built by basis-index loops,
and closed-form binomials via math.comb.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)
P0 = np.diag([1.0, 0.0]).astype(complex)
P1 = np.diag([0.0, 1.0]).astype(complex)


def kron_chain(*mats: np.ndarray) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for m in mats:
        out = np.kron(out, m)
    return out


def naive_embed(b: np.ndarray, k: int, n: int) -> np.ndarray:
    d = b.shape[0]
    mats = [np.eye(d, dtype=complex)] * n
    mats[k - 1] = b
    return kron_chain(*mats)


def naive_perm_matrix(d: int, n: int, perm: tuple[int, ...]) -> np.ndarray:
    """U with U|i_1..i_n> = |j>, j having digit i_k at site perm[k-1].

    Built by an explicit loop over basis indices; independent of the
    digit-shuffle code under test.
    """
    dim = d**n
    u = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        digits = []
        rest = col
        for _ in range(n):
            digits.append(rest % d)
            rest //= d
        digits.reverse()  # digits[k-1] is the site-k digit, site 1 leftmost
        new_digits = [0] * n
        for k in range(1, n + 1):
            new_digits[perm[k - 1] - 1] = digits[k - 1]
        row = 0
        for g in new_digits:
            row = row * d + g
        u[row, col] = 1.0
    return u


def naive_symmetrize(a: np.ndarray, d: int, n: int) -> np.ndarray:
    out = np.zeros_like(a)
    for perm in itertools.permutations(range(1, n + 1)):
        u = naive_perm_matrix(d, n, perm)
        out += u @ a @ u.conj().T
    return out / math.factorial(n)


def rand_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (a + a.conj().T) / 2


def haar_qubit(rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    return v / np.linalg.norm(v)


def binom_window_mass(n: int, p: float, eps: float) -> float:
    """Closed-form mass of {k : |k/n - p| <= eps} under Binomial(n, p)."""
    total = 0.0
    for k in range(n + 1):
        if abs(k / n - p) <= eps + 1e-12:
            total += math.comb(n, k) * p**k * (1 - p) ** (n - k)
    return total
