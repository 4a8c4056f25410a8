"""Classical Bernoulli sequence space next to its qubit image.

Finite cylinder events and their AND/OR/NOT combinations map onto commuting
diagonal projections on n qubit sites. Sampling utilities check the strong
law of large numbers numerically, with a counter-based generator so every
run is reproducible bit for bit from a 64-bit seed.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .linalg import (
    PROJ_0,
    PROJ_1,
    MacrofieldError,
    Operator,
    SiteSpace,
    SpaceMismatch,
    embed_at_site,
    identity,
)
from .states import PureState, expect, pure_power

__all__ = [
    "MAX_CONSTRAINTS",
    "MAX_ENUM_SITES",
    "SiteBeyondHorizon",
    "TooManySites",
    "BernoulliSpec",
    "CylinderEvent",
    "BooleanExpr",
    "Leaf",
    "And",
    "Or",
    "Not",
    "cylinder",
    "involved_sites",
    "random_expression",
    "SllnReport",
    "hoeffding_bound",
    "sample_sequences",
    "slln_check",
    "cylinder_to_projection",
    "classical_probability",
    "quantum_classical_agreement",
]

# cap on constraints per event and on the enumeration footprint (2^16 atoms)
MAX_CONSTRAINTS = 16
MAX_ENUM_SITES = 16


class SiteBeyondHorizon(MacrofieldError):
    pass


class TooManySites(MacrofieldError):
    pass


@dataclass(frozen=True)
class BernoulliSpec:
    """Coin bias for i.i.d. binary sequences."""

    p: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"bias must lie in [0, 1], got {self.p}")


@dataclass(frozen=True)
class CylinderEvent:
    """Finitely many fixed bits: site index k >= 1 mapped to a bit in {0, 1}."""

    constraints: tuple[tuple[int, int], ...]

    def __init__(self, constraints) -> None:
        items = dict(constraints)
        if len(items) > MAX_CONSTRAINTS:
            raise ValueError(f"at most {MAX_CONSTRAINTS} constraints, got {len(items)}")
        norm = []
        for k, bit in sorted(items.items()):
            if not (isinstance(k, int) and k >= 1):
                raise ValueError(f"site index must be a positive integer, got {k!r}")
            if bit not in (0, 1):
                raise ValueError(f"bit must be 0 or 1, got {bit!r}")
            norm.append((k, int(bit)))
        object.__setattr__(self, "constraints", tuple(norm))


class BooleanExpr:
    """Finite AND/OR/NOT tree over cylinder-event leaves."""

    __slots__ = ()


@dataclass(frozen=True)
class Leaf(BooleanExpr):
    event: CylinderEvent


@dataclass(frozen=True)
class And(BooleanExpr):
    left: BooleanExpr
    right: BooleanExpr


@dataclass(frozen=True)
class Or(BooleanExpr):
    left: BooleanExpr
    right: BooleanExpr


@dataclass(frozen=True)
class Not(BooleanExpr):
    inner: BooleanExpr


def cylinder(site: int, bit: int) -> Leaf:
    """The one-bit event 'sequence has `bit` at `site`'."""
    return Leaf(CylinderEvent({site: bit}))


def involved_sites(expr: BooleanExpr) -> tuple[int, ...]:
    sites: set[int] = set()
    stack = [expr]
    while stack:
        node = stack.pop()
        if isinstance(node, Leaf):
            sites.update(k for k, _ in node.event.constraints)
        elif isinstance(node, Not):
            stack.append(node.inner)
        elif isinstance(node, (And, Or)):
            stack.extend((node.left, node.right))
        else:
            raise TypeError(f"not a boolean expression node: {node!r}")
    return tuple(sorted(sites))


def random_expression(rng: np.random.Generator, horizon: int, max_leaves: int) -> BooleanExpr:
    """Seeded random expression with 1..max_leaves one-bit leaves, sites <= horizon."""
    if horizon < 1 or max_leaves < 1:
        raise ValueError("horizon and max_leaves must be >= 1")
    count = int(rng.integers(1, max_leaves + 1))
    nodes: list[BooleanExpr] = [
        cylinder(int(rng.integers(1, horizon + 1)), int(rng.integers(0, 2)))
        for _ in range(count)
    ]
    while len(nodes) > 1:
        a = nodes.pop(int(rng.integers(len(nodes))))
        b = nodes.pop(int(rng.integers(len(nodes))))
        joined: BooleanExpr = And(a, b) if rng.integers(2) else Or(a, b)
        if rng.integers(4) == 0:
            joined = Not(joined)
        nodes.append(joined)
    expr = nodes[0]
    if rng.integers(4) == 0:
        expr = Not(expr)
    return expr


@dataclass(frozen=True)
class SllnReport:
    p: float
    n: int
    trials: int
    delta: float
    hit_fraction: float
    hoeffding_bound: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.hit_fraction <= 1.0:
            raise ValueError(f"hit_fraction must lie in [0, 1], got {self.hit_fraction}")
        expected = hoeffding_bound(self.n, self.delta)
        if not math.isclose(self.hoeffding_bound, expected, rel_tol=1e-12, abs_tol=1e-300):
            raise ValueError("hoeffding_bound does not match 2 exp(-2 n delta^2)")


def hoeffding_bound(n: int, delta: float) -> float:
    return 2.0 * math.exp(-2.0 * n * delta * delta)


def sample_sequences(spec: BernoulliSpec, n: int, trials: int, seed: int) -> np.ndarray:
    """trials x n matrix of i.i.d. Bernoulli(p) bits, deterministic in seed.

    Bits come from thresholding uniform [0, 1) draws, so p = 0 and p = 1 are
    exact. Draws are blocked to bound transient memory; the block split does
    not change the stream.
    """
    if n < 1 or trials < 1:
        raise ValueError(f"need n >= 1 and trials >= 1, got n={n}, trials={trials}")
    rng = np.random.Generator(np.random.Philox(seed))
    out = np.empty((trials, n), dtype=np.uint8)
    block = max(1, (1 << 22) // n)
    for start in range(0, trials, block):
        stop = min(start + block, trials)
        out[start:stop] = rng.random((stop - start, n)) < spec.p
    return out


def slln_check(spec: BernoulliSpec, n: int, trials: int, delta: float, seed: int) -> SllnReport:
    """Fraction of trials whose sample mean lands within delta of p."""
    if delta <= 0.0:
        raise ValueError(f"tolerance must be positive, got {delta}")
    bits = sample_sequences(spec, n, trials, seed)
    means = bits.mean(axis=1)
    hits = int(np.count_nonzero(np.abs(means - spec.p) <= delta))
    return SllnReport(spec.p, n, trials, delta, hits / trials, hoeffding_bound(n, delta))


def _leaf_projection(event: CylinderEvent, n: int) -> Operator:
    space = SiteSpace(2, n)
    acc = identity(space).entries
    for k, bit in event.constraints:
        if k > n:
            raise SiteBeyondHorizon(f"leaf fixes site {k} but the horizon is {n}")
        local = PROJ_1 if bit else PROJ_0
        acc = acc @ embed_at_site(local, k, n).entries
    return Operator(space, acc, copy=False)


def cylinder_to_projection(expr: BooleanExpr, n: int) -> Operator:
    """Boolean-to-projection map: AND is the product, OR is A + B - AB, NOT
    is 1 - A. All images are commuting diagonal 0/1 projections."""
    space = SiteSpace(2, n)
    if isinstance(expr, Leaf):
        return _leaf_projection(expr.event, n)
    if isinstance(expr, Not):
        a = cylinder_to_projection(expr.inner, n).entries
        return Operator(space, np.eye(space.dim, dtype=np.complex128) - a, copy=False)
    if isinstance(expr, And):
        a = cylinder_to_projection(expr.left, n).entries
        b = cylinder_to_projection(expr.right, n).entries
        return Operator(space, a @ b, copy=False)
    if isinstance(expr, Or):
        a = cylinder_to_projection(expr.left, n).entries
        b = cylinder_to_projection(expr.right, n).entries
        return Operator(space, a + b - a @ b, copy=False)
    raise TypeError(f"not a boolean expression node: {expr!r}")


def _holds(expr: BooleanExpr, assignment: dict[int, int]) -> bool:
    if isinstance(expr, Leaf):
        return all(assignment[k] == bit for k, bit in expr.event.constraints)
    if isinstance(expr, Not):
        return not _holds(expr.inner, assignment)
    if isinstance(expr, And):
        return _holds(expr.left, assignment) and _holds(expr.right, assignment)
    if isinstance(expr, Or):
        return _holds(expr.left, assignment) or _holds(expr.right, assignment)
    raise TypeError(f"not a boolean expression node: {expr!r}")


def classical_probability(spec: BernoulliSpec, expr: BooleanExpr) -> float:
    """Exact mu_p probability of the expression.

    Enumerates bit assignments of the involved sites, which is the
    inclusion-exclusion expansion summed atom by atom.
    """
    sites = involved_sites(expr)
    if len(sites) > MAX_ENUM_SITES:
        raise TooManySites(f"{len(sites)} involved sites exceed the cap {MAX_ENUM_SITES}")
    p = spec.p
    total = 0.0
    for bits in itertools.product((0, 1), repeat=len(sites)):
        if _holds(expr, dict(zip(sites, bits))):
            weight = 1.0
            for b in bits:
                weight *= p if b else 1.0 - p
            total += weight
    return total


def quantum_classical_agreement(
    psi: PureState, expr: BooleanExpr, n: int
) -> tuple[float, float]:
    """Expectation of the projection image on psi^(x)n next to the exact
    mu_p probability with p = |<1|psi>|^2. The pair agrees within 1e-10."""
    if psi.d != 2:
        raise SpaceMismatch(f"binary sequence space needs qubit sites, got d={psi.d}")
    proj = cylinder_to_projection(expr, n)
    quantum = expect(pure_power(psi, n), proj)
    p = min(max(abs(psi.amplitudes[1]) ** 2, 0.0), 1.0)
    classical = classical_probability(BernoulliSpec(p), expr)
    return quantum, classical
