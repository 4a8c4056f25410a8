"""Large-n limit experiments: commutator decay, norm convergence against the
product-state supremum, frequency concentration in spectral windows, and the
constancy of frequency expectations on product states.

Every limit claim is probed by a finite-n sweep; closed forms live in the
tests, never here, so the two routes stay independent.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from ._optim import OptimizerFailed, maximize_over_states
from .linalg import (
    MacrofieldError,
    Operator,
    commutator,
    hermitian_eig,
    spectral_norm,
)
from .sections import (
    BadOrder,
    FrequencySpec,
    PerturbedSection,
    SymmetricSection,
    frequency_operator,
    materialize,
)
from .states import PureState, power_vector

__all__ = [
    "DecayRecord",
    "NormGapRecord",
    "WindowMassRecord",
    "BadWindow",
    "OptimizerFailed",
    "commutator_decay",
    "fit_decay_exponent",
    "product_state_sup",
    "norm_gap",
    "window_projection",
    "window_mass",
    "born_curve",
    "deviation_norm",
]


class BadWindow(MacrofieldError):
    pass


@dataclass(frozen=True)
class DecayRecord:
    n: int
    value: float
    scaled: float


@dataclass(frozen=True)
class NormGapRecord:
    n: int
    exact_norm: float
    product_sup: float
    gap: float


@dataclass(frozen=True)
class WindowMassRecord:
    n: int
    epsilon: float
    mass: float


def _seed_order(section: SymmetricSection | PerturbedSection) -> int:
    return section.base.m if isinstance(section, PerturbedSection) else section.m


def commutator_decay(
    s1: SymmetricSection | PerturbedSection,
    s2: SymmetricSection | PerturbedSection,
    n_list,
) -> list[DecayRecord]:
    """Norms of [A_n, B_n] for two sections, with the n-scaled value alongside."""
    lo = max(_seed_order(s1), _seed_order(s2))
    records = []
    for n in sorted(set(int(n) for n in n_list)):
        if n < lo:
            raise BadOrder(f"n={n} below the seed order {lo}")
        c = commutator(materialize(s1, n), materialize(s2, n))
        value = spectral_norm(c)
        records.append(DecayRecord(n, value, value * n))
    return records


def fit_decay_exponent(records: list[DecayRecord], points: int = 5) -> float:
    """Power-law exponent from least squares on log value vs log n.

    Uses the largest `points` records with a positive value; nan when fewer
    than two remain (e.g. identical sections, all norms zero).
    """
    usable = [(r.n, r.value) for r in sorted(records, key=lambda r: r.n) if r.value > 1e-300]
    usable = usable[-points:]
    if len(usable) < 2:
        return float("nan")
    ns = np.log([n for n, _ in usable])
    vs = np.log([v for _, v in usable])
    slope = np.polyfit(ns, vs, 1)[0]
    return float(-slope)


def product_state_sup(section: SymmetricSection, n: int) -> float:
    """sup over product states of |<omega^(x)n, A_n>|.

    Product-state expectations of a symmetric section do not depend on n, so
    the optimizer runs on the m-site seed; n is validated and recorded only.
    """
    if not isinstance(section, SymmetricSection):
        raise BadOrder("product-state supremum is defined for symmetric sections")
    if n < section.m:
        raise BadOrder(f"n={n} below the seed order {section.m}")
    if section.d > 4:
        raise OptimizerFailed(f"no state chart for d={section.d}")
    seed = section.seed.entries
    m = section.m

    def objective(rho: np.ndarray) -> float:
        power = reduce(np.kron, [rho] * m)
        return abs(complex(np.einsum("ij,ji->", power, seed)))

    value, _ = maximize_over_states(objective, section.d)
    return value


def norm_gap(section: SymmetricSection, n_list) -> list[NormGapRecord]:
    """Exact operator norm vs the product-state supremum, per n."""
    sup = product_state_sup(section, section.m)
    records = []
    for n in sorted(set(int(n) for n in n_list)):
        if n < section.m:
            raise BadOrder(f"n={n} below the seed order {section.m}")
        exact = spectral_norm(materialize(section, n))
        records.append(NormGapRecord(n, exact, sup, exact - sup))
    return records


def window_projection(spec: FrequencySpec, n: int, p: float, epsilon: float) -> Operator:
    """Spectral projection of the frequency operator onto [p - eps, p + eps].

    The window is closed; eigenvalues within 1e-12 of an edge are included.
    """
    if not 0.0 <= p <= 1.0:
        raise BadWindow(f"target mean {p} outside [0, 1]")
    if epsilon <= 0.0:
        raise BadWindow(f"window half-width must be positive, got {epsilon}")
    f = frequency_operator(spec, n)
    sd = hermitian_eig(f)
    w = sd.eigenvalues
    mask = (w >= p - epsilon - 1e-12) & (w <= p + epsilon + 1e-12)
    dim = f.dim
    if not mask.any():
        return Operator(f.space, np.zeros((dim, dim), dtype=np.complex128), copy=False)
    cols = sd.eigenvectors[:, mask]
    if np.count_nonzero(cols) == cols.shape[1]:
        # one-hot eigenvectors (diagonal frequency operator): the projector is diagonal
        rows, which = np.nonzero(cols)
        proj = np.zeros((dim, dim), dtype=np.complex128)
        proj[rows, rows] = np.abs(cols[rows, which]) ** 2
    else:
        proj = cols @ cols.conj().T
    return Operator(f.space, proj, copy=False)


def window_mass(psi: PureState, spec: FrequencySpec, n: int, epsilon: float) -> WindowMassRecord:
    """Weight of the product state psi^(x)n inside the frequency window around
    its own mean p = <psi| P |psi>."""
    if psi.d != spec.d:
        raise BadWindow(f"state dimension {psi.d} does not match spec {spec.d}")
    p_raw = complex(np.vdot(psi.amplitudes, spec.projector.entries @ psi.amplitudes))
    p = min(max(float(p_raw.real), 0.0), 1.0)
    proj = window_projection(spec, n, p, epsilon)
    vec = power_vector(psi, n)
    mass = float(np.vdot(vec, proj.entries @ vec).real)
    return WindowMassRecord(n, float(epsilon), mass)


def born_curve(psi: PureState, spec: FrequencySpec, n_list) -> list[tuple[int, float]]:
    """Frequency-operator expectation on psi^(x)n for each n; constant in n."""
    out = []
    for n in sorted(set(int(n) for n in n_list)):
        f = frequency_operator(spec, n)
        vec = power_vector(psi, n)
        out.append((n, float(np.vdot(vec, f.entries @ vec).real)))
    return out


def deviation_norm(psi: PureState, spec: FrequencySpec, n: int) -> float:
    """Euclidean norm of (f_n - p) psi^(x)n with p the state's own mean."""
    p_raw = complex(np.vdot(psi.amplitudes, spec.projector.entries @ psi.amplitudes))
    p = float(p_raw.real)
    f = frequency_operator(spec, n)
    vec = power_vector(psi, n)
    return float(np.linalg.norm(f.entries @ vec - p * vec))
