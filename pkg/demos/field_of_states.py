"""Mixture expectations of averaged observables are already their limits.

For a mixture of product powers, the expectation of an averaged observable
at finite n equals the weighted average of the per-atom limit values at
every n at or above the seed order. The table shows both sides for two
different observables on the same mixture.
"""

import numpy as np

from macrofield import (
    BlochVector,
    DiscreteMixture,
    Operator,
    PAULI_X,
    PAULI_Z,
    SiteSpace,
    SymmetricSection,
    bloch_to_density,
    field_of_states_check,
)

MIX = DiscreteMixture(
    [
        (0.25, bloch_to_density(BlochVector(0.0, 0.0, 0.8))),
        (0.75, bloch_to_density(BlochVector(0.3, 0.0, -0.5))),
    ]
)


def show(label: str, section: SymmetricSection) -> None:
    print(label)
    for n, lhs, rhs in field_of_states_check(MIX, section, range(section.m, 9)):
        print(f"  n={n}: finite {lhs:+.12f}   limit {rhs:+.12f}   diff {abs(lhs - rhs):.1e}")
    print()


def main() -> None:
    z_avg = SymmetricSection(2, 1, PAULI_Z)
    xz = 0.5 * (
        np.kron(PAULI_X.entries, PAULI_Z.entries) + np.kron(PAULI_Z.entries, PAULI_X.entries)
    )
    xz_sym = SymmetricSection(2, 2, Operator(SiteSpace(2, 2), xz))
    show("averaged sigma_z (seed order 1)", z_avg)
    show("averaged symmetric XZ pair (seed order 2)", xz_sym)


if __name__ == "__main__":
    main()
