"""Averaged one-site observables commute in the large-n limit.

Two demonstrations. First the commutator of averaged sigma_x and sigma_z,
whose norm is exactly 2/n, so the scaled column is constant. Second the
operator norm of an averaged two-site observable closing in on its sup
over product states from above.
"""

import numpy as np

from macrofield import (
    Operator,
    PAULI_X,
    PAULI_Z,
    SiteSpace,
    SymmetricSection,
    commutator_decay,
    fit_decay_exponent,
    norm_gap,
)

X_AVG = SymmetricSection(2, 1, PAULI_X)
Z_AVG = SymmetricSection(2, 1, PAULI_Z)
_XZ = 0.5 * (np.kron(PAULI_X.entries, PAULI_Z.entries) + np.kron(PAULI_Z.entries, PAULI_X.entries))
XZ_SYM = SymmetricSection(2, 2, Operator(SiteSpace(2, 2), _XZ))


def main() -> None:
    ns = range(2, 11)
    records = commutator_decay(X_AVG, Z_AVG, ns)
    print("commutator of averaged sigma_x and sigma_z")
    print(f"{'n':>3}  {'norm':>12}  {'n * norm':>10}")
    for rec in records:
        print(f"{rec.n:>3}  {rec.value:>12.9f}  {rec.scaled:>10.6f}")
    print(f"fitted decay exponent: {fit_decay_exponent(records):.4f}")
    print()

    print("norm of the averaged symmetric XZ pair vs its product-state sup")
    print(f"{'n':>3}  {'exact norm':>12}  {'product sup':>12}  {'gap':>10}")
    for rec in norm_gap(XZ_SYM, ns):
        print(f"{rec.n:>3}  {rec.exact_norm:>12.8f}  {rec.product_sup:>12.8f}  {rec.gap:>10.2e}")
    print("the gap is nonnegative and shrinks as n grows")


if __name__ == "__main__":
    main()
