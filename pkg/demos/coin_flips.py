"""Classical sequence space sitting inside the qubit picture.

A Monte Carlo check of the strong law of large numbers for a biased coin,
then a boolean event built from cylinder sets evaluated two ways: as a
Bernoulli probability and as the expectation of its projection image on a
product state with the same bias.
"""

import numpy as np

from macrofield import (
    And,
    BernoulliSpec,
    Not,
    PureState,
    cylinder,
    quantum_classical_agreement,
    slln_check,
)


def main() -> None:
    report = slln_check(BernoulliSpec(0.3), n=5000, trials=2000, delta=0.03, seed=42)
    print(f"coin bias {report.p}, horizon {report.n}, {report.trials} trials")
    print(f"fraction of runs with |mean - p| <= {report.delta}: {report.hit_fraction:.4f}")
    print(f"two-sided concentration bound for one run: {report.hoeffding_bound:.3e}")
    print()

    # "site 1 is heads, and not (site 2 heads and site 3 heads)"
    expr = And(cylinder(1, 1), Not(And(cylinder(2, 1), cylinder(3, 1))))
    p = 0.3
    psi = PureState(2, np.array([np.sqrt(1 - p), np.sqrt(p)]))
    quantum, classical = quantum_classical_agreement(psi, expr, n=4)
    print("event: heads at site 1 and not heads at both sites 2 and 3")
    print(f"classical probability  {classical:.12f}")
    print(f"projection expectation {quantum:.12f}")
    print(f"difference             {abs(quantum - classical):.2e}")


if __name__ == "__main__":
    main()
