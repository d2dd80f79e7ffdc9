#!/usr/bin/env python3
"""The 3x3 stochastic counterexample and its semigroup rescue.

P = (1/3) J and the printed Q commute, yet the nonzero-pattern counts differ
at (i, k) = (0, 0), so they do not commute strongly. Both are irreducible,
and the semigroups e^{-t} e^{tP}, e^{-s} e^{sQ} are strictly positive for
positive times, so every sampled pair of semigroup elements does commute
strongly. The script prints both halves of the story.
"""

import numpy as np

from cpdilate.stochastic import (
    build_diagonal_intertwiner,
    is_irreducible,
    semigroup_at,
    strongly_commute_diagonal,
)

P = np.full((3, 3), 1.0 / 3.0)
Q = np.array([[0.5, 0.0, 0.5], [0.25, 0.5, 0.25], [0.25, 0.5, 0.25]])


def main():
    print("P =")
    print(P)
    print("Q =")
    print(Q)
    rep = strongly_commute_diagonal(P, Q)
    print(f"\ncommute: {rep.commute} (residual {rep.commutation_residual:.1e})")
    print(f"pattern-count criterion holds: {rep.card.holds}")
    for i, k, c1, c2 in rep.card.witnesses:
        print(f"  witness (i={i}, k={k}): counts {c1} vs {c2}")
    print(f"strongly commute: {rep.strongly_commute}")
    print(f"irreducible: P {is_irreducible(P)}, Q {is_irreducible(Q)}")

    print("\nsemigroup samples e^{-t}e^{tP}, e^{-s}e^{sQ}:")
    for t in (0.1, 0.5, 1.0, 2.0):
        for s in (0.1, 0.5, 1.0, 2.0):
            pt, qs = semigroup_at(P, t), semigroup_at(Q, s)
            sample = strongly_commute_diagonal(pt, qs, tol=1e-8)
            tw = build_diagonal_intertwiner(pt, qs, tol=1e-8)
            print(
                f"  t={t:<4} s={s:<4} strongly commute: {sample.strongly_commute}, "
                f"min entry {min(pt.min(), qs.min()):.3f}, "
                f"intertwiner residual {tw.distinguished_residual:.1e}"
            )


if __name__ == "__main__":
    main()
