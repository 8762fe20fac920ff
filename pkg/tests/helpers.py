"""Shared test helpers."""

import random

from torusmin.exact import IntegerMatrix

def random_unimodular(n: int, rng: random.Random, steps: int = 6) -> IntegerMatrix:
    """Product of elementary matrices (row additions and sign flips)."""
    rows = [[int(i == j) for j in range(n)] for i in range(n)]
    for _ in range(steps):
        i, j = rng.sample(range(n), 2) if n > 1 else (0, 0)
        if i != j:
            c = rng.choice([-2, -1, 1, 2])
            rows[i] = [a + c * b for a, b in zip(rows[i], rows[j])]
        if rng.random() < 0.2:
            k = rng.randrange(n)
            rows[k] = [-a for a in rows[k]]
    return IntegerMatrix(rows)


CAT = IntegerMatrix([[2, 1], [1, 1]])
EQ8 = IntegerMatrix([[1, 0], [3, -1]])


# one linear part per constructed branch
BRANCHES = {
    "eq9": [[1, 0], [3, -1]],
    "eq15p_3": [[1, 0, 0], [1, 0, -1], [0, 1, -1]],
    "eq15p_4": [[1, 0, 0], [2, 0, -1], [1, 1, 0]],
    "eq2p": [[1, 0, 0], [1, -1, 0], [0, 0, -1]],
    "shear3": [[1, 0, 0], [1, -1, 0], [0, 1, -1]],
    "eq9_affine2": [[1, 0, 0], [1, 1, 0], [2, 1, -1]],
    "eq16": [[1, 0, 0, 0], [1, -1, 0, 0], [1, 0, 0, -1], [0, 0, 1, 1]],
    "eq1p2p": [[1, 0, 0, 0], [1, -1, 0, 0], [0, 1, -1, 0], [0, 0, 1, -1]],
    "eqB_3": [[1, 0, 0, 0], [1, 1, 0, 0], [1, 0, 0, -1], [0, 1, 1, -1]],
    "eqB_2": [[1, 0, 0, 0], [0, 1, 0, 0], [1, 0, -1, 0], [0, 1, 0, -1]],
    "shear4": [[1, 0, 0, 0], [1, 1, 0, 0], [1, 0, -1, 0], [0, 0, 1, -1]],
    "eq_minus1": [[1, 0, 0, 0], [1, 1, 0, 0], [0, 1, 1, 0], [1, 2, 0, -1]],
}


# criterion number -> one-line verdict, printed at the end of the session
ACCEPTANCE = {}
