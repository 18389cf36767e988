"""Exact integer linear algebra for weight-lattice computations.

Smith normal form with unimodular transforms, used to solve phase
congruences t^(W_j - W_j0) = e^{i delta_j} over the torus and to
enumerate finite stabilizer subgroups.
"""

from __future__ import annotations

import numpy as np


def smith_normal_form(A: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (U, S, V) with U @ A @ V = S, U and V unimodular, S diagonal.

    S has nonnegative diagonal entries d_1 | d_2 | ... (divisibility chain).
    Uses exact Python-int arithmetic; intended for small matrices.
    """
    A = np.asarray(A)
    if A.ndim != 2:
        raise ValueError("expected a 2-d integer matrix")
    m, n = A.shape
    S = [[int(x) for x in row] for row in A]
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        S[i], S[j] = S[j], S[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in S:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, c):
        # row[dst] += c * row[src]
        S[dst] = [a + c * b for a, b in zip(S[dst], S[src])]
        U[dst] = [a + c * b for a, b in zip(U[dst], U[src])]

    def add_col(src, dst, c):
        for row in S:
            row[dst] += c * row[src]
        for row in V:
            row[dst] += c * row[src]

    t = 0
    while t < min(m, n):
        # find a nonzero pivot in the trailing block
        piv = None
        for i in range(t, m):
            for j in range(t, n):
                if S[i][j] != 0:
                    if piv is None or abs(S[i][j]) < abs(S[piv[0]][piv[1]]):
                        piv = (i, j)
        if piv is None:
            break
        swap_rows(t, piv[0])
        swap_cols(t, piv[1])

        # clear row and column t by Euclidean steps
        dirty = True
        while dirty:
            dirty = False
            for i in range(t + 1, m):
                if S[i][t] != 0:
                    q = S[i][t] // S[t][t]
                    add_row(t, i, -q)
                    if S[i][t] != 0:
                        swap_rows(t, i)
                        dirty = True
            for j in range(t + 1, n):
                if S[t][j] != 0:
                    q = S[t][j] // S[t][t]
                    add_col(t, j, -q)
                    if S[t][j] != 0:
                        swap_cols(t, j)
                        dirty = True
        if S[t][t] < 0:
            add_row(t, t, -2)  # negate row t (row += -2*row)
        t += 1

    # enforce the divisibility chain d_i | d_{i+1}
    r = t
    changed = True
    while changed:
        changed = False
        for i in range(r - 1):
            a, b = S[i][i], S[i + 1][i + 1]
            if a and b % a != 0:
                # fold entry b into position (i, i) via one mixed step
                add_col(i + 1, i, 1)
                dirty = True
                while dirty:
                    dirty = False
                    q = S[i + 1][i] // S[i][i]
                    add_row(i, i + 1, -q)
                    if S[i + 1][i] != 0:
                        swap_rows(i, i + 1)
                        dirty = True
                q = S[i][i + 1] // S[i][i]
                add_col(i, i + 1, -q)
                if S[i][i] < 0:
                    add_row(i, i, -2)
                if S[i + 1][i + 1] < 0:
                    add_row(i + 1, i + 1, -2)
                changed = True

    to_arr = lambda M: np.array(M, dtype=object)
    return to_arr(U), to_arr(S), to_arr(V)


def solve_phase_congruence(D: np.ndarray, delta: np.ndarray, tol: float = 1e-9):
    """Solve D @ theta = delta (mod 2*pi) for theta in R^g.

    D is an integer (m, g) matrix, delta a real m-vector.  Returns
    (theta, info) where theta is one particular solution, or (None, info)
    when the congruence has no solution.  info carries the residual of the
    obstruction rows and the homogeneous solution structure:

    - info["rank"]: rank of D
    - info["free_rank"]: g - rank (continuous solution directions)
    - info["torsion"]: invariant factors d_1..d_r
    - info["residual"]: max distance of obstruction rows from 2*pi*Z
    """
    D = np.asarray(D, dtype=np.int64)
    delta = np.asarray(delta, dtype=float)
    m, g = D.shape
    U, S, V = smith_normal_form(D)
    diag = [int(S[i][i]) for i in range(min(m, g))]
    rank = sum(1 for d in diag if d != 0)
    Uf = np.array([[float(x) for x in row] for row in U]).reshape(m, m)
    Vf = np.array([[float(x) for x in row] for row in V]).reshape(g, g)
    rhs = (Uf @ delta).reshape(m)

    two_pi = 2.0 * np.pi
    residual = 0.0
    for i in range(rank, m):
        frac = np.abs(rhs[i]) % two_pi
        residual = max(residual, min(frac, two_pi - frac))
    info = {
        "rank": rank,
        "free_rank": g - rank,
        "torsion": [d for d in diag[:rank]],
        "residual": residual,
    }
    if residual > tol:
        return None, info
    psi = np.zeros(g)
    for i in range(rank):
        psi[i] = rhs[i] / diag[i]
    theta = (Vf @ psi).reshape(g)
    return theta, info


def homogeneous_torsion_angles(D: np.ndarray, max_order: int = 4096) -> np.ndarray:
    """All theta in [0, 2*pi)^g with D @ theta = 0 (mod 2*pi), modulo the
    continuous part.

    Returns an (order, g) array enumerating the finite subgroup
    {theta : D theta in 2*pi Z^m} / (continuous directions).  Raises if the
    subgroup is larger than max_order.
    """
    D = np.asarray(D, dtype=np.int64)
    m, g = D.shape
    if m == 0 or g == 0:
        return np.zeros((1, g))
    _, S, V = smith_normal_form(D)
    diag = [int(S[i][i]) for i in range(min(m, g))]
    rank = sum(1 for d in diag if d != 0)
    Vf = np.array([[float(x) for x in row] for row in V])
    order = 1
    for d in diag[:rank]:
        order *= d
    if order > max_order:
        raise ValueError(f"stabilizer order {order} exceeds cap {max_order}")
    combos = [np.zeros(g)]
    out = []
    grids = [np.arange(d) for d in diag[:rank]]
    mesh = np.meshgrid(*grids, indexing="ij") if grids else []
    if grids:
        coeffs = np.stack([mm.ravel() for mm in mesh], axis=1)  # (order, rank)
    else:
        coeffs = np.zeros((1, 0))
    for row in coeffs:
        psi = np.zeros(g)
        for i, (c, d) in enumerate(zip(row, diag[:rank])):
            psi[i] = 2.0 * np.pi * c / d
        out.append(Vf @ psi)
    return np.array(out) if out else np.array(combos)
