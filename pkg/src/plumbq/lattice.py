"""Exact lattice linear algebra: linking matrices, Smith normal form, coset
systems, the quadratic form Q, and certified ellipsoid enumeration."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .exact import floor_sqrt_frac, frac, lcm
from .graphs import PlumbingGraph

Matrix = tuple[tuple[Fraction, ...], ...]


def mat(rows) -> Matrix:
    return tuple(tuple(frac(x) for x in row) for row in rows)


def identity(n: int) -> Matrix:
    return tuple(tuple(Fraction(1 if i == j else 0) for j in range(n)) for i in range(n))


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    n, m, p = len(a), len(b), len(b[0])
    assert len(a[0]) == m
    return tuple(
        tuple(sum((a[i][k] * b[k][j] for k in range(m)), Fraction(0)) for j in range(p))
        for i in range(n)
    )


def mat_vec(a: Matrix, v) -> tuple:
    return tuple(sum((a[i][j] * frac(v[j]) for j in range(len(v))), Fraction(0))
                 for i in range(len(a)))


def dot(u, v) -> Fraction:
    return sum((frac(x) * frac(y) for x, y in zip(u, v)), Fraction(0))


def transpose(a: Matrix) -> Matrix:
    return tuple(zip(*a))


def linking_matrix(g: PlumbingGraph) -> Matrix:
    idx = {v: i for i, v in enumerate(g.vertices)}
    n = len(g.vertices)
    rows = [[Fraction(0)] * n for _ in range(n)]
    for v in g.vertices:
        rows[idx[v]][idx[v]] = g.weights[v]
    for a, b in g.edges:
        rows[idx[a]][idx[b]] = Fraction(1)
        rows[idx[b]][idx[a]] = Fraction(1)
    return mat(rows)


def det_w(a: Matrix) -> Fraction:
    """Exact determinant by fraction-free-ish Gaussian elimination."""
    n = len(a)
    m = [list(row) for row in a]
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det *= m[c][c]
        inv = 1 / m[c][c]
        for r in range(c + 1, n):
            if m[r][c]:
                f = m[r][c] * inv
                for k in range(c, n):
                    m[r][k] -= f * m[c][k]
    return det


def w_inverse(a: Matrix) -> Matrix:
    """Exact inverse via Gauss-Jordan."""
    n = len(a)
    m = [list(row) + [Fraction(1 if i == j else 0) for j in range(n)]
         for i, row in enumerate(a)]
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        m[c], m[piv] = m[piv], m[c]
        inv = 1 / m[c][c]
        m[c] = [x * inv for x in m[c]]
        for r in range(n):
            if r != c and m[r][c]:
                f = m[r][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return tuple(tuple(row[n:]) for row in m)


def leading_principal_minors(a: Matrix) -> list[Fraction]:
    n = len(a)
    return [det_w(tuple(row[: j + 1] for row in a[: j + 1])) for j in range(n)]


def is_negative_definite(a: Matrix) -> bool:
    return all((m > 0 if (j + 1) % 2 == 0 else m < 0)
               for j, m in enumerate(leading_principal_minors(a)))


def q_form(w_inv_or_w, l, inverse_given: bool = False) -> Fraction:
    """Q(l) = -l^T W^{-1} l, positive definite for negative definite W."""
    wi = w_inv_or_w if inverse_given else w_inverse(w_inv_or_w)
    return -dot(l, mat_vec(wi, l))


def gershgorin_bound(w: Matrix) -> Fraction:
    """Upper bound on the spectral radius of -W via row sums."""
    return max(sum(abs(x) for x in row) for row in w)


# -- Smith normal form ---------------------------------------------------------


@dataclass
class SNF:
    """A = U D V with U, V unimodular, D diagonal with divisibility chain.
    Uinv and Vinv are maintained so coset reduction needs no extra solves."""

    U: tuple
    D: tuple
    V: tuple
    Uinv: tuple
    Vinv: tuple

    @property
    def diag(self) -> tuple[int, ...]:
        return tuple(self.D[i][i] for i in range(len(self.D)))


def smith_normal_form(a) -> SNF:
    A = [[int(x) for x in row] for row in a]
    n = len(A)
    m = len(A[0])
    U = [[int(i == j) for j in range(n)] for i in range(n)]
    Uinv = [[int(i == j) for j in range(n)] for i in range(n)]
    V = [[int(i == j) for j in range(m)] for i in range(m)]
    Vinv = [[int(i == j) for j in range(m)] for i in range(m)]

    def row_op(i, j, f):  # row_i -= f*row_j  (A and Uinv); U gets col j += f*col i
        for k in range(m):
            A[i][k] -= f * A[j][k]
        for k in range(n):
            Uinv[i][k] -= f * Uinv[j][k]
        for k in range(n):
            U[k][j] += f * U[k][i]

    def col_op(i, j, f):  # col_i -= f*col_j  (A and Vinv^T): V rows
        for k in range(n):
            A[k][i] -= f * A[k][j]
        for k in range(m):
            V[j][k] += f * V[i][k]
        for k in range(m):
            Vinv[k][i] -= f * Vinv[k][j]

    def row_swap(i, j):
        A[i], A[j] = A[j], A[i]
        Uinv[i], Uinv[j] = Uinv[j], Uinv[i]
        for k in range(n):
            U[k][i], U[k][j] = U[k][j], U[k][i]

    def col_swap(i, j):
        for k in range(n):
            A[k][i], A[k][j] = A[k][j], A[k][i]
        V[i], V[j] = V[j], V[i]
        for k in range(m):
            Vinv[k][i], Vinv[k][j] = Vinv[k][j], Vinv[k][i]

    def row_negate(i):
        for k in range(m):
            A[i][k] = -A[i][k]
        for k in range(n):
            Uinv[i][k] = -Uinv[i][k]
        for k in range(n):
            U[k][i] = -U[k][i]

    t = 0
    while t < min(n, m):
        # find smallest nonzero pivot in the remaining block
        best = None
        for i in range(t, n):
            for j in range(t, m):
                if A[i][j] and (best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        i, j = best
        row_swap(t, i)
        col_swap(t, j)
        done = False
        while not done:
            done = True
            for r in range(t + 1, n):
                if A[r][t]:
                    row_op(r, t, A[r][t] // A[t][t])
                    if A[r][t]:
                        row_swap(t, r)
                        done = False
            for c in range(t + 1, m):
                if A[t][c]:
                    col_op(c, t, A[t][c] // A[t][t])
                    if A[t][c]:
                        col_swap(t, c)
                        done = False
        if A[t][t] < 0:
            row_negate(t)
        t += 1

    # enforce the divisibility chain d_i | d_{i+1}
    changed = True
    while changed:
        changed = False
        for i in range(min(n, m) - 1):
            a_, b_ = A[i][i], A[i + 1][i + 1]
            if a_ and b_ and b_ % a_:
                # fold b into a's position and re-reduce 2x2 block
                col_op(i, i + 1, -1)  # col_i += col_{i+1}
                done = False
                while not done:
                    done = True
                    if A[i + 1][i]:
                        f = A[i + 1][i] // A[i][i] if A[i][i] else 0
                        row_op(i + 1, i, f)
                        if A[i + 1][i]:
                            row_swap(i, i + 1)
                            done = False
                    if A[i][i + 1]:
                        f = A[i][i + 1] // A[i][i] if A[i][i] else 0
                        col_op(i + 1, i, f)
                        if A[i][i + 1]:
                            col_swap(i, i + 1)
                            done = False
                if A[i][i] < 0:
                    row_negate(i)
                if A[i + 1][i + 1] < 0:
                    row_negate(i + 1)
                changed = True

    return SNF(tuple(map(tuple, U)), tuple(map(tuple, A)), tuple(map(tuple, V)),
               tuple(map(tuple, Uinv)), tuple(map(tuple, Vinv)))


def _int_mat_vec(a, v):
    return tuple(sum(a[i][j] * v[j] for j in range(len(v))) for i in range(len(a)))


@dataclass
class CosetSystem:
    """Representatives of Z^n / B(Z^n), optionally filtered by parity."""

    basis: tuple
    snf: SNF
    representatives: tuple
    parity: tuple | None = None

    def __len__(self):
        return len(self.representatives)

    def reduce_key(self, x) -> tuple[int, ...]:
        """Canonical residue key of an integer vector modulo B(Z^n)."""
        y = _int_mat_vec(self.snf.Uinv, tuple(int(v) for v in x))
        return tuple(yi % d if d else yi for yi, d in zip(y, self.snf.diag))

    def index_of(self, x) -> int:
        return self._key_index[self.reduce_key(x)]

    def __post_init__(self):
        self._key_index = {self.reduce_key(r): i for i, r in enumerate(self.representatives)}


def coset_reps(basis, restrict_parity=None) -> CosetSystem:
    """Representatives of Z^n / B(Z^n) via Smith normal form.

    With restrict_parity = delta, keeps exactly the classes whose members are
    congruent to delta mod 2 (the classes meeting 2 Z^n + delta).
    """
    B = [[int(x) for x in row] for row in basis]
    s = smith_normal_form(B)
    diag = s.diag
    assert all(d != 0 for d in diag), "basis not full rank"
    reps = []
    for y in itertools.product(*(range(d) for d in diag)):
        x = _int_mat_vec(s.U, y)
        if restrict_parity is not None:
            if any((xi - int(di)) % 2 for xi, di in zip(x, restrict_parity)):
                continue
        reps.append(tuple(x))
    return CosetSystem(tuple(map(tuple, B)), s, tuple(reps),
                       tuple(int(d) for d in restrict_parity) if restrict_parity is not None else None)


# -- ellipsoid enumeration ---------------------------------------------------------


def enumerate_coset_in_ellipsoid(w: Matrix, b, bound) -> list[tuple[int, ...]]:
    """All l in 2W(Z^V)+b with Q(l)/4 <= bound, by the certified box argument:
    Q(l) >= |l|^2 / rho(-W), so every solution lies in the box
    |l_v| <= ceil(sqrt(4 * bound * rho)).

    Oracle-grade: cost is exponential in the rank; production series
    construction uses the support-structured enumerator in the zhat module.
    """
    bound = frac(bound)
    if bound < 0:
        return []
    n = len(w)
    rho = gershgorin_bound(w)
    r = floor_sqrt_frac(4 * bound * rho) + 1
    wi = w_inverse(w)
    two_w = tuple(tuple(int(2 * x) for x in row) for row in w)
    cs = coset_reps(two_w)
    key = cs.reduce_key(tuple(int(x) for x in b))
    out = []
    for l in itertools.product(range(-r, r + 1), repeat=n):
        if cs.reduce_key(l) != key:
            continue
        if q_form(wi, l, inverse_given=True) <= 4 * bound:
            out.append(l)
    return out


# -- Schur complement ---------------------------------------------------------------


def schur_complement(x: Matrix, split: int):
    """For symmetric X = [[A, B], [B^T, C]] with A the top-left split x split
    block: returns (S, T) with S = (C - B^T A^{-1} B)^{-1}, T = -A^{-1} B.

    Verifies X^{-1} = (T; I) S (T^T, I) + diag(A^{-1}, 0) and
    det S = det A / det X exactly.
    """
    n = len(x)
    m = split
    A = tuple(row[:m] for row in x[:m])
    B = tuple(row[m:] for row in x[:m])
    C = tuple(row[m:] for row in x[m:])
    Ainv = w_inverse(A)
    Bt = transpose(B)
    S_inner = tuple(
        tuple(C[i][j] - dot(Bt[i], mat_vec(Ainv, tuple(B[r][j] for r in range(m))))
              for j in range(n - m))
        for i in range(n - m)
    )
    S = w_inverse(S_inner)
    T = tuple(tuple(-v for v in row) for row in mat_mul(Ainv, B))
    # identity checks
    xinv = w_inverse(x)
    for i in range(n):
        for j in range(n):
            u = (T[i] if i < m else tuple(Fraction(1 if i - m == jj else 0) for jj in range(n - m)))
            v = (T[j] if j < m else tuple(Fraction(1 if j - m == jj else 0) for jj in range(n - m)))
            val = sum((u[a] * S[a][bb] * v[bb] for a in range(n - m) for bb in range(n - m)), Fraction(0))
            if i < m and j < m:
                val += Ainv[i][j]
            assert val == xinv[i][j], "Schur identity failed"
    assert det_w(S) * det_w(x) == det_w(A), "Schur determinant identity failed"
    return S, T
