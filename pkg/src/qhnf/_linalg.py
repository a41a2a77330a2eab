"""Exact dense linear algebra over the rationals for small graded slices."""

from gmpy2 import mpq

ZERO = mpq(0)
ONE = mpq(1)


class Echelon:
    """Incrementally grown row-echelon basis of a subspace of Q^n."""

    def __init__(self, n):
        self.n = n
        self.rows = {}  # pivot column -> row with 1 at the pivot

    def __len__(self):
        return len(self.rows)

    def reduce(self, v):
        v = list(v)
        for piv in sorted(self.rows):
            c = v[piv]
            if c:
                row = self.rows[piv]
                for k in range(piv, self.n):
                    if row[k]:
                        v[k] -= c * row[k]
        return v

    def insert(self, v):
        """Add ``v``; return False when it was already in the span."""
        v = self.reduce(v)
        piv = next((k for k, c in enumerate(v) if c), None)
        if piv is None:
            return False
        inv = ONE / v[piv]
        v = [c * inv for c in v]
        for p, row in self.rows.items():
            c = row[piv]
            if c:
                self.rows[p] = [a - c * b for a, b in zip(row, v)]
        self.rows[piv] = v
        return True

    def contains(self, v):
        return not any(self.reduce(v))


class Solver:
    """Precomputed solver for ``M x = b`` with ``M`` given by its columns.

    Free variables are set to zero, so the returned particular solution is
    deterministic. ``solve`` returns None when the system is inconsistent.
    """

    def __init__(self, columns, nrows):
        self.nrows = nrows
        self.ncols = len(columns)
        m = [[mpq(columns[j][i]) for j in range(self.ncols)] for i in range(nrows)]
        e = [[ONE if i == k else ZERO for k in range(nrows)] for i in range(nrows)]
        pivots = []
        r = 0
        for j in range(self.ncols):
            if r == nrows:
                break
            sel = next((i for i in range(r, nrows) if m[i][j]), None)
            if sel is None:
                continue
            m[r], m[sel] = m[sel], m[r]
            e[r], e[sel] = e[sel], e[r]
            inv = ONE / m[r][j]
            m[r] = [c * inv for c in m[r]]
            e[r] = [c * inv for c in e[r]]
            for i in range(nrows):
                if i != r and m[i][j]:
                    f = m[i][j]
                    m[i] = [a - f * b for a, b in zip(m[i], m[r])]
                    e[i] = [a - f * b for a, b in zip(e[i], e[r])]
            pivots.append(j)
            r += 1
        self.rank = r
        self.pivots = pivots
        self.reduced = m
        self.transform = e

    def solve(self, rhs):
        y = [sum((a * b for a, b in zip(row, rhs) if a and b), ZERO) for row in self.transform]
        if any(y[self.rank:]):
            return None
        x = [ZERO] * self.ncols
        for r, j in enumerate(self.pivots):
            x[j] = y[r]
        return x

    def nullspace(self):
        pivset = set(self.pivots)
        basis = []
        for f in range(self.ncols):
            if f in pivset:
                continue
            v = [ZERO] * self.ncols
            v[f] = ONE
            for r, j in enumerate(self.pivots):
                v[j] = -self.reduced[r][f]
            basis.append(v)
        return basis


def rank(columns, nrows):
    return Solver(columns, nrows).rank
