"""Exact scalars, dense matrices and finite cochain complexes.

Everything downstream reduces to the routines here: ranks, kernels,
solving linear systems and cohomology with chosen representatives.
Two fields are supported, the rationals and prime fields F_p.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence


class InvalidComplex(ValueError):
    pass


class NotChainMap(ValueError):
    pass


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


class Fp:
    """Residue class modulo a prime, kept in [0, p)."""

    __slots__ = ("v", "p")

    def __init__(self, v: int, p: int):
        self.v = v % p
        self.p = p

    def _coerce(self, other):
        if isinstance(other, Fp):
            if other.p != self.p:
                raise ValueError("mixed characteristics")
            return other.v
        if isinstance(other, int):
            return other % self.p
        if isinstance(other, Fraction):
            return (other.numerator * pow(other.denominator, -1, self.p)) % self.p
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Fp(self.v + o, self.p)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Fp(self.v - o, self.p)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Fp(o - self.v, self.p)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Fp(self.v * o, self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return Fp(-self.v, self.p)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if o == 0:
            raise ZeroDivisionError("division by zero in F_p")
        return Fp(self.v * pow(o, -1, self.p), self.p)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Fp(o * pow(self.v, -1, self.p), self.p)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return False
        return self.v == o

    def __hash__(self):
        return hash((self.v, self.p))

    def __bool__(self):
        return self.v != 0

    def __repr__(self):
        return f"Fp({self.v}, {self.p})"


@dataclass(frozen=True)
class FieldSpec:
    kind: str = "rationals"
    characteristic: int = 0

    def __post_init__(self):
        if self.kind == "rationals":
            if self.characteristic != 0:
                raise ValueError("the rationals have characteristic 0")
        elif self.kind == "prime-field":
            if not _is_prime(self.characteristic):
                raise ValueError(f"{self.characteristic} is not prime")
        else:
            raise ValueError(f"unknown field kind {self.kind!r}")

    @property
    def zero(self):
        return self(0)

    @property
    def one(self):
        return self(1)

    def __call__(self, x):
        if self.kind == "rationals":
            if isinstance(x, Fp):
                raise TypeError("cannot lift an F_p residue to Q")
            return Fraction(x)
        if isinstance(x, Fp):
            if x.p != self.characteristic:
                raise ValueError("mixed characteristics")
            return x
        if isinstance(x, str):
            x = Fraction(x)
        if isinstance(x, Fraction):
            p = self.characteristic
            if x.denominator % p == 0:
                raise ZeroDivisionError(f"denominator divisible by {p}")
            return Fp(x.numerator * pow(x.denominator, -1, p), p)
        return Fp(int(x), self.characteristic)

    def format(self, x) -> str:
        """Canonical text: lowest-terms p/q over Q, residue in [0,p) over F_p."""
        if self.kind == "rationals":
            x = Fraction(x)
            if x.denominator == 1:
                return str(x.numerator)
            return f"{x.numerator}/{x.denominator}"
        return str(self(x).v)

    def parse(self, s: str):
        if self.kind == "rationals":
            if "." in s or "e" in s.lower():
                raise ValueError(f"non-canonical scalar {s!r}")
            x = Fraction(s)
            if self.format(x) != s:
                raise ValueError(f"non-canonical scalar {s!r}")
            return x
        if not s.isdigit() or int(s) >= self.characteristic or str(int(s)) != s:
            raise ValueError(f"non-canonical residue {s!r}")
        return self(int(s))

    def name(self) -> str:
        return "Q" if self.kind == "rationals" else f"F{self.characteristic}"


QQ = FieldSpec()


def prime_field(p: int) -> FieldSpec:
    return FieldSpec("prime-field", p)


def field_from_name(name: str) -> FieldSpec:
    if name == "Q":
        return QQ
    if name.startswith("F") and name[1:].isdigit():
        return prime_field(int(name[1:]))
    raise ValueError(f"unknown field {name!r}")


class Matrix:
    """Dense exact matrix; treat as immutable once built."""

    __slots__ = ("rows", "cols", "field", "data")

    def __init__(self, field: FieldSpec, rows: int, cols: int, data=None):
        self.field = field
        self.rows = rows
        self.cols = cols
        if data is None:
            z = field.zero
            data = [[z] * cols for _ in range(rows)]
        self.data = data

    @classmethod
    def zeros(cls, field, rows, cols):
        return cls(field, rows, cols)

    @classmethod
    def identity(cls, field, n):
        m = cls(field, n, n)
        for i in range(n):
            m.data[i][i] = field.one
        return m

    @classmethod
    def from_rows(cls, field, rows: Sequence[Sequence], cols: int | None = None):
        rows = [[field(x) for x in r] for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        for r in rows:
            if len(r) != cols:
                raise ValueError("ragged rows")
        return cls(field, len(rows), cols, rows)

    @classmethod
    def from_columns(cls, field, columns: Sequence[Sequence], rows: int):
        m = cls(field, rows, len(columns))
        for j, col in enumerate(columns):
            if len(col) != rows:
                raise ValueError("column length mismatch")
            for i, x in enumerate(col):
                m.data[i][j] = x
        return m

    def __getitem__(self, ij):
        i, j = ij
        return self.data[i][j]

    def column(self, j):
        return tuple(r[j] for r in self.data)

    def columns(self):
        return [self.column(j) for j in range(self.cols)]

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        z = self.field.zero
        out = Matrix(self.field, self.rows, other.cols)
        odata = other.data
        for i, row in enumerate(self.data):
            acc = [z] * other.cols
            for k, a in enumerate(row):
                if a:
                    ok = odata[k]
                    for j in range(other.cols):
                        b = ok[j]
                        if b:
                            acc[j] = acc[j] + a * b
            out.data[i] = acc
        return out

    def apply(self, vec: Sequence) -> tuple:
        if len(vec) != self.cols:
            raise ValueError("vector length mismatch")
        z = self.field.zero
        out = []
        for row in self.data:
            s = z
            for a, b in zip(row, vec):
                if a and b:
                    s = s + a * b
            out.append(s)
        return tuple(out)

    def __add__(self, other):
        self._same_shape(other)
        return Matrix(self.field, self.rows, self.cols,
                      [[a + b for a, b in zip(r, s)] for r, s in zip(self.data, other.data)])

    def __sub__(self, other):
        self._same_shape(other)
        return Matrix(self.field, self.rows, self.cols,
                      [[a - b for a, b in zip(r, s)] for r, s in zip(self.data, other.data)])

    def __neg__(self):
        return Matrix(self.field, self.rows, self.cols, [[-a for a in r] for r in self.data])

    def scale(self, c):
        return Matrix(self.field, self.rows, self.cols, [[c * a for a in r] for r in self.data])

    def transpose(self):
        return Matrix(self.field, self.cols, self.rows,
                      [[self.data[i][j] for i in range(self.rows)] for j in range(self.cols)])

    def is_zero(self) -> bool:
        return not any(a for r in self.data for a in r)

    def _same_shape(self, other):
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch")

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return (self.rows, self.cols) == (other.rows, other.cols) and self.data == other.data

    def __hash__(self):
        return hash((self.rows, self.cols, tuple(tuple(r) for r in self.data)))

    def __repr__(self):
        f = self.field.format
        body = "; ".join(" ".join(f(a) for a in r) for r in self.data)
        return f"Matrix({self.rows}x{self.cols}: {body})"

    def hstack(self, other):
        if self.rows != other.rows:
            raise ValueError("row mismatch")
        return Matrix(self.field, self.rows, self.cols + other.cols,
                      [list(r) + list(s) for r, s in zip(self.data, other.data)])

    def vstack(self, other):
        if self.cols != other.cols:
            raise ValueError("column mismatch")
        return Matrix(self.field, self.rows + other.rows, self.cols,
                      [list(r) for r in self.data] + [list(r) for r in other.data])

    def submatrix(self, rows: Iterable[int], cols: Iterable[int]):
        rows, cols = list(rows), list(cols)
        return Matrix(self.field, len(rows), len(cols),
                      [[self.data[i][j] for j in cols] for i in rows])


def rref(m: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form with leftmost pivots."""
    a = [list(r) for r in m.data]
    pivots = []
    r = 0
    for c in range(m.cols):
        piv = None
        for i in range(r, m.rows):
            if a[i][c]:
                piv = i
                break
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][c] if m.field.kind == "rationals" else m.field.one / a[r][c]
        a[r] = [x * inv for x in a[r]]
        row_r = a[r]
        for i in range(m.rows):
            if i != r:
                f = a[i][c]
                if f:
                    a[i] = [x - f * y for x, y in zip(a[i], row_r)]
        pivots.append(c)
        r += 1
        if r == m.rows:
            break
    return Matrix(m.field, m.rows, m.cols, a), pivots


def rank(m: Matrix) -> int:
    return len(rref(m)[1])


def rank_and_kernel(m: Matrix) -> tuple[int, list[tuple]]:
    """Rank and a kernel basis read off the reduced echelon form.

    Each basis vector has a 1 in one free column and zeros in the other
    free columns, so the result depends only on m.
    """
    R, pivots = rref(m)
    F = m.field
    free = [c for c in range(m.cols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [F.zero] * m.cols
        v[f] = F.one
        for row, p in enumerate(pivots):
            v[p] = -R.data[row][f]
        basis.append(tuple(v))
    return len(pivots), basis


def solve(m: Matrix, b: Sequence) -> tuple | None:
    """One solution x of m x = b, or None when inconsistent."""
    if len(b) != m.rows:
        raise ValueError("right-hand side length mismatch")
    aug = m.hstack(Matrix.from_columns(m.field, [tuple(b)], m.rows))
    R, pivots = rref(aug)
    if pivots and pivots[-1] == m.cols:
        return None
    F = m.field
    x = [F.zero] * m.cols
    for row, p in enumerate(pivots):
        x[p] = R.data[row][m.cols]
    return tuple(x)


def solve_matrix(m: Matrix, b: Matrix) -> Matrix | None:
    """Solve m X = b column by column with a single elimination."""
    aug = m.hstack(b)
    R, pivots = rref(aug)
    if any(p >= m.cols for p in pivots):
        return None
    X = Matrix(m.field, m.cols, b.cols)
    for row, p in enumerate(pivots):
        X.data[p] = list(R.data[row][m.cols:])
    return X


def column_basis(vectors: Sequence[Sequence], length: int, field: FieldSpec) -> list[int]:
    """Indices of a maximal independent subfamily, scanning left to right."""
    if not vectors:
        return []
    return rref(Matrix.from_columns(field, vectors, length))[1]


@dataclass(frozen=True)
class FinComplex:
    """Finitely supported cochain complex.

    dims maps degree to dimension; diff maps degree i to the matrix
    C^i -> C^{i+1}.  Missing differentials are zero.
    """

    field: FieldSpec
    dims: dict
    diff: dict

    def dim(self, i: int) -> int:
        return self.dims.get(i, 0)

    def d(self, i: int) -> Matrix:
        m = self.diff.get(i)
        if m is None:
            return Matrix.zeros(self.field, self.dim(i + 1), self.dim(i))
        return m

    def support(self) -> list[int]:
        return sorted(k for k, v in self.dims.items() if v)

    def check(self) -> None:
        for i, m in self.diff.items():
            if (m.rows, m.cols) != (self.dim(i + 1), self.dim(i)):
                raise InvalidComplex(f"differential in degree {i} has wrong shape")
        for i in self.support():
            if not (self.d(i + 1) @ self.d(i)).is_zero():
                raise InvalidComplex(f"d∘d ≠ 0 starting in degree {i}")

    def euler_characteristic(self) -> int:
        return sum((-1) ** (i % 2) * n for i, n in self.dims.items())


class CohomologyBasis:
    """Cohomology in one degree with representatives and a projection."""

    def __init__(self, c: FinComplex, i: int):
        F = c.field
        self.field = F
        self.degree = i
        n = c.dim(i)
        self.ambient = n
        _, cycles = rank_and_kernel(c.d(i))
        prev = c.d(i - 1)
        bounds = [prev.column(j) for j in range(prev.cols)] if n else []
        bidx = column_basis(bounds, n, F)
        self.boundaries = [bounds[j] for j in bidx]
        fam = self.boundaries + list(cycles)
        idx = column_basis(fam, n, F)
        nb = len(self.boundaries)
        self.reps = [fam[j] for j in idx if j >= nb]
        self.dim = len(self.reps)
        basis = self.boundaries + self.reps
        self._basis = Matrix.from_columns(F, basis, n) if basis else None
        self._cycles_dim = len(cycles)

    def coords(self, z: Sequence) -> tuple:
        """Coordinates of the class of cocycle z in the representative basis."""
        if self.dim == 0:
            return ()
        x = solve(self._basis, z)
        if x is None:
            raise ValueError("vector is not a cocycle")
        return tuple(x[len(self.boundaries):])

    def is_boundary(self, z: Sequence) -> bool:
        return all(not a for a in self.coords(z))


def cohomology(c: FinComplex, i: int) -> tuple[int, list[tuple]]:
    c.check()
    h = CohomologyBasis(c, i)
    return h.dim, h.reps


def cohomology_table(c: FinComplex) -> dict[int, int]:
    """Nonzero cohomology dimensions, checking d∘d = 0 first."""
    c.check()
    out = {}
    for i in c.support():
        r_out = rank(c.d(i)) if c.dim(i + 1) else 0
        r_in = rank(c.d(i - 1)) if c.dim(i - 1) else 0
        h = c.dim(i) - r_out - r_in
        if h:
            out[i] = h
    return out


def check_chain_map(src: FinComplex, dst: FinComplex, chain_map: dict) -> None:
    F = src.field
    degs = set(src.support()) | {i - 1 for i in src.support()}
    for i in sorted(degs):
        fi = chain_map.get(i, Matrix.zeros(F, dst.dim(i), src.dim(i)))
        fj = chain_map.get(i + 1, Matrix.zeros(F, dst.dim(i + 1), src.dim(i + 1)))
        if not (dst.d(i) @ fi == fj @ src.d(i)):
            raise NotChainMap(f"map does not commute with d in degree {i}")


def induced_map(src: FinComplex, dst: FinComplex, chain_map: dict, i: int) -> Matrix:
    check_chain_map(src, dst, chain_map)
    F = src.field
    hs, ht = CohomologyBasis(src, i), CohomologyBasis(dst, i)
    f = chain_map.get(i, Matrix.zeros(F, dst.dim(i), src.dim(i)))
    cols = [ht.coords(f.apply(r)) for r in hs.reps]
    if not cols:
        return Matrix.zeros(F, ht.dim, 0)
    return Matrix.from_columns(F, cols, ht.dim)
