"""Finitely presented modules over local rings at finite precision.

A module enters as a presentation matrix A: the cokernel of the map
R^cols -> R^rows it describes. Three coefficient rings are supported:

* ``Zp_mod_pk``: the artinian quotient Z/p^K, elements plain residues;
* ``dvr``: p-adic integers tracked at precision K (residues again, but
  an entry of valuation K is merely indistinguishable from zero);
* ``lambda``: the truncated two-variable ring from :mod:`iwafitt.ring`.

Fitting ideals are computed by enumerating minors. Over the two
principal kinds an ideal is an exponent a, meaning (p^a); the string
marker ``"full"`` stands for the zero ideal at precision, where every
minor sits above what precision K can see. Over the series ring the
ideal is returned as a raw deduplicated generator list and any further
normalization is left to the ideal calculus layer. The DVR kind also
gets a Smith normal form with transformation certificates, and the
elementary-divisor reading of a torsion cokernel.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InputError, InsufficientPrecision, NotTorsion, RingMismatch
from .ring import TruncatedSeries, padic_valuation

_PRINCIPAL_KINDS = ("Zp_mod_pk", "dvr")
_KINDS = _PRINCIPAL_KINDS + ("lambda",)


@dataclass(frozen=True)
class RingDescriptor:
    """Which coefficient ring the matrix entries live in.

    ``m`` is the T-truncation order and only meaningful for the
    ``lambda`` kind; the principal kinds leave it None.
    """

    kind: str
    p: int
    K: int
    m: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise RingMismatch(f"unknown ring kind {self.kind!r}")
        if self.p < 2:
            raise RingMismatch(f"p must be >= 2, got {self.p}")
        if self.K < 1:
            raise RingMismatch(f"precision K must be >= 1, got {self.K}")
        if self.kind == "lambda":
            if self.m is None or self.m < 1:
                raise RingMismatch("lambda kind needs a truncation order m >= 1")
        elif self.m is not None:
            raise RingMismatch(f"kind {self.kind!r} does not take m")

    @property
    def modulus(self) -> int:
        return self.p**self.K


def _coerce_entry(ring: RingDescriptor, value):
    if ring.kind == "lambda":
        if isinstance(value, TruncatedSeries):
            if (value.p, value.K, value.m) != (ring.p, ring.K, ring.m):
                raise RingMismatch(
                    "series entry has parameters "
                    f"(p={value.p}, K={value.K}, m={value.m}), descriptor says "
                    f"(p={ring.p}, K={ring.K}, m={ring.m})"
                )
            return value
        if isinstance(value, (list, tuple)):
            return TruncatedSeries.make(ring.p, ring.K, ring.m, list(value))
        raise RingMismatch(
            f"lambda entries must be series or coefficient lists, got {type(value).__name__}"
        )
    if isinstance(value, bool) or not isinstance(value, int):
        raise RingMismatch(
            f"{ring.kind} entries must be integers, got {type(value).__name__}"
        )
    return value % ring.modulus


@dataclass(frozen=True)
class PresentationMatrix:
    """An n x k_rel relation matrix presenting coker(R^k_rel -> R^n)."""

    ring: RingDescriptor
    rows: int
    cols: int
    entries: tuple

    def __post_init__(self) -> None:
        if self.rows < 0 or self.cols < 0:
            raise RingMismatch("matrix dimensions must be non-negative")
        if len(self.entries) != self.rows:
            raise RingMismatch(
                f"expected {self.rows} rows, got {len(self.entries)}"
            )
        for row in self.entries:
            if len(row) != self.cols:
                raise RingMismatch(
                    f"expected {self.cols} entries per row, got {len(row)}"
                )

    @classmethod
    def make(cls, ring: RingDescriptor, entries) -> PresentationMatrix:
        """Build from any nested iterable, coercing entries into the ring."""
        coerced = tuple(
            tuple(_coerce_entry(ring, e) for e in row) for row in entries
        )
        rows = len(coerced)
        cols = len(coerced[0]) if rows else 0
        return cls(ring, rows, cols, coerced)

    @classmethod
    def from_dict(cls, doc) -> PresentationMatrix:
        """Parse the JSON matrix document, reporting the offending path."""
        if not isinstance(doc, dict):
            raise InputError("expected an object", "$")
        ring_doc = doc.get("ring")
        if not isinstance(ring_doc, dict):
            raise InputError("missing or non-object 'ring'", "$.ring")
        kind = ring_doc.get("kind")
        if kind not in _KINDS:
            raise InputError(
                f"kind must be one of {list(_KINDS)}", "$.ring.kind"
            )
        params = {}
        for name in ("p", "K") + (("m",) if kind == "lambda" else ()):
            v = ring_doc.get(name)
            if isinstance(v, bool) or not isinstance(v, int):
                raise InputError(f"'{name}' must be an integer", f"$.ring.{name}")
            params[name] = v
        try:
            ring = RingDescriptor(kind, **params)
        except RingMismatch as exc:
            raise InputError(str(exc), "$.ring") from exc
        rows, cols = doc.get("rows"), doc.get("cols")
        for name, v in (("rows", rows), ("cols", cols)):
            if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                raise InputError(
                    f"'{name}' must be a non-negative integer", f"${name and '.' + name}"
                )
        entries = doc.get("entries")
        if not isinstance(entries, list) or len(entries) != rows:
            raise InputError(f"'entries' must be a list of {rows} rows", "$.entries")
        coerced = []
        for i, row in enumerate(entries):
            if not isinstance(row, list) or len(row) != cols:
                raise InputError(
                    f"row must be a list of {cols} entries", f"$.entries[{i}]"
                )
            out = []
            for j, e in enumerate(row):
                try:
                    out.append(_coerce_entry(ring, e))
                except (RingMismatch, ValueError) as exc:
                    raise InputError(str(exc), f"$.entries[{i}][{j}]") from exc
            coerced.append(tuple(out))
        return cls(ring, rows, cols, tuple(coerced))

    def reduce_precision(self, new_K: int) -> PresentationMatrix:
        """The same presentation with every entry reduced mod p^new_K."""
        if new_K > self.ring.K:
            raise InsufficientPrecision(
                f"cannot lift entries from K={self.ring.K} to K={new_K}"
            )
        ring = RingDescriptor(self.ring.kind, self.ring.p, new_K, self.ring.m)
        if ring.kind == "lambda":
            rows = tuple(
                tuple(e.reduce_precision(new_K) for e in row)
                for row in self.entries
            )
        else:
            q = ring.modulus
            rows = tuple(tuple(e % q for e in row) for row in self.entries)
        return PresentationMatrix(ring, self.rows, self.cols, rows)

    def append_columns(self, extra) -> PresentationMatrix:
        """Adjoin relation columns (same ring); the cokernel only shrinks."""
        coerced = [
            [_coerce_entry(self.ring, e) for e in row] for row in extra
        ]
        if len(coerced) != self.rows:
            raise RingMismatch("extra columns must match the row count")
        rows = tuple(
            old + tuple(new) for old, new in zip(self.entries, coerced)
        )
        return PresentationMatrix(
            self.ring, self.rows, self.cols + len(coerced[0]) if self.rows else 0, rows
        )


@dataclass(frozen=True)
class FittingIdealResult:
    """One Fitting ideal, in the shape its ring allows.

    Principal kinds fill ``exponent``: an int a for (p^a), or the marker
    string "full" for the zero ideal at precision. The series kind fills
    ``generators`` instead and leaves ``exponent`` None.
    """

    index: int
    kind: str
    exponent: object = None
    generators: tuple | None = None

    def to_dict(self) -> dict:
        if self.kind == "lambda":
            return {
                "index": self.index,
                "generators": [list(g.coeffs) for g in self.generators],
            }
        return {"index": self.index, "exponent": self.exponent}


def _int_minor_minimum(entries, n, k, r, p, K):
    """Min valuation over all r x r minors, with a memoized Laplace pass.

    Determinants are taken over Z (exact) and only reduced for the
    valuation read; the memo is keyed on (row-subset, col-subset).
    Returns K when every minor is at the precision floor.
    """
    from itertools import combinations

    memo = {}

    def det(rs, cs):
        if not rs:
            return 1
        key = (rs, cs)
        hit = memo.get(key)
        if hit is not None:
            return hit
        r0 = rs[0]
        total = 0
        for idx, c in enumerate(cs):
            a = entries[r0][c]
            if a:
                sub = det(rs[1:], cs[:idx] + cs[idx + 1 :])
                total += (a if idx % 2 == 0 else -a) * sub
        memo[key] = total
        return total

    best = K
    for rs in combinations(range(n), r):
        for cs in combinations(range(k), r):
            v = padic_valuation(p, det(rs, cs), K)
            if v < best:
                best = v
                if best == 0:
                    return 0
    return best


def _series_minor_generators(entries, n, k, r, p, K, m):
    from itertools import combinations

    one = TruncatedSeries.one(p, K, m)
    memo = {}

    def det(rs, cs):
        if not rs:
            return one
        key = (rs, cs)
        hit = memo.get(key)
        if hit is not None:
            return hit
        r0 = rs[0]
        total = TruncatedSeries.zero(p, K, m)
        for idx, c in enumerate(cs):
            a = entries[r0][c]
            if not a.is_zero():
                sub = det(rs[1:], cs[:idx] + cs[idx + 1 :])
                term = a * sub
                total = total + term if idx % 2 == 0 else total - term
        memo[key] = total
        return total

    gens = []
    seen = set()
    for rs in combinations(range(n), r):
        for cs in combinations(range(k), r):
            g = det(rs, cs)
            if g.is_unit():
                return (one,)
            if g.is_zero() or g.coeffs in seen:
                continue
            seen.add(g.coeffs)
            gens.append(g)
    return tuple(gens)


def fitting_ideal(M: PresentationMatrix, i: int) -> FittingIdealResult:
    """The i-th Fitting ideal of the cokernel presented by M.

    Generated by the (rows - i)-minors, with the order-0 minor taken to
    be 1 (so the ideal is the full ring once i reaches the generator
    count) and the zero ideal once the minor order exceeds both matrix
    dimensions.
    """
    if isinstance(i, bool) or not isinstance(i, int) or i < 0:
        raise RingMismatch(f"Fitting index must be a non-negative integer, got {i!r}")
    ring = M.ring
    r = M.rows - i
    if ring.kind == "lambda":
        if r <= 0:
            gens = (TruncatedSeries.one(ring.p, ring.K, ring.m),)
        elif r > min(M.rows, M.cols):
            gens = ()
        else:
            gens = _series_minor_generators(
                M.entries, M.rows, M.cols, r, ring.p, ring.K, ring.m
            )
        return FittingIdealResult(i, ring.kind, generators=gens)
    if r <= 0:
        return FittingIdealResult(i, ring.kind, exponent=0)
    if r > min(M.rows, M.cols):
        exp = ring.K if ring.kind == "Zp_mod_pk" else "full"
        return FittingIdealResult(i, ring.kind, exponent=exp)
    v = _int_minor_minimum(M.entries, M.rows, M.cols, r, ring.p, ring.K)
    if v >= ring.K and ring.kind == "dvr":
        return FittingIdealResult(i, ring.kind, exponent="full")
    return FittingIdealResult(i, ring.kind, exponent=v)


@dataclass(frozen=True)
class SmithCertificate:
    """Diagonalization D = U A V over the DVR, all residues mod p^K.

    ``exponents`` lists the diagonal valuations, non-decreasing; an
    entry equal to K marks a diagonal slot the precision cannot tell
    from zero. U and V are products of elementary operations, so both
    have unit determinant.
    """

    exponents: tuple
    left: tuple
    diagonal: tuple
    right: tuple

    def verifies(self, M: PresentationMatrix) -> bool:
        p, K = M.ring.p, M.ring.K
        q = p**K
        n, k = M.rows, M.cols
        UA = [
            [
                sum(self.left[i][t] * M.entries[t][j] for t in range(n)) % q
                for j in range(k)
            ]
            for i in range(n)
        ]
        UAV = [
            [
                sum(UA[i][t] * self.right[t][j] for t in range(k)) % q
                for j in range(k)
            ]
            for i in range(n)
        ]
        return all(
            UAV[i][j] == self.diagonal[i][j]
            for i in range(n)
            for j in range(k)
        )


def smith_normal_form(
    M: PresentationMatrix, allow_zero_block: bool = False
) -> SmithCertificate:
    """Diagonalize a DVR matrix by elementary operations.

    Pivots are chosen by minimal valuation, ties broken by (row, col).
    Once the remaining block is indistinguishable from zero the routine
    either pads the exponents with K (``allow_zero_block``) or refuses,
    since precision K cannot certify those divisors.
    """
    if M.ring.kind != "dvr":
        raise RingMismatch(
            f"Smith normal form needs the dvr kind, got {M.ring.kind!r}"
        )
    p, K = M.ring.p, M.ring.K
    q = p**K
    n, k = M.rows, M.cols
    A = [list(row) for row in M.entries]
    U = [[int(i == j) for j in range(n)] for i in range(n)]
    V = [[int(i == j) for j in range(k)] for i in range(k)]
    lim = min(n, k)
    exps = []
    t = 0
    while t < lim:
        best = None
        for i in range(t, n):
            for j in range(t, k):
                v = padic_valuation(p, A[i][j], K)
                if best is None or v < best[0]:
                    best = (v, i, j)
        v, bi, bj = best
        if v >= K:
            if not allow_zero_block:
                raise InsufficientPrecision(
                    f"pivot valuation is indistinguishable from K={K}"
                )
            exps.extend([K] * (lim - t))
            break
        if bi != t:
            A[t], A[bi] = A[bi], A[t]
            U[t], U[bi] = U[bi], U[t]
        if bj != t:
            for row in A:
                row[t], row[bj] = row[bj], row[t]
            for row in V:
                row[t], row[bj] = row[bj], row[t]
        pv = p**v
        uinv = pow(A[t][t] // pv, -1, q)
        A[t] = [(e * uinv) % q for e in A[t]]
        U[t] = [(e * uinv) % q for e in U[t]]
        # pivot is now exactly p^v; it divides the whole block, so one
        # subtraction per entry clears the cross
        for i in range(n):
            if i != t and A[i][t]:
                c = A[i][t] // pv
                A[i] = [(a - c * b) % q for a, b in zip(A[i], A[t])]
                U[i] = [(a - c * b) % q for a, b in zip(U[i], U[t])]
        for j in range(k):
            if j != t and A[t][j]:
                c = A[t][j] // pv
                for row in A:
                    row[j] = (row[j] - c * row[t]) % q
                for row in V:
                    row[j] = (row[j] - c * row[t]) % q
        exps.append(v)
        t += 1
    cert = SmithCertificate(
        tuple(exps),
        tuple(tuple(r) for r in U),
        tuple(tuple(r) for r in A),
        tuple(tuple(r) for r in V),
    )
    if not cert.verifies(M):
        raise AssertionError("diagonalization certificate failed to verify")
    return cert


@dataclass(frozen=True)
class ElementaryDVRModule:
    """A torsion DVR module recorded by its divisor exponents.

    Exponents are sorted non-decreasing and all >= 1; the empty tuple is
    the zero module.
    """

    exponents: tuple

    def __post_init__(self) -> None:
        exps = tuple(self.exponents)
        object.__setattr__(self, "exponents", exps)
        if any(
            isinstance(e, bool) or not isinstance(e, int) or e < 1 for e in exps
        ):
            raise ValueError(f"exponents must be integers >= 1, got {exps}")
        if any(a > b for a, b in zip(exps, exps[1:])):
            raise ValueError(f"exponents must be non-decreasing, got {exps}")

    @property
    def length(self) -> int:
        return sum(self.exponents)


def dvr_structure(
    M: PresentationMatrix, assume_torsion: bool = False
) -> ElementaryDVRModule:
    """Elementary divisors of the cokernel, provided it is torsion.

    A presentation with fewer relation columns than generators leaves a
    free summand and is rejected outright. A divisor at the precision
    cap K cannot be told from zero; it is rejected too unless the caller
    vouches for torsion via ``assume_torsion``, in which case it is
    taken at face value as exponent K.
    """
    if M.ring.kind != "dvr":
        raise RingMismatch(
            f"structure reading needs the dvr kind, got {M.ring.kind!r}"
        )
    if M.cols < M.rows:
        raise NotTorsion(
            f"{M.rows - M.cols} generator(s) have no relation column; "
            "the cokernel has a free summand"
        )
    cert = smith_normal_form(M, allow_zero_block=True)
    K = M.ring.K
    if not assume_torsion and any(e >= K for e in cert.exponents):
        raise NotTorsion(
            f"a divisor exponent reached the precision cap K={K}; "
            "pass assume_torsion to accept it"
        )
    return ElementaryDVRModule(tuple(e for e in cert.exponents if e > 0))


def fitting_from_structure(E: ElementaryDVRModule, i: int) -> int:
    """Fitting exponent of an elementary module: sum of the n-i smallest."""
    if isinstance(i, bool) or not isinstance(i, int) or i < 0:
        raise ValueError(f"index must be a non-negative integer, got {i!r}")
    n = len(E.exponents)
    return sum(E.exponents[: max(0, n - i)])


def direct_sum_fitting(E1: ElementaryDVRModule, E2: ElementaryDVRModule, i: int) -> int:
    """Fitting exponent of E1 + E2 via the splitting formula.

    Computed as the minimum of c_{s}(E1) + c_{i-s}(E2) over splittings
    of i, then cross-checked against the merged exponent list; the two
    must agree.
    """
    best = min(
        fitting_from_structure(E1, s) + fitting_from_structure(E2, i - s)
        for s in range(i + 1)
    )
    merged = ElementaryDVRModule(tuple(sorted(E1.exponents + E2.exponents)))
    via_merge = fitting_from_structure(merged, i)
    if best != via_merge:
        raise AssertionError(
            f"splitting minimum {best} disagrees with merged exponent {via_merge}"
        )
    return best
