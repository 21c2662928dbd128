"""Exact arithmetic in the coefficient rings.

Three layers live here:

* residues of p-adic integers at a tracked precision K (``PadicNumber``),
* truncated power series in one variable over those residues
  (``TruncatedSeries``, an element of O[[T]] mod (p^K, T^m)),
* the decomposition of a nonzero series into p-power content, a monic
  polynomial congruent to a power of T mod p, and a unit series
  (``WeierstrassForm``), together with division with remainder by such
  polynomials.

``SpecializationRing`` models the small local rings a series ring maps onto
when one height-one prime is deformed: either a totally ramified extension
Z_p[x]/(x^j + p) or an unramified copy of Z_p. Valuations of images are
computed exactly, not bounded.

All values are immutable; every operation is a pure function.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InsufficientPrecision, RingMismatch

__all__ = [
    "PadicNumber",
    "TruncatedSeries",
    "WeierstrassForm",
    "SpecializationRing",
    "padic_valuation",
    "weierstrass_prepare",
    "weierstrass_divide",
]


def padic_valuation(p: int, value: int, K: int) -> int:
    """Largest v <= K with p^v dividing ``value``, read in Z/p^K.

    Args:
        p: the prime (any integer >= 2 is accepted; primality is the
            caller's contract).
        value: an integer, reduced mod p^K before inspection.
        K: the working precision, >= 1.

    Returns:
        The valuation in the range [0, K]. The zero residue gets K by
        convention: at precision K, "divisible by p^K" is all we can say.
    """
    if p < 2:
        raise ValueError(f"p must be >= 2, got {p}")
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    value %= p**K
    if value == 0:
        return K
    v = 0
    while value % p == 0:
        value //= p
        v += 1
    return v


@dataclass(frozen=True, slots=True)
class PadicNumber:
    """A residue in Z/p^K standing in for a p-adic integer.

    Attributes:
        p: prime base, >= 2.
        K: precision exponent, >= 1.
        value: canonical representative, 0 <= value < p^K.
    """

    p: int
    K: int
    value: int

    def __post_init__(self) -> None:
        if self.p < 2:
            raise ValueError(f"p must be >= 2, got {self.p}")
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        object.__setattr__(self, "value", self.value % self.p**self.K)

    @property
    def modulus(self) -> int:
        return self.p**self.K

    def valuation(self) -> int:
        """p-adic valuation of this residue; K for the zero residue."""
        return padic_valuation(self.p, self.value, self.K)

    def is_unit(self) -> bool:
        return self.value % self.p != 0

    def is_zero(self) -> bool:
        return self.value == 0

    def _compat(self, other: PadicNumber) -> None:
        if self.p != other.p or self.K != other.K:
            raise RingMismatch(
                f"operands over Z/{self.p}^{self.K} and Z/{other.p}^{other.K}"
            )

    def __add__(self, other: PadicNumber) -> PadicNumber:
        self._compat(other)
        return PadicNumber(self.p, self.K, self.value + other.value)

    def __sub__(self, other: PadicNumber) -> PadicNumber:
        self._compat(other)
        return PadicNumber(self.p, self.K, self.value - other.value)

    def __mul__(self, other: PadicNumber) -> PadicNumber:
        self._compat(other)
        return PadicNumber(self.p, self.K, self.value * other.value)

    def __neg__(self) -> PadicNumber:
        return PadicNumber(self.p, self.K, -self.value)

    def inverse(self) -> PadicNumber:
        """Multiplicative inverse; requires a unit residue."""
        if not self.is_unit():
            raise ZeroDivisionError(
                f"{self.value} is not a unit mod {self.p}^{self.K}"
            )
        return PadicNumber(self.p, self.K, pow(self.value, -1, self.modulus))


@dataclass(frozen=True, slots=True)
class TruncatedSeries:
    """An element of O[[T]] mod (p^K, T^m), O = Z_p.

    Coefficients are stored as canonical residues mod p^K, exactly m of
    them (index i is the T^i coefficient). Arithmetic truncates at T^m and
    reduces mod p^K, so the type is closed under ring operations at fixed
    (p, K, m).
    """

    p: int
    K: int
    m: int
    coeffs: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.p < 2:
            raise ValueError(f"p must be >= 2, got {self.p}")
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if len(self.coeffs) != self.m:
            raise ValueError(
                f"need exactly m={self.m} coefficients, got {len(self.coeffs)}"
            )
        q = self.p**self.K
        object.__setattr__(self, "coeffs", tuple(c % q for c in self.coeffs))

    # -- constructors ------------------------------------------------------

    @classmethod
    def make(cls, p: int, K: int, m: int, coeffs) -> TruncatedSeries:
        """Build from any iterable, zero-padding or truncating to length m."""
        cs = list(coeffs)[:m]
        cs += [0] * (m - len(cs))
        return cls(p, K, m, tuple(cs))

    @classmethod
    def zero(cls, p: int, K: int, m: int) -> TruncatedSeries:
        return cls(p, K, m, (0,) * m)

    @classmethod
    def one(cls, p: int, K: int, m: int) -> TruncatedSeries:
        return cls.make(p, K, m, [1])

    @classmethod
    def monomial(cls, p: int, K: int, m: int, degree: int, coeff: int = 1) -> TruncatedSeries:
        if not 0 <= degree < m:
            raise ValueError(f"degree {degree} out of range for m={m}")
        cs = [0] * m
        cs[degree] = coeff
        return cls(p, K, m, tuple(cs))

    # -- structure ---------------------------------------------------------

    @property
    def modulus(self) -> int:
        return self.p**self.K

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def is_unit(self) -> bool:
        """Units are exactly the series with unit constant term."""
        return self.coeffs[0] % self.p != 0

    def order_in_t(self) -> int:
        """Index of the first nonzero coefficient; m if the series is zero."""
        for i, c in enumerate(self.coeffs):
            if c != 0:
                return i
        return self.m

    def content_valuation(self) -> int:
        """min over coefficients of their p-adic valuation (K if zero)."""
        return min(padic_valuation(self.p, c, self.K) for c in self.coeffs)

    def _compat(self, other: TruncatedSeries) -> None:
        if (self.p, self.K, self.m) != (other.p, other.K, other.m):
            raise RingMismatch(
                f"series over (p={self.p},K={self.K},m={self.m}) vs "
                f"(p={other.p},K={other.K},m={other.m})"
            )

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other: TruncatedSeries) -> TruncatedSeries:
        self._compat(other)
        return TruncatedSeries(
            self.p, self.K, self.m,
            tuple(a + b for a, b in zip(self.coeffs, other.coeffs)),
        )

    def __sub__(self, other: TruncatedSeries) -> TruncatedSeries:
        self._compat(other)
        return TruncatedSeries(
            self.p, self.K, self.m,
            tuple(a - b for a, b in zip(self.coeffs, other.coeffs)),
        )

    def __neg__(self) -> TruncatedSeries:
        return TruncatedSeries(self.p, self.K, self.m, tuple(-c for c in self.coeffs))

    def __mul__(self, other: TruncatedSeries) -> TruncatedSeries:
        self._compat(other)
        out = [0] * self.m
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            # truncation at T^m: only j < m - i contributes
            for j in range(self.m - i):
                b = other.coeffs[j]
                if b:
                    out[i + j] += a * b
        return TruncatedSeries(self.p, self.K, self.m, tuple(out))

    def scale(self, c: int) -> TruncatedSeries:
        return TruncatedSeries(self.p, self.K, self.m, tuple(c * a for a in self.coeffs))

    def shift(self, degree: int) -> TruncatedSeries:
        """Multiply by T^degree (coefficients beyond T^m fall off)."""
        if degree < 0:
            raise ValueError("shift degree must be >= 0")
        cs = (0,) * degree + self.coeffs
        return TruncatedSeries(self.p, self.K, self.m, cs[: self.m])

    def inverse(self) -> TruncatedSeries:
        """Inverse of a unit series, solved coefficient by coefficient."""
        if not self.is_unit():
            raise ZeroDivisionError("series has non-unit constant term")
        q = self.modulus
        c0_inv = pow(self.coeffs[0], -1, q)
        out = [0] * self.m
        out[0] = c0_inv
        for n in range(1, self.m):
            acc = 0
            for i in range(1, n + 1):
                a = self.coeffs[i]
                if a:
                    acc += a * out[n - i]
            out[n] = (-c0_inv * acc) % q
        return TruncatedSeries(self.p, self.K, self.m, tuple(out))

    # -- precision moves ---------------------------------------------------

    def divide_content(self, mu: int) -> TruncatedSeries:
        """Divide by p^mu; the result is only determined at precision K - mu."""
        if mu == 0:
            return self
        if mu >= self.K:
            raise InsufficientPrecision(
                f"cannot strip p^{mu} at precision K={self.K}"
            )
        pm = self.p**mu
        for i, c in enumerate(self.coeffs):
            if c % pm != 0:
                raise ValueError(f"coefficient {i} not divisible by p^{mu}")
        return TruncatedSeries(
            self.p, self.K - mu, self.m, tuple(c // pm for c in self.coeffs)
        )

    def lift_precision(self, K_new: int) -> TruncatedSeries:
        """Reinterpret at a higher precision (coefficients lift as given)."""
        if K_new < self.K:
            raise ValueError("use reduce_precision to lower K")
        return TruncatedSeries(self.p, K_new, self.m, self.coeffs)

    def reduce_precision(self, K_new: int) -> TruncatedSeries:
        if K_new > self.K:
            raise ValueError("use lift_precision to raise K")
        return TruncatedSeries(self.p, K_new, self.m, self.coeffs)

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {"p": self.p, "K": self.K, "m": self.m, "coeffs": list(self.coeffs)}

    @classmethod
    def from_dict(cls, data: dict) -> TruncatedSeries:
        return cls(int(data["p"]), int(data["K"]), int(data["m"]),
                   tuple(int(c) for c in data["coeffs"]))

    def __str__(self) -> str:
        terms = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if i == 0:
                terms.append(str(c))
            elif i == 1:
                terms.append(f"{c}*T" if c != 1 else "T")
            else:
                terms.append(f"{c}*T^{i}" if c != 1 else f"T^{i}")
        return " + ".join(terms) if terms else "0"


@dataclass(frozen=True, slots=True)
class WeierstrassForm:
    """Decomposition p^mu * P * U of a nonzero truncated series.

    P (``distinguished``) is monic of some degree d with every lower
    coefficient divisible by p; U (``unit``) has a unit constant term. Both
    are carried at precision K - mu: after p^mu is stripped, the factors are
    only determined mod p^(K-mu). ``recompose`` returns to the original
    precision.
    """

    mu: int
    distinguished: TruncatedSeries
    unit: TruncatedSeries

    def __post_init__(self) -> None:
        if self.mu < 0:
            raise ValueError("mu must be >= 0")
        P, U = self.distinguished, self.unit
        P._compat(U)
        d = self.degree
        if d >= P.m:
            raise ValueError("distinguished part has no monic coefficient")
        for i in range(d):
            if P.coeffs[i] % P.p != 0:
                raise ValueError(
                    f"coefficient {i} of distinguished part is a unit"
                )
        for i in range(d + 1, P.m):
            if P.coeffs[i] != 0:
                raise ValueError("distinguished part has terms above its degree")
        if not U.is_unit():
            raise ValueError("unit part has non-unit constant term")

    @property
    def degree(self) -> int:
        """Degree of the distinguished polynomial (highest coeff == 1)."""
        P = self.distinguished
        for i in range(P.m - 1, -1, -1):
            if P.coeffs[i] == 1:
                # monic scan from the top: first exact 1 with zeros above it
                return i
        raise ValueError("distinguished part is not monic")

    def recompose(self, K: int) -> TruncatedSeries:
        """p^mu * P * U, reinterpreted at the original precision K."""
        prod = self.distinguished * self.unit
        lifted = prod.lift_precision(K)
        return lifted.scale(self.distinguished.p**self.mu)

    def to_dict(self) -> dict:
        d = self.degree
        return {
            "mu": self.mu,
            "dist": list(self.distinguished.coeffs[: d + 1]),
            "unit": self.unit.to_dict(),
        }


def weierstrass_prepare(f: TruncatedSeries) -> WeierstrassForm:
    """Split f as p^mu * P * U with P monic distinguished and U a unit.

    The truncated ring admits several (P, U) pairs with the same product;
    they differ by coefficients of U above degree m-1-deg(P), whose
    contribution is invisible past the truncation. We return the canonical
    pair, the unique one with deg(U) <= m-1-deg(P). Algorithm: strip the
    p-power content, seed P = T^d at the lowest unit coefficient, then run
    Newton iteration on P alone. Each round recomputes U as the exact
    polynomial quotient of g by the monic candidate P and pushes the
    remainder into a correction of P, so the degree bound on U holds by
    construction. Quadratic convergence, O(log K) rounds of O(m^2) work.

    Raises:
        InsufficientPrecision: if f is 0 at precision K (mu cannot be
            read off), or if the lift fails to converge.
    """
    if f.is_zero():
        raise InsufficientPrecision(
            f"series is 0 at precision K={f.K}; content exponent unknown"
        )
    mu = f.content_valuation()
    g = f.divide_content(mu)
    Kp = g.K
    p, m, q = g.p, g.m, g.modulus
    d = next(i for i, c in enumerate(g.coeffs) if c % p != 0)

    P = [0] * d + [1]  # coefficients of the monic candidate, degree d

    def divmod_by_p_poly(coeffs: list) -> tuple:
        # long division by the current P; quotient padded to length m
        rem = list(coeffs)
        quot = [0] * m
        for i in range(len(rem) - 1, d - 1, -1):
            c = rem[i]
            if c == 0:
                continue
            quot[i - d] = c
            rem[i] = 0
            for t in range(d):
                rem[i - d + t] = (rem[i - d + t] - c * P[t]) % q
        return quot, rem[:d]

    def mul_mod_p_poly(a: list, b: list) -> list:
        prod = [0] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    prod[i + j] = (prod[i + j] + ai * bj) % q
        _, red = divmod_by_p_poly(prod)
        return red + [0] * (d - len(red))

    U = list(g.coeffs)
    for _ in range(Kp.bit_length() + 2):
        U, err = divmod_by_p_poly(list(g.coeffs))
        if all(c == 0 for c in err):
            break
        # invert U mod (P, q): seed mod p via series recursion (P = T^d
        # mod p), then lift with w <- w*(2 - U*w) which doubles precision
        _, ubar = divmod_by_p_poly(U)
        ubar += [0] * (d - len(ubar))
        u0_inv = pow(ubar[0], -1, p)
        w = [0] * d
        w[0] = u0_inv
        for k in range(1, d):
            acc = sum(ubar[t] * w[k - t] for t in range(1, k + 1))
            w[k] = (-u0_inv * acc) % p
        for _ in range(Kp.bit_length() + 1):
            uw = mul_mod_p_poly(ubar, w)
            corr = [(-c) % q for c in uw]
            corr[0] = (corr[0] + 2) % q
            w = mul_mod_p_poly(w, corr)
        delta = mul_mod_p_poly(err, w)
        for t in range(d):
            P[t] = (P[t] + delta[t]) % q
    else:
        _, err = divmod_by_p_poly(list(g.coeffs))
        if any(c != 0 for c in err):
            raise InsufficientPrecision("factor lift did not converge")

    return WeierstrassForm(
        mu,
        TruncatedSeries(p, Kp, m, tuple(P + [0] * (m - d - 1))),
        TruncatedSeries(p, Kp, m, tuple(U)),
    )


def weierstrass_divide(
    f: TruncatedSeries, P: TruncatedSeries
) -> tuple[TruncatedSeries, TruncatedSeries]:
    """Division with remainder by a monic distinguished polynomial.

    Returns (q, r) with f = q*P + r at precision, deg r < deg P, and q
    supported below T^(m - deg P). The divisor's leading coefficient is 1,
    so plain top-down long division is exact mod p^K; no iteration budget
    is ever exceeded for polynomial inputs.

    Args:
        f: dividend (any series, zero allowed).
        P: monic distinguished polynomial presented as a series over the
            same (p, K, m).

    Raises:
        RingMismatch: mismatched (p, K, m).
        ValueError: P not monic distinguished or of degree >= m.
    """
    f._compat(P)
    d = _monic_degree(P)
    for i in range(d):
        if P.coeffs[i] % P.p != 0:
            raise ValueError(f"divisor coefficient {i} is a unit; not distinguished")
    q_mod = f.modulus
    rem = list(f.coeffs)
    quot = [0] * f.m
    for i in range(f.m - 1, d - 1, -1):
        c = rem[i]
        if c == 0:
            continue
        quot[i - d] = c
        for t in range(d + 1):
            rem[i - d + t] = (rem[i - d + t] - c * P.coeffs[t]) % q_mod
    r = TruncatedSeries(f.p, f.K, f.m, tuple(rem[:d]) + (0,) * (f.m - d))
    return TruncatedSeries(f.p, f.K, f.m, tuple(quot)), r


def _monic_degree(P: TruncatedSeries) -> int:
    """Degree of a monic polynomial given as a series; ValueError if not monic."""
    for i in range(P.m - 1, -1, -1):
        c = P.coeffs[i]
        if c == 0:
            continue
        if c != 1:
            raise ValueError("divisor is not monic")
        return i
    raise ValueError("divisor is zero")


@dataclass(frozen=True, slots=True)
class SpecializationRing:
    """The local ring a series ring maps onto when one prime is deformed.

    Two kinds are supported:

    * ``kind="eisenstein"``: Z_p[x]/(x^j + p), the target when the prime
      (p) itself is deformed by T^j. Totally ramified of degree j; the
      image of T is the uniformizer; val(p) = j.
    * ``kind="unramified"``: Z_p, the target when a linear prime (T - a)
      with val(a) >= 1 is deformed by p^j; T maps to a - p^j and val(p) = 1.

    Valuations are computed on canonical representatives, so they are exact
    (up to the precision cap), not monomial-wise lower bounds.
    """

    p: int
    j: int
    K: int
    kind: str
    a: int = 0  # the linear prime's root, unramified kind only

    def __post_init__(self) -> None:
        if self.kind not in ("eisenstein", "unramified"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.j < 1:
            raise ValueError("deformation index j must be >= 1")
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if self.kind == "unramified":
            if self.a % self.p != 0:
                raise ValueError("linear prime root must have valuation >= 1")

    @property
    def ramification_index(self) -> int:
        return self.j if self.kind == "eisenstein" else 1

    @property
    def valuation_cap(self) -> int:
        """Values at or above this are indistinguishable from 0 here."""
        return self.j * self.K if self.kind == "eisenstein" else self.K

    def image_valuation(self, f: TruncatedSeries) -> int:
        """Valuation of the image of f, normalized so the uniformizer has 1.

        For the eisenstein kind the representative is reduced to degree < j
        via x^j = -p; the j monomial valuations j*v_p(b_i) + i then live in
        distinct residue classes mod j, so their minimum is the exact
        valuation (no cancellation is possible). For the unramified kind
        the image is an integer and v_p applies directly.

        Returns the cap value when the image is 0 at this precision.
        """
        if f.p != self.p:
            raise RingMismatch(f"series over p={f.p}, ring over p={self.p}")
        if self.kind == "unramified":
            t = (self.a - self.p**self.j) % self.p**self.K
            acc = 0
            for c in reversed(f.coeffs):
                acc = (acc * t + c) % self.p**self.K
            return padic_valuation(self.p, acc, self.K)
        # eisenstein: fold x^j -> -p into a degree-(< j) representative
        q = self.p**self.K
        b = [0] * self.j
        for i, c in enumerate(f.coeffs):
            e, r = divmod(i, self.j)
            b[r] = (b[r] + c * pow(-self.p, e, q)) % q
        best = self.valuation_cap
        for i, c in enumerate(b):
            v = padic_valuation(self.p, c, self.K)
            if v < self.K:
                best = min(best, self.j * v + i)
        return best

    def is_zero_image(self, f: TruncatedSeries) -> bool:
        return self.image_valuation(f) >= self.valuation_cap
