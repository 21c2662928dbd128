"""Index calculus for a two-parity family of cohomology-free elements.

The objects here are bookkeeping only: symbolic prime labels, square-free
index sets over them, and integer divisibility indices in a local ring of
length k. A seeded simulator walks the lattice of square-free indices,
evolving a module shape one prime at a time, and assigns every index its
lambda- or kappa-side divisibility plus localization data wired to
satisfy the two reciprocity laws. Everything downstream -- stratum
minima, the closed-form stratum predictions, shape reconstruction from
stabilized minima, and the C/D ideal assembly -- consumes only this data.

Parity conventions. A shape carries e in {0,1}; an index n with nu(n)
factors is "definite" when (e + nu(n)) is even, and the lambda indices
live exactly on definite n, kappa on the rest. The reported epsilon is
(e+1) mod 2, so lambda strata are the j with j = epsilon+1 (mod 2).
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field, replace
from itertools import combinations

from .errors import (
    EmptyStratum,
    InputError,
    NoStabilization,
    NotMonotone,
    ParityMismatch,
    PoolExhausted,
)
from .ideals import (
    ElementaryLambdaModule,
    HeightOnePrime,
    LambdaIdealFactored,
    class_of,
    elementary_fitting_class,
    pseudo_square_root,
    specialized_ideal_ord,
)


def _derive(seed, *parts) -> int:
    text = "|".join(str(x) for x in (seed,) + parts)
    return int(hashlib.sha256(text.encode()).hexdigest(), 16)


@dataclass(frozen=True, order=True)
class AdmissiblePrimeLabel:
    """A symbolic admissible prime: id, its congruence depth, genericity."""

    ident: int
    k_ell: int = 1
    generic: bool = True

    def __post_init__(self) -> None:
        if self.k_ell < 1:
            raise ValueError(f"k_ell must be >= 1, got {self.k_ell}")

    def to_dict(self) -> dict:
        return {"id": self.ident, "k": self.k_ell, "generic": self.generic}

    @classmethod
    def from_dict(cls, doc, path: str = "$") -> AdmissiblePrimeLabel:
        if not isinstance(doc, dict):
            raise InputError("label must be an object", path)
        ident, k_ell = doc.get("id"), doc.get("k", 1)
        generic = doc.get("generic", True)
        if isinstance(ident, bool) or not isinstance(ident, int):
            raise InputError("'id' must be an integer", f"{path}.id")
        if isinstance(k_ell, bool) or not isinstance(k_ell, int) or k_ell < 1:
            raise InputError("'k' must be an integer >= 1", f"{path}.k")
        if not isinstance(generic, bool):
            raise InputError("'generic' must be a boolean", f"{path}.generic")
        return cls(ident, k_ell, generic)


def index_key(labels) -> str:
    ids = sorted(lab.ident for lab in labels)
    return ".".join(str(i) for i in ids) if ids else "1"


def key_weight(key: str) -> int:
    """nu of a dot-joined index key; the empty product is "1"."""
    return 0 if key == "1" else key.count(".") + 1


def _key_ids(key: str):
    return [] if key == "1" else [int(s) for s in key.split(".")]


@dataclass(frozen=True)
class SelmerShape:
    """Starting shape: free parity bit e and the doubled-part lengths d."""

    e: int
    d: tuple = ()

    def __post_init__(self) -> None:
        if self.e not in (0, 1):
            raise ValueError(f"e must be 0 or 1, got {self.e}")
        d = tuple(int(x) for x in self.d)
        while d and d[-1] == 0:
            d = d[:-1]
        object.__setattr__(self, "d", d)
        if any(x < 0 for x in d):
            raise ValueError(f"d entries must be >= 0, got {d}")
        if any(a < b for a, b in zip(d, d[1:])):
            raise ValueError(f"d must be non-increasing, got {d}")

    @classmethod
    def from_string(cls, text: str) -> SelmerShape:
        """Parse "e:d0,d1,..."; an empty d-part is allowed ("1:")."""
        head, sep, tail = text.partition(":")
        if not sep or head not in ("0", "1"):
            raise ValueError(f"shape must look like 'e:d0,d1,...', got {text!r}")
        d = tuple(int(x) for x in tail.split(",") if x.strip() != "")
        return cls(int(head), d)


@dataclass(frozen=True)
class SimState:
    """Shape of the module family at one index."""

    e: int
    d: tuple


@dataclass
class EulerSystemData:
    """Divisibility indices of one simulated (or imported) system.

    ind_lambda is keyed by definite index keys, ind_kappa by indefinite
    ones; i_n_val holds min(k, min k_ell over the factors); the two
    localization maps are keyed by (index key, prime id).
    """

    epsilon: int
    k: int
    pool: tuple
    delta_sim: int | None = None
    ind_lambda: dict = field(default_factory=dict)
    ind_kappa: dict = field(default_factory=dict)
    i_n_val: dict = field(default_factory=dict)
    loc_ord: dict = field(default_factory=dict)
    loc_unr: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def nest(flat):
            out = {}
            for (key, ident), v in sorted(flat.items()):
                out.setdefault(key, {})[str(ident)] = v
            return out

        return {
            "epsilon": self.epsilon,
            "k": self.k,
            "pool": [lab.to_dict() for lab in self.pool],
            "delta_sim": self.delta_sim,
            "ind_lambda": dict(sorted(self.ind_lambda.items())),
            "ind_kappa": dict(sorted(self.ind_kappa.items())),
            "i_n_val": dict(sorted(self.i_n_val.items())),
            "loc_ord": nest(self.loc_ord),
            "loc_unr": nest(self.loc_unr),
        }

    @classmethod
    def from_dict(cls, doc) -> EulerSystemData:
        if not isinstance(doc, dict):
            raise InputError("expected an object", "$")
        eps, k = doc.get("epsilon"), doc.get("k")
        if eps not in (0, 1):
            raise InputError("'epsilon' must be 0 or 1", "$.epsilon")
        if isinstance(k, bool) or not isinstance(k, int) or k < 1:
            raise InputError("'k' must be an integer >= 1", "$.k")
        pool_doc = doc.get("pool", [])
        if not isinstance(pool_doc, list):
            raise InputError("'pool' must be a list", "$.pool")
        pool = tuple(
            AdmissiblePrimeLabel.from_dict(p, f"$.pool[{i}]")
            for i, p in enumerate(pool_doc)
        )

        def int_map(name):
            raw = doc.get(name, {})
            if not isinstance(raw, dict):
                raise InputError(f"'{name}' must be an object", f"$.{name}")
            out = {}
            for key, v in raw.items():
                if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                    raise InputError(
                        "values must be integers >= 0", f"$.{name}.{key}"
                    )
                out[key] = v
            return out

        def loc_map(name):
            raw = doc.get(name, {})
            if not isinstance(raw, dict):
                raise InputError(f"'{name}' must be an object", f"$.{name}")
            out = {}
            for key, per in raw.items():
                if not isinstance(per, dict):
                    raise InputError(
                        "entries must map prime ids to integers", f"$.{name}.{key}"
                    )
                for ident, v in per.items():
                    if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                        raise InputError(
                            "values must be integers >= 0",
                            f"$.{name}.{key}.{ident}",
                        )
                    out[(key, int(ident))] = v
            return out

        delta_sim = doc.get("delta_sim")
        if delta_sim is not None and (
            isinstance(delta_sim, bool) or not isinstance(delta_sim, int)
        ):
            raise InputError("'delta_sim' must be an integer or null", "$.delta_sim")
        return cls(
            eps,
            k,
            pool,
            delta_sim,
            int_map("ind_lambda"),
            int_map("ind_kappa"),
            int_map("i_n_val"),
            loc_map("loc_ord"),
            loc_map("loc_unr"),
        )


def simulate_system(shape, k, pool, seed, nu_max=None):
    """Walk every square-free index up to nu_max and assign its indices.

    Deterministic per seed. Primes act in sorted id order: on a definite
    state the largest doubled length is consumed and the parity flips;
    on an indefinite state only the parity flips. Nongeneric labels then
    add a seeded non-negative bump to each remaining length, so no
    stratum ever dips below its all-generic floor. Divisibility indices
    follow as min(k, val I_n, delta + remaining length); localizations
    are filled so that both reciprocity laws hold on the nose.

    Returns (EulerSystemData, dict key -> SimState).
    """
    if k < 1:
        raise ValueError(f"ring length k must be >= 1, got {k}")
    labels = sorted(pool)
    if len({lab.ident for lab in labels}) != len(labels):
        raise ValueError("pool ids must be distinct")
    generic_count = sum(1 for lab in labels if lab.generic)
    if nu_max is None:
        nu_max = generic_count // 2
    if generic_count < 2 * nu_max:
        raise PoolExhausted(
            f"need at least {2 * nu_max} generic labels for depth {nu_max}, "
            f"have {generic_count}"
        )
    delta = random.Random(_derive(seed, "delta")).randint(0, min(k, 3))
    epsilon = (shape.e + 1) % 2
    data = EulerSystemData(epsilon, k, tuple(labels), delta)
    states = {}
    for size in range(nu_max + 1):
        for combo in combinations(labels, size):
            key = index_key(combo)
            e_cur, d_cur = shape.e, list(shape.d)
            for lab in combo:
                if e_cur == 0 and d_cur:
                    d_cur.pop(0)
                if not lab.generic:
                    prng = random.Random(
                        _derive(seed, "perturb", key, lab.ident)
                    )
                    d_cur = sorted(
                        (x + prng.randint(0, 1) for x in d_cur), reverse=True
                    )
                e_cur ^= 1
            states[key] = SimState(e_cur, tuple(d_cur))
            val = min([k] + [lab.k_ell for lab in combo])
            data.i_n_val[key] = val
            ind = min(k, val, delta + sum(d_cur))
            if e_cur == 0:
                data.ind_lambda[key] = ind
            else:
                data.ind_kappa[key] = ind
    for key in states:
        have = set(_key_ids(key))
        if key_weight(key) + 1 > nu_max:
            continue
        for lab in labels:
            if lab.ident in have:
                continue
            m_key = index_key(
                [lab] + [l for l in labels if l.ident in have]
            )
            val_m = data.i_n_val[m_key]
            if key in data.ind_lambda:
                data.loc_ord[(m_key, lab.ident)] = min(
                    data.ind_lambda[key], val_m
                )
            else:
                ind_m = data.ind_lambda[m_key]
                data.loc_unr[(key, lab.ident)] = (
                    ind_m if ind_m < val_m else k
                )
    return data, states


# ----------------------------------------------------------- stratum minima


def partial_j(data: EulerSystemData, j: int) -> int:
    """Stratum minimum on the lambda side, with the I_n cap applied."""
    vals = [
        min(ind, data.i_n_val.get(key, data.k))
        for key, ind in data.ind_lambda.items()
        if key_weight(key) == j
    ]
    if not vals:
        raise EmptyStratum(f"no index of weight {j} carries a lambda element")
    return min(vals)


def partial_j_kappa(data: EulerSystemData, j: int) -> int:
    vals = [
        ind for key, ind in data.ind_kappa.items() if key_weight(key) == j
    ]
    if not vals:
        raise EmptyStratum(f"no index of weight {j} carries a kappa element")
    return min(vals)


def _strata(index_map) -> list:
    return sorted({key_weight(key) for key in index_map})


def partial_global(data: EulerSystemData) -> int:
    js = _strata(data.ind_lambda)
    if not js:
        raise EmptyStratum("the lambda side is empty")
    return min(partial_j(data, j) for j in js)


# ------------------------------------------------------------- closed forms


def artsel_rhs(shape: SelmerShape, k: int, delta: int, j: int) -> int:
    """Predicted lambda stratum value: min(k, delta + tail of d)."""
    if (j - shape.e) % 2:
        raise ParityMismatch(
            f"stratum {j} has no lambda elements for e={shape.e}"
        )
    tail = sum(shape.d[(j - shape.e) // 2 :])
    return min(k, delta + tail)


def artkappa_rhs(shape: SelmerShape, k: int, delta: int, j: int) -> int:
    """Predicted kappa stratum value; strata sit at the opposite parity."""
    if (j - shape.e) % 2 == 0:
        raise ParityMismatch(
            f"stratum {j} has no kappa elements for e={shape.e}"
        )
    tail = sum(shape.d[(j + 1) // 2 :])
    return min(k, delta + tail)


def verify_artsel(data: EulerSystemData, shape: SelmerShape, k: int) -> dict:
    """Compare every populated lambda stratum against the closed form."""
    js = _strata(data.ind_lambda)
    if not js:
        return {"delta": None, "strata": [], "all_match": True}
    delta = partial_global(data)
    strata = []
    for j in js:
        observed = partial_j(data, j)
        expected = artsel_rhs(shape, k, delta, j)
        strata.append(
            {
                "j": j,
                "observed": observed,
                "expected": expected,
                "match": observed == expected,
            }
        )
    return {
        "delta": delta,
        "strata": strata,
        "all_match": all(s["match"] for s in strata),
    }


def verify_artkappa(data: EulerSystemData, shape: SelmerShape, k: int) -> dict:
    """Kappa strata against the closed form, plus the shift-by-one bridge."""
    js = _strata(data.ind_kappa)
    if not js:
        return {"delta": None, "strata": [], "bridge": [], "all_match": True}
    delta = min(partial_j_kappa(data, j) for j in js)
    strata = []
    for j in js:
        observed = partial_j_kappa(data, j)
        expected = artkappa_rhs(shape, k, delta, j)
        strata.append(
            {
                "j": j,
                "observed": observed,
                "expected": expected,
                "match": observed == expected,
            }
        )
    bridge = []
    lam_js = set(_strata(data.ind_lambda))
    for j in js:
        if j + 1 in lam_js:
            kappa_side = partial_j_kappa(data, j)
            lam_side = partial_j(data, j + 1)
            bridge.append(
                {
                    "j": j,
                    "kappa": kappa_side,
                    "lambda_next": lam_side,
                    "match": kappa_side == lam_side,
                }
            )
    ok = all(s["match"] for s in strata) and all(b["match"] for b in bridge)
    return {"delta": delta, "strata": strata, "bridge": bridge, "all_match": ok}


# -------------------------------------------------------------- reciprocity


def reciprocity_check(data: EulerSystemData) -> bool:
    """Both explicit laws, as valuation equalities, over all stored pairs."""
    for (m_key, ident), loc in data.loc_ord.items():
        ids = _key_ids(m_key)
        if ident not in ids:
            return False
        n_key = index_key(
            [AdmissiblePrimeLabel(i) for i in ids if i != ident]
        )
        ind = data.ind_lambda.get(n_key)
        if ind is None:
            continue
        if min(ind, data.i_n_val.get(m_key, data.k)) != loc:
            return False
    for (n_key, ident), loc in data.loc_unr.items():
        ids = _key_ids(n_key)
        if ident in ids:
            return False
        m_key = index_key([AdmissiblePrimeLabel(i) for i in ids + [ident]])
        ind_m = data.ind_lambda.get(m_key)
        if ind_m is None:
            continue
        if min(loc, data.i_n_val.get(m_key, data.k)) != ind_m:
            return False
    return True


# ------------------------------------------------- limits and reconstruction


def _stable_suffix_start(pairs):
    """(key, value) pairs sorted by key: first key of the constant tail.

    The tail must have length >= 2 to count as stabilized.
    """
    if len(pairs) < 2:
        raise NoStabilization("need at least two levels to detect a limit")
    tail_value = pairs[-1][1]
    start = None
    for key, value in reversed(pairs):
        if value == tail_value:
            start = key
        else:
            break
    covered = [key for key, _ in pairs if key >= start]
    if len(covered) < 2:
        raise NoStabilization(
            f"value still moving at the end of the range: {pairs}"
        )
    return start, tail_value


def delta_limit(family, j: int) -> int:
    """Stabilized stratum value across systems of increasing length k.

    family: mapping k -> EulerSystemData (or a precomputed integer).
    """
    pairs = []
    for k in sorted(family):
        entry = family[k]
        value = entry if isinstance(entry, int) else partial_j(entry, j)
        pairs.append((k, value))
    return _stable_suffix_start(pairs)[1]


def stabilization_index(family, P: HeightOnePrime, j: int) -> int:
    """Least k past which the specialized ideal stops moving.

    family: mapping k -> LambdaIdealFactored (or a precomputed ord).
    The ord of each ideal is taken in O_j down the tower at P.
    """
    pairs = []
    for k in sorted(family):
        entry = family[k]
        value = (
            entry
            if isinstance(entry, int)
            else specialized_ideal_ord(entry, P, j)
        )
        pairs.append((k, value))
    return _stable_suffix_start(pairs)[0]


def reconstruct_shape(delta_values, e: int) -> SelmerShape:
    """Shape from stabilized stratum values d_i = delta(2i+e)-delta(2i+2+e)."""
    if e not in (0, 1):
        raise ValueError(f"e must be 0 or 1, got {e}")
    js = sorted(delta_values)
    if not js:
        raise ValueError("no stratum values supplied")
    for j in js:
        if (j - e) % 2:
            raise ParityMismatch(
                f"stratum {j} is not a lambda stratum for e={e}"
            )
    if js != list(range(e, js[-1] + 1, 2)):
        raise ValueError(f"stratum values must cover e, e+2, ... got {js}")
    d = []
    for a, b in zip(js, js[1:]):
        step = delta_values[a] - delta_values[b]
        if step < 0:
            raise NotMonotone(
                f"stratum values increase from j={a} to j={b}"
            )
        d.append(step)
    if any(x < y for x, y in zip(d, d[1:])):
        raise NotMonotone(f"derived lengths are not non-increasing: {d}")
    return SelmerShape(e, tuple(d))


def sha_exponents(delta_values, e: int, i: int) -> int:
    """Doubled defect exponent 2*(delta(i+e) - delta) at an even index."""
    if i % 2:
        raise ParityMismatch(
            f"index {i} is odd; only even indices carry this exponent"
        )
    js = sorted(delta_values)
    if i + e not in delta_values:
        raise ValueError(f"stratum {i + e} missing from the supplied values")
    limit = delta_values[js[-1]]
    return 2 * (delta_values[i + e] - limit)


# --------------------------------------------------------- ideal assembly


def construct_C(elements, i: int, e: int, basis) -> LambdaIdealFactored:
    """Assemble the i-th lambda ideal from supplied series elements.

    elements: mapping index key -> TruncatedSeries. Kept are the keys on
    the lambda side (weight matching e mod 2) of weight <= i + e; the
    generators are factored over the declared basis.
    """
    picked = [
        elements[key]
        for key in sorted(elements)
        if key_weight(key) % 2 == e % 2 and key_weight(key) <= i + e
    ]
    return LambdaIdealFactored.from_series_generators(basis, picked)


def construct_D(elements, i: int, e: int, basis) -> LambdaIdealFactored:
    """Kappa-side counterpart: opposite parity, weight <= i."""
    picked = [
        elements[key]
        for key in sorted(elements)
        if key_weight(key) % 2 == (e + 1) % 2 and key_weight(key) <= i
    ]
    return LambdaIdealFactored.from_series_generators(basis, picked)


# ------------------------------------------------------- doubled-module law


def synthetic_c_family(X: ElementaryLambdaModule) -> dict:
    """Even-index companion ideals of a doubled module: C_i with C_i^2
    matching the i-th Fitting class. Exists because every even class of
    a doubled module is a square."""
    family = {}
    for i in range(0, X.width + 1, 2):
        family[i] = pseudo_square_root(
            elementary_fitting_class(X, i)
        ).as_ideal()
    return family


def highfitt_consistency(X: ElementaryLambdaModule, c_family) -> dict:
    """Check the even squares and the odd products against X's classes."""
    even, odd = [], []
    for i, ideal in sorted(c_family.items()):
        want = elementary_fitting_class(X, i)
        got = class_of(ideal)
        got_sq = got.mult(got)
        even.append({"i": i, "match": got_sq == want})
    for i in range(1, X.width + 1, 2):
        if i - 1 in c_family and i + 1 in c_family:
            want = elementary_fitting_class(X, i)
            got = class_of(c_family[i - 1]).mult(class_of(c_family[i + 1]))
            odd.append({"i": i, "match": got == want})
    entries = even + odd
    return {
        "even": even,
        "odd": odd,
        "all_match": all(x["match"] for x in entries),
    }
