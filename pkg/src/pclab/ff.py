"""Finite-field towers F_p ⊂ F_q ⊂ F_{q^N} backed by full discrete-log tables.

Elements of the top field F_{p^D} (D = n*N) are plain integers: the element
c_0 + c_1 x + ... + c_{D-1} x^{D-1} (mod the recorded modulus) is encoded as
sum(c_i * p**i).  So 0 and 1 encode themselves, and the prime field F_p is
exactly the codes 0..p-1.  Every field operation accepts either Python ints
or numpy integer arrays of codes.

Towers with the same (p, n*N) share one modulus and one generator, so the
same integer denotes the same element whichever base field is chosen.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .errors import FactorizationFailed, NotADivisor, NotPrime, OutOfRange, TooLarge

DEFAULT_TABLE_LIMIT = 1 << 24
DEFAULT_FACTOR_EFFORT = 1 << 22
TOWER_SCHEMA = "pclab.tower/1"


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def factorize(n: int, effort: int = DEFAULT_FACTOR_EFFORT) -> dict[int, int]:
    """Trial-division factorization; gives up after ``effort`` candidate divisors."""
    if n < 1:
        raise ValueError(f"cannot factor {n}")
    out: dict[int, int] = {}
    d, steps = 2, 0
    while d * d <= n:
        if steps > effort:
            raise FactorizationFailed(f"trial division of {n} exceeded {effort} steps")
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
        steps += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def divisors(n: int) -> list[int]:
    return [k for k in range(1, n + 1) if n % k == 0]


def prime_power(q: int) -> tuple[int, int]:
    """Split an odd prime power q into (p, n) with q = p**n."""
    if q < 3:
        raise NotPrime(f"{q} is not a power of an odd prime")
    fac = factorize(q)
    if len(fac) != 1:
        raise NotPrime(f"{q} is not a prime power")
    (p, n), = fac.items()
    if p == 2:
        raise NotPrime(f"{q} is a power of 2; odd characteristic required")
    return p, n


# -- polynomials over F_p: coefficient lists, lowest degree first -------------

def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mod(a: list[int], f: list[int], p: int) -> list[int]:
    a = _trim([c % p for c in a])
    df = len(f) - 1
    inv_lead = pow(f[-1], p - 2, p)
    while len(a) - 1 >= df:
        c = (a[-1] * inv_lead) % p
        shift = len(a) - 1 - df
        for i, fc in enumerate(f):
            a[shift + i] = (a[shift + i] - c * fc) % p
        _trim(a)
    return a


def _poly_mulmod(a: list[int], b: list[int], f: list[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _poly_mod(out, f, p)


def _poly_powmod(a: list[int], e: int, f: list[int], p: int) -> list[int]:
    result = [1]
    base = _poly_mod(list(a), f, p)
    while e:
        if e & 1:
            result = _poly_mulmod(result, base, f, p)
        base = _poly_mulmod(base, base, f, p)
        e >>= 1
    return result


def _poly_sub(a: list[int], b: list[int], p: int) -> list[int]:
    n = max(len(a), len(b))
    a = a + [0] * (n - len(a))
    b = b + [0] * (n - len(b))
    return _trim([(x - y) % p for x, y in zip(a, b)])


def _poly_gcd(a: list[int], b: list[int], p: int) -> list[int]:
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        a, b = b, _poly_mod(a, b, p)
    return a


def is_irreducible(f: list[int] | tuple[int, ...], p: int) -> bool:
    """Rabin's test for a monic polynomial over F_p."""
    f = list(f)
    D = len(f) - 1
    if D < 1 or f[-1] != 1:
        return False
    if D == 1:
        return True
    x = [0, 1]
    if _poly_sub(_poly_powmod(x, p**D, f, p), x, p):
        return False
    for r in factorize(D):
        h = _poly_sub(_poly_powmod(x, p ** (D // r), f, p), x, p)
        if len(_poly_gcd(f, h, p)) != 1:
            return False
    return True


def find_irreducible(p: int, D: int) -> tuple[int, ...]:
    """First monic irreducible of degree D, scanning lower coefficients in code order."""
    for code in range(p**D):
        low = [(code // p**i) % p for i in range(D)]
        f = low + [1]
        if is_irreducible(f, p):
            return tuple(f)
    raise AssertionError(f"no irreducible polynomial of degree {D} over F_{p}")


def _code_to_poly(x: int, p: int, D: int) -> list[int]:
    return _trim([(x // p**i) % p for i in range(D)])


def _poly_to_code(a: list[int], p: int) -> int:
    return sum(c * p**i for i, c in enumerate(a))


def _mat_pow(M: np.ndarray, e: int, p: int) -> np.ndarray:
    R = np.eye(M.shape[0], dtype=np.int64)
    B = M.copy()
    while e:
        if e & 1:
            R = (R @ B) % p
        B = (B @ B) % p
        e >>= 1
    return R


@dataclass(frozen=True)
class _Core:
    p: int
    D: int
    modulus: tuple[int, ...]
    generator: int
    exp: np.ndarray
    log: np.ndarray
    checksum: str


def _build_tables(p: int, D: int, modulus: tuple[int, ...], generator: int,
                  effort: int) -> _Core:
    order = p**D
    qm1 = order - 1
    f = list(modulus)
    if not is_irreducible(f, p):
        raise ValueError(f"modulus {modulus} is not irreducible over F_{p}")
    one = [1]
    g = _code_to_poly(generator, p, D)
    for r in factorize(qm1, effort):
        if _poly_powmod(g, qm1 // r, f, p) == one:
            raise ValueError(f"element {generator} is not a primitive root")
    if D * p * p >= 1 << 62:
        raise TooLarge("characteristic too large for int64 table construction")

    # column i of M holds g * x^i (mod f)
    M = np.zeros((D, D), dtype=np.int64)
    for i in range(D):
        col = _poly_mulmod(g, [0] * i + [1], f, p)
        M[: len(col), i] = col
    B = math.isqrt(qm1) + 1
    V0 = np.zeros((D, B), dtype=np.int64)
    v = np.zeros(D, dtype=np.int64)
    v[0] = 1
    for j in range(B):
        V0[:, j] = v
        v = (M @ v) % p
    MB = _mat_pow(M, B, p)
    blocks = [V0]
    cur = V0
    for _ in range(1, -(-qm1 // B)):
        cur = (MB @ cur) % p
        blocks.append(cur)
    V = np.hstack(blocks)[:, :qm1]
    weights = np.array([p**i for i in range(D)], dtype=np.int64)
    exp = weights @ V
    last = (M @ V[:, -1]) % p
    if int(weights @ last) != 1:
        raise AssertionError("g^(q-1) != 1 while building exp table")
    log = np.full(order, -1, dtype=np.int64)
    log[exp] = np.arange(qm1, dtype=np.int64)
    if exp[0] != 1 or np.any(log[1:] < 0):
        raise AssertionError("log table is not a bijection")
    exp.setflags(write=False)
    log.setflags(write=False)
    digest = hashlib.sha256(exp.astype("<i8").tobytes()).hexdigest()
    return _Core(p, D, tuple(modulus), generator, exp, log, digest)


@lru_cache(maxsize=32)
def _core(p: int, D: int, effort: int = DEFAULT_FACTOR_EFFORT) -> _Core:
    modulus = find_irreducible(p, D)
    f = list(modulus)
    order = p**D
    qm1 = order - 1
    primes = list(factorize(qm1, effort))
    for cand in range(1, order):
        g = _code_to_poly(cand, p, D)
        if all(_poly_powmod(g, qm1 // r, f, p) != [1] for r in primes):
            return _build_tables(p, D, modulus, cand, effort)
    raise AssertionError("no primitive root found")


class FieldTower:
    """F_p ⊂ F_q ⊂ F_{q^N} with q = p^n; immutable once built."""

    def __init__(self, core: _Core, n: int, N: int):
        self._core = core
        self.p = core.p
        self.n = n
        self.N = N
        self.q = core.p**n
        self.D = core.D
        self.order = core.p**core.D
        self.qm1 = self.order - 1
        self.modulus = core.modulus
        self.generator = core.generator
        self.exp = core.exp
        self.log = core.log
        self._weights = [self.p**i for i in range(self.D)]

    def __repr__(self):
        return f"FieldTower(p={self.p}, n={self.n}, N={self.N})"

    # -- encodings ----------------------------------------------------------

    def coeffs(self, x: int) -> tuple[int, ...]:
        return tuple((int(x) // w) % self.p for w in self._weights)

    def from_coeffs(self, coeffs) -> int:
        if len(coeffs) > self.D:
            raise ValueError("too many coefficients")
        return sum((int(c) % self.p) * w for c, w in zip(coeffs, self._weights))

    @property
    def generator_coeffs(self) -> tuple[int, ...]:
        return self.coeffs(self.generator)

    def describe(self) -> dict:
        return {"p": self.p, "n": self.n, "N": self.N,
                "modulus": list(self.modulus), "generator": list(self.generator_coeffs)}

    # -- additive structure -------------------------------------------------

    def _digitwise(self, x, y, sign: int):
        p = self.p
        if self.D == 1:
            return (x + sign * y) % p
        out = 0
        for w in self._weights:
            out = out + (((x // w) % p + sign * ((y // w) % p)) % p) * w
        return out

    def add(self, x, y):
        return self._digitwise(x, y, 1)

    def sub(self, x, y):
        return self._digitwise(x, y, -1)

    def neg(self, x):
        return self._digitwise(0 * x, x, -1)

    # -- multiplicative structure ---------------------------------------------

    def power(self, t):
        """g^t for integer (or array) exponent t."""
        if np.ndim(t) == 0:
            return int(self.exp[int(t) % self.qm1])
        return self.exp[np.asarray(t) % self.qm1]

    def dlog(self, x):
        if np.ndim(x) == 0:
            if int(x) == 0:
                raise ValueError("discrete log of zero")
            return int(self.log[int(x)])
        x = np.asarray(x)
        if np.any(x == 0):
            raise ValueError("discrete log of zero")
        return self.log[x]

    def mul(self, x, y):
        if np.ndim(x) == 0 and np.ndim(y) == 0:
            x, y = int(x), int(y)
            if x == 0 or y == 0:
                return 0
            return int(self.exp[(self.log[x] + self.log[y]) % self.qm1])
        x, y = np.asarray(x), np.asarray(y)
        out = self.exp[(self.log[x] + self.log[y]) % self.qm1]
        return np.where((x == 0) | (y == 0), 0, out)

    def inv(self, x):
        if np.ndim(x) == 0:
            if int(x) == 0:
                raise ZeroDivisionError("inverse of zero")
            return int(self.exp[(-self.log[int(x)]) % self.qm1])
        x = np.asarray(x)
        if np.any(x == 0):
            raise ZeroDivisionError("inverse of zero")
        return self.exp[(-self.log[x]) % self.qm1]

    def div(self, x, y):
        return self.mul(x, self.inv(y))

    def pow(self, x, e: int):
        if np.ndim(x) == 0:
            x = int(x)
            if x == 0:
                return 1 if e == 0 else 0
            return int(self.exp[(int(self.log[x]) * e) % self.qm1])
        x = np.asarray(x)
        out = self.exp[(self.log[x] * e) % self.qm1]
        return np.where(x == 0, 1 if e == 0 else 0, out)

    def scale(self, c, xs):
        """Multiply every element of ``xs`` by the scalar ``c``."""
        return self.mul(np.full(np.shape(xs), int(c), dtype=np.int64), xs)

    # -- subfields and degrees ------------------------------------------------

    def element_degree(self, x) -> int:
        """Least k >= 1 with x^(q^k) = x, i.e. the degree of x over the base F_q."""
        x = int(x)
        if x == 0:
            return 1
        t = int(self.log[x])
        for k in range(1, self.N + 1):
            if (t * (self.q**k - 1)) % self.qm1 == 0:
                return k
        raise AssertionError("unreachable: every element lies in the top field")

    def degrees(self) -> np.ndarray:
        """Degree over the base of every element code 0..order-1."""
        deg = np.zeros(self.order, dtype=np.int64)
        deg[0] = 1
        t = self.log[1:]
        todo = np.ones(self.qm1, dtype=bool)
        for k in divisors(self.N):
            hit = todo & (t % (self.qm1 // (self.q**k - 1)) == 0)
            deg[1:][hit] = k
            todo &= ~hit
        return deg

    def subfield(self, k: int) -> np.ndarray:
        """Sorted codes of F_{q^k}, the elements fixed by x -> x^(q^k)."""
        if k < 1 or self.N % k:
            raise NotADivisor(f"{k} does not divide N={self.N}")
        return self.prime_subfield(self.n * k)

    def prime_subfield(self, k: int) -> np.ndarray:
        """Sorted codes of F_{p^k} for k dividing n*N."""
        if k < 1 or self.D % k:
            raise NotADivisor(f"{k} does not divide n*N={self.D}")
        step = self.qm1 // (self.p**k - 1)
        return np.sort(np.concatenate(([0], self.exp[::step])))

    def base_field(self) -> np.ndarray:
        return self.subfield(1)

    def in_subfield(self, x, k: int) -> bool:
        x = int(x)
        if x == 0:
            return True
        return int(self.log[x]) % (self.qm1 // (self.q**k - 1)) == 0

    # -- characters -----------------------------------------------------------

    def char(self, m: int) -> "MultChar":
        if not 0 <= m <= self.qm1 - 1:
            raise OutOfRange(f"character index {m} outside 0..{self.qm1 - 1}")
        return MultChar(m, self.qm1, self)

    def char_with_generator_value(self, d: int, j: int = 1) -> "MultChar":
        """The character with chi(g) = exp(2*pi*i*j/d); d must divide order-1."""
        if self.qm1 % d:
            raise NotADivisor(f"{d} does not divide {self.qm1}")
        return self.char((self.qm1 // d) * j % self.qm1)

    def characters(self, nontrivial: bool = True):
        start = 1 if nontrivial else 0
        return (MultChar(m, self.qm1, self) for m in range(start, self.qm1))


@dataclass(frozen=True)
class MultChar:
    """chi(g^t) = exp(2*pi*i * m*t / period); chi(0) is the zero marker (None)."""

    m: int
    period: int
    tower: FieldTower = field(repr=False, compare=False)

    @property
    def order(self) -> int:
        return self.period // math.gcd(self.m, self.period)

    @property
    def is_trivial(self) -> bool:
        return self.m % self.period == 0

    def __call__(self, x):
        return char_value(self, x)

    def values(self, xs) -> np.ndarray:
        """Exponents for an array of codes; -1 marks chi(0)."""
        xs = np.asarray(xs, dtype=np.int64)
        t = self.tower.log[xs]
        return np.where(xs == 0, -1, (t * self.m) % self.period)

    def complex_value(self, x) -> complex:
        e = char_value(self, x)
        if e is None:
            return 0j
        return complex(np.exp(2j * np.pi * e / self.period))

    def __mul__(self, other: "MultChar") -> "MultChar":
        return MultChar((self.m + other.m) % self.period, self.period, self.tower)


def char_value(chi: MultChar, x) -> int | None:
    x = int(x)
    if x == 0:
        return None
    return (int(chi.tower.log[x]) * chi.m) % chi.period


def build_tower(p: int, n: int = 1, N: int = 1, *,
                table_limit: int = DEFAULT_TABLE_LIMIT,
                factor_effort: int = DEFAULT_FACTOR_EFFORT) -> FieldTower:
    if not is_prime(p) or p == 2:
        raise NotPrime(f"{p} is not an odd prime")
    if n < 1 or N < 1:
        raise ValueError("n and N must be positive")
    D = n * N
    if p**D > table_limit:
        raise TooLarge(f"{p}^{D} = {p**D} exceeds the table limit {table_limit}")
    return FieldTower(_core(p, D, factor_effort), n, N)


# -- tower cache files ------------------------------------------------------

def save_tower(tower: FieldTower, path) -> Path:
    path = Path(path)
    blob = {"schema": TOWER_SCHEMA, "p": tower.p, "n": tower.n, "N": tower.N,
            "modulus": list(tower.modulus),
            "generator": list(tower.generator_coeffs),
            "checksum": tower._core.checksum}
    path.write_text(json.dumps(blob, indent=1))
    return path


def load_tower(path, *, table_limit: int = DEFAULT_TABLE_LIMIT) -> FieldTower:
    blob = json.loads(Path(path).read_text())
    if blob.get("schema") != TOWER_SCHEMA:
        raise ValueError(f"unsupported tower cache schema {blob.get('schema')!r}")
    p, n, N = blob["p"], blob["n"], blob["N"]
    D = n * N
    if p**D > table_limit:
        raise TooLarge(f"{p}^{D} exceeds the table limit {table_limit}")
    generator = sum(c * p**i for i, c in enumerate(blob["generator"]))
    core = _build_tables(p, D, tuple(blob["modulus"]), generator, DEFAULT_FACTOR_EFFORT)
    if core.checksum != blob["checksum"]:
        raise ValueError(f"tower cache {path} failed checksum verification")
    return FieldTower(core, n, N)


def cached_tower(p: int, n: int = 1, N: int = 1, cache_dir=None, **kw) -> FieldTower:
    """build_tower, reusing (and populating) a cache directory when given."""
    if cache_dir is None:
        return build_tower(p, n, N, **kw)
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    path = cache_dir / f"tower_p{p}_n{n}_N{N}.json"
    if path.exists():
        return load_tower(path)
    tower = build_tower(p, n, N, **kw)
    save_tower(tower, path)
    return tower
