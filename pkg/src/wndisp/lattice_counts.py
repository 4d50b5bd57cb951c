"""Exact resonance counting: mode pairs on level sets of quadratic forms,
lattice points on the ellipse X^2 + 3Y^2 = t, divisor counts, zero-product
quadruples, and the quintic resonance sets S_N(k).

Everything here is integer arithmetic; no floating point enters any count.
The quintic sets are enumerated through the reparametrization

    kappa = (k - n1, k - n1 - n2, k - n2 - n3, k - n2 - n3 - n4, k - n2 - n4)

which ranges bijectively over quintuples with alternating sum k and turns the
phase into Omega = -2 (n1 n2 + n3 n4), so membership reduces to a zero-product
condition under box constraints.  (Expanding the squares gives the minus sign;
only Omega^2 and the vanishing set ever enter downstream formulas, so the sign
is immaterial there.)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

MAX_N = 1 << 15  # keeps 6j - 2k^2 and all products comfortably inside int64
MAX_HISTOGRAM_M = 4096  # O(M^2) product histogram accepted up to here


@dataclass(frozen=True)
class ResonanceCount:
    count: int
    parameters: tuple
    members: Optional[tuple] = None

    def __post_init__(self):
        if self.members is not None and len(self.members) != self.count:
            raise ValueError("member list inconsistent with count")


def _check_range(*values):
    for v in values:
        if abs(v) > MAX_N:
            raise ValueError(f"parameter {v} exceeds supported magnitude {MAX_N}")


def s_kj_members(k: int, j: int, bound: int) -> list:
    """All (k1, k2) with k1^2 + k2^2 + (k-k1-k2)^2 = j and every component
    bounded by ``bound`` in absolute value."""
    _check_range(k, j, bound)
    if bound < 1:
        raise ValueError("mode bound must be >= 1")
    k1 = np.arange(-bound, bound + 1, dtype=np.int64)
    K1, K2 = np.meshgrid(k1, k1, indexing="ij")
    K3 = k - K1 - K2
    hit = (np.abs(K3) <= bound) & (K1 * K1 + K2 * K2 + K3 * K3 == j)
    return [(int(x), int(y)) for x, y in zip(K1[hit], K2[hit])]


def s_kj_count(k: int, j: int, bound: int, with_members: bool = False) -> ResonanceCount:
    members = s_kj_members(k, j, bound)
    return ResonanceCount(len(members), (k, j, bound), tuple(members) if with_members else None)


def ellipse_points(t: int, with_members: bool = False) -> ResonanceCount:
    """Integer points (X, Y) on X^2 + 3Y^2 = t, by exhaustive Y enumeration."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    members = []
    y = 0
    while 3 * y * y <= t:
        rem = t - 3 * y * y
        x = math.isqrt(rem)
        if x * x == rem:
            xs = (x, -x) if x else (0,)
            ys = (y, -y) if y else (0,)
            members.extend((sx, sy) for sx in xs for sy in ys)
        y += 1
    members = sorted(set(members))
    return ResonanceCount(len(members), (t,), tuple(members) if with_members else None)


@dataclass(frozen=True)
class CorrespondenceCheck:
    ok: bool
    s_count: int
    ellipse_count: int
    counterexample: Optional[tuple] = None


def ellipse_correspondence_check(k: int, j: int, bound: int) -> CorrespondenceCheck:
    """Verify that (k1, k2) -> (3k1 + 3k2 - 2k, k1 - k2) maps the pair set
    injectively onto ellipse points with t = 6j - 2k^2, and that the pair
    count never exceeds the lattice-point count."""
    t = 6 * j - 2 * k * k
    if t < 0:
        raise ValueError("6j - 2k^2 must be nonnegative")
    pairs = s_kj_members(k, j, bound)
    on_ellipse = set(ellipse_points(t, with_members=True).members)
    images = set()
    for (k1, k2) in pairs:
        img = (3 * k1 + 3 * k2 - 2 * k, k1 - k2)
        if img in images:
            return CorrespondenceCheck(False, len(pairs), len(on_ellipse), (k1, k2))
        if img not in on_ellipse:
            return CorrespondenceCheck(False, len(pairs), len(on_ellipse), (k1, k2))
        images.add(img)
    ok = len(pairs) <= len(on_ellipse)
    return CorrespondenceCheck(ok, len(pairs), len(on_ellipse), None if ok else ())


def divisor_tau(n: int) -> int:
    """Number of divisors of n."""
    if n < 1:
        raise ValueError("divisor count defined for n >= 1")
    count = 0
    d = 1
    while d * d <= n:
        if n % d == 0:
            count += 1 if d * d == n else 2
        d += 1
    return count


def _zero_product_brute_quadruple(m: int) -> int:
    """Literal O(M^4) enumeration; only sensible for m <= 20."""
    v = np.arange(-m, m + 1, dtype=np.int64)
    s = (
        v[:, None, None, None] * v[None, :, None, None]
        + v[None, None, :, None] * v[None, None, None, :]
    )
    return int(np.count_nonzero(s == 0))


def _product_histogram(m: int) -> np.ndarray:
    """h[p + m^2] = #{(a, b) in [-m, m]^2 : a b = p}."""
    size = 2 * m * m + 1
    h = np.zeros(size, dtype=np.int64)
    v = np.arange(-m, m + 1, dtype=np.int64)
    for a in v:
        h += np.bincount(a * v + m * m, minlength=size)
    return h


def zero_product_count(m: int, method: str = "histogram") -> int:
    """Number of quadruples (n1, n2, n3, n4) in [-m, m]^4 with n1 n2 + n3 n4 = 0.

    ``histogram`` convolves the product histogram with itself in O(m^2)
    memory; ``brute`` enumerates quadruples directly and is restricted to
    m <= 20 as an independent oracle.
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    if m == 0:
        return 1
    if method == "brute":
        if m > 20:
            raise ValueError("brute-force enumeration restricted to m <= 20")
        return _zero_product_brute_quadruple(m)
    if method != "histogram":
        raise ValueError(f"unknown method {method!r}")
    if m > MAX_HISTOGRAM_M:
        raise ValueError(f"histogram method capped at m <= {MAX_HISTOGRAM_M}")
    h = _product_histogram(m)
    return int(np.dot(h, h[::-1]))


# --- divisor table, shared by the quintic counters -------------------------

_DIV_CACHE: dict = {}


def divisor_table(limit: int):
    """CSR arrays (offsets, flat) listing the positive divisors of 1..limit."""
    cached = _DIV_CACHE.get("table")
    if cached is not None and cached[2] >= limit:
        return cached[0], cached[1]
    cnt = np.zeros(limit + 1, dtype=np.int64)
    for d in range(1, limit + 1):
        cnt[d::d] += 1
    off = np.zeros(limit + 2, dtype=np.int64)
    np.cumsum(cnt, out=off[1:])
    flat = np.empty(int(off[-1]), dtype=np.int64)
    fill = off[:-1].copy()
    for d in range(1, limit + 1):
        flat[fill[d::d]] = d
        fill[d::d] += 1
    _DIV_CACHE["table"] = (off, flat, limit)
    return off, flat


def _quintic_count_reparam(n_max: int, k: int) -> int:
    """Count reparametrized quadruples with n1 n2 + n3 n4 = 0 and all five
    kappa components inside [-N, N]; O(N^2 * tau) via the divisor table."""
    N = n_max
    # n2 = 0 branch: n1 free in [k-N, k+N]; (n3, n4) zero-product inside J = [k-N, k+N]
    total = (2 * N + 1) * (4 * N + 1)
    # n2 != 0, n1 = 0 branch: n2 in [k-N, k+N] \ {0}; zero-product pairs in J(n2)
    total += 2 * N * (4 * N + 1)
    # n2 != 0, n1 != 0: n3 n4 = -n1 n2 != 0, resolved through divisors
    n2v = np.arange(-2 * N, 2 * N + 1, dtype=np.int64)
    n2v = n2v[n2v != 0]
    lo1 = np.maximum(k - N, k - N - n2v)
    hi1 = np.minimum(k + N, k + N - n2v)
    keep = lo1 <= hi1
    n2v, lo1, hi1 = n2v[keep], lo1[keep], hi1[keep]
    lens = hi1 - lo1 + 1
    n2p = np.repeat(n2v, lens)
    starts = np.repeat(lo1, lens)
    pos = np.arange(int(lens.sum()), dtype=np.int64) - np.repeat(np.cumsum(lens) - lens, lens)
    n1p = starts + pos
    nz = n1p != 0
    n2p, n1p = n2p[nz], n1p[nz]
    if n1p.size == 0:
        return total
    m = -(n1p * n2p)
    am = np.abs(m)
    off, flat = divisor_table(int(am.max()))
    start = off[am]
    cnt = off[am + 1] - start
    reps = np.repeat(np.arange(len(m), dtype=np.int64), cnt)
    p = np.arange(int(cnt.sum()), dtype=np.int64) - np.repeat(np.cumsum(cnt) - cnt, cnt)
    d = flat[start[reps] + p]
    e = m[reps] // d
    lo = k - n2p[reps] - N
    hi = lo + 2 * N
    for x, y in ((d, e), (-d, -e)):
        s = x + y
        ok = (x >= lo) & (x <= hi) & (y >= lo) & (y <= hi) & (s >= lo) & (s <= hi)
        total += int(np.count_nonzero(ok))
    return total


def _quintic_count_direct(n_max: int, k: int) -> int:
    """Literal enumeration over kappa in [-N, N]^5 with both constraints;
    O(N^4), intended as an oracle for small N."""
    N = n_max
    v = np.arange(-N, N + 1, dtype=np.int64)
    K1, K2, K3, K4 = np.meshgrid(v, v, v, v, indexing="ij")
    K5 = k - K1 + K2 - K3 + K4
    ok = np.abs(K5) <= N
    omega = K1**2 - K2**2 + K3**2 - K4**2 + K5**2 - k * k
    return int(np.count_nonzero(ok & (omega == 0)))


def quintic_resonant_count(n_max: int, k: int, method: str = "reparam") -> ResonanceCount:
    """Cardinality of S_N(k): quintuples kappa in [-N, N]^5 with alternating
    sum k and vanishing phase Omega(k, kappa)."""
    if abs(k) > n_max:
        raise ValueError("need |k| <= N")
    _check_range(n_max)
    if method == "reparam":
        c = _quintic_count_reparam(n_max, k)
    elif method == "direct":
        if n_max > 8:
            raise ValueError("direct enumeration restricted to N <= 8")
        c = _quintic_count_direct(n_max, k)
    else:
        raise ValueError(f"unknown method {method!r}")
    return ResonanceCount(c, (n_max, k))


def reparam_quintuple(k: int, n1: int, n2: int, n3: int, n4: int) -> tuple:
    """The quintuple kappa associated with (n1..n4); its alternating sum is k."""
    return (k - n1, k - n1 - n2, k - n2 - n3, k - n2 - n3 - n4, k - n2 - n4)


def quintic_phase(k: int, kappa) -> int:
    """Omega(k, kappa) = kappa1^2 - kappa2^2 + kappa3^2 - kappa4^2 + kappa5^2 - k^2."""
    k1, k2, k3, k4, k5 = kappa
    return k1 * k1 - k2 * k2 + k3 * k3 - k4 * k4 + k5 * k5 - k * k


def omega_histogram(n_max: int, k: int):
    """Histogram of Q = n1 n2 + n3 n4 over all admissible reparametrized
    quadruples (the phase is Omega = -2Q).  Returns (H, q_max) with
    H[q + q_max] the number of quadruples at Q = q; H[q_max] equals |S_N(k)|.
    """
    N = n_max
    if abs(k) > 5 * N:
        return np.zeros(1, dtype=np.int64), 0
    pieces = []
    q_max = 0
    for n2 in range(-2 * N, 2 * N + 1):
        lo1, hi1 = max(k - N, k - N - n2), min(k + N, k + N - n2)
        if lo1 > hi1:
            continue
        p1 = np.arange(lo1, hi1 + 1, dtype=np.int64) * n2
        j_lo, j_hi = k - n2 - N, k - n2 + N
        n3 = np.arange(j_lo, j_hi + 1, dtype=np.int64)
        ssum = n3[:, None] + n3[None, :]
        ok = (ssum >= j_lo) & (ssum <= j_hi)
        p2 = (n3[:, None] * n3[None, :])[ok]
        if p2.size == 0:
            continue
        lo2 = int(p2.min())
        h2 = np.bincount(p2 - lo2)
        pieces.append((p1, lo2, h2))
        ext2 = max(abs(lo2), abs(lo2 + len(h2) - 1))
        q_max = max(q_max, int(np.abs(p1).max()) + ext2)
    H = np.zeros(2 * q_max + 1, dtype=np.int64)
    for p1, lo2, h2 in pieces:
        for q1 in p1:
            st = int(q1) + lo2 + q_max
            H[st : st + len(h2)] += h2
    return H, q_max
