"""Exact ground truths on k-regular trees and the line Z^1.

Everything here has a closed form or an exact dynamic program, so these
functions act as the trust anchor for the Monte Carlo and operator modules.
Where feasible each quantity is implemented twice (closed form plus direct
summation / power-series twin) and the pair is cross-checked by
`self_check`, which the `verify oracles` CLI suite runs.

Conventions: the k-regular tree has every vertex of degree k >= 3,
branching number gr = k - 1, bond percolation threshold p_c = 1/(k-1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .percolation import TailCurve

INF_SUSCEPTIBILITY = math.inf


@dataclass(frozen=True)
class TreeFamily:
    """Degree descriptor for a k-regular tree, k >= 3."""

    k: int

    def __post_init__(self):
        if self.k < 3:
            raise ValueError("k-regular tree oracle requires k >= 3, got k=%r" % (self.k,))


@dataclass(frozen=True)
class TreeThresholds:
    p_c: float
    p_qq: float
    rho: float
    gr: float


def tree_two_point(k: int, p: float, d: int) -> float:
    """Connection probability across graph distance d: the path is unique, so p**d."""
    TreeFamily(k)
    if d < 0:
        raise ValueError("distance must be nonnegative")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0,1]")
    if d == 0:
        return 1.0
    return float(p) ** d


def line_two_point(p: float, d: int) -> float:
    """Two-point function on Z^1: p**|d|."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0,1]")
    return float(p) ** abs(int(d))


def tree_susceptibility(k: int, p: float) -> float:
    """Expected cluster size (1+p)/(1-(k-1)p); +inf at and above p = 1/(k-1)."""
    TreeFamily(k)
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0,1]")
    if p * (k - 1) >= 1.0:
        return INF_SUSCEPTIBILITY
    return (1.0 + p) / (1.0 - (k - 1) * p)


def tree_susceptibility_series(k: int, p: float, tol: float = 1e-16) -> float:
    """Direct-summation twin of `tree_susceptibility`: 1 + sum_n k(k-1)^(n-1) p^n."""
    TreeFamily(k)
    if p * (k - 1) >= 1.0:
        return INF_SUSCEPTIBILITY
    total = 1.0
    term = k * p  # sphere n=1 contribution
    while term > tol * total:
        total += term
        term *= (k - 1) * p
    # close the geometric tail exactly
    total += term / (1.0 - (k - 1) * p)
    return total


def tree_susceptibility_derivative(k: int, p: float) -> float:
    """d(chi)/dp = k/(1-(k-1)p)^2, the analytic anchor for finite differences."""
    TreeFamily(k)
    if p * (k - 1) >= 1.0:
        raise ValueError("derivative undefined at or above p_c")
    return k / (1.0 - (k - 1) * p) ** 2


def tree_thresholds(k: int, q: float = 2.0) -> TreeThresholds:
    """Critical values for the k-regular tree.

    p_c = 1/(k-1), p_{q->q} = (k-1)^(-(q-1)/q) for q in [2, inf],
    random-walk spectral radius rho = 2 sqrt(k-1)/k, growth gr = k-1.
    Values of q below 2 are refused: the attainment statement backing the
    formula covers q in [2, inf] only.
    """
    TreeFamily(k)
    if q < 2.0:
        raise ValueError("p_{q->q} on trees is only provided for q in [2, inf]")
    gr = float(k - 1)
    if math.isinf(q):
        p_qq = 1.0 / gr
    else:
        p_qq = gr ** (-(q - 1.0) / q)
    return TreeThresholds(
        p_c=1.0 / gr,
        p_qq=p_qq,
        rho=2.0 * math.sqrt(gr) / k,
        gr=gr,
    )


def tree_branching_sum(k: int, p: float, n_gen: int) -> float:
    """Sum of two-point values over the generation-n descendants: ((k-1)p)^n.

    Equals exactly 1 at p = 1/(k-1) for every generation, and is < 1 below it.
    """
    TreeFamily(k)
    if n_gen < 1:
        raise ValueError("n_gen must be >= 1")
    return ((k - 1) * float(p)) ** n_gen


def tree_walk_two_point(k: int, p: float, n: int) -> float:
    """E[p^(d(X_0, X_n))] for simple random walk on the k-regular tree.

    Dynamic program on the distance chain: from m >= 1 the distance moves to
    m+1 with probability (k-1)/k and to m-1 with probability 1/k; from 0 it
    moves to 1 with probability 1.
    """
    TreeFamily(k)
    if n < 0:
        raise ValueError("n must be >= 0")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0,1]")
    dist = np.zeros(n + 1)
    dist[0] = 1.0
    up = (k - 1.0) / k
    down = 1.0 / k
    for _ in range(n):
        nxt = np.zeros(n + 1)
        nxt[1] += dist[0]
        for m in range(1, n + 1):
            w = dist[m]
            if w == 0.0:
                continue
            if m + 1 <= n:
                nxt[m + 1] += up * w
            nxt[m - 1] += down * w
        dist = nxt
    powers = np.power(float(p), np.arange(n + 1)) if p > 0 else np.concatenate([[1.0], np.zeros(n)])
    return float(dist @ powers)


def _radial_counts(k: int, m: int, t: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Number of tree vertices w with branch point at position t on a geodesic
    of length m and off-path depth h.  t, h broadcast to a (t,h) grid."""
    counts = np.zeros((t.size, h.size))
    kw = float(k - 1)
    pow_h = kw ** np.maximum(h - 1, 0)
    for i, tv in enumerate(t):
        if m == 0:
            counts[i] = np.where(h == 0, 1.0, k * pow_h)
        elif tv == 0 or tv == m:
            counts[i] = np.where(h == 0, 1.0, kw * pow_h)
        else:
            counts[i] = np.where(h == 0, 1.0, (k - 2) * pow_h)
    return counts


def radial_convolve(F: np.ndarray, G: np.ndarray, k: int, m_max: int) -> tuple[np.ndarray, float]:
    """(F*G)(m) = sum_w F(d(u,w)) G(w,v) on the infinite k-regular tree.

    F and G are radial profiles indexed by distance; the sum over the
    off-path depth h is truncated by the array lengths, and the returned
    second value bounds the discarded tail assuming both profiles keep
    decaying at least as fast as their trailing ratio.
    """
    L = min(F.size, G.size)
    h_max = L - 1 - m_max
    if h_max < 8:
        raise ValueError("radial profiles too short for m_max=%d" % m_max)
    out = np.zeros(m_max + 1)
    h = np.arange(h_max + 1)
    for m in range(m_max + 1):
        t = np.arange(m + 1)
        counts = _radial_counts(k, m, t, h)
        vals = F[t[:, None] + h[None, :]] * G[(m - t)[:, None] + h[None, :]]
        out[m] = float((counts * vals).sum())
    tail = _tail_ratio(F) * _tail_ratio(G) * (k - 1)
    if tail < 1.0:
        last_h = h_max
        worst = 0.0
        for m in range(m_max + 1):
            t = np.arange(m + 1)
            counts = _radial_counts(k, m, t, np.array([last_h]))[:, 0]
            term = float((counts * F[t + last_h] * G[m - t + last_h]).sum())
            worst = max(worst, term * tail / (1.0 - tail))
        bound = worst
    else:
        bound = math.inf
    return out, bound


def _tail_ratio(F: np.ndarray, window: int = 8) -> float:
    tail = F[-window:]
    prev = F[-window - 1:-1]
    mask = prev > 0
    if not mask.any():
        return 0.0
    return float(np.max(tail[mask] / prev[mask]))


def tree_polygon(k: int, p: float, n: int, d_max: int = 40) -> float:
    """n-step diagram T_p^n(v,v) on the infinite k-regular tree by radial
    convolution of the profile p^d.  Reports no value if the truncation tail
    bound exceeds 1e-9."""
    TreeFamily(k)
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return 1.0
    L = d_max + 1
    base = np.power(float(p), np.arange(L)) if p > 0 else np.concatenate([[1.0], np.zeros(L - 1)])
    profile = base
    bound_total = 0.0
    for _ in range(n - 1):
        profile, bound = radial_convolve(profile, base, k, m_max=0 if _ == n - 2 else d_max // 2)
        bound_total += bound
        if profile.size < base.size:
            base = base[: profile.size]
    if bound_total > 1e-9:
        raise ArithmeticError(
            "radial truncation tail %.3e above 1e-9; increase d_max" % bound_total
        )
    return float(profile[0])


def tree_polygon2_closed(k: int, p: float) -> float:
    """Closed form for the 2-step diagram: 1 + k p^2 / (1 - (k-1) p^2)."""
    TreeFamily(k)
    if (k - 1) * p * p >= 1.0:
        return math.inf
    return 1.0 + k * p * p / (1.0 - (k - 1) * p * p)


def _log_binom_pmf(count_n: np.ndarray, m: np.ndarray, p: float) -> np.ndarray:
    """log P(Binomial(count_n, p) = m), elementwise, -inf outside support."""
    count_n = np.asarray(count_n, dtype=float)
    m = np.asarray(m, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (
            gammaln(count_n + 1)
            - gammaln(m + 1)
            - gammaln(count_n - m + 1)
            + m * math.log(p)
            + (count_n - m) * math.log1p(-p)
        )
    bad = (m < 0) | (m > count_n)
    if p == 0.0:
        out = np.where(m == 0, 0.0, -np.inf)
    elif p == 1.0:
        out = np.where(m == count_n, 0.0, -np.inf)
    return np.where(bad, -np.inf, out)


def tree_cluster_size_pmf(k: int, p: float, n_max: int) -> np.ndarray:
    """P(|K_root| = n) for n = 1..n_max, exact via the total-progeny formula.

    The root cluster is the family tree of a branching process whose root has
    Binomial(k, p) children and later individuals have Binomial(k-1, p)
    children.  For j subtrees the combined progeny law comes from the
    hitting-time identity P(T_1+...+T_j = m) = (j/m) P(S_m = m - j) with
    S_m ~ Binomial((k-1)m, p).  Evaluated in log space.
    """
    TreeFamily(k)
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0,1]")
    pmf = np.zeros(n_max + 1)
    pmf[1] = (1.0 - p) ** k
    if n_max == 1 or p == 0.0:
        return pmf
    n = np.arange(2, n_max + 1)
    m = n - 1.0  # progeny mass below the root
    acc = np.zeros(n.size)
    for j in range(1, k + 1):
        log_root = _log_binom_pmf(np.array([k]), np.array([j]), p)[0]
        log_walk = _log_binom_pmf((k - 1) * m, m - j, p)
        term = np.exp(log_root + np.log(j) - np.log(m) + log_walk)
        acc += term
    pmf[2:] = acc
    return pmf


def tree_cluster_tail_exact(k: int, p: float, n_max: int) -> TailCurve:
    """Exact survival curve P(|K_root| >= n), n = 1..n_max."""
    pmf = tree_cluster_size_pmf(k, p, n_max)
    cdf = np.cumsum(pmf[1:])
    survival = np.concatenate([[1.0], np.clip(1.0 - cdf[:-1], 0.0, 1.0)])
    ns = np.arange(1, n_max + 1)
    return TailCurve(n=ns, survival=survival, std_error=np.zeros(n_max))


def tree_cluster_size_pmf_series(k: int, p: float, n_max: int) -> np.ndarray:
    """Power-series twin of `tree_cluster_size_pmf`.

    Iterates the fixed point C(x) = x (1-p+p C(x))^(k-1) for the subtree
    progeny generating function, then expands the root factor
    A(x) = x (1-p+p C(x))^k.  Coefficient n is exact after n iterations.
    """
    TreeFamily(k)
    q = 1.0 - p
    C = np.zeros(n_max + 1)
    for _ in range(n_max + 1):
        base = q + p * C
        poly = _poly_pow_trunc(base, k - 1, n_max)
        new = np.zeros(n_max + 1)
        new[1:] = poly[:-1]
        C = new
    base = q + p * C
    poly = _poly_pow_trunc(base, k, n_max)
    A = np.zeros(n_max + 1)
    A[1:] = poly[:-1]
    return A


def _poly_pow_trunc(poly: np.ndarray, power: int, n_max: int) -> np.ndarray:
    out = np.zeros(n_max + 1)
    out[0] = 1.0
    acc = poly.copy()
    e = power
    while e > 0:
        if e & 1:
            out = np.convolve(out, acc)[: n_max + 1]
        e >>= 1
        if e:
            acc = np.convolve(acc, acc)[: n_max + 1]
    return out


def self_check(k_values=(3, 4, 5), n_p=20, rtol=1e-9) -> list[str]:
    """Cross-check every closed form against its independent twin.

    Returns a list of failure descriptions (empty when all checks pass).
    """
    failures = []
    for k in k_values:
        pc = 1.0 / (k - 1)
        p_grid = np.linspace(0.02, 0.98, n_p)
        for p in p_grid:
            if p * (k - 1) < 1.0:
                a = tree_susceptibility(k, p)
                b = tree_susceptibility_series(k, p)
                if abs(a - b) > rtol * abs(a):
                    failures.append(f"susceptibility k={k} p={p:.3f}: {a} vs {b}")
            if (k - 1) * p * p < 0.98:
                a = tree_polygon2_closed(k, p)
                b = tree_polygon(k, p, 2, d_max=max(40, int(120 * p) + 40))
                if abs(a - b) > max(rtol * abs(a), 1e-12):
                    failures.append(f"polygon2 k={k} p={p:.3f}: {a} vs {b}")
        # progeny distribution: hitting-time formula vs power series
        for p in (0.3 * pc, pc, min(1.2 * pc, 0.9)):
            n_cut = 200
            a = tree_cluster_size_pmf(k, p, n_cut)
            b = tree_cluster_size_pmf_series(k, p, n_cut)
            err = np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-280))
            if err > 1e-8:
                failures.append(f"cluster pmf k={k} p={p:.3f}: rel err {err:.2e}")
        # walk DP vs two-step hand expansion and spectral bound
        rho = tree_thresholds(k).rho
        for p in p_grid:
            w2 = tree_walk_two_point(k, p, 2)
            direct = 1.0 / k + (k - 1.0) / k * p * p
            if abs(w2 - direct) > 1e-12:
                failures.append(f"walk n=2 k={k} p={p:.3f}: {w2} vs {direct}")
        p22 = tree_thresholds(k, 2.0).p_qq
        for n in (1, 5, 20, 100):
            val = tree_walk_two_point(k, p22, n)
            if val > rho ** n + 1e-12:
                failures.append(f"walk bound k={k} n={n}: {val} > rho^n={rho ** n}")
    return failures
