"""Independent brute-force reference implementations used by the tests.

Nothing here imports the package; everything is plain Python loops over
small instances, so agreement with the vectorised code is meaningful.
"""

import itertools
import math


def rank_by_span(rows, p):
    """Rank over Z_p as log_p of the number of distinct vectors in the row span."""
    rows = [tuple(int(x) % p for x in r) for r in rows]
    if not rows:
        return 0
    n = len(rows[0])
    span = set()
    for coeffs in itertools.product(range(p), repeat=len(rows)):
        v = tuple(sum(c * r[j] for c, r in zip(coeffs, rows)) % p for j in range(n))
        span.add(v)
    return round(math.log(len(span), p))


def inverse_search(a, p):
    """Multiplicative inverse by exhaustive search."""
    for x in range(1, p):
        if (a * x) % p == 1:
            return x
    raise ZeroDivisionError(a)


def det_mod(M, p):
    """Determinant by cofactor expansion, reduced mod p."""
    n = len(M)
    if n == 1:
        return M[0][0] % p
    total = 0
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in M[1:]]
        total += (-1) ** j * M[0][j] * det_mod(minor, p)
    return total % p


def adjugate_inverse(M, p):
    """Matrix inverse mod p via the adjugate formula."""
    n = len(M)
    d = det_mod(M, p)
    dinv = inverse_search(d, p)
    inv = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:j] + row[j + 1:] for k, row in enumerate(M) if k != i]
            cof = (-1) ** (i + j) * (det_mod(minor, p) if minor else 1)
            inv[j][i] = (cof * dinv) % p
    return inv


def matmul_mod(A, B, p):
    return [[sum(A[i][k] * B[k][j] for k in range(len(B))) % p for j in range(len(B[0]))]
            for i in range(len(A))]


def best_subset(Q_rows, entropies, k, p):
    """Minimum entropy sum over all k-subsets of rows with rank k; returns (value, subsets)."""
    best, arg = math.inf, []
    for S in itertools.combinations(range(len(Q_rows)), k):
        if rank_by_span([Q_rows[i] for i in S], p) != k:
            continue
        v = math.fsum(entropies[i] for i in S)
        if v < best - 1e-15:
            best, arg = v, [S]
        elif abs(v - best) <= 1e-15:
            arg.append(S)
    return best, arg


def min_distance_loops(Q_rows, p):
    """Smallest Hamming weight of Q x over all nonzero messages x."""
    n, k = len(Q_rows), len(Q_rows[0])
    best = n + 1
    for x in itertools.product(range(p), repeat=k):
        if not any(x):
            continue
        w = 0
        for i in range(n):
            if sum(Q_rows[i][j] * x[j] for j in range(k)) % p:
                w += 1
        best = min(best, w)
    return best


def md_decode_loops(Q_rows, u, p):
    """argmin over messages (lexicographic, first minimiser) of d_H(Q x, u)."""
    n, k = len(Q_rows), len(Q_rows[0])
    best, arg = n + 1, None
    for x in itertools.product(range(p), repeat=k):
        cw = [sum(Q_rows[i][j] * x[j] for j in range(k)) % p for i in range(n)]
        d = sum(a != b for a, b in zip(cw, u))
        if d < best:
            best, arg = d, x
    return list(arg)


def entropy_bits(probs):
    return -sum(q * math.log2(q) for q in probs if q > 0)


def h2(x):
    return entropy_bits([x, 1 - x])


def error_prob_patterns(eps, t):
    """P(more than t antennas in error) by summing over all 2^N error patterns."""
    total = 0.0
    for pattern in itertools.product((0, 1), repeat=len(eps)):
        if sum(pattern) > t:
            pr = 1.0
            for e, b in zip(eps, pattern):
                pr *= e if b else 1 - e
            total += pr
    return total


def binomial_tail(n, t, e):
    return sum(math.comb(n, j) * e**j * (1 - e) ** (n - j) for j in range(t + 1, n + 1))


def mutual_info_simo_bsc(eps, n_r):
    """I(c; u) for c uniform on {0,1} and n_r independent BSC(eps) copies, from the joint table."""
    joint = {}
    for c in (0, 1):
        for u in itertools.product((0, 1), repeat=n_r):
            flips = sum(ui != c for ui in u)
            joint[(c, u)] = 0.5 * eps**flips * (1 - eps) ** (n_r - flips)
    pu = {}
    for (c, u), v in joint.items():
        pu[u] = pu.get(u, 0.0) + v
    mi = 0.0
    for (c, u), v in joint.items():
        if v > 0:
            mi += v * math.log2(v / (0.5 * pu[u]))
    return mi


def combined_noise_pmf(pmfs, w, p):
    """pmf of sum_i w_i z_i mod p for independent z_i, by enumerating the joint."""
    out = [0.0] * p
    for zs in itertools.product(range(p), repeat=len(pmfs)):
        pr = 1.0
        for f, z in zip(pmfs, zs):
            pr *= f[z]
        out[sum(wi * z for wi, z in zip(w, zs)) % p] += pr
    return out


def phi_cdf(x):
    return 0.5 * math.erfc(-x / math.sqrt(2))


def effective_noise_pmf_sum(h_row, a_row, p, kappa, periods=60):
    """Folded noise pmf by summing Gaussian cell masses over many lattice cells.

    For each transmitted input vector x (uniform on the constellation) the
    noise symbol is the coset of round((d.x + z) / kappa) with d = h - a; the
    cell of integer n is [(n - 1/2) kappa, (n + 1/2) kappa).
    """
    hlf = (p - 1) // 2
    reps = [((k + hlf) % p) - hlf for k in range(p)]
    if p == 2:
        reps = [0, 1]
    d = [h - a for h, a in zip(h_row, a_row)]
    out = [0.0] * p
    combos = list(itertools.product(reps, repeat=len(d)))
    for xs in combos:
        mu = kappa * sum(di * xi for di, xi in zip(d, xs))
        centre = round(mu / kappa)
        for n in range(centre - periods * p, centre + periods * p + 1):
            lo, hi = (n - 0.5) * kappa - mu, (n + 0.5) * kappa - mu
            out[n % p] += (phi_cdf(hi) - phi_cdf(lo)) / len(combos)
    return out
