"""Compiled inner loops.  All matrices have unit off-diagonal entries.

Scaled quantities are carried as ``mantissa * 2**exponent`` with integer
exponents, which keeps renormalisation exact.
"""
import math

import numpy as np
from numba import njit

PIVMIN = 1e-300
LN2 = math.log(2.0)


@njit(cache=True, nogil=True)
def sturm_count(d, E, lo, hi):
    """Negative pivots of ``H[lo:hi] - E``, i.e. eigenvalues strictly below E."""
    c = 0
    q = 1.0
    for i in range(lo, hi):
        if i == lo:
            q = d[i] - E
        else:
            q = d[i] - E - 1.0 / q
        if abs(q) < PIVMIN:
            q = -PIVMIN
        if q < 0.0:
            c += 1
    return c


@njit(cache=True, nogil=True)
def _pivot_product(d, E, lo, hi):
    """Sign, mantissa and base-2 exponent of ``det(H[lo:hi] - E)``, plus the count and last pivot."""
    m = 1.0
    e = 0
    c = 0
    q = 1.0
    for i in range(lo, hi):
        if i == lo:
            q = d[i] - E
        else:
            q = d[i] - E - 1.0 / q
        if abs(q) < PIVMIN:
            q = -PIVMIN
        if q < 0.0:
            c += 1
        m *= q
        if abs(m) > 1e150 or abs(m) < 1e-150:
            f, k = math.frexp(m)
            m = f
            e += k
    return m, e, c, q


@njit(cache=True, nogil=True)
def _scaled_sum3(a, ea, b, eb, c, ec):
    a, k = math.frexp(a)
    ea += k
    b, k = math.frexp(b)
    eb += k
    c, k = math.frexp(c)
    ec += k
    top = max(ea, max(eb, ec))
    s = 0.0
    if a != 0.0 and ea - top > -1070:
        s += math.ldexp(a, ea - top)
    if b != 0.0 and eb - top > -1070:
        s += math.ldexp(b, eb - top)
    if c != 0.0 and ec - top > -1070:
        s += math.ldexp(c, ec - top)
    return s


@njit(cache=True, nogil=True)
def periodic_count_ratio(d, E):
    """Eigenvalues strictly below E of the periodic restriction (n >= 3) from the determinant ratio.

    Inertia of ``A = H~ - E`` equals inertia of its leading (n-1) block T
    plus the sign of the Schur complement ``det A / det T``, with
    ``det A = P_n(x) - P_{n-2}(x+alpha) - 2(-1)^n``.  Loses half the digits
    at exactly double roots; :func:`periodic_count` does not.
    """
    n = d.shape[0]
    m1, e1, cT, qT = _pivot_product(d, E, 0, n - 1)
    q_last = d[n - 1] - E - 1.0 / qT
    m2, e2, _, _ = _pivot_product(d, E, 1, n - 1)
    # s = q_last - P_{n-2}(x+alpha)/P_{n-1} - 2(-1)^n / P_{n-1}
    f1, k1 = math.frexp(q_last)
    sgn_n = 1.0 if n % 2 == 0 else -1.0
    s = _scaled_sum3(f1, k1, -m2 / m1, e2 - e1, -2.0 * sgn_n / m1, -e1)
    return cT + (1 if s < 0.0 else 0)


BK_ALPHA = 0.5 * (math.sqrt(5.0) - 1.0)


@njit(cache=True, nogil=True)
def periodic_count(d, E):
    """Eigenvalues strictly below E of the periodic restriction (n >= 3).

    Symmetric elimination of the cyclic matrix ``H~ - E`` with Bunch's
    1x1/2x2 pivoting on the tridiagonal part.  The corner entry fills the
    last column and the final pivot is the Schur complement, which equals
    ``W(E) / P_{n-1}(x, E)``.  Pivoting keeps the count backward stable at
    repeated eigenvalues, where the plain pivot recursion loses half the
    digits.
    """
    n = d.shape[0]
    last = n - 1
    s = d[last] - E       # running Schur complement of the last row
    q = d[0] - E          # current pivot candidate (row i)
    c = 1.0               # entry (i, n-1) after elimination of rows < i
    cnt = 0
    i = 0
    while i < last:
        e = d[i + 1] - E if i + 1 < last else 0.0
        sigma = max(abs(e), 1.0)
        if i + 1 == last or abs(q) * sigma >= BK_ALPHA:
            if abs(q) < PIVMIN:
                q = -PIVMIN
            if q < 0.0:
                cnt += 1
            inv = 1.0 / q
            s -= c * c * inv
            if i + 1 < last:
                o = 1.0 if i + 1 == last - 1 else 0.0
                c = o - c * inv
                q = e - inv
            i += 1
        else:
            # 2x2 pivot on rows i, i+1: [[q, 1], [1, e]]
            det = q * e - 1.0
            if det < 0.0:
                cnt += 1
            elif q + e < 0.0:
                cnt += 2
            w0 = c
            w1 = 1.0 if i + 1 == last - 1 else 0.0
            s -= (e * w0 * w0 - 2.0 * w0 * w1 + q * w1 * w1) / det
            if i + 2 < last:
                o = 1.0 if i + 2 == last - 1 else 0.0
                c = o - (q * w1 - w0) / det
                q = d[i + 2] - E - q / det
            i += 2
        if abs(c) > 1e150:
            c = 1e150 if c > 0 else -1e150
    if s < 0.0:
        cnt += 1
    return cnt


@njit(cache=True, nogil=True)
def count_below(d, E, periodic):
    if periodic:
        return periodic_count(d, E)
    return sturm_count(d, E, 0, d.shape[0])


@njit(cache=True, nogil=True)
def _dirichlet_counts(d, Es, m, out):
    # independent pivot chains interleaved so their divisions overlap
    n = d.shape[0]
    q = np.empty(m)
    for k in range(m):
        v = d[0] - Es[k]
        if abs(v) < PIVMIN:
            v = -PIVMIN
        out[k] = 1 if v < 0.0 else 0
        q[k] = v
    for i in range(1, n):
        di = d[i]
        for k in range(m):
            v = di - Es[k] - 1.0 / q[k]
            if abs(v) < PIVMIN:
                v = -PIVMIN
            out[k] += 1 if v < 0.0 else 0
            q[k] = v


@njit(cache=True, nogil=True)
def _periodic_counts(d, Es, m, out):
    # same elimination as periodic_count, one state per energy
    n = d.shape[0]
    last = n - 1
    q = np.empty(m)
    c = np.empty(m)
    s = np.empty(m)
    skip = np.zeros(m, dtype=np.bool_)
    for k in range(m):
        q[k] = d[0] - Es[k]
        c[k] = 1.0
        s[k] = d[last] - Es[k]
        out[k] = 0
    for i in range(last):
        o1 = 1.0 if i + 1 == last - 1 else 0.0
        o2 = 1.0 if i + 2 == last - 1 else 0.0
        for k in range(m):
            if skip[k]:
                skip[k] = False
                continue
            E = Es[k]
            e = d[i + 1] - E if i + 1 < last else 0.0
            qk = q[k]
            ck = c[k]
            if i + 1 == last or abs(qk) * max(abs(e), 1.0) >= BK_ALPHA:
                if abs(qk) < PIVMIN:
                    qk = -PIVMIN
                if qk < 0.0:
                    out[k] += 1
                inv = 1.0 / qk
                s[k] -= ck * ck * inv
                if i + 1 < last:
                    ck = o1 - ck * inv
                    qk = e - inv
            else:
                det = qk * e - 1.0
                if det < 0.0:
                    out[k] += 1
                elif qk + e < 0.0:
                    out[k] += 2
                w1 = o1
                s[k] -= (e * ck * ck - 2.0 * ck * w1 + qk * w1 * w1) / det
                if i + 2 < last:
                    nc = o2 - (qk * w1 - ck) / det
                    qk = d[i + 2] - E - qk / det
                    ck = nc
                skip[k] = True
            if abs(ck) > 1e150:
                ck = 1e150 if ck > 0 else -1e150
            q[k] = qk
            c[k] = ck
    for k in range(m):
        if s[k] < 0.0:
            out[k] += 1


@njit(cache=True, nogil=True)
def counts_multi(d, Es, periodic):
    m = Es.shape[0]
    out = np.empty(m, dtype=np.int64)
    if periodic:
        _periodic_counts(d, Es, m, out)
    else:
        _dirichlet_counts(d, Es, m, out)
    return out


@njit(cache=True, nogil=True)
def bisect_eigs(d, periodic, j0, j1, lo, hi, tol):
    """Eigenvalues with sorted indices ``j0 <= j < j1``.

    Level-synchronous multisection: every live interval is halved in one
    pass over ``d``, and each count refines all eigenvalues it separates.
    Requires ``count(lo) == 0`` and ``count(hi) == n``.
    """
    out = np.full(j1 - j0, np.nan)
    cap = 2 * (j1 - j0) + 2
    A = np.empty(cap)
    B = np.empty(cap)
    CA = np.empty(cap, dtype=np.int64)
    CB = np.empty(cap, dtype=np.int64)
    A[0] = lo
    B[0] = hi
    CA[0] = 0
    CB[0] = d.shape[0]
    live = 1
    nA = np.empty(cap)
    nB = np.empty(cap)
    nCA = np.empty(cap, dtype=np.int64)
    nCB = np.empty(cap, dtype=np.int64)
    mids = np.empty(cap)
    while live > 0:
        # retire converged intervals, collect midpoints of the rest
        m = 0
        for t in range(live):
            a = A[t]
            b = B[t]
            mid = 0.5 * (a + b)
            if b - a <= tol or mid <= a or mid >= b:
                for j in range(max(CA[t], j0), min(CB[t], j1)):
                    out[j - j0] = mid
                continue
            A[m] = a
            B[m] = b
            CA[m] = CA[t]
            CB[m] = CB[t]
            mids[m] = mid
            m += 1
        if m == 0:
            break
        cm = counts_multi(d, mids[:m], periodic)
        nl = 0
        for t in range(m):
            c = cm[t]
            # keep halves that hold wanted eigenvalues
            if c > CA[t] and c > j0 and CA[t] < j1:
                nA[nl] = A[t]
                nB[nl] = mids[t]
                nCA[nl] = CA[t]
                nCB[nl] = c
                nl += 1
            if CB[t] > c and CB[t] > j0 and c < j1:
                nA[nl] = mids[t]
                nB[nl] = B[t]
                nCA[nl] = c
                nCB[nl] = CB[t]
                nl += 1
        for t in range(nl):
            A[t] = nA[t]
            B[t] = nB[t]
            CA[t] = nCA[t]
            CB[t] = nCB[t]
        live = nl
    return out


@njit(cache=True, nogil=True)
def bisect_batch(D, periodic, lo, hi, tol):
    B, n = D.shape
    out = np.empty((B, n))
    for b in range(B):
        out[b] = bisect_eigs(D[b], periodic, 0, n, lo[b], hi[b], tol)
    return out


@njit(cache=True, nogil=True)
def det_sequence(d, E):
    """``P_k = det(H_k - E)`` for k = 0..n as normalised mantissas in [1,2) and exponents."""
    n = d.shape[0]
    mant = np.zeros(n + 1)
    expo = np.zeros(n + 1, dtype=np.int64)
    prev = 0.0  # P_{-1}
    cur = 1.0   # P_0
    run = 0
    mant[0] = 1.0
    for k in range(1, n + 1):
        nxt = (d[k - 1] - E) * cur - prev
        prev = cur
        cur = nxt
        # renormalise the pair every step
        big = max(abs(cur), abs(prev))
        if big != 0.0:
            f, s = math.frexp(big)
            sc = math.ldexp(1.0, -s)
            cur *= sc
            prev *= sc
            run += s
        if cur == 0.0:
            mant[k] = 0.0
            expo[k] = 0
        else:
            f, s = math.frexp(cur)
            mant[k] = 2.0 * f
            expo[k] = run + s - 1
    return mant, expo


@njit(cache=True, nogil=True)
def log_abs_det(d, E, lo, hi):
    """``ln|det(H[lo:hi] - E)|`` and its sign via the scaled three-term recursion."""
    prev = 0.0
    cur = 1.0
    run = 0
    for k in range(lo, hi):
        nxt = (d[k] - E) * cur - prev
        prev = cur
        cur = nxt
        big = max(abs(cur), abs(prev))
        if big != 0.0:
            f, s = math.frexp(big)
            sc = math.ldexp(1.0, -s)
            cur *= sc
            prev *= sc
            run += s
    if cur == 0.0:
        return -np.inf, 0.0
    return math.log(abs(cur)) + run * LN2, (1.0 if cur > 0 else -1.0)


@njit(cache=True, nogil=True)
def log_abs_det_rows(D, E):
    B = D.shape[0]
    out = np.empty(B)
    sg = np.empty(B)
    for b in range(B):
        out[b], sg[b] = log_abs_det(D[b], E, 0, D.shape[1])
    return out, sg


@njit(cache=True, nogil=True)
def transfer_product(V, E, lo, hi):
    """``prod_{l=hi-1}^{lo} [[E - V_l, -1], [1, 0]]`` as entries and a base-2 exponent."""
    a = 1.0
    b = 0.0
    c = 0.0
    dd = 1.0
    run = 0
    for l in range(lo, hi):
        t = E - V[l]
        na = t * a - c
        nb = t * b - dd
        c = a
        dd = b
        a = na
        b = nb
        big = max(max(abs(a), abs(b)), max(abs(c), abs(dd)))
        # power-of-two scaling is exact, so rescaling lazily gives the same
        # mantissas as rescaling every step
        if big > 1e30 or big < 1e-30:
            f, s = math.frexp(big)
            s -= 1
            sc = math.ldexp(1.0, -s)
            a *= sc
            b *= sc
            c *= sc
            dd *= sc
            run += s
    big = max(max(abs(a), abs(b)), max(abs(c), abs(dd)))
    f, s = math.frexp(big)
    s -= 1
    sc = math.ldexp(1.0, -s)
    return a * sc, b * sc, c * sc, dd * sc, run + s


@njit(cache=True, nogil=True)
def product_log_det(V, E, lo, hi):
    """``ln|det|`` and sign of the same product from a running Givens QR.

    Normalised entries cannot resolve ``det = 1`` once the product is
    hyperbolic (the cancellation is of size ``e^{2 n gamma} eps``), while
    the triangular factors carry it with relative error ``O(n eps)``.
    """
    q00 = 1.0
    q01 = 0.0
    q10 = 0.0
    q11 = 1.0
    acc = 0.0
    sgn = 1.0
    for l in range(lo, hi):
        t = E - V[l]
        b00 = t * q00 - q10
        b01 = t * q01 - q11
        b10 = q00
        b11 = q01
        r = math.hypot(b00, b10)
        c = b00 / r
        s = b10 / r
        r22 = -s * b01 + c * b11
        acc += math.log(r) + math.log(abs(r22))
        if r22 < 0.0:
            sgn = -sgn
        q00 = c
        q10 = s
        q01 = -s
        q11 = c
    # det of the final rotation is +1
    return acc, sgn


@njit(cache=True, nogil=True)
def log_spectral_norm(a, b, c, d, run):
    """``ln ||M||_2`` for ``M = 2**run * [[a, b], [c, d]]``."""
    fro = a * a + b * b + c * c + d * d
    det = a * d - b * c
    disc = fro * fro - 4.0 * det * det
    if disc < 0.0:
        disc = 0.0
    s2 = 0.5 * (fro + math.sqrt(disc))
    return 0.5 * math.log(s2) + run * LN2


@njit(cache=True, nogil=True)
def windowed_log_norms(V, E, n, S):
    """``ln ||M_n||`` over S consecutive windows of length n along one orbit."""
    out = np.empty(S)
    for s in range(S):
        a, b, c, d, run = transfer_product(V, E, s * n, (s + 1) * n)
        out[s] = log_spectral_norm(a, b, c, d, run)
    return out


@njit(cache=True, nogil=True)
def row_log_norms(D, E):
    B, n = D.shape
    out = np.empty(B)
    for r in range(B):
        a, b, c, d, run = transfer_product(D[r], E, 0, n)
        out[r] = log_spectral_norm(a, b, c, d, run)
    return out


@njit(cache=True, nogil=True)
def shoot_log_profile(d, E, n0):
    """``ln|psi|`` and sign of the Dirichlet solution glued at site n0.

    Sites ``k <= n0`` come from the forward recursion started at the left
    edge, sites ``k >= n0`` from the backward recursion started at the right
    edge; both are normalised to ``psi(n0) = 1``.  Each half is run in its
    growing direction, so tiny tail values keep full relative accuracy.
    """
    n = d.shape[0]
    la = np.empty(n)
    sg = np.empty(n)
    prev = 0.0
    cur = 1.0
    run = 0
    for k in range(0, n0 + 1):
        if cur == 0.0:
            la[k] = -np.inf
            sg[k] = 0.0
        else:
            la[k] = math.log(abs(cur)) + run * LN2
            sg[k] = 1.0 if cur > 0 else -1.0
        nxt = (E - d[k]) * cur - prev
        prev = cur
        cur = nxt
        big = max(abs(cur), abs(prev))
        if big != 0.0:
            f, s = math.frexp(big)
            sc = math.ldexp(1.0, -s)
            cur *= sc
            prev *= sc
            run += s
    ref_l, ref_s = la[n0], sg[n0]
    for k in range(0, n0 + 1):
        la[k] -= ref_l
        sg[k] *= ref_s
    prev = 0.0
    cur = 1.0
    run = 0
    right_l = np.empty(n - n0)
    right_s = np.empty(n - n0)
    for k in range(n - 1, n0 - 1, -1):
        if cur == 0.0:
            right_l[k - n0] = -np.inf
            right_s[k - n0] = 0.0
        else:
            right_l[k - n0] = math.log(abs(cur)) + run * LN2
            right_s[k - n0] = 1.0 if cur > 0 else -1.0
        nxt = (E - d[k]) * cur - prev
        prev = cur
        cur = nxt
        big = max(abs(cur), abs(prev))
        if big != 0.0:
            f, s = math.frexp(big)
            sc = math.ldexp(1.0, -s)
            cur *= sc
            prev *= sc
            run += s
    for k in range(n0 + 1, n):
        la[k] = right_l[k - n0] - right_l[0]
        sg[k] = right_s[k - n0] * right_s[0]
    return la, sg


@njit(cache=True, nogil=True)
def regular_scan(d, E, q, mu, r, m_lo, m_hi):
    """First witness ``n1`` of (mu, q)-regularity for each site in ``[m_lo, m_hi)``, or -1.

    A window ``[n1, n1+q-1]`` containing m with ``|m - n_i| >= r`` is a
    witness when both edge Green's elements are below ``e^{-mu |m - n_i|}``.
    Windows must lie inside ``d``.
    """
    n = d.shape[0]
    out = np.full(m_hi - m_lo, -1, dtype=np.int64)
    for m in range(m_lo, m_hi):
        for n1 in range(m - q + 1 + r, m - r + 1):
            n2 = n1 + q - 1
            if n1 < 0 or n2 >= n:
                continue
            lw, sw = log_abs_det(d, E, n1, n2 + 1)
            if sw == 0.0:
                continue
            l1, _ = log_abs_det(d, E, m + 1, n2 + 1)   # G(m, n1) numerator
            if l1 - lw >= -mu * (m - n1):
                continue
            l2, _ = log_abs_det(d, E, n1, m)           # G(m, n2) numerator
            if l2 - lw < -mu * (n2 - m):
                out[m - m_lo] = n1
                break
    return out
