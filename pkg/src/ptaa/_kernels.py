"""Hot numeric loops.

Everything here is written in the numba-compatible subset and wrapped by
``_accel.jit``; with numba disabled the same source runs as plain Python.
The characteristic-polynomial batch evaluator additionally has a
vectorized numpy path used when numba is off.

Tridiagonal matrices are passed as ``(d, e)``: ``d`` the complex diagonal of
length n, ``e`` the complex off-diagonal of length n - 1 (sub == super).
"""
import cmath
import math

import numpy as np

from ._accel import USE_NUMBA, jit

EPS = 2.220446049250313e-16

# Status codes returned by the eigenvalue kernels.
OK = 0
OK_FALLBACK = 1  # complex-orthogonal QR broke down, unitary QR succeeded
FAILED = 2

# A complex-orthogonal rotation with |c| + |s| above this is rejected.
_ROTATION_GUARD = 1.0e2
# Rotations larger than this amplify rounding enough to warrant a polish.
_POLISH_TRIGGER = 10.0


@jit
def _eig2(a, b, f):
    """Eigenvalues of the symmetric 2x2 block [[a, f], [f, b]]."""
    mean = 0.5 * (a + b)
    half = 0.5 * (a - b)
    root = cmath.sqrt(half * half + f * f)
    return mean - root, mean + root


@jit
def _small(e, da, db, floor):
    ae = abs(e)
    return ae <= EPS * (abs(da) + abs(db)) or ae <= floor


@jit
def _wilkinson(a, b, f):
    """Eigenvalue of [[a, f], [f, b]] closer to b."""
    delta = 0.5 * (a - b)
    root = cmath.sqrt(delta * delta + f * f)
    den1 = delta + root
    den2 = delta - root
    den = den1 if abs(den1) >= abs(den2) else den2
    if den == 0:
        return b
    return b - f * f / den


@jit
def _csym_step(d, e, lo, hi, mu, growth):
    """One implicit shifted QR sweep with complex-orthogonal rotations.

    Returns 0 on success, 1 when the first rotation is near-isotropic (matrix
    untouched), 2 when a later one is (a bulge is left behind and the caller
    must abandon the iterate).
    """
    x = d[lo] - mu
    z = e[lo]
    for k in range(lo, hi):
        r = cmath.sqrt(x * x + z * z)
        size = abs(x) + abs(z)
        if size == 0.0:
            # nothing to annihilate; only possible mid-chase on exact zeros
            c = 1.0 + 0.0j
            s = 0.0 + 0.0j
            r = 0.0 + 0.0j
        else:
            if abs(r) * _ROTATION_GUARD < size:
                return 1 if k == lo else 2
            c = x / r
            s = -z / r
            size = abs(c) + abs(s)
            if size > growth[0]:
                growth[0] = size
        if k > lo:
            e[k - 1] = r
        a = d[k]
        b = d[k + 1]
        f = e[k]
        cc = c * c
        ss = s * s
        cs = c * s
        d[k] = a * cc - 2.0 * cs * f + b * ss
        d[k + 1] = a * ss + 2.0 * cs * f + b * cc
        e[k] = cs * (a - b) + f * (cc - ss)
        if k < hi - 1:
            g = e[k + 1]
            z = -s * g
            e[k + 1] = c * g
            x = e[k]
    return 0


@jit
def csym_tridiag_eigvals(d_in, e_in, sweep_factor, growth):
    """Eigenvalues of a complex symmetric tridiagonal matrix.

    Shifted QR with complex-orthogonal rotations keeps the iterate complex
    symmetric and tridiagonal, so a sweep costs O(n). Returns
    ``(w, status, lo, hi)``; on ``FAILED`` (lo, hi) is the unconverged
    block. ``growth[0]`` receives the largest |c| + |s| used.
    """
    n = d_in.shape[0]
    d = d_in.copy()
    growth[0] = 1.0
    e = np.zeros(max(n, 1), dtype=np.complex128)
    for i in range(n - 1):
        e[i] = e_in[i]
    anorm = 0.0
    for i in range(n):
        anorm = max(anorm, abs(d[i]))
    emax = 0.0
    for i in range(n - 1):
        emax = max(emax, abs(e[i]))
    anorm += 2.0 * emax
    floor = EPS * anorm * 0.5
    cap = sweep_factor * n
    sweeps = 0
    stalled = 0
    hi = n - 1
    while hi > 0:
        if _small(e[hi - 1], d[hi - 1], d[hi], floor):
            e[hi - 1] = 0.0
            hi -= 1
            stalled = 0
            continue
        lo = hi - 1
        while lo > 0 and not _small(e[lo - 1], d[lo - 1], d[lo], floor):
            lo -= 1
        if lo > 0:
            e[lo - 1] = 0.0
        if hi - lo == 1:
            l1, l2 = _eig2(d[lo], d[hi], e[lo])
            d[lo] = l1
            d[hi] = l2
            e[lo] = 0.0
            hi -= 2
            stalled = 0
            continue
        if sweeps >= cap:
            return d, FAILED, lo, hi
        sweeps += 1
        stalled += 1
        mu = _wilkinson(d[hi - 1], d[hi], e[hi - 1])
        if stalled % 11 == 10:
            # exceptional shift to break cycles
            mu = d[hi] + abs(e[hi - 1]) * (0.75 + 0.4375j)
        code = _csym_step(d, e, lo, hi, mu, growth)
        if code == 1:
            # retry once with a perturbed shift before giving up
            mu2 = mu + abs(e[hi - 1]) * (0.3125 - 0.6875j) + floor
            code = _csym_step(d, e, lo, hi, mu2, growth)
        if code != 0:
            return d, FAILED, -1, -1
    return d, OK, 0, 0


@jit
def hessenberg_eigvals(a_in, sweep_factor):
    """Eigenvalues of an upper Hessenberg matrix by unitary shifted QR.

    O(n^3) backstop for the rare complex-orthogonal breakdown.
    """
    a = a_in.copy()
    n = a.shape[0]
    w = np.zeros(n, dtype=np.complex128)
    anorm = 0.0
    for i in range(n):
        for j in range(n):
            anorm = max(anorm, abs(a[i, j]))
    floor = EPS * anorm * n
    cs = np.zeros(n, dtype=np.complex128)
    sn = np.zeros(n, dtype=np.complex128)
    cap = sweep_factor * n
    sweeps = 0
    stalled = 0
    hi = n - 1
    while hi >= 0:
        if hi == 0:
            w[0] = a[0, 0]
            break
        lo = hi
        while lo > 0:
            sub = abs(a[lo, lo - 1])
            if sub <= EPS * (abs(a[lo - 1, lo - 1]) + abs(a[lo, lo])) or sub <= floor:
                a[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            w[hi] = a[hi, hi]
            hi -= 1
            stalled = 0
            continue
        if lo == hi - 1:
            p = a[hi - 1, hi - 1]
            q = a[hi, hi]
            mean = 0.5 * (p + q)
            half = 0.5 * (p - q)
            root = cmath.sqrt(half * half + a[hi - 1, hi] * a[hi, hi - 1])
            w[hi - 1] = mean - root
            w[hi] = mean + root
            hi -= 2
            stalled = 0
            continue
        if sweeps >= cap:
            return w, FAILED, lo, hi
        sweeps += 1
        stalled += 1
        p = a[hi - 1, hi - 1]
        q = a[hi, hi]
        mean = 0.5 * (p + q)
        half = 0.5 * (p - q)
        root = cmath.sqrt(half * half + a[hi - 1, hi] * a[hi, hi - 1])
        m1 = mean - root
        m2 = mean + root
        mu = m1 if abs(m1 - q) <= abs(m2 - q) else m2
        if stalled % 11 == 10:
            mu = q + abs(a[hi, hi - 1]) * (0.75 + 0.4375j)
        for i in range(lo, hi + 1):
            a[i, i] -= mu
        for k in range(lo, hi):
            x = a[k, k]
            y = a[k + 1, k]
            r = math.sqrt(abs(x) ** 2 + abs(y) ** 2)
            if r == 0.0:
                c = 1.0 + 0.0j
                s = 0.0 + 0.0j
            else:
                c = x / r
                s = y / r
            cs[k] = c
            sn[k] = s
            for j in range(k, hi + 1):
                t1 = a[k, j]
                t2 = a[k + 1, j]
                a[k, j] = c.conjugate() * t1 + s.conjugate() * t2
                a[k + 1, j] = -s * t1 + c * t2
        for k in range(lo, hi):
            c = cs[k]
            s = sn[k]
            top = min(k + 2, hi)
            for i in range(lo, top + 1):
                t1 = a[i, k]
                t2 = a[i, k + 1]
                a[i, k] = c * t1 + s * t2
                a[i, k + 1] = -s.conjugate() * t1 + c.conjugate() * t2
        for i in range(lo, hi + 1):
            a[i, i] += mu
    return w, OK, 0, 0


@jit
def polish(d, e, w):
    """Newton-correct isolated eigenvalues on the characteristic polynomial.

    Only rounding-level corrections are taken: a step must be below a tenth
    of the distance to the nearest other eigenvalue, below 1e-6 of the
    matrix scale, and must reduce |p|. Clustered roots (exceptional points)
    are left alone. The whole polish is undone if it badly worsens the
    trace identity.
    """
    n = w.shape[0]
    scale = 0.0
    trace = 0.0 + 0.0j
    for i in range(n):
        scale = max(scale, abs(d[i]))
        trace += d[i]
    for i in range(n - 1):
        scale = max(scale, abs(d[i]) + 2.0 * abs(e[i]))
    cap = 1e-6 * scale
    before = w.copy()
    for i in range(n):
        gap = np.inf
        for j in range(n):
            if j != i:
                gap = min(gap, abs(w[i] - w[j]))
        p, dp, x2, bad = charpoly_scaled(d, e, w[i])
        for _ in range(3):
            if bad != 0 or dp == 0:
                break
            step = p / dp
            if not (abs(step) < 0.1 * gap and abs(step) < cap):
                break
            z = w[i] - step
            p2, dp2, y2, bad2 = charpoly_scaled(d, e, z)
            if bad2 != 0 or not math.ldexp(abs(p2), y2 - x2) < abs(p):
                break
            w[i] = z
            p, dp, x2, bad = p2, dp2, y2, bad2
            if abs(step) <= 4.0 * EPS * abs(w[i]):
                break
    if abs(w.sum() - trace) > 10.0 * abs(before.sum() - trace) + 1e3 * EPS * n * scale:
        w[:] = before


@jit
def tridiag_eigvals(d, e, sweep_factor, polish_above=_POLISH_TRIGGER):
    """Complex-orthogonal QR, falling back to unitary Hessenberg QR.

    The result is Newton-polished when the largest rotation |c| + |s|
    exceeded ``polish_above``.
    """
    growth = np.ones(1)
    w, status, lo, hi = csym_tridiag_eigvals(d, e, sweep_factor, growth)
    if status == OK:
        if growth[0] > polish_above:
            polish(d, e, w)
        return w, status, lo, hi
    n = d.shape[0]
    a = np.zeros((n, n), dtype=np.complex128)
    for i in range(n):
        a[i, i] = d[i]
    for i in range(n - 1):
        a[i, i + 1] = e[i]
        a[i + 1, i] = e[i]
    w2, status2, lo2, hi2 = hessenberg_eigvals(a, sweep_factor)
    if status2 == OK:
        return w2, OK_FALLBACK, 0, 0
    return w2, FAILED, lo2, hi2


@jit
def charpoly_scaled(d, e, z):
    """det(z I - T) and its derivative by the three-term recurrence.

    Returns ``(p, dp, exp2, bad_site)`` with the true values equal to
    ``p * 2**exp2`` and ``dp * 2**exp2``. ``bad_site`` is the 1-based site at
    which values became non-finite, or 0.
    """
    n = d.shape[0]
    p_prev = 1.0 + 0.0j
    dp_prev = 0.0 + 0.0j
    p = z - d[0]
    dp = 1.0 + 0.0j
    exp2 = 0
    big = 2.0 ** 200
    for k in range(1, n):
        e2 = e[k - 1] * e[k - 1]
        zk = z - d[k]
        p_new = zk * p - e2 * p_prev
        dp_new = p + zk * dp - e2 * dp_prev
        p_prev = p
        dp_prev = dp
        p = p_new
        dp = dp_new
        m = max(abs(p), abs(p_prev), abs(dp), abs(dp_prev))
        if not math.isfinite(m):
            return p, dp, exp2, k + 1
        if m > big:
            p *= 2.0 ** -200
            dp *= 2.0 ** -200
            p_prev *= 2.0 ** -200
            dp_prev *= 2.0 ** -200
            exp2 += 200
        elif m < 1.0 / big and m > 0.0:
            p *= big
            dp *= big
            p_prev *= big
            dp_prev *= big
            exp2 -= 200
    if not (math.isfinite(abs(p)) and math.isfinite(abs(dp))):
        return p, dp, exp2, n
    return p, dp, exp2, 0


@jit
def _newton_ratios_loop(d, e, zs):
    out = np.empty(zs.shape[0], dtype=np.complex128)
    for i in range(zs.shape[0]):
        p, dp, _, bad = charpoly_scaled(d, e, zs[i])
        if bad != 0:
            out[i] = np.nan
        elif dp == 0:
            out[i] = np.inf if p != 0 else 0.0
        else:
            out[i] = p / dp
    return out


def _newton_ratios_numpy(d, e, zs):
    """Vectorized over the evaluation points; rescales every 32 sites."""
    zs = np.asarray(zs, dtype=np.complex128)
    d = np.asarray(d, dtype=np.complex128)
    e = np.asarray(e, dtype=np.complex128)
    n = d.shape[0]
    p_prev = np.ones_like(zs)
    dp_prev = np.zeros_like(zs)
    p = zs - d[0]
    dp = np.ones_like(zs)
    with np.errstate(all="ignore"):
        for k in range(1, n):
            e2 = e[k - 1] * e[k - 1]
            zk = zs - d[k]
            p_new = zk * p - e2 * p_prev
            dp_new = p + zk * dp - e2 * dp_prev
            p_prev, dp_prev, p, dp = p, dp, p_new, dp_new
            if k % 32 == 0:
                m = np.maximum.reduce([abs(p), abs(p_prev), abs(dp), abs(dp_prev)])
                m = np.where(m > 0, m, 1.0)
                p, dp, p_prev, dp_prev = p / m, dp / m, p_prev / m, dp_prev / m
        ratio = np.where(dp == 0, np.where(p == 0, 0.0, np.inf), p / np.where(dp == 0, 1, dp))
    return ratio


def newton_ratios(d, e, zs):
    """p(z)/p'(z) for each z: the Newton correction at each point."""
    zs = np.ascontiguousarray(zs, dtype=np.complex128)
    if USE_NUMBA:
        return _newton_ratios_loop(d, e, zs)
    return _newton_ratios_numpy(d, e, zs)


@jit
def _assemble(re, s_fix, g_fix, s_var, g_var):
    n = re.shape[0]
    d = np.empty(n, dtype=np.complex128)
    for i in range(n):
        d[i] = complex(re[i], g_fix * s_fix[i] + g_var * s_var[i])
    return d


@jit
def line_max_imag(re, s_fix, g_fix, s_var, unit, ts, hop, sweep_factor):
    """Largest |Im E| along a line of Hamiltonians.

    Diagonal at parameter t is ``re + i (g_fix s_fix + (t unit) s_var)``,
    off-diagonal ``-hop``. Returns ``(max_imag, status)``; status is the
    worst solver status seen.
    """
    n = re.shape[0]
    e = np.empty(max(n - 1, 0), dtype=np.complex128)
    for i in range(n - 1):
        e[i] = -hop
    out = np.empty(ts.shape[0])
    worst = OK
    for j in range(ts.shape[0]):
        d = _assemble(re, s_fix, g_fix, s_var, ts[j] * unit)
        w, status, _, _ = tridiag_eigvals(d, e, sweep_factor)
        worst = max(worst, status)
        if status == FAILED:
            out[j] = np.nan
            continue
        m = 0.0
        for i in range(n):
            m = max(m, abs(w[i].imag))
        out[j] = m
    return out, worst


@jit
def _is_broken(re, s_fix, g_fix, s_var, unit, t, hop, tol, scale0, sweep_factor, e):
    # scale = scale0 + (g_fix + t unit): symmetric in the two gammas bit for bit
    d = _assemble(re, s_fix, g_fix, s_var, t * unit)
    w, status, _, _ = tridiag_eigvals(d, e, sweep_factor)
    if status == FAILED:
        return False, status
    m = 0.0
    for i in range(d.shape[0]):
        m = max(m, abs(w[i].imag))
    return m > tol * (scale0 + (g_fix + t * unit)), status


@jit
def line_bisect(re, s_fix, g_fix, s_var, unit, lo, hi, width, hop, tol, scale0, sweep_factor):
    """Bisect a label change on [lo, hi] down to ``width``.

    The label at ``lo`` is taken as reference; the returned bracket keeps
    that label at its left end and the other at its right end. The reality
    scale is ``scale0 + (g_fix + t unit)``.
    """
    n = re.shape[0]
    e = np.empty(max(n - 1, 0), dtype=np.complex128)
    for i in range(n - 1):
        e[i] = -hop
    left, worst = _is_broken(re, s_fix, g_fix, s_var, unit, lo, hop, tol, scale0, sweep_factor, e)
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        lab, status = _is_broken(re, s_fix, g_fix, s_var, unit, mid, hop, tol, scale0, sweep_factor, e)
        worst = max(worst, status)
        if lab == left:
            lo = mid
        else:
            hi = mid
    return lo, hi, worst


@jit
def threshold_search(re, s, gammas, hop, tol, scale0, width, sweep_factor):
    """Presample ``gammas`` for the first broken point, then bisect.

    Returns ``(lo, hi, found, status)``. ``found`` is False when the whole
    presample grid is symmetric.
    """
    n = re.shape[0]
    zeros = np.zeros(n)
    e = np.empty(max(n - 1, 0), dtype=np.complex128)
    for i in range(n - 1):
        e[i] = -hop
    worst = OK
    prev = 0.0
    for j in range(gammas.shape[0]):
        g = gammas[j]
        lab, status = _is_broken(re, zeros, 0.0, s, 1.0, g, hop, tol, scale0, sweep_factor, e)
        worst = max(worst, status)
        if status == FAILED:
            return prev, g, False, status
        if lab:
            lo = prev
            hi = g
            while hi - lo > width:
                mid = 0.5 * (lo + hi)
                lab2, status = _is_broken(re, zeros, 0.0, s, 1.0, mid, hop, tol, scale0, sweep_factor, e)
                worst = max(worst, status)
                if lab2:
                    hi = mid
                else:
                    lo = mid
            return lo, hi, True, worst
        prev = g
    return prev, prev, False, worst
