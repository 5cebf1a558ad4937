"""Pure-Python kernels; the reference semantics for ``_kernels.pyx``.

Both implementations consume the same pre-drawn uniforms and perform the
same floating-point operations in the same order, so they return identical
results. Keep them in lockstep.
"""

import math

# 21-point Gauss-Kronrod rule on [-1, 1]; the 10-point Gauss nodes are the
# odd-indexed Kronrod nodes. Values from QUADPACK qk21.
XGK = (
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
)
WGK = (
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077600525452710,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
)
WG = (
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
)


def _pi_integrand(w, ks, exps, k_star, gamma):
    wg = math.pow(w, gamma)
    val = gamma / k_star * math.pow(w, gamma - 1)
    for i in range(len(ks)):
        val *= math.pow((k_star - ks[i] + ks[i] * wg) / k_star, exps[i])
    return val


def _gk21(a, b, ks, exps, k_star, gamma):
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    fc = _pi_integrand(center, ks, exps, k_star, gamma)
    resk = WGK[10] * fc
    resg = 0.0
    for j in range(10):
        dx = half * XGK[j]
        f1 = _pi_integrand(center - dx, ks, exps, k_star, gamma)
        f2 = _pi_integrand(center + dx, ks, exps, k_star, gamma)
        resk += WGK[j] * (f1 + f2)
        if j % 2 == 1:
            resg += WG[j // 2] * (f1 + f2)
    return resk * half, abs((resk - resg) * half)


def pi_integral(ks, exps, k_star, gamma, rtol, max_intervals):
    """Adaptive Gauss-Kronrod integral of the substituted Pi over w in [0, 1].

    Returns ``(value, abserr, n_intervals, converged)``.
    """
    lo = [0.0]
    hi = [1.0]
    val, err = _gk21(0.0, 1.0, ks, exps, k_star, gamma)
    vals = [val]
    errs = [err]
    while True:
        total = 0.0
        total_err = 0.0
        worst = 0
        for i in range(len(vals)):
            total += vals[i]
            total_err += errs[i]
            if errs[i] > errs[worst]:
                worst = i
        if total_err <= rtol * abs(total) + 1e-300:
            return total, total_err, len(vals), True
        if len(vals) >= max_intervals:
            return total, total_err, len(vals), False
        a = lo[worst]
        b = hi[worst]
        mid = 0.5 * (a + b)
        v1, e1 = _gk21(a, mid, ks, exps, k_star, gamma)
        v2, e2 = _gk21(mid, b, ks, exps, k_star, gamma)
        hi[worst] = mid
        vals[worst] = v1
        errs[worst] = e1
        lo.append(mid)
        hi.append(b)
        vals.append(v2)
        errs.append(e2)


def _urn_steps(counts, colors, q, c_star, nuhat_cdf, uniforms, steps, n0, logphi, out_xi, out_logphi):
    # counts, colors, nuhat_cdf, uniforms: plain lists; outputs appended when not None
    ncol = len(colors)
    s_mass = 0
    for i in range(ncol):
        s_mass += colors[i] * counts[i]
    for s in range(steps):
        n = n0 + s
        m = c_star + q * s_mass / (n + 1)
        logphi -= math.log(m)
        if out_logphi is not None:
            out_logphi.append(logphi)
        star_w = c_star * (n + 1)
        x = uniforms[2 * s] * (q * s_mass + star_w)
        j = -1
        if x < star_w:
            u = uniforms[2 * s + 1]
            j = ncol - 1
            for i in range(ncol):
                if u < nuhat_cdf[i]:
                    j = i
                    break
        else:
            x -= star_w
            for i in range(ncol):
                if counts[i] > 0:
                    w = q * colors[i] * counts[i]
                    if x < w:
                        j = i
                        break
                    x -= w
                    j = i
        counts[j] += 1
        s_mass += colors[j]
        if out_xi is not None:
            out_xi.append(colors[j])
    return logphi


def urn_walk(counts, colors, q, c_star, nuhat_cdf, uniforms, n0, logphi0, out_xi, out_logphi):
    """Advance one urn ``len(out_xi)`` steps from step ``n0``.

    ``counts`` (ball counts per color, int64) is updated in place. For each
    step the added color goes to ``out_xi`` and log Phi after the step to
    ``out_logphi``. ``uniforms`` holds two uniforms per step. Returns the
    final log Phi.
    """
    steps = len(out_xi)
    c = [int(x) for x in counts]
    xi, lp = [], []
    logphi = _urn_steps(
        c, [int(k) for k in colors], float(q), float(c_star), [float(x) for x in nuhat_cdf],
        uniforms[: 2 * steps].tolist(), steps, int(n0), float(logphi0), xi, lp,
    )
    counts[:] = c
    out_xi[:] = xi
    out_logphi[:] = lp
    return logphi


def urn_batch(ell_index, colors, q, c_star, nuhat_cdf, uniforms, out_counts, out_logphi):
    """Run independent urns from a single (ell, star) pair.

    ``uniforms`` has shape (paths, 2 * steps). Writes final ball counts and
    the final log Phi for every path.
    """
    paths = uniforms.shape[0]
    steps = uniforms.shape[1] // 2
    colors = [int(k) for k in colors]
    cdf = [float(x) for x in nuhat_cdf]
    q = float(q)
    c_star = float(c_star)
    for p in range(paths):
        counts = [0] * len(colors)
        counts[ell_index] = 1
        out_logphi[p] = _urn_steps(counts, colors, q, c_star, cdf, uniforms[p].tolist(), steps, 0, 0.0, None, None)
        out_counts[p, :] = counts
