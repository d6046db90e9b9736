#!/usr/bin/env python3
"""High-precision reference values for the test fixtures.

Run:  python3 tools/pin_fixtures.py
Requires mpmath. Output is pasted (by hand) into the pinned constants of the
test suites under crates/core. Every pinned constant in the tests records
this script as its generating command.
"""
from mpmath import (mp, mpf, exp, log, power, e, pi, factorial, gamma,
                    loggamma, digamma, findroot, floor)

mp.dps = 40


def env_series(tau, p, alpha, c=None):
    """Log-periodic envelope of the p-adic kernel: t^{1/a} p(t) at t = p^tau."""
    p = mpf(p)
    alpha = mpf(alpha)
    c = p if c is None else mpf(c)
    lpc = log(c) / log(p)
    s = mpf(0)
    for k in range(-300, 301):
        w = tau - alpha * k + alpha * lpc
        pw = power(p, w)
        if pw > 10**5:
            continue
        s += exp(-pw) * power(p, w / alpha)
    return (p - 1) / c * s


def env_extrema(p, alpha, grid=4096):
    """min/max of the envelope over one period, golden-refined."""
    a = mpf(alpha)
    taus = [a * i / grid for i in range(grid)]
    vals = [env_series(t, p, alpha) for t in taus]
    lo_i = min(range(grid), key=lambda i: vals[i])
    hi_i = max(range(grid), key=lambda i: vals[i])

    def refine(i, sign):
        lo, hi = taus[(i - 1) % grid], taus[(i + 1) % grid]
        if (i - 1) % grid > (i + 1) % grid:
            lo, hi = taus[i] - a / grid, taus[i] + a / grid
        gr = (mpf(5) ** mpf('0.5') - 1) / 2
        aa, bb = lo, hi
        c1 = bb - gr * (bb - aa)
        c2 = aa + gr * (bb - aa)
        f1 = sign * env_series(c1, p, alpha)
        f2 = sign * env_series(c2, p, alpha)
        for _ in range(200):
            if f1 < f2:
                bb, c2, f2 = c2, c1, f1
                c1 = bb - gr * (bb - aa)
                f1 = sign * env_series(c1, p, alpha)
            else:
                aa, c1, f1 = c1, c2, f2
                c2 = aa + gr * (bb - aa)
                f2 = sign * env_series(c2, p, alpha)
            if bb - aa < mpf('1e-25'):
                break
        tm = (aa + bb) / 2
        return tm, env_series(tm, p, alpha)

    tmin, vmin = refine(lo_i, 1)
    tmax, vmax = refine(hi_i, -1)
    return tmin % a, vmin, tmax % a, vmax


print("== dyadic p-adic kernel, direct series p(t) = sum_k exp(-t 2^{1-k}) 2^{-k} ==")
for t in (mpf(1), mpf(10), mpf('0.037')):
    s = sum(exp(-t * power(2, 1 - k)) * power(2, -k) for k in range(-400, 401))
    print(f"  p2a1 t={float(t):g}  ->  {mp.nstr(s, 22)}")

print("\n== envelope extrema (c = p) ==")
for (p, alpha) in [(2, 1), (3, mpf('1.5')), (11, 1), (101, 1), (1009, 1),
                   (10007, 1), (1009, 2), (1009, mpf('0.5'))]:
    tmin, vmin, tmax, vmax = env_extrema(p, alpha)
    ratio = vmax / vmin
    lp = log(p)
    print(f"  p={p} alpha={float(alpha):g}")
    print(f"    argmin={mp.nstr(tmin, 18)} min={mp.nstr(vmin, 18)}")
    print(f"    argmax={mp.nstr(tmax, 18)} max={mp.nstr(vmax, 18)}")
    print(f"    max/min={mp.nstr(ratio, 18)}")
    print(f"    min*p/(ln p)^(1/a)={mp.nstr(vmin * p / power(lp, 1/mpf(alpha)), 12)}"
          f"  max/(e a)^(-1/a)={mp.nstr(vmax / power(e * alpha, -1/mpf(alpha)), 12)}")

print("\n== S_infty, alpha=1, phi=1: lambda_k = 1/(k+1)! ==")
alpha = mpf(1)

def p_sinf(t):
    s = mpf(0)
    for k in range(1, 500):
        lam = 1 / factorial(k + 1)
        term = exp(-t * lam) * (1 / factorial(k) - 1 / factorial(k + 1))
        s += term
    return s

def rho(t):
    return log(t) / (alpha * log(log(t)))

def Psi(t):
    return power(t, -1) * rho(t) / (e * alpha)

def psi_lo(t):
    return power(t, -1) * log(rho(t))

def t0_member(k):
    # closed form for r-bar(t) = k:  t = (1 - 1/(k*digamma(1+k))) * Gamma(1+k)^alpha / alpha
    return (1 - 1 / (k * digamma(1 + k))) * power(gamma(1 + k), alpha) / alpha

def t1_member(k):
    return (log(k) + log(log(k)) + log(alpha)) * power(factorial(k), alpha)

for k in range(10, 18):
    t0 = t0_member(k)
    r = p_sinf(t0) / Psi(t0)
    print(f"  T0 k={k}: t={mp.nstr(t0, 12)}  p/Psi={mp.nstr(r, 12)}")
for k in range(10, 18):
    t1 = t1_member(k)
    r = p_sinf(t1) / psi_lo(t1)
    print(f"  T1 k={k}: t={mp.nstr(t1, 12)}  p/psi={mp.nstr(r, 12)}")

print("\n  grid scan t in [1e6, 1e14], 200 geometric points:")
import math
mx, mn = mpf(0), mpf('1e9')
for i in range(200):
    t = power(10, 6 + 8 * mpf(i) / 199)
    v = p_sinf(t)
    mx = max(mx, v / Psi(t))
    mn = min(mn, v / psi_lo(t))
print(f"  running max p/Psi = {mp.nstr(mx, 12)}  running min p/psi = {mp.nstr(mn, 12)}")

def rbar(t):
    # root of t/Gamma(1+r) = 1 - 1/(r*digamma(1+r))   (alpha=1, phi=1)
    f = lambda r: t / gamma(1 + r) - (1 - 1 / (r * digamma(1 + r)))
    return findroot(f, log(t) / log(log(t)) * mpf('1.8'))

for t in (mpf('1e6'), mpf('1e10'), mpf('1e14')):
    rb = rbar(t)
    kb = int(floor(rb))
    two = exp(-(t / factorial(kb) - log(kb) + loggamma(kb + 1))) \
        + exp(-(t / factorial(kb + 1) - log(kb + 1) + loggamma(kb + 2)))
    full = p_sinf(t)
    print(f"  t={float(t):g}: rbar={mp.nstr(rb, 12)} kbar={kb} "
          f"two-term ratio full/two = {mp.nstr(full / two, 12)}")

print("\n  legendre at t=1e12: M*(t) = min_k [t*lam_k + ln V(k-1)]")
t = mpf('1e12')
mstar = min(t / factorial(k + 1) + log(factorial(k)) for k in range(1, 60))
print(f"  M* = {mp.nstr(mstar, 15)}   log(1/p) = {mp.nstr(-log(p_sinf(t)), 15)} "
      f"ratio = {mp.nstr(-log(p_sinf(t)) / mstar, 12)}")

print("\n  order estimate (LSQ slope, 30 pts in [1e6,1e14]):")
xs, ys = [], []
for i in range(30):
    t = power(10, 6 + 8 * mpf(i) / 29)
    xs.append(log(t)); ys.append(-log(p_sinf(t)))
n = len(xs)
sx = sum(xs); sy = sum(ys)
sxx = sum(x * x for x in xs); sxy = sum(x * y for x, y in zip(xs, ys))
slope = (n * sxy - sx * sy) / (n * sxx - sx * sx)
print(f"  slope = {mp.nstr(slope, 12)}")

print("\n== Z(2)^infty walk, example weights alpha=1 (lambda_k = 2^(1-k)) ==")
for n in range(0, 9):
    v = sum(exp(-n * power(2, 1 - k)) * power(2, -k) for k in range(1, 400))
    print(f"  exact_return({n}) = {mp.nstr(v, 20)}")

print("\n== lgamma / digamma fixtures ==")
for x in ['1.0', '1.5', '2.0', '3.25', '6.5', '10.0', '13.0', '17.75',
          '25.0', '50.5', '100.0', '171.5', '300.25']:
    xx = mpf(x)
    print(f"  x={x}: lgamma={mp.nstr(loggamma(xx), 22)} digamma={mp.nstr(digamma(xx), 22)}")
