#!/usr/bin/env python3
"""Regenerate tests/fixtures/maass_level1.dat.

Level-1 Maass cusp forms by Hejhal's method:

  scan    smallest singular value of the two-height collocation system on an R grid
  refine  polish every local minimum (bounded minimisation, then a root of the
          a(2) mismatch between two heights)
  build   Fourier coefficients to depth N, Petersson-norm harmonic weights,
          dataset file

Needs numpy, scipy and python-flint.  The full pipeline over R in [3.85, 41.6]
takes a few hours on one core; `scan` is the slow part.

    generate_maass_fixture.py scan   --lo 3.85 --hi 41.6 --step 0.01 --out scan.txt
    generate_maass_fixture.py refine --scan scan.txt --out eigen.txt
    generate_maass_fixture.py build  --eigen eigen.txt --depth 1000 --window 0 41.5 --out maass_level1.dat
"""

import argparse
import math
import sys

import flint
import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq, minimize_scalar


# ---------------------------------------------------------------- K-Bessel

def kscaled_exact(R, x):
    """exp(pi R / 2) K_{iR}(x) by arb, raising precision until it is trustworthy."""
    prec = 80
    while True:
        flint.ctx.prec = prec
        v = (flint.acb(x).bessel_k(flint.acb(0, R)) * (flint.arb(R) * flint.arb.pi() / 2).exp()).real
        if float(v.rad()) < 1e-17 * max(abs(float(v.mid())), 1e-30) or prec > 2000:
            flint.ctx.prec = 80
            return float(v.mid())
        prec *= 2


class KScaled:
    """Piecewise Chebyshev interpolant of kscaled_exact(R, .) on [lo, hi]; 0 above hi."""

    def __init__(self, R, lo, hi, width=4.0, deg=40):
        self.lo, self.w = lo, width
        npc = int(math.ceil((hi - lo) / width))
        nodes = np.cos(np.pi * (np.arange(deg) + 0.5) / deg)
        self.C = np.zeros((npc, deg))
        for p in range(npc):
            xs = lo + p * width + (nodes + 1) * width / 2
            f = np.array([kscaled_exact(R, x) for x in xs])
            self.C[p] = np.polynomial.chebyshev.chebfit(nodes, f, deg - 1)
        self.hi = lo + npc * width

    def __call__(self, x):
        x = np.asarray(x, float)
        if np.any(x < self.lo):
            raise ValueError("KScaled: argument below interpolation range")
        out = np.zeros_like(x)
        m = x < self.hi
        xi = x[m]
        idx = ((xi - self.lo) // self.w).astype(int)
        t = 2 * (xi - self.lo - idx * self.w) / self.w - 1
        C = self.C[idx]
        b1 = np.zeros_like(t)
        b2 = np.zeros_like(t)
        for j in range(C.shape[1] - 1, 0, -1):
            b1, b2 = 2 * t * b1 - b2 + C[:, j], b1
        out[m] = t * b1 - b2 + C[:, 0]
        return out


# ------------------------------------------------------------------ Hejhal

def pullback(x, y):
    x = np.array(x, float)
    y = np.array(y, float)
    for _ in range(200):
        x = x - np.round(x)
        r2 = x * x + y * y
        m = r2 < 1 - 1e-15
        if not m.any():
            break
        x[m], y[m] = -x[m] / r2[m], y[m] / r2[m]
    return x, y


def choose_M0(R, Y, tol=1e-16):
    M = 1
    while True:
        x = 2 * math.pi * M * Y
        if x > R + 5 and abs(kscaled_exact(R, x)) < tol:
            return M
        M += 1


def trig(parity):
    return np.cos if parity == 1 else np.sin


def collocation(R, parity, M0, Y, Q, K):
    """V a = 0 for the coefficient vector a(1..M0) at height Y (Q collocation points)."""
    cs = trig(parity)
    xm = (np.arange(1, Q + 1) - 0.5) / (2 * Q)
    xs, ys = pullback(xm, np.full(Q, Y))
    k = np.arange(1, M0 + 1)
    Kv = K((2 * math.pi * np.outer(ys, k)).ravel()).reshape(Q, M0)
    A = np.sqrt(ys)[:, None] * Kv * cs(2 * math.pi * np.outer(xs, k))
    B = cs(2 * math.pi * np.outer(k, xm))
    V = (2.0 / Q) * B @ A
    V -= np.diag(math.sqrt(Y) * K(2 * math.pi * k * Y))
    return V


def sigma_min(R, parity, Ys=(0.82, 0.74)):
    M0 = choose_M0(R, min(Ys))
    K = KScaled(R, 3.0, R + 90)
    A = np.vstack([collocation(R, parity, M0, Y, M0 + 20, K) for Y in Ys])
    A = A / np.abs(A).max(axis=1, keepdims=True)
    A = A / np.abs(A).max(axis=0)
    return np.linalg.svd(A, compute_uv=False)[-1]


def mismatch(R, parity, M0, Y1=0.82, Y2=0.74):
    K = KScaled(R, 3.0, R + 90)
    out = []
    for Y in (Y1, Y2):
        V = collocation(R, parity, M0, Y, M0 + 20, K)
        a = np.linalg.solve(V[1:, 1:], -V[1:, 0])
        out.append(np.concatenate([[1.0], a]))
    return out[0] - out[1]


# -------------------------------------------------------------- commands

def cmd_scan(args):
    with open(args.out, "w") as out:
        for R in np.arange(args.lo, args.hi + args.step / 2, args.step):
            row = [R, sigma_min(R, 1), sigma_min(R, -1)]
            out.write(" ".join(repr(float(v)) for v in row) + "\n")
            out.flush()


def cmd_refine(args):
    d = np.loadtxt(args.scan)
    R = d[:, 0]
    with open(args.out, "w") as out:
        for col, parity in ((1, 1), (2, -1)):
            s = d[:, col]
            for i in range(1, len(s) - 1):
                if not (s[i] < s[i - 1] and s[i] < s[i + 1]):
                    continue
                r = minimize_scalar(lambda x: sigma_min(x, parity), bounds=(R[i] - 0.012, R[i] + 0.012),
                                    method="bounded", options={"xatol": 2e-6})
                if r.fun > args.accept:
                    continue  # shallow dip: no eigenvalue
                M0 = choose_M0(r.x + 1e-3, 0.74)
                f = lambda x: mismatch(x, parity, M0)[1]
                lo, hi = r.x - 5e-5, r.x + 5e-5
                if np.sign(f(lo)) == np.sign(f(hi)):
                    print(f"warning: no bracket near {r.x} (parity {parity})", file=sys.stderr)
                    continue
                root = brentq(f, lo, hi, xtol=1e-13, rtol=1e-15, maxiter=100)
                out.write(f"{root!r} {parity} {sigma_min(root, parity)!r}\n")
                out.flush()


def coefficients(R, parity, N, Ys=(0.82, 0.74, 0.66)):
    """t(1..N): least-squares Hejhal solve for small n, then FFTs at lower heights."""
    M0 = choose_M0(R, min(Ys))
    K = KScaled(R, 3.0, R + 90)
    A = np.vstack([collocation(R, parity, M0, Y, M0 + 30, K) for Y in Ys])
    rest, *_ = np.linalg.lstsq(A[:, 1:], -A[:, 0], rcond=None)
    a = np.concatenate([[1.0], rest])
    cs = trig(parity)
    t = np.zeros(N + 1)
    t[1:min(N, M0) + 1] = a[:min(N, M0)]
    # For larger n sample f on a horizontal line at height Y with 2 pi n Y in
    # [R, 1.2 R]: K is past its turning point there, so dividing by it is safe.
    n_lo = max(2, int(R / (2 * math.pi * 0.7)))
    k = np.arange(1, M0 + 1)
    while n_lo <= N:
        n_hi = min(N, int(n_lo * 1.2) + 1)
        Y = R / (2 * math.pi * n_lo)
        Q = n_hi + 1
        while 2 * math.pi * (2 * Q - n_hi) * Y < R + 10 or \
                kscaled_exact(R, 2 * math.pi * (2 * Q - n_hi) * Y) > 1e-17:
            Q += max(1, Q // 20)
        xm = (np.arange(1, Q + 1) - 0.5) / (2 * Q)
        xs, ys = pullback(xm, np.full(Q, Y))
        arg = 2 * math.pi * np.outer(ys, k)
        fv = (np.sqrt(ys)[:, None] * K(arg.ravel()).reshape(arg.shape) * cs(2 * math.pi * np.outer(xs, k))) @ a
        for n in range(n_lo, n_hi + 1):
            c = (2.0 / Q) * np.dot(fv, cs(2 * math.pi * n * xm))
            t[n] = c / (math.sqrt(Y) * kscaled_exact(R, 2 * math.pi * n * Y))
        n_lo = n_hi + 1
    return t, a, K


def hecke_residual(t, N):
    worst = 0.0
    for m in range(1, math.isqrt(N) + 1):
        for n in range(m, N // m + 1):
            g = math.gcd(m, n)
            rhs = sum(t[m * n // (d * d)] for d in range(1, g + 1) if g % d == 0)
            worst = max(worst, abs(t[m] * t[n] - rhs))
    return worst


def petersson_alpha(R, parity, a, K, t):
    """alpha = |rho(1)|^2 / cosh(pi R) = 1 / (2 ||f||^2 (1 + e^{-2 pi R}))
    for f = sum t(n) sqrt(y) Ktilde(2 pi n y) cs(2 pi n x)."""
    cs = trig(parity)
    # y >= 1 by Parseval
    upper = 0.0
    for n in range(1, len(t)):
        if 2 * math.pi * n > R + 80:
            break
        lim = (R + 80) / (2 * math.pi * n)
        v, _ = quad(lambda y: kscaled_exact(R, 2 * math.pi * n * y) ** 2 / y, 1.0, lim,
                    limit=400, epsabs=1e-16, epsrel=1e-13)
        upper += 0.5 * t[n] ** 2 * v
    # sqrt(1 - x^2) <= y <= 1 by Gauss-Legendre (integrand even in x)
    xg, xw = np.polynomial.legendre.leggauss(120)
    yg, yw = np.polynomial.legendre.leggauss(80)
    k = np.arange(1, len(a) + 1)
    lower = 0.0
    for x, w in zip(0.25 * (xg + 1), 0.25 * xw):
        y0 = math.sqrt(1 - x * x)
        ys = y0 + (1 - y0) * (yg + 1) / 2
        arg = 2 * math.pi * np.outer(ys, k)
        fv = (np.sqrt(ys)[:, None] * K(arg.ravel()).reshape(arg.shape) * cs(2 * math.pi * x * k)[None, :]) @ a
        lower += 2 * w * np.sum(yw * (1 - y0) / 2 * fv ** 2 / ys ** 2)
    return 1.0 / (2 * (upper + lower) * (1 + math.exp(-2 * math.pi * R)))


def cmd_build(args):
    eig = np.atleast_2d(np.loadtxt(args.eigen))
    order = np.argsort(eig[:, 0])
    rows = []
    for R, parity in eig[order, :2]:
        parity = int(parity)
        t, a, K = coefficients(R, parity, args.depth)
        res = hecke_residual(t, args.depth)
        alpha = petersson_alpha(R, parity, a, K, t) if parity == 1 else None
        print(f"R={R:.12f} parity={parity:+d} hecke={res:.2e} alpha={alpha}", file=sys.stderr, flush=True)
        rows.append((R, parity, t, alpha, res))
    with open(args.out, "w") as out:
        out.write("# Level-1 Maass cusp forms (Hejhal's method), regenerated by\n")
        out.write("# tools/fixtures/generate_maass_fixture.py\n")
        out.write(f"# spectral window [{args.window[0]}, {args.window[1]}] scanned for both parities at "
                  f"step 0.01 with every sigma_min dip refined\n")
        out.write("# record: kappa parity n_coeffs t(1) .. t(N) [alpha=<Petersson-norm harmonic weight>]\n")
        out.write(f"# max Hecke residual {max(r[4] for r in rows):.2e}\n")
        out.write(f"!window {args.window[0]} {args.window[1]}\n")
        for R, parity, t, alpha, _ in rows:
            fields = [repr(float(R)), str(parity), str(args.depth)] + ["%.15g" % v for v in t[1:args.depth + 1]]
            if alpha is not None:
                fields.append("alpha=%.15g" % alpha)
            out.write(" ".join(fields) + "\n")


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="cmd", required=True)
    s = sub.add_parser("scan")
    s.add_argument("--lo", type=float, required=True)
    s.add_argument("--hi", type=float, required=True)
    s.add_argument("--step", type=float, default=0.01)
    s.add_argument("--out", required=True)
    r = sub.add_parser("refine")
    r.add_argument("--scan", required=True)
    r.add_argument("--accept", type=float, default=1e-3)
    r.add_argument("--out", required=True)
    b = sub.add_parser("build")
    b.add_argument("--eigen", required=True)
    b.add_argument("--depth", type=int, default=1000)
    b.add_argument("--window", type=float, nargs=2, default=(0.0, 41.5))
    b.add_argument("--out", required=True)
    args = p.parse_args()
    {"scan": cmd_scan, "refine": cmd_refine, "build": cmd_build}[args.cmd](args)


if __name__ == "__main__":
    main()
