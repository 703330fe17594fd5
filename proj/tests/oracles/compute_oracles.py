"""Independent reference values frozen into the unit tests."""
import math

import mpmath as mp
import numpy as np
import sympy as sp

M64 = (1 << 64) - 1


def mix64(z):
    z = (z + 0x9E3779B97F4A7C15) & M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M64
    return z ^ (z >> 31)


def stream_key(seed, sample, mode, direction):
    k = mix64(seed)
    k = mix64(k ^ sample)
    k = mix64(k ^ (mode + 0x51ED2705))
    return mix64(k ^ (direction + 0x2545F491))


def stream_normal(key, n):
    h1 = mix64(key ^ mix64(2 * n))
    h2 = mix64(key ^ mix64(2 * n + 1))
    u1 = ((h1 >> 11) + 0.5) * 2.0**-53
    u2 = (h2 >> 11) * 2.0**-53
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


def path_value(K, dt, jmin, jmax, seed, sid, q, j):
    kp, kn = stream_key(seed, sid, q, 0), stream_key(seed, sid, q, 1)
    sd = math.sqrt(dt)
    w = 0.0
    if j >= 0:
        for i in range(j):
            w += sd * stream_normal(kp, i)
    else:
        for i in range(-j):
            w -= sd * stream_normal(kn, i)
    return w


print("== rng")
key = stream_key(42, 7, 3, 0)
print("key", key)
for n in range(4):
    print("normal", n, repr(stream_normal(key, n)))
print("W(q=1,j=5)", repr(path_value(2, 0.01, -5, 5, 42, 7, 1, 5)))
print("W(q=1,j=-5)", repr(path_value(2, 0.01, -5, 5, 42, 7, 1, -5)))

print("== spectral")
mp.mp.dps = 40
for k in range(1, 9):
    print("mu", k, mp.nstr(15 - (k * mp.pi) ** 2, 20))
print("gap c=15", mp.nstr(15 - mp.pi**2, 20))
print("mu_1 on (0,2), c=1:", mp.nstr(1 - (mp.pi / 2) ** 2, 20))
print("coeff 3 sin(pi x)", mp.nstr(3 / mp.sqrt(2), 20))

print("== condition B")
print("0.25/k K=8", mp.nstr(sum(mp.mpf("0.0625") / k**2 for k in range(1, 9)), 20))
print("0.5/k K=8", mp.nstr(sum(mp.mpf("0.25") / k**2 for k in range(1, 9)), 20))

print("== K1 K2 flagship")
mu_m = 15 - mp.pi**2
mu_m1 = 15 - 4 * mp.pi**2
gap = min(-mu_m1, mu_m)
Lam = gap / 8
N, tau, supF, supG = 10, 1, mp.mpf("1.5"), 1


def partial(x, terms=10**6):
    # sum_{i=-1}^{terms-2} x^i, accumulated directly
    s = 1 / x
    p = mp.mpf(1)
    for _ in range(terms - 1):
        s += p
        p *= x
    return s


mp.mp.dps = 30
gm = partial(mp.e ** (-mu_m * tau / 2))
gs = partial(mp.e ** (mu_m1 * tau / 2))
K1 = 12 * N**2 * supG**2 * mp.e ** (2 * Lam * tau) * (
    gm / abs(mu_m - 4 * Lam) + gm / abs(mu_m + 4 * Lam) + gs / abs(mu_m1 - 4 * Lam) + gs / abs(mu_m1 + 4 * Lam)
)
sig2 = sum((mp.mpf("0.25") / k) ** 2 for k in range(1, 9))
K2 = 96 * supF**2 * sig2 * (
    1 / abs(mu_m + 2 * Lam) ** 3 + 1 / abs(mu_m - 2 * Lam) ** 3 + 1 / abs(mu_m1 + 2 * Lam) ** 3 + 1 / abs(mu_m1 - 2 * Lam) ** 3
)
print("K1", mp.nstr(K1, 20))
print("K2", mp.nstr(K2, 20))

print("== rho neumann")
# two-term series on t in [0, 1], mu = 4, K1 = 1e-3, K2 = 2
mu, K1s, K2s, tau = 4.0, 1e-3, 2.0, 1.0
for t in (0.0, 0.5, 1.0):
    integ = (2 / mu) * (2 - math.exp(-mu * t / 2) - math.exp(-mu * (tau - t) / 2))
    print("rho2", t, repr(K2s + K1s * K2s * integ))

print("== smooth step")
z = mp.mpf("0.25")
a, b = mp.e ** (-1 / z), mp.e ** (-1 / (1 - z))
print("psi(0.25)", mp.nstr(a / (a + b), 20))

print("== dissipativity scan")
u = np.linspace(-10, 10, 2001)
t = np.linspace(0, 2 * np.pi, 201)
U, T = np.meshgrid(u, t)
F = U - U**3 + np.sin(T)
margin = -1.5 * U**2 + 5 - U * F
print("worst margin", repr(margin.min()))

print("== semigroup deviation")
# E (e^{mu t + sigma W_t} - e^{mu t})^2
for (m, s, tt) in ((-0.5, 0.5, 0.01), (-0.5, 0.5, 0.02), (-0.5, 0.5, 0.04)):
    e = math.exp(2 * m * tt) * (math.exp(2 * s * s * tt) - 2 * math.exp(s * s * tt / 2) + 1)
    print("E dev", tt, repr(e))

print("== sinusoid periodic solution")
ts, ss = sp.symbols("t s", real=True)
m_, w, a_ = sp.symbols("m omega a", positive=True)
y = sp.integrate(sp.exp(-m_ * (ts - ss)) * a_ * sp.sin(w * ss), (ss, -sp.oo, ts))
print(sp.simplify(y), "with mu = -m")
print("mismatch", sp.simplify(y - a_ * (m_ * sp.sin(w * ts) - w * sp.cos(w * ts)) / (m_**2 + w**2)))
