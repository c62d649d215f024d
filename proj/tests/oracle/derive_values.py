"""Reference values frozen into the C++ tests.

Independent of the library: mpmath at 40 digits for special functions,
integrals and determinants; scipy's noncentral chi-square for s = 1 CDFs.
Run with: python3 tests/oracle/derive_values.py
"""
import mpmath as mp
from scipy.stats import ncx2

mp.mp.dps = 40


def of1(n, z):
    return mp.hyp0f1(n, z)


def of1_theta(n, z):
    return mp.nsum(lambda i: i * z**i / (mp.rf(n, i) * mp.factorial(i)), [1, mp.inf])


def hkn(k, n, x, lam):
    f = lambda y: y**k * mp.exp(-y) * mp.hyp0f1(n, lam * y)
    return mp.quad(f, mp.linspace(0, x, 9))


def cdf(lams, nt, nr, x):
    s, t = min(nt, nr), max(nt, nr)
    n = t - s + 1
    m = mp.matrix(s, s)
    for i in range(s):
        for j in range(s):
            m[i, j] = hkn(t - 1 - i, n, x, lams[j])
    den = mp.mpf(1)
    for i in range(s):
        for j in range(i + 1, s):
            den *= lams[i] - lams[j]
    den *= mp.factorial(t - s) ** s
    return mp.exp(-sum(lams)) / den * mp.det(m)


def show(name, v):
    print(f"{name} = {mp.nstr(v, 17)}")


show("of1(1,1)", of1(1, 1))
show("of1_theta(1,1)", of1_theta(1, 1))
show("of1(2,100)", of1(2, 100))
show("of1(1,1e4)", of1(1, 10**4))
show("of1(3,25)", of1(3, 25))
show("gamma_lower(2.5,3)", mp.gammainc(2.5, 0, 3))
show("H(2,3,5,5)", hkn(2, 3, 5, 5))
show("H(2,3,1,1)", hkn(2, 3, 1, 1))
show("H(2,3,5,1)", hkn(2, 3, 5, 1))
show("H(0,1,3,2)", hkn(0, 1, 3, 2))
show("H(4,2,7,3)", hkn(4, 2, 7, 3))
show("H(2,3,30,30)", hkn(2, 3, 30, 30))
show("H(9,1,20,10)", hkn(9, 1, 20, 10))
show("H(2,3,100,50)", hkn(2, 3, 100, 50))
# H^0_1(x, lam) e^{-lam} = Pr(ncx2(2, 2 lam) <= 2x).
print(f"H(0,1,1e8,1e8)*exp(-1e8) = {ncx2.cdf(2e8, 2, 2e8):.15g}")
for t in (3, 5):
    for lam, x in ((5.0, 10.0), (2.0, 4.0)):
        print(f"s=1 t={t} lam={lam} x={x}: {ncx2.cdf(2 * x, 2 * t, 2 * lam):.15g}")
for x in (10, 20, 30):
    show(f"cdf 5x5 lam=1..5 x={x}", cdf([1, 2, 3, 4, 5], 5, 5, x))
for x in (2, 6):
    show(f"cdf 2x3 lam=0.5,1.5 x={x}", cdf([0.5, 1.5], 2, 3, x))
