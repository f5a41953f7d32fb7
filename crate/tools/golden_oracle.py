"""Reference values for the bound formulas, computed with 40-digit mpmath.

The numbers printed here are frozen into the Rust tests; rerun with
`python3 tools/golden_oracle.py` to regenerate them.
"""

from mpmath import e, log, mp, mpf, sqrt

mp.dps = 40


def phi(h, n, c):
    h, n = mpf(h), mpf(n)
    return c * sqrt(h / n * log(2 * n * e / h))


def capacity(m, n, eta, h):
    h, n = mpf(h), mpf(n)
    return log(2 * mpf(m) / eta) + h * log(2 * n * e / h)


def epsilon(m, n, eta, h):
    return mpf(m) * sqrt(capacity(m, n, eta, h) / n)


def erm2(r, m, n, eta, h):
    big_l = capacity(m, n, eta, h)
    m2 = mpf(m) ** 2
    return r + m2 / (2 * n) * big_l * (1 + sqrt(1 + 4 * n * r / (m2 * big_l)))


def legacy(h, n, a=mpf("0.16"), b=mpf("1.2"), k=mpf("0.14927")):
    t = mpf(n) / h
    if t <= mpf("0.5"):
        return mpf(1)
    num = log(2 * t) + 1
    return a * (num / (t - k)) * (sqrt(1 + b * (t - k) / (num)) + 1)


if __name__ == "__main__":
    eta = mpf("0.05")
    print("phi(4,100,1)        ", mp.nstr(phi(4, 100, 1), 17))
    print("epsilon(10,100,.05,4)", mp.nstr(epsilon(10, 100, eta, 4), 17))
    print("epsilon^2           ", mp.nstr(epsilon(10, 100, eta, 4) ** 2, 17))
    print("erm2(0,...)         ", mp.nstr(erm2(0, 10, 100, eta, 4), 17))
    print("erm2(1,...)         ", mp.nstr(erm2(1, 10, 100, eta, 4), 17))
    print("legacy(10,100)      ", mp.nstr(legacy(10, 100), 17))
