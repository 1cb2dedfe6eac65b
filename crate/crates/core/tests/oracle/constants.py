"""Independent high-precision values for the Euler-product constants.

Explicit product over p <= 1000 in mpmath, remainder through the prime zeta
function applied to the log-expansion of each factor in u = 1/p.
Run: python3 constants.py
"""
from mpmath import mp, mpf, primezeta, zeta, log, pi, euler, diff, exp, psi
import sympy as sp

mp.dps = 40
u = sp.symbols('u')
P0 = 1000
SMALL = list(sp.primerange(2, P0 + 1))
K = 40
_tail = {}


def ptail(k):
    if k not in _tail:
        _tail[k] = primezeta(k) - sum(mpf(p) ** (-k) for p in SMALL)
    return _tail[k]


def logcoeffs(expr):
    s = sp.series(sp.log(expr), u, 0, K).removeO()
    return [sp.Rational(s.coeff(u, k)) for k in range(K)]


def prod(expr, skip2=False):
    v = mpf(1)
    for p in SMALL:
        if skip2 and p == 2:
            continue
        v *= mpf(sp.N(expr.subs(u, sp.Rational(1, p)), 60))
    c = logcoeffs(expr)
    t = sum(mpf(c[k].p) / c[k].q * ptail(k) for k in range(1, K) if c[k] != 0)
    return v * exp(t)


def log_sum_pp1():
    # sum_p log p / (p(p-1)) = sum_{k>=2} sum_p log p p^{-k}
    s = sum(log(p) / (p * (p - 1)) for p in SMALL)
    for k in range(2, K):
        s += -diff(primezeta, k) - sum(log(p) * mpf(p) ** (-k) for p in SMALL)
    return s


def main():
    g = +euler
    S = log_sum_pp1()
    C5 = prod((1 - 2 * u) / (1 - u) ** 2, True)
    C6 = prod((1 - 2 * u - u ** 2) / (1 - 2 * u), True)
    C8 = prod((1 - u) ** 2 / (1 - 2 * u - u ** 2), True)
    C3 = prod((1 - u - u ** 2) / (1 - u))
    h1 = prod((1 - u) / (1 - u - u ** 2))
    U1 = prod((1 - u + u ** 2) / (1 - u))
    # Q_1(1) = prod (1 + r/p), r/p = u^2/(1-2u-u^2) for p>2
    Q11 = prod(1 + u ** 2 / (1 - 2 * u - u ** 2), True)
    # Q_1(0) regularised = prod (1+r)(1-1/p); p=2 factor is 1/2
    Q10 = mpf(1) / 2 * prod((1 + u / (1 - 2 * u - u ** 2)) * (1 - u), True)
    Zres = log(2 * pi) + g - mpf(13) / 12
    Zbc = log(2 * pi) - psi(0, 5) + 1
    beta = -mpf(1) / 12
    out = [
        ("C2", log(2 * pi) + g + S),
        ("C3", C3),
        ("C5", C5),
        ("C6", C6),
        ("C8", C8),
        ("H1", h1),
        ("H1_PRIME", -h1 * S),
        ("U1", U1),
        ("ZPROD", zeta(2) * zeta(3) / zeta(6)),
        ("SUM_LOG_P_OVER_PP1", S),
        ("ZRES", Zres),
        ("ZBC", Zbc),
        ("ALPHA", U1 / 30),
        ("GAMMA", beta * (Zres + S) - mpf(1) / 24),
        ("BETA1", h1 * (g - 1) - h1 * S),
        ("BETA2", h1 * (g / 2 - mpf(3) / 4) - h1 * S / 2),
        ("Q1_AT_1", Q11),
        ("Q1_AT_0_REG", Q10),
        ("LOG_2PI", log(2 * pi)),
    ]
    for name, v in out:
        print(f"{name} = {mp.nstr(v, 22)}")


if __name__ == "__main__":
    main()
