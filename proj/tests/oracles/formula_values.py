"""Independent evaluation of the certificate formulas with exact rationals.

Values printed here are frozen into tests/test_analysis.cpp and the
acceptance suite. Run: python3 tests/oracles/formula_values.py
"""
from fractions import Fraction as F


def nu_rho(nu, delta, sig_under, rho, c):
    return min(nu - 2 * delta * c, rho * sig_under * c * c / (4 * (c * c + 1)))


def max_rho(mu, delta, sig_max):
    return (1 - sig_max - mu * delta) / (mu * (2 - sig_max - mu * delta))


def certificate(mu, alpha, nr, delta, sig_max, sig_under):
    g1 = 1 - mu * nr * (2 - sig_max - mu * delta)
    g2 = 1 - alpha * sig_under
    beta = 1 - alpha * sig_max
    return g1, g2, beta, max(g1 / beta, g2)


half = F(1, 2)
nr = nu_rho(F(1), F(1), half, F(1), F(1, 4))
print("nu_rho(1,1,0.5,1,0.25) =", nr, float(nr))
mr = max_rho(F(1, 10), F(1), half)
print("max_rho(0.1,1,0.5) =", mr, float(mr))
mr2 = max_rho(F(1, 4), F(1), half)
print("max_rho(0.25,1,0.5) =", mr2, float(mr2))
mu = F(1, 10)
alpha = mu * nr * (2 - half - mu)
g1, g2, beta, gamma = certificate(mu, alpha, nr, F(1), half, half)
for name, v in [("alpha", alpha), ("gamma1", g1), ("gamma2", g2),
                ("beta", beta), ("gamma1/beta", g1 / beta), ("gamma", gamma)]:
    print(f"{name} = {float(v):.12f}")

# grid-search argmax of nu_rho over c for (1,1,0.5,1), resolution 1e-5
best = max((nu_rho(1.0, 1.0, 0.5, 1.0, k * 1e-5), k * 1e-5) for k in range(1, 50000))
print("grid argmax c = %.6f value = %.10f" % (best[1], best[0]))

# Exact argmax: the first branch falls and the second rises in c, so the
# maximum sits where they cross. Solve 1 - 2c = c^2 / (8 (c^2 + 1)) with mpmath.
import mpmath

mpmath.mp.dps = 40
c_star = mpmath.findroot(lambda c: 1 - 2 * c - c**2 / (8 * (c**2 + 1)), 0.49)
print("crossing c = %s value = %s" % (mpmath.nstr(c_star, 15), mpmath.nstr(1 - 2 * c_star, 15)))
