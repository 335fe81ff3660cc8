"""Independent brute-force references used to freeze expected values.

Nothing here imports the package under test.
"""

import math
from functools import lru_cache


def brute_force_put_tree(S0, E, r, q, sigma, log_u, n_steps, american=True):
    """Recursive American/European put on a constant-coefficient tree.

    Every step has dt = log_u**2 / sigma**2, so the tree recombines.
    """
    u = math.exp(log_u)
    d = 1.0 / u
    dt = log_u * log_u / (sigma * sigma)
    rho = 1.0 + r * dt
    eta = 1.0 + q * dt
    theta = (rho / eta - d) / (u - d)

    @lru_cache(maxsize=None)
    def value(n, j):
        s = S0 * u ** j
        payoff = max(E - s, 0.0)
        if n == n_steps:
            return payoff
        cont = (theta * value(n + 1, j + 1) + (1.0 - theta) * value(n + 1, j - 1)) / rho
        return max(cont, payoff) if american else cont

    return value(0, 0), theta


def partition_by_hand(sigma_of_t, T, dx, alpha=1.0):
    """Literal transcription of the sigma-adapted recursion with exact rationals."""
    from fractions import Fraction

    t = Fraction(0)
    T = Fraction(T)
    c = Fraction(alpha) * Fraction(dx) ** 2
    nodes = [t]
    while True:
        s = Fraction(sigma_of_t(t))
        t = t + c / (s * s)
        if t > T:
            break
        nodes.append(t)
    return nodes


def black_scholes(kind, S, E, T, r, q, sigma):
    if T <= 0:
        return max(S - E, 0.0) if kind == "call" else max(E - S, 0.0)
    vol = sigma * math.sqrt(T)
    d1 = (math.log(S / E) + (r - q + 0.5 * sigma * sigma) * T) / vol
    d2 = d1 - vol
    N = lambda x: 0.5 * math.erfc(-x / math.sqrt(2.0))
    if kind == "call":
        return S * math.exp(-q * T) * N(d1) - E * math.exp(-r * T) * N(d2)
    return E * math.exp(-r * T) * N(-d2) - S * math.exp(-q * T) * N(-d1)


if __name__ == "__main__":
    v, th = brute_force_put_tree(1.0, 1.0, 0.1, 0.0, 1.0, 0.1, 2)
    print("two-step root", v, "theta", th)
    u = math.exp(0.1)
    print("down payoff", 1 - 1 / u, "down continuation", (1 - th) * (1 - u ** -2) / 1.001)
    from fractions import Fraction as F
    nodes = partition_by_hand(lambda t: 1 if t < F(2, 100) else 2, F(5, 100), F(1, 10))
    print([str(x) for x in nodes])
    nodes = partition_by_hand(lambda t: 1, F(5, 100), F(1, 10))
    print(len(nodes) - 1, [str(x) for x in nodes])
    print("a_n", 0.5 + 0.05 * (0.1 - 0.5))
