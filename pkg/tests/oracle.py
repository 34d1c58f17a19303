"""Slow, independent reference computations in arbitrary precision."""

import itertools

import mpmath as mp

mp.mp.dps = 40


def states(p):
    return itertools.product((1, -1), repeat=p)


def log_z(g, lam):
    lam = mp.mpf(lam)
    return mp.log(mp.fsum(mp.exp(lam * sum(x[u] * x[v] for u, v in g.edges)) for x in states(g.p)))


def corr(g, lam, s, t):
    lam = mp.mpf(lam)
    num = den = mp.mpf(0)
    for x in states(g.p):
        w = mp.exp(lam * sum(x[u] * x[v] for u, v in g.edges))
        num += w * x[s] * x[t]
        den += w
    return num / den


def kl(g1, g2, lam):
    lam = mp.mpf(lam)
    lz1, lz2 = log_z(g1, lam), log_z(g2, lam)
    total = mp.mpf(0)
    for x in states(g1.p):
        a1 = sum(x[u] * x[v] for u, v in g1.edges)
        a2 = sum(x[u] * x[v] for u, v in g2.edges)
        logf1 = lam * a1 - lz1
        total += mp.exp(logf1) * (logf1 - (lam * a2 - lz2))
    return total
