#!/usr/bin/env python3
"""Regenerate data/modpoly.txt: classical modular polynomials for l in {2,3,5,7}.

Uses the q-expansion of j = E4^3 / Delta and the power sums of the l+1
conjugates j(l tau), j((tau + k)/l).  Output lines: `l i j c` with i <= j,
meaning c * X^i Y^j (the symmetric partner is implied).
"""
import sys


def sigma3(n):
    return sum(d ** 3 for d in range(1, n + 1) if n % d == 0)


def mul(a, b, n):
    out = [0] * n
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j in range(min(len(b), n - i)):
            out[i + j] += x * b[j]
    return out


def j_series(n):
    """Coefficients c_k of q*j(q) = sum c_k q^k, k = 0..n-1."""
    e4 = [1] + [240 * sigma3(k) for k in range(1, n)]
    e4c = mul(mul(e4, e4, n), e4, n)
    # 1 / prod (1 - q^k)^24
    eta = [1] + [0] * (n - 1)
    for k in range(1, n):
        for _ in range(24):
            for i in range(n - 1, k - 1, -1):
                eta[i] -= eta[i - k]
    inv = [0] * n
    inv[0] = 1
    for i in range(1, n):
        inv[i] = -sum(eta[k] * inv[i - k] for k in range(1, i + 1))
    return mul(e4c, inv, n)


class Laurent:
    """Series sum c[i] q^(i + v) truncated at absolute exponent < top."""

    def __init__(self, v, c):
        self.v, self.c = v, c

    def __mul__(self, o):
        top = min(self.v + len(self.c) + o.v, o.v + len(o.c) + self.v)
        n = top - (self.v + o.v)
        return Laurent(self.v + o.v, mul(self.c, o.c, n))

    def coeff(self, e):
        i = e - self.v
        return self.c[i] if 0 <= i < len(self.c) else 0


def generate(l):
    prec = l * (l + 1) + 10            # e_k is known up to q^(prec - l k)
    jn = prec * l + l * (l + 1) + 10   # precision needed for j itself
    js = Laurent(-1, j_series(jn + 1))
    powers = [Laurent(0, [1] + [0] * (jn + l + 2))]
    for _ in range(l + 1):
        powers.append(powers[-1] * js)
    # power sums P_m as series in q over [-(l m), prec)
    psums = []
    for m in range(1, l + 2):
        jm = powers[m]
        lo = -l * m
        c = [0] * (prec - lo)
        for e in range(lo, prec):
            v = 0
            if e % l == 0:
                v += jm.coeff(e // l)            # j^m(q^l)
            v += l * jm.coeff(l * e)            # l * U_l(j^m)
            c[e - lo] = v
        psums.append(Laurent(lo, c))
    # Newton identities: k e_k = sum_{i=1}^k (-1)^(i-1) e_{k-i} P_i
    es = [Laurent(0, [1] + [0] * (prec - 1))]
    for k in range(1, l + 2):
        lo = -l * k
        acc = {}
        for i in range(1, k + 1):
            prod = es[k - i] * psums[i - 1]
            sgn = 1 if i % 2 == 1 else -1
            for e in range(lo, prec - l * k):
                acc[e] = acc.get(e, 0) + sgn * prod.coeff(e)
        c = []
        for e in range(lo, prec - l * k):
            assert acc[e] % k == 0
            c.append(acc[e] // k)
        es.append(Laurent(lo, c))
    # express each e_k as a polynomial in j
    coeffs = {}
    for k in range(1, l + 2):
        ser = dict((e, es[k].coeff(e)) for e in range(-l * k, 1))
        poly = {}
        for d in range(l * k, -1, -1):
            c = ser.get(-d, 0)
            if c == 0:
                continue
            poly[d] = c
            for e in range(-d, 1):
                ser[e] = ser.get(e, 0) - c * powers[d].coeff(e)
        assert all(v == 0 for v in ser.values()), (l, k)
        for d, c in poly.items():
            # Phi = sum_k (-1)^k e_k(Y) X^(l+1-k)
            coeffs[(l + 1 - k, d)] = (-1) ** k * c
    coeffs[(l + 1, 0)] = 1
    for (i, jdeg), c in coeffs.items():
        assert coeffs.get((jdeg, i)) == c, (l, i, jdeg)
    return coeffs


def main():
    out = sys.stdout
    for l in (2, 3, 5, 7):
        cs = generate(l)
        for (i, jdeg) in sorted(cs):
            if i <= jdeg and cs[(i, jdeg)] != 0:
                out.write(f"{l} {i} {jdeg} {cs[(i, jdeg)]}\n")


if __name__ == "__main__":
    main()
