"""Hitting counts and 1/d sums for the golden rotation, at 50 digits."""
import mpmath as mp

mp.mp.dps = 50
rho = (mp.sqrt(5) - 1) / 2


def d(theta0, n):
    x = mp.frac(theta0 + n * rho)
    return min(x, 1 - x)


def hitting_N(theta0, eps):
    n = 0
    while mp.sqrt(n * eps) < d(theta0, n):
        n += 1
    return n


def dk_sum(theta0, N):
    return mp.fsum(1 / d(theta0, n) for n in range(N + 1))


if __name__ == "__main__":
    for th in ("0.1", "0.3", "0.123456789"):
        t = mp.mpf(th)
        print(th, [hitting_N(t, mp.mpf(e)) for e in ("1e-4", "1e-6", "1e-8")], mp.nstr(dk_sum(t, 1000), 17))
    for e in ("1e-4", "1e-6"):
        P = 10000 if e == "1e-4" else 2000
        print("max", e, P, max(hitting_N((i + mp.mpf("0.5")) / P, mp.mpf(e)) for i in range(P)))


def extra():
    t = mp.mpf("0.25")
    print("theta 0.25 eps 1e-4 N", hitting_N(t, mp.mpf("1e-4")))
    print("theta 0.25 dk_sum(100) %s" % mp.nstr(dk_sum(t, 100), 17))
    for q in range(1, 6):
        print("||%d rho|| = %s" % (q, mp.nstr(d(0, q), 6)))


if __name__ == "__main__":
    extra()
