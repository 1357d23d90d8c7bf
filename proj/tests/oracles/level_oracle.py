"""Independent numbers for the CFG-A max edge, used to freeze unit-test goldens.

Critical points in closed form, level curves by DOP853 on the Hamiltonian
flow (so the period is pi'(h) directly), u(h0) by Gauss-Legendre on 2 S / A
where S is the area inside the level curve.
"""
import math
import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

a = (math.sqrt(5) - 1) / 2
b = 1.0
C = 0.25
tp = 2 * math.pi


def H(x1, x2):
    return a * x1 + b * x2 + C * math.sin(tp * x1) + C * math.cos(tp * x2)


def grad(x1, x2):
    return a + tp * C * math.cos(tp * x1), b - tp * C * math.sin(tp * x2)


# grad = 0: cos 2pi x1 = -a/(2pi C), sin 2pi x2 = b/(2pi C); max needs sin 2pi x1 > 0, cos 2pi x2 > 0
x1m = math.acos(-a / (tp * C)) / tp
x2m = math.asin(b / (tp * C)) / tp
x2s = 0.5 - x2m  # same x1, cos 2pi x2 < 0: saddle
Hm, Hs = H(x1m, x2m), H(x1m, x2s)
h_range = Hm - Hs


def seed(h):
    lvl = Hs + h
    x2 = brentq(lambda y: H(x1m, y) - lvl, x2m, x2s, xtol=1e-15, rtol=1e-15)
    return x2


def rhs(t, y):
    x1, x2 = y[0], y[1]
    g1, g2 = grad(x1, x2)
    lap = -tp * tp * C * (math.sin(tp * x1) + math.cos(tp * x2))
    v1, v2 = -g2, g1
    return [v1, v2, g1 * g1 + g2 * g2, lap, x1 * v2]


def trace(h):
    y0 = [x1m, seed(h), 0.0, 0.0, 0.0]
    ev = lambda t, y: y[0] - x1m
    ev.direction = 1.0
    ev.terminal = False
    sol = solve_ivp(rhs, (0, 200), y0, method="DOP853", rtol=1e-13, atol=1e-14, events=ev, dense_output=True)
    # second upward crossing is the seed again (first is t = 0 itself or close)
    ts = [t for t in sol.t_events[0] if t > 1e-6]
    T = ts[0]
    y = sol.sol(T)
    return dict(h=h, piPrime=T, A=y[2], B=y[3], S=abs(y[4] - 0.0))


def u_of(h0, n=48):
    xs, ws = np.polynomial.legendre.leggauss(n)
    tot = 0.0
    for x, w in zip(xs, ws):
        h = 0.5 * h0 * (x + 1)
        r = trace(h)
        tot += w * 2 * r["S"] / r["A"]
    return 0.5 * h0 * tot


if __name__ == "__main__":
    print("x_max", x1m, x2m, "H", Hm)
    print("x_saddle", x1m, x2s, "H", Hs)
    print("h_range %.15g" % h_range)
    for frac in (1e-6, 1e-4, 0.1, 0.5, 0.9):
        r = trace(frac * h_range)
        print("frac %g h %.10g A %.12g piPrime %.12g B %.12g S %.12g a %.12g b %.12g"
              % (frac, r["h"], r["A"], r["piPrime"], r["B"], r["S"], r["A"] / (2 * r["piPrime"]),
                 r["B"] / (2 * r["piPrime"])))
    small = [trace(h) for h in (1e-9, 1e-8)]
    print("S(0+) ~ %.10g  A(0+) ~ %.10g" % (small[0]["S"], small[0]["A"]))
    print("uPrime0 ~ %.10g" % (2 * small[0]["S"] / small[0]["A"]))
    print("u(0.5 h_range) %.12g" % u_of(0.5 * h_range))
