"""Independent high-precision oracle for the junction integrals.

Recomputes the golden-rule spectral function and the DC tunneling
current with mpmath adaptive quadrature at 30 significant digits,
using only the definitions (Dynes density of states, Fermi factors)
and the package's unit pins.  Run this script to regenerate the
frozen values asserted in tests/test_qcr.py.
"""
import mpmath as mp

mp.mp.dps = 30

H_MEV_PER_GHZ = mp.mpf("4.135667696e-3")
H_OVER_KB = mp.mpf("0.0479924")
KB_MEV_PER_K = H_MEV_PER_GHZ / H_OVER_KB

DELTA = mp.mpf("0.215")      # meV
GAMMA_D = mp.mpf("2.3e-3")
R_T = mp.mpf("13.8")         # kOhm
T_N = mp.mpf("0.1")          # K
LIM = mp.mpf(30)


def dynes(x):
    z = mp.mpc(x, GAMMA_D)
    return abs(mp.re(z / mp.sqrt(z * z - 1)))


def fermi(y):
    if y > 700:
        return mp.mpf(0)
    if y < -700:
        return mp.mpf(1)
    return 1 / (1 + mp.exp(y))


def spectral(e_mev, v_mv):
    beta = DELTA / (KB_MEV_PER_K * T_N)
    u = abs(mp.mpf(v_mv)) / DELTA
    w = mp.mpf(e_mev) / DELTA

    def f(x):
        return dynes(x) * (fermi(beta * (x - u - w)) + fermi(beta * (x + u - w))) * (1 - fermi(beta * x))

    pts = sorted({p for p in (-1, 1, u + w, -u + w, mp.mpf(0)) if -LIM < p < LIM})
    knots = [-LIM] + list(pts) + [LIM]
    return mp.quad(f, knots)


def current(v_mv):
    beta = DELTA / (KB_MEV_PER_K * T_N)
    u = mp.mpf(v_mv) / DELTA

    def f(x):
        return dynes(x) * (fermi(beta * (x - u)) - fermi(beta * x))

    lim = LIM + abs(u)
    pts = sorted({p for p in (-1, 1, mp.mpf(0), u) if -lim < p < lim})
    knots = [-lim] + list(pts) + [lim]
    return 1000 * DELTA * mp.quad(f, knots) / R_T


if __name__ == "__main__":
    e_ge = H_MEV_PER_GHZ * mp.mpf("4.09")     # g<->e photon at the design point
    e_ef = H_MEV_PER_GHZ * mp.mpf("3.817")    # e<->f photon (anharmonic ladder)
    print("SPECTRAL = {")
    for e in (e_ge, -e_ge, e_ef):
        for v in ("0.0", "0.6", "1.2"):
            val = spectral(e, v)
            print(f'    ({mp.nstr(e, 17)!r}, {v!r}): "{mp.nstr(val, 17)}",')
    print("}")
    print("CURRENT = {")
    for v in ("0.05", "0.215", "0.3", "1.0"):
        print(f'    {v!r}: "{mp.nstr(current(v), 17)}",')
    print("}")
