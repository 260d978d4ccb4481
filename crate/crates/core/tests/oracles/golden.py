"""Independent high-precision reference values for the oms-core unit tests.

Run with `python3 golden.py`; every number printed here is frozen into a Rust
test. Nothing in this script shares code with the Rust implementation.
All rates are in units of omega_m1 unless stated otherwise.
"""
from mpmath import mp, mpf, mpc, pi, sqrt, conj, fabs, polyroots

mp.dps = 40
I = mpc(0, 1)


def coupling_from_geometry():
    hbar = mpf("1.054571817e-34")
    omega_a = 2 * pi * mpf("193.4e12")
    length = mpf("5.19e-3")
    m_eff = mpf("20e-9")
    omega_m = 2 * pi * mpf("12.6e9")
    value = omega_a / length * sqrt(hbar / (m_eff * omega_m))
    print("coupling_from_geometry [rad/s] =", mp.nstr(value, 20))
    print("  /2pi [Hz] =", mp.nstr(value / (2 * pi), 20))


def fig2():
    r = lambda hz: mpf(hz) / mpf("12.6e9")
    return dict(
        kappa=[r("73e6")] * 3,
        gamma=[r("88e3")] * 2,
        omega_m=[mpf(1), mpf(1)],
        o=[r("1.5e6")] * 4,  # o_m1, o_m2, o_m31, o_m32
        drive=mpf(4),  # |Omega_d1 + Omega_d2| with zero phases
    )


def beta(p):
    g, w = p["gamma"], p["omega_m"]
    o = p["o"]
    return 2 * (o[2] ** 2 * w[0] / (g[0] ** 2 + w[0] ** 2) + o[3] ** 2 * w[1] / (g[1] ** 2 + w[1] ** 2))


def bisect_roots(kappa3, delta_a3, b, d2, n_scan=200000):
    """Sign-change scan plus bisection of I*(k^2+(D-b I)^2) - |D|^2 over [0, |D|^2/k^2]."""
    f = lambda x: x * (kappa3 ** 2 + (delta_a3 - b * x) ** 2) - d2
    hi = d2 / kappa3 ** 2
    roots = []
    prev_x, prev_f = mpf(0), f(mpf(0))
    mp.dps = 20
    for k in range(1, n_scan + 1):
        x = hi * k / n_scan
        fx = f(x)
        if prev_f == 0:
            roots.append(prev_x)
        elif prev_f * fx < 0:
            lo_, hi_ = prev_x, x
            mp.dps = 40
            for _ in range(200):
                mid = (lo_ + hi_) / 2
                if f(lo_) * f(mid) <= 0:
                    hi_ = mid
                else:
                    lo_ = mid
            roots.append((lo_ + hi_) / 2)
            mp.dps = 20
        prev_x, prev_f = x, fx
    mp.dps = 40
    return roots


def cubic_roots():
    p = fig2()
    b = beta(p)
    d2 = p["drive"] ** 2
    k3 = p["kappa"][2]
    # caption bare detuning for a3
    da3 = mpf("84.71e9") / mpf("12.6e9")
    roots = bisect_roots(k3, da3, b, d2, n_scan=2000)
    print("fig2 caption-bare cubic roots:", [mp.nstr(x, 20) for x in roots])
    # bare detuning reconciled from the effective target Delta_3 = omega_m1
    i3 = d2 / (k3 ** 2 + 1)
    da3 = 1 + b * i3
    roots = bisect_roots(k3, da3, b, d2, n_scan=2000)
    print("fig2 target-reconciled cubic roots:", [mp.nstr(x, 20) for x in roots], "expected", mp.nstr(i3, 20))
    print("  bare delta_a3 =", mp.nstr(da3, 25))
    # bistable set: kappa3=0.01, gamma=1e-3, o31=o32=0.01, delta_a3=1, |D_d|=2
    b = 2 * (mpf("0.01") ** 2 / (mpf("1e-6") + 1)) * 2
    roots = bisect_roots(mpf("0.01"), mpf(1), b, mpf(4), n_scan=400000)
    print("bistable roots:", [mp.nstr(x, 20) for x in roots])
    poly = polyroots([b ** 2, -2 * b, (mpf("0.01") ** 2 + 1), -4], maxsteps=200, extraprec=100)
    print("  polyroots check:", [mp.nstr(x, 20) for x in poly])


def fig2_response():
    p = fig2()
    k, g, o = p["kappa"], p["gamma"], p["o"]
    dd = p["drive"]
    # effective detunings pinned at omega_m1, so a_is = D_d/(kappa + i)
    a = [dd / (k[i] + I) for i in range(3)]
    x = mpf("0.05")
    u = [I * x - k[i] for i in range(3)]  # rotated: i x - i (Delta_i - 1) - kappa_i
    v = [I * x - g[j] for j in range(2)]
    zeta = u[2] * v[0] - o[0] * o[2] * a[0] * conj(a[2])
    zeta_p = u[2] * v[1] - o[1] * o[3] * a[1] * conj(a[2])
    print("fig2 x=0.05 rotated: U1 =", mp.nstr(u[0], 20), " V1 =", mp.nstr(v[0], 20))
    print("  zeta  =", mp.nstr(zeta, 20))
    print("  zeta' =", mp.nstr(zeta_p, 20))
    dp = mpf("0.4")
    i3 = fabs(a[2]) ** 2
    cross = i3 * (o[2] ** 2 * v[1] + o[3] ** 2 * v[0])
    den = u[2] * v[0] * v[1] + cross
    da1 = -dp * (v[1] * zeta + cross) / (u[0] * den)
    da2 = -dp * (v[0] * zeta_p + cross) / (u[1] * den)
    print("  da1+ =", mp.nstr(da1, 20))
    print("  da2+ =", mp.nstr(da2, 20))
    t21 = fabs((2 * k[0] * da1 - mpf("0.2")) / mpf("0.2")) ** 2
    t12 = fabs((2 * k[1] * da2 - mpf("0.2")) / mpf("0.2")) ** 2
    print("  t12 =", mp.nstr(t12, 20), " t21 =", mp.nstr(t21, 20))


if __name__ == "__main__":
    coupling_from_geometry()
    cubic_roots()
    fig2_response()
