"""Independent high-precision evaluation of the lithium niobate Sellmeier sets
and the type-I kinematics, used to freeze golden constants for the C++ tests.

Run: python3 tests/oracles/sellmeier_oracle.py
"""
from mpmath import mp, mpf, sqrt, sin, cos, asin, pi, findroot

mp.dps = 40

ZELMON_O = ([mpf("2.6734"), mpf("1.2290"), mpf("12.614")], [mpf("0.01764"), mpf("0.05914"), mpf("474.60")])
ZELMON_E = ([mpf("2.9804"), mpf("0.5981"), mpf("8.9543")], [mpf("0.02047"), mpf("0.0666"), mpf("416.08")])


def n3(coeffs, lam_m):
    strengths, poles = coeffs
    l2 = (mpf(lam_m) * 10**6) ** 2
    return sqrt(1 + sum(a * l2 / (l2 - b) for a, b in zip(strengths, poles)))


def gayer(a, b, lam_m, t_c):
    f = (t_c - mpf("24.5")) * (t_c + mpf("570.82"))
    l2 = (mpf(lam_m) * 10**6) ** 2
    return sqrt(a[0] + b[0] * f + (a[1] + b[1] * f) / (l2 - (a[2] + b[2] * f) ** 2)
                + (a[3] + b[3] * f) / (l2 - a[4] ** 2) - a[5] * l2)


GAYER_O = ([mpf(x) for x in ("5.653", "0.1185", "0.2091", "89.61", "10.85", "1.97e-2")],
           [mpf(x) for x in ("7.941e-7", "3.134e-8", "-4.641e-9", "-2.188e-6")])


def no(lam):
    return n3(ZELMON_O, lam)


def ne(lam):
    return n3(ZELMON_E, lam)


def n_theta(lam, theta):
    return 1 / sqrt(cos(theta) ** 2 / no(lam) ** 2 + sin(theta) ** 2 / ne(lam) ** 2)


def delta_k(lam_p, theta_c, lam_s, theta_ext):
    lam_i = 1 / (1 / mpf(lam_p) - 1 / mpf(lam_s))
    kp = 2 * pi * n_theta(lam_p, theta_c) / lam_p
    ks = 2 * pi * no(lam_s) / lam_s
    ki = 2 * pi * no(lam_i) / lam_i
    q = 2 * pi / lam_s * sin(theta_ext)  # external angle in vacuum/air (n = 1)
    return kp - sqrt(ks**2 - q**2) - sqrt(ki**2 - q**2)


def delta_k_gap(lam_p, lam_s, theta_ext):
    lam_i = 1 / (1 / mpf(lam_p) - 1 / mpf(lam_s))
    kp, ks, ki = 2 * pi / lam_p, 2 * pi / lam_s, 2 * pi / lam_i
    q = ks * sin(theta_ext)
    return kp - sqrt(ks**2 - q**2) - sqrt(ki**2 - q**2)


if __name__ == "__main__":
    deg = pi / 180
    print("n_o(532 nm)    =", mp.nstr(no(mpf("532e-9")), 17))
    print("n_o(610.4 nm)  =", mp.nstr(no(mpf("610.4e-9")), 17))
    print("n_e(532 nm)    =", mp.nstr(ne(mpf("532e-9")), 17))
    print("n_o mgo(532)   =", mp.nstr(gayer(*GAYER_O, mpf("532e-9"), mpf(25)), 17))
    lp, thc = mpf("532e-9"), mpf("50.34") * deg
    dk = delta_k(lp, thc, mpf("610.4e-9"), mpf("0.5") * deg)
    print("dk(610.4nm,0.5deg) =", mp.nstr(dk, 17))
    dkg = delta_k_gap(lp, mpf("610.4e-9"), mpf("0.5") * deg)
    print("dk_gap(610.4nm,0.5deg) =", mp.nstr(dkg, 17))
    for thc_deg in ("50.34", "50.1"):
        root = findroot(lambda nm: delta_k(lp, mpf(thc_deg) * deg, nm * mpf("1e-9"), 0) * mpf("1e-6"),
                        (mpf(600), mpf(620)), solver="anderson") * mpf("1e-9")
        print("collinear", thc_deg, mp.nstr(root, 17), "idler", mp.nstr(1 / (1 / lp - 1 / root), 17))
