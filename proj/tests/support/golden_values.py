#!/usr/bin/env python3
"""Regenerates the frozen golden constants used in the C++ test suites.

Every value asserted with a tight epsilon in the tests was produced by this
script at 40-digit precision (mpmath) and pasted in. Run it after changing any
of the default parameters below and update the tests accordingly.
"""
from mpmath import mp, mpf, sin, cos, atan, tan, pi

mp.dps = 40

M = mpf("1600")
I_Z = mpf("1536.7")
A = mpf("1.015")
B_LEVER = mpf("1.895")
G = mpf("9.81")
B_STIFF = mpf("-11.52")
C_SHAPE = mpf("1.62")


def show(name, value, digits=17):
    print(f"{name:26s} = {mp.nstr(value, digits)}")


def main():
    show("tire force @0.05/9000/1.0", 9000 * sin(C_SHAPE * atan(B_STIFF * mpf("0.05"))))
    show("alpha_f (w=0.33, v=10)", atan(A * mpf("0.33") / 10))
    show("alpha_r (w=0.33, v=10)", atan(-B_LEVER * mpf("0.33") / 10))
    show("omega_dot (2000/1000 N)", (A * 2000 - B_LEVER * 1000) / I_Z)
    show("F_zf", M * G * B_LEVER / (A + B_LEVER))
    show("F_zr", M * G * A / (A + B_LEVER))

    kr, vr, e_d, e_phi = mpf(1) / 30, mpf(10), mpf(2), mpf("0.1")
    k1, k2 = mpf("0.15"), mpf("0.1")
    show("yaw rate (e_d=2, e_phi=.1)", -kr * vr * cos(e_phi) / (1 - e_d * kr) - k1 * e_d - k2 * e_phi)

    show("peak-force slip angle", tan(pi / (2 * C_SHAPE)) / B_STIFF)

    # Discrete model blocks at v = 10, beta = -0.6, kappa = 1/30, T = 0.05.
    v, beta, T = mpf(10), mpf("-0.6"), mpf("0.05")
    sb, cb = sin(beta), cos(beta)
    show("A_d[1][0]", kr * kr * vr * T)
    show("A_d[1][2]", -kr * T)
    show("B_d[1][0]", -sb / (M * v) * T)
    show("B_d[1][2]", cb / (M * v) * T)
    show("B_d[2][0]", cb / M * T)
    show("B_d[2][2]", sb / M * T)
    show("B_d[3][2]", A / I_Z * T)
    show("B_d[3][3]", -B_LEVER / I_Z * T)


if __name__ == "__main__":
    main()
