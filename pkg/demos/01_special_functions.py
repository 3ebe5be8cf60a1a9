"""Tour of the self-contained special-function layer.

Every other capability is built on these routines: the sinc family for the
sine kernels, Bessel and Airy evaluation for their kernels, the incomplete
gamma ratio for the Ginibre disk spectrum, and Gauss-Legendre rules for all
quadrature.  Run:  python demos/01_special_functions.py
"""

import math

import numpy as np

from dpptails import specfun as sf

print("=" * 70)
print("sinc family")
print("=" * 70)
print(f"  sinc(0)      = {sf.sinc(0.0)}   (removable singularity)")
print(f"  sinc(1/2)    = {sf.sinc(0.5):.15f}  vs 2/pi = {2 / math.pi:.15f}")
print(f"  IS(1)        = {sf.sinc_antiderivative(1.0):.15f}")
print(f"  IS(-1)       = {sf.sinc_antiderivative(-1.0):.15f}  (odd)")
print(f"  DS(1/2)      = {sf.sinc_derivative(0.5):.15f}  vs -4/pi = {-4 / math.pi:.15f}")

print()
print("=" * 70)
print("Bessel J_nu by the double-double ascending series")
print("=" * 70)
for nu, x in ((0.0, 1.0), (0.5, 10.0), (2.0, 5.0)):
    print(f"  J_{nu}({x}) = {sf.bessel_j(nu, x):+.15e}")
x = 10.0
closed = math.sqrt(2.0 / (math.pi * x)) * math.sin(x)
print(f"  half-integer closed form at x={x}: error = "
      f"{abs(sf.bessel_j(0.5, x) - closed):.2e}")

print()
print("=" * 70)
print("Airy Ai / Ai' with the series-asymptotics split at |x| = 9")
print("=" * 70)
for x in (-10.0, -1.0, 0.0, 1.0, 12.0):
    print(f"  Ai({x:+6.1f}) = {sf.airy_ai(x):+.15e}   Ai'({x:+6.1f}) = "
          f"{sf.airy_ai_prime(x):+.15e}")
h = 1e-3
x = -3.0
vals = [sf.airy_ai(x + k * h) for k in (-2, -1, 0, 1, 2)]
second = (-vals[0] + 16 * vals[1] - 30 * vals[2] + 16 * vals[3] - vals[4]) / (12 * h * h)
print(f"  ODE residual Ai''(-3) - (-3)Ai(-3) = {second - x * vals[2]:.2e}")
print(f"  int_0^inf Ai = {sf.airy_tail_integral(0.0):.15f}  (exactly 1/3)")

print()
print("=" * 70)
print("incomplete gamma ratio and Gauss-Legendre rules")
print("=" * 70)
print(f"  gamma(1, 1)/0!  = {sf.incomplete_gamma_ratio(0, 1.0):.15f} "
      f"vs 1 - 1/e = {1 - math.exp(-1):.15f}")
rule = sf.gauss_legendre(12, 0.0, 2.0)
print(f"  12-point rule on [0,2]: sum w = {float(np.sum(rule.weights)):.15f}")
print(f"  integrates x^22 with error "
      f"{float(np.sum(rule.weights * rule.nodes ** 22)) - 2.0 ** 23 / 23:.2e}")
