"""Gallery of the registered correlation kernels.

Shows scalar evaluation with formula-based diagonals, the 2x2 symplectic
blocks and their antisymmetry, the Ginibre plane kernel, growth envelopes
(the explicit constants feeding every bound), and the Bessel factorization.
Run:  python demos/02_kernel_gallery.py
"""

import math

import numpy as np

from dpptails import kernels
from dpptails.kernels import Interval

print("registry ids:", ", ".join(kernels.KERNEL_IDS))

print()
print("=" * 70)
print("scalar kernels")
print("=" * 70)
sine = kernels.make_kernel("sine")
airy = kernels.make_kernel("airy")
bessel = kernels.make_kernel("bessel:s=0.5")
print(f"  sine(0, 0.5)    = {kernels.eval_scalar(sine, 0.0, 0.5):.15f}")
print(f"  sine(x, x)      = {kernels.eval_scalar(sine, 3.3, 3.3)}")
print(f"  airy(0, 0)      = {kernels.eval_scalar(airy, 0.0, 0.0):.15f}  (= Ai'(0)^2)")
print(f"  bessel(1, 2)    = {kernels.eval_scalar(bessel, 1.0, 2.0):.15f}")
print(f"  intensity: sine -> {kernels.intensity(sine, 0.0)}, "
      f"sine4 -> {kernels.intensity(kernels.make_kernel('sine4'), 0.0)}, "
      f"ginibre -> {kernels.intensity(kernels.make_kernel('ginibre'), 1j):.6f}")

print()
print("=" * 70)
print("symplectic blocks: K(x,y) = -K(y,x)^T")
print("=" * 70)
sine4 = kernels.make_kernel("sine4")
block = kernels.eval_matrix(sine4, 0.0, 0.3)
print("  sine4 K(0, 0.3) =")
print(np.array2string(block, precision=10))
flipped = kernels.eval_matrix(sine4, 0.3, 0.0)
print(f"  antisymmetry residual: {np.max(np.abs(block + flipped.T)):.2e}")
airy4 = kernels.make_kernel("airy4")
diag = kernels.eval_matrix(airy4, 0.0, 0.0)
print(f"  airy4 diagonal block has zero corners: {diag[0, 0]:.2e}, {diag[1, 1]:.2e}")

print()
print("=" * 70)
print("growth envelopes |reduced(p, z)| <= A exp(M |z - p|^sigma)")
print("=" * 70)
for spec, win in ((sine, None), (bessel, Interval(0.25, 1.0)),
                  (airy, Interval(-1.0, 0.0))):
    env = kernels.growth_envelope(spec, win)
    where = f" on [{win.a}, {win.b}]" if win else ""
    print(f"  {spec.identifier:14s}{where}: A = {env.amplitude:.6f}, "
          f"M = {env.scale:.6f}, sigma = {env.order}")

print()
print("=" * 70)
print("Bessel factorization rho(x) rho(y) PiTilde(x, y)")
print("=" * 70)
fac = kernels.factorization(bessel, Interval(0.25, 1.0))
x, y = 0.4, 0.8
recon = fac.density_factor(x) * fac.density_factor(y) * fac.reduced_kernel(x, y)
print(f"  rho(0.4) = {fac.density_factor(x):.10f}, sup rho = {fac.sup_density:.10f}")
print(f"  reconstruction error at (0.4, 0.8): "
      f"{abs(recon - kernels.eval_scalar(bessel, x, y)):.2e}")

print()
print("Ginibre: |Pi(z, w)|^2 = exp(-|z-w|^2)/pi^2")
gin = kernels.make_kernel("ginibre")
z, w = 0.5 + 0.5j, -0.3 + 1.0j
lhs = abs(kernels.eval_complex(gin, z, w)) ** 2
print(f"  identity residual: {lhs - math.exp(-abs(z - w) ** 2) / math.pi ** 2:.2e}")
