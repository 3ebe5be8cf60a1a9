import math

import numpy as np
import pytest

from dpptails import exact, kernels, specfun
from dpptails.kernels import Interval
from dpptails.specfun import DomainError


SINE = kernels.make_kernel("sine")
AIRY = kernels.make_kernel("airy")
BESSEL_HALF = kernels.make_kernel("bessel:s=0.5")
BESSEL2 = kernels.make_kernel("bessel:s=2")
SINE4 = kernels.make_kernel("sine4")
AIRY4 = kernels.make_kernel("airy4")
GINIBRE = kernels.make_kernel("ginibre")


def test_registry():
    assert SINE.block_size == 1 and SINE4.block_size == 2
    assert BESSEL_HALF.bessel_s == 0.5
    with pytest.raises(DomainError):
        kernels.make_kernel("bessel:s=-1.5")
    with pytest.raises(DomainError):
        kernels.make_kernel("heat")


def test_interval_validation():
    with pytest.raises(ValueError):
        Interval(1.0, 1.0)
    assert Interval(0.0, 2.5).length == 2.5


# ---------------------------------------------------------------------------
# scalar evaluation
# ---------------------------------------------------------------------------

def test_sine_diagonal():
    for x in (-3.2, 0.0, 11.7):
        assert kernels.eval_scalar(SINE, x, x) == 1.0


def test_sine_value():
    assert kernels.eval_scalar(SINE, 0.0, 0.5) == pytest.approx(2.0 / math.pi, rel=1e-14)


def test_airy_diagonal_richardson_oracle():
    # diagonal vs the small-offset limit, Richardson-extrapolated in h
    x = 0.25
    diag = kernels.eval_scalar(AIRY, x, x)
    v3 = kernels.eval_scalar(AIRY, x, x + 1e-3)
    v4 = kernels.eval_scalar(AIRY, x, x + 1e-4)
    extrap = v4 + (v4 - v3) / 9.0
    assert abs(extrap - diag) < 1e-7
    v5 = kernels.eval_scalar(AIRY, x, x + 1e-5)
    assert abs(v5 - diag) < 1e-5


def test_scalar_symmetry_random_pairs():
    rng = np.random.default_rng(3)
    for spec, lo, hi in ((SINE, -5.0, 5.0), (AIRY, -6.0, 2.0), (BESSEL_HALF, 0.1, 6.0)):
        for _ in range(50):
            x, y = rng.uniform(lo, hi, 2)
            assert abs(kernels.eval_scalar(spec, x, y)
                       - kernels.eval_scalar(spec, y, x)) <= 1e-12


def test_psd_two_point_minors():
    rng = np.random.default_rng(4)
    for spec, lo, hi in ((SINE, -4.0, 4.0), (AIRY, -5.0, 1.0), (BESSEL2, 0.2, 5.0)):
        for _ in range(40):
            x, y = rng.uniform(lo, hi, 2)
            kxx = kernels.eval_scalar(spec, x, x)
            kyy = kernels.eval_scalar(spec, y, y)
            kxy = kernels.eval_scalar(spec, x, y)
            assert kxx * kyy - kxy * kxy >= -1e-10


def test_bessel_domain_error():
    with pytest.raises(DomainError):
        kernels.eval_scalar(BESSEL_HALF, 0.0, 1.0)
    with pytest.raises(DomainError):
        kernels.eval_scalar(BESSEL_HALF, -0.5, 1.0)


# ---------------------------------------------------------------------------
# matrix kernels
# ---------------------------------------------------------------------------

def test_sine4_diagonal_block():
    block = kernels.eval_matrix(SINE4, 1.3, 1.3)
    assert np.allclose(block, [[0.0, 0.5], [-0.5, 0.0]], atol=1e-15)


def test_sine4_offdiagonal_entry():
    block = kernels.eval_matrix(SINE4, 0.0, 0.3)
    assert block[0, 1] == pytest.approx(specfun.sinc(0.3) / 2.0, rel=1e-14)


def test_matrix_antisymmetry_random_pairs():
    rng = np.random.default_rng(5)
    for _ in range(20):
        x, y = rng.uniform(-2.0, 2.0, 2)
        m1 = kernels.eval_matrix(SINE4, x, y)
        m2 = kernels.eval_matrix(SINE4, y, x)
        assert np.max(np.abs(m1 + m2.T)) < 1e-10
    for _ in range(6):
        x, y = rng.uniform(-2.0, 1.0, 2)
        m1 = kernels.eval_matrix(AIRY4, x, y)
        m2 = kernels.eval_matrix(AIRY4, y, x)
        assert np.max(np.abs(m1 + m2.T)) < 1e-10


def test_airy4_22_entry_fd_oracle():
    # (2,2) entry at the diagonal: (1/2) d/dy A(0,0) + (1/4) Ai(0)^2 with the
    # derivative estimated by central differences
    h = 1e-4
    dy = (kernels.eval_scalar(AIRY, 0.0, h) - kernels.eval_scalar(AIRY, 0.0, -h)) / (2 * h)
    expected = 0.5 * dy + 0.25 * specfun.airy_ai(0.0) ** 2
    block = kernels.eval_matrix(AIRY4, 0.0, 0.0)
    assert block[1, 1] == pytest.approx(expected, abs=1e-7)


# ---------------------------------------------------------------------------
# Ginibre
# ---------------------------------------------------------------------------

def test_ginibre_constant_intensity():
    for z in (0.0, 1.0 + 2.0j, -3.0j):
        assert kernels.eval_complex(GINIBRE, z, z) == pytest.approx(1.0 / math.pi, rel=1e-14)


def test_ginibre_center_value():
    w = 1.5 - 0.5j
    expected = (1.0 / math.pi) * math.exp(-abs(w) ** 2 / 2.0)
    assert kernels.eval_complex(GINIBRE, 0.0, w) == pytest.approx(expected, rel=1e-13)


def test_ginibre_modulus_identity():
    rng = np.random.default_rng(6)
    for _ in range(30):
        z = complex(*rng.uniform(-2, 2, 2))
        w = complex(*rng.uniform(-2, 2, 2))
        lhs = abs(kernels.eval_complex(GINIBRE, z, w)) ** 2
        rhs = math.exp(-abs(z - w) ** 2) / math.pi ** 2
        assert lhs == pytest.approx(rhs, rel=1e-12)


def test_ginibre_hermitian():
    z, w = 0.4 + 1.1j, -0.7 + 0.2j
    assert kernels.eval_complex(GINIBRE, z, w) == pytest.approx(
        np.conj(kernels.eval_complex(GINIBRE, w, z)), rel=1e-14)


def test_ginibre_radius_error():
    with pytest.raises(DomainError):
        kernels.eval_complex(GINIBRE, 13.0, 0.0)


# ---------------------------------------------------------------------------
# growth envelopes
# ---------------------------------------------------------------------------

def test_sine_envelope_constants():
    env = kernels.growth_envelope(SINE)
    assert env.order == 1.0
    assert env.amplitude == 1.0 and env.scale == math.pi


def test_sine_envelope_series_majorization():
    # |sinc(w)| <= sum (pi |w|)^{2k}/(2k+1)! <= e^{pi |w|} on a |w| grid
    for r in np.linspace(0.0, 6.0, 25):
        u = math.pi * r
        total, term = 0.0, 1.0
        k = 0
        while term > 1e-18 * max(total, 1.0):
            total += term
            k += 1
            term = u ** (2 * k) / math.factorial(2 * k + 1)
        assert total <= math.exp(u) * (1.0 + 1e-12)
        assert abs(specfun.sinc(r)) <= total + 1e-12


def test_airy_envelope_order():
    env = kernels.growth_envelope(AIRY, Interval(-1.0, 0.0))
    assert env.order == 1.5


def test_envelope_needs_window():
    with pytest.raises(ValueError):
        kernels.growth_envelope(AIRY)


def test_envelope_realaxis_probe():
    # |reduced(p, p+t)| <= A e^{M |t|^sigma} at 100 random real (p, t)
    rng = np.random.default_rng(7)
    cases = [
        (SINE, Interval(0.0, 1.0), -8.0, 8.0),
        (BESSEL_HALF, Interval(0.25, 1.0), -0.2, 6.0),
        (AIRY, Interval(-1.0, 0.0), -8.0, 8.0),
    ]
    for spec, win, tlo, thi in cases:
        env = kernels.growth_envelope(spec, win)
        fac = kernels.factorization(spec, win)
        for _ in range(100):
            p = rng.uniform(win.a, win.b)
            t = rng.uniform(tlo, thi)
            z = p + t
            if spec.kind == "bessel" and z <= 0:
                continue
            if spec.kind == "airy" and not (-20.0 < z < 15.0):
                continue
            val = abs(fac.reduced_kernel(p, z))
            assert val <= env.amplitude * math.exp(env.scale * abs(t) ** env.order)


# ---------------------------------------------------------------------------
# factorization
# ---------------------------------------------------------------------------

def test_sine_factorization_trivial():
    fac = kernels.factorization(SINE, Interval(0.0, 1.0))
    assert fac.sup_density == 1.0
    assert fac.density_factor(0.3) == 1.0


def test_bessel_factorization_sup_monotone():
    fac = kernels.factorization(BESSEL2, Interval(1.0, 4.0))
    assert fac.sup_density == pytest.approx(1.0, rel=1e-14)  # (4/4)^1
    assert fac.density_factor(2.0) == pytest.approx(0.5, rel=1e-14)


@pytest.mark.parametrize("s", [0.5, -0.5])
def test_bessel_reconstruction_oracle(s):
    # rho(x) rho(y) PiTilde(x, y) vs the classical ratio formula built from bessel_j;
    # s < 0 exercises the open-half-line-only branch
    spec = kernels.make_kernel(f"bessel:s={s}")
    fac = kernels.factorization(spec, Interval(0.25, 1.0))
    rng = np.random.default_rng(8)
    for _ in range(20):
        x, y = rng.uniform(0.25, 1.0, 2)
        if abs(x - y) < 1e-3:
            continue
        direct = (math.sqrt(x) * specfun.bessel_j(s + 1, math.sqrt(x))
                  * specfun.bessel_j(s, math.sqrt(y))
                  - math.sqrt(y) * specfun.bessel_j(s + 1, math.sqrt(y))
                  * specfun.bessel_j(s, math.sqrt(x))) / (2.0 * (x - y))
        mine = fac.density_factor(x) * fac.density_factor(y) * fac.reduced_kernel(x, y)
        assert mine == pytest.approx(direct, abs=1e-9)


def test_factorization_reconstruction_invariant():
    rng = np.random.default_rng(9)
    for spec, win in ((SINE, Interval(0.0, 1.0)), (BESSEL2, Interval(1.0, 4.0))):
        fac = kernels.factorization(spec, win)
        for _ in range(30):
            x, y = rng.uniform(win.a, win.b, 2)
            recon = fac.density_factor(x) * fac.density_factor(y) * fac.reduced_kernel(x, y)
            direct = kernels.eval_scalar(spec, x, y)
            assert recon == pytest.approx(direct, rel=1e-9, abs=1e-12)


def test_bessel_factorization_window_errors():
    with pytest.raises(DomainError):
        kernels.factorization(BESSEL_HALF, Interval(0.0, 1.0))
    neg = kernels.make_kernel("bessel:s=-0.5")
    with pytest.raises(DomainError):
        kernels.factorization(neg, Interval(0.0, 1.0))
    # s = 0 tolerates a window touching the origin (rho is constant 1)
    zero = kernels.make_kernel("bessel:s=0")
    fac = kernels.factorization(zero, Interval(0.0, 1.0))
    assert fac.sup_density == 1.0


# ---------------------------------------------------------------------------
# intensity
# ---------------------------------------------------------------------------

def test_intensity_sine():
    assert kernels.intensity(SINE, 2.2) == 1.0


def test_intensity_sine4_pfaffian_crosscheck():
    v = kernels.intensity(SINE4, 0.7)
    assert v == pytest.approx(0.5, rel=1e-14)
    block = kernels.eval_matrix(SINE4, 0.7, 0.7)
    assert exact.pfaffian(block) == pytest.approx(v, rel=1e-14)


def test_intensity_ginibre():
    assert kernels.intensity(GINIBRE, 1.0 + 1.0j) == pytest.approx(1.0 / math.pi, rel=1e-15)


# ---------------------------------------------------------------------------
# vectorized Gram path
# ---------------------------------------------------------------------------

def test_kernel_matrix_matches_scalar_eval():
    rng = np.random.default_rng(10)
    for spec, lo, hi in ((SINE, -1.0, 1.0), (AIRY, -2.0, 0.5), (BESSEL_HALF, 0.3, 2.0)):
        xs = np.sort(rng.uniform(lo, hi, 12))
        gram = kernels.kernel_matrix(spec, xs)
        for i in range(12):
            for j in range(12):
                assert gram[i, j] == pytest.approx(
                    kernels.eval_scalar(spec, xs[i], xs[j]), rel=1e-12, abs=1e-13)
