"""Resolution studies for the numerical building blocks.

Prints three tables:
  1. Volterra solver error against the closed-form amplitude as the step halves
  2. gp_exact and its doubled-grid error estimate as the Simpson grid refines
  3. the weak-coupling ratio (Phi0 - Phi) / W^2 approaching its W -> 0 limit
"""

import argparse
import math
import warnings

import numpy as np

from nonmarkov_gp.amplitude import SystemParams, amplitude_analytic
from nonmarkov_gp.geometric_phase import gp_exact, gp_unitary, z_function
from nonmarkov_gp.numerics import QuadratureSettings, VolterraSettings, solve_volterra
from nonmarkov_gp.spectral import correlation_kernel

T = 2 * math.pi


def volterra_table(W, lam):
    p = SystemParams(W, lam, math.pi / 3)
    kern = correlation_kernel(p.spectral_density())
    print(f"\nVolterra vs closed form, W={W}, lambda={lam}")
    print(f"{'steps':>7} {'max|dc|':>12} {'ratio':>7}")
    prev = None
    for n in (256, 512, 1024, 2048, 4096, 8192):
        tr = solve_volterra(kern, 1.0, T, VolterraSettings(n))
        err = np.max(np.abs(tr.c_values - amplitude_analytic(p, tr.t_grid)))
        ratio = f"{prev / err:7.2f}" if prev else " " * 7
        print(f"{n:7d} {err:12.3e} {ratio}")
        prev = err


def quadrature_table(W, lam, theta0):
    p = SystemParams(W, lam, theta0)
    print(f"\ngp_exact vs Simpson intervals, W={W}, lambda={lam}, theta0={theta0:.4f}")
    print(f"{'n':>7} {'phi':>22} {'estimate':>12}")
    for n in (64, 256, 1024, 4096, 16384):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            est = gp_exact(p, QuadratureSettings(n))
        print(f"{n:7d} {est.value:22.16f} {est.error:12.3e}")


def weak_coupling_table(lam, theta0):
    ang = math.sin(theta0) ** 2 * (1 + math.cos(theta0) / 2)
    limit = ang * z_function(lam)
    print(f"\nweak-coupling ratio, lambda={lam}, theta0={theta0:.4f}, limit={limit:.6f}")
    print(f"{'W':>8} {'ratio':>12} {'rel.dev':>9}")
    for W in (0.2, 0.1, 0.05, 0.02, 0.01, 0.005):
        r = (gp_unitary(theta0) - gp_exact(SystemParams(W, lam, theta0)).value) / W**2
        print(f"{W:8.3f} {r:12.6f} {r / limit - 1:9.2%}")


def main():
    ap = argparse.ArgumentParser(description="resolution studies")
    ap.add_argument("--lambdas", type=float, nargs="+", default=[0.05, 1.0, 5.0])
    args = ap.parse_args()
    for lam in args.lambdas:
        volterra_table(0.2, lam)
    quadrature_table(0.5, 0.05, math.pi / 3)
    quadrature_table(0.5, 2.0, 0.0)  # step-like integrand: the estimate shrinks slowly
    for lam in args.lambdas:
        weak_coupling_table(lam, math.pi / 3)


if __name__ == "__main__":
    main()
