"""Contraction dichotomy, scalar and spectral
==========================================

First the one-dimensional picture: x = y - eta x^2 contracts on a ball
when 4 eta |y| < 1 and the Picard orbit lands on the quadratic root.
Push y past the threshold with the opposite sign convention and the
discriminant goes negative, there is no real fixed point, and the
iterates blow through the divergence guard.

Then the same story on the torus: a divergence-free random datum scaled
to half the calibrated threshold converges; the same shape scaled by 100
trips the guard within a few iterations.
"""

import numpy as np

from mildns import (
    CorpusSpec,
    DatumSpec,
    DivergenceError,
    QuadratureSpec,
    abstract_fixed_point,
    build_exponent_book,
    calibrate_thresholds,
    make_lattice,
    realize_datum,
    smallness_lhs,
    solve_mild,
)

eta, y = 1.0, 0.25
x, trace = abstract_fixed_point(y, lambda a, b: eta * a * b, eta, tol=1e-13)
root = (-1.0 + np.sqrt(1.0 + 4.0 * eta * y)) / (2.0 * eta)
print(f"scalar, y = {y}: x = {x:.15f} after {trace.iterations} iterations")
print(f"  quadratic root    {root:.15f}   (gap {abs(x - root):.2e})")

try:
    abstract_fixed_point(1.0, lambda a, b: -eta * a * b, eta, tol=1e-13)
except DivergenceError as exc:
    print(
        f"scalar, y = 1 with the sign flipped: diverged at iteration "
        f"{exc.trace.iterations}, last norms {[f'{v:.3g}' for v in exc.trace.norms[-3:]]}"
    )

print()
book = calibrate_thresholds(
    build_exponent_book(d=2, p=2.0, s=0.0, q_tilde=4.0), CorpusSpec(d=2, n=16)
)
lat = make_lattice(2, 32, 2.0 * np.pi)
raw = realize_datum(
    DatumSpec(kind="random_band", seed=5, k_min=1.0, k_max=4.0, divergence_free=True),
    lat,
)
horizon = 0.25
lhs = smallness_lhs(raw, horizon, book).lhs
small = (0.5 * book.delta / lhs) * raw
quad = QuadratureSpec(16, book.gamma_kato, book.alpha)

sol = solve_mild(small, horizon, book, mesh_nodes=16, quad=quad)
print(
    f"datum at delta/2: converged in {sol.trace.iterations} iterations, "
    f"max contraction ratio {max(sol.trace.ratios):.3f}"
)

try:
    solve_mild(
        100.0 * small, horizon, book, mesh_nodes=16, quad=quad, override_smallness=True
    )
except DivergenceError as exc:
    print(
        f"datum at 50 delta: divergence guard fired at iteration {exc.trace.iterations}"
    )
