"""Frozen reference values the suite asserts against, with their generators.

Every number here was produced by the integrators in the ``__main__`` block
at tolerances two or more orders tighter than any assertion that consumes
it, so a test failure points at the library and not at the reference.
Run ``python3 tests/oracles.py`` to regenerate and diff.
"""

import numpy as np

# Radii R(t) of shrinking round interfaces started at R = 1, from direct
# integration of dR/dt = -rate/R (rate: circle 1, sphere 2, one-curved
# cylinder section 1).  The closed-form law is sqrt(1 - 2*rate*t); keeping
# the integrated values decouples the tests from that formula.
ODE_RADII = {
    ("circle", 0.180): 0.7999999999999965,
    ("circle", 0.375): 0.4999999999999873,
    ("sphere", 0.050): 0.8944271909999151,
    ("sphere", 0.090): 0.7999999999999969,
    ("sphere", 0.100): 0.77459666924148,
    ("sphere", 0.150): 0.6324555320336687,
    ("sphere", 0.200): 0.4472135954999432,
    ("cyl_j1", 0.375): 0.4999999999999873,
}

# Gaussian density of the shrinking circle and sphere at their extinction
# points: sqrt(2*pi/e) and 4/e.
DENSITY_CIRCLE = 1.520346901066281
DENSITY_SPHERE = 1.4715177646857693

# Smallest ratio of past to base mean curvature over a unit-cylinder
# history probed 0.4*R^2 back in time: the earlier slice has radius
# sqrt(1 + 0.8), so the ratio bottoms out at 1/sqrt(1.8).  The largest
# ratio is 1, attained in the zero-depth limit.
HARNACK_CYL_MIN = 0.7453559924999299

# Rotationally symmetric translator umbrella on the unit disc, from the
# slope equation w' = -w/r - sqrt(1 - w^2)/eps integrated by shooting.
# Per eps: (center height u(0), sup |u - (1 - r^2)/2|).
TRANSLATOR_RADIAL = {
    0.4: (0.30523980948928026, 0.1947601905107197),
    0.2: (0.4113698009849509, 0.08863019901504904),
    0.1: (0.4705538972604332, 0.02944610273956677),
}

# Large-eps limit: eps = 10 is within 7.9e-5 of the torsion-function
# profile (1 - r^2)/4.
POISSON_EPS = 10.0
POISSON_CENTER = 0.25007814669884376
POISSON_SUP_GAP = 7.814669884381731e-05


def inside_revolved(profile, points) -> np.ndarray:
    """Membership oracle for the solid of revolution under a profile.

    A point (x, y, z) lies inside when x is strictly between the profile
    ends and hypot(y, z) is below the interpolated radius.  Uses only 1-D
    interpolation, independent of any distance-field construction.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    x, rho = pts[:, 0], np.hypot(pts[:, 1], pts[:, 2])
    r = np.interp(x, profile.x, profile.r, left=0.0, right=0.0)
    inner = (x > profile.x[0]) & (x < profile.x[-1])
    return inner & (rho < r)


def circle_pairs(n, seed=0):
    """Random distinct unit-circle points with outward normals."""
    rng = np.random.Generator(np.random.PCG64(seed))
    a = rng.uniform(0.0, 2.0 * np.pi, size=n)
    b = a + rng.uniform(1e-3, 2.0 * np.pi - 1e-3, size=n)
    x = np.stack([np.cos(a), np.sin(a)], axis=1)
    y = np.stack([np.cos(b), np.sin(b)], axis=1)
    return x, x.copy(), y


if __name__ == "__main__":
    from scipy.integrate import solve_ivp

    def radius_ode(rate, t):
        sol = solve_ivp(lambda s, y: [-rate / y[0]], (0.0, t), [1.0],
                        method="DOP853", rtol=1e-13, atol=1e-15)
        return float(sol.y[0, -1])

    rates = {"circle": 1.0, "sphere": 2.0, "cyl_j1": 1.0}
    for (name, t), frozen in ODE_RADII.items():
        val = radius_ode(rates[name], t)
        print("%-8s t=%.3f  %r  (frozen %r, diff %.1e)"
              % (name, t, val, frozen, abs(val - frozen)))

    def translator_radial(eps, r0=1e-8):
        def rhs(r, y):
            w = np.clip(y[0], -1.0 + 1e-15, 1.0 - 1e-15)
            return [-w / r - np.sqrt(1.0 - w * w) / eps,
                    eps * w / np.sqrt(1.0 - w * w)]
        sol = solve_ivp(rhs, (r0, 1.0), [-r0 / (2.0 * eps), 0.0],
                        method="DOP853", rtol=1e-12, atol=1e-14,
                        dense_output=True)
        rr = np.linspace(r0, 1.0, 4001)
        v = sol.sol(rr)[1]
        return v - v[-1], rr

    for eps, (center, gap) in TRANSLATOR_RADIAL.items():
        u, rr = translator_radial(eps)
        g = float(np.abs(u - (1.0 - rr ** 2) / 2.0).max())
        print("eps=%.1f  u(0)=%r (frozen %r)  gap=%r (frozen %r)"
              % (eps, float(u[0]), center, g, gap))

    u, rr = translator_radial(POISSON_EPS)
    g = float(np.abs(u - (1.0 - rr ** 2) / 4.0).max())
    print("eps=10   u(0)=%r (frozen %r)  poisson gap=%r (frozen %r)"
          % (float(u[0]), POISSON_CENTER, g, POISSON_SUP_GAP))

    print("density circle %r  sphere %r  harnack cyl min %r"
          % (float(np.sqrt(2.0 * np.pi / np.e)), float(4.0 / np.e),
             float(1.0 / np.sqrt(1.8))))
