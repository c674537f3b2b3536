"""Compiled grid kernels for the flow engines.

All hot loops live here as numba-jitted functions. Each kernel writes into a
preallocated output array and touches only interior nodes; the outermost node
ring is copied through unchanged (frozen far-field convention). If numba is
unavailable the kernels still run as plain Python, slowly but correctly.
"""

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - sandbox always has numba
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


@njit(cache=True)
def level_set_step_2d(phi, out, h, dt, gfloor2, kappa_cap):
    """One explicit Euler step of motion by mean curvature of all level sets.

    The update is dphi = dt * m with m = (tr(Hess) |g|^2 - g^T Hess g)/|g|^2,
    i.e. |grad phi| times the mean curvature of the level line, with the
    curvature clamped to +-kappa_cap and |grad phi|^2 floored at gfloor2.
    """
    n0, n1 = phi.shape
    inv2h = 1.0 / (2.0 * h)
    invh2 = 1.0 / (h * h)
    inv4h2 = 1.0 / (4.0 * h * h)
    for i in range(1, n0 - 1):
        for j in range(1, n1 - 1):
            c = phi[i, j]
            px = (phi[i + 1, j] - phi[i - 1, j]) * inv2h
            py = (phi[i, j + 1] - phi[i, j - 1]) * inv2h
            pxx = (phi[i + 1, j] - 2.0 * c + phi[i - 1, j]) * invh2
            pyy = (phi[i, j + 1] - 2.0 * c + phi[i, j - 1]) * invh2
            pxy = (phi[i + 1, j + 1] - phi[i + 1, j - 1]
                   - phi[i - 1, j + 1] + phi[i - 1, j - 1]) * inv4h2
            g2 = px * px + py * py
            if g2 < gfloor2:
                g2 = gfloor2
            num = pxx * py * py - 2.0 * pxy * px * py + pyy * px * px
            m = num / g2
            lim = kappa_cap * np.sqrt(g2)
            if m > lim:
                m = lim
            elif m < -lim:
                m = -lim
            out[i, j] = c + dt * m
    # linear extrapolation at the frame: a frozen frame falls behind the
    # moving far field and the kink feeds a spurious negative speed one cell
    # in, while copying increments inflates the frame until level lines close
    # around the box corners and collapse there
    for i in range(1, n0 - 1):
        out[i, 0] = 2.0 * out[i, 1] - out[i, 2]
        out[i, n1 - 1] = 2.0 * out[i, n1 - 2] - out[i, n1 - 3]
    for j in range(n1):
        out[0, j] = 2.0 * out[1, j] - out[2, j]
        out[n0 - 1, j] = 2.0 * out[n0 - 2, j] - out[n0 - 3, j]
    return out


@njit(cache=True)
def level_set_step_3d(phi, out, h, dt, gfloor2, kappa_cap):
    """3-D analogue of level_set_step_2d."""
    n0, n1, n2 = phi.shape
    inv2h = 1.0 / (2.0 * h)
    invh2 = 1.0 / (h * h)
    inv4h2 = 1.0 / (4.0 * h * h)
    for i in range(1, n0 - 1):
        for j in range(1, n1 - 1):
            for k in range(1, n2 - 1):
                c = phi[i, j, k]
                px = (phi[i + 1, j, k] - phi[i - 1, j, k]) * inv2h
                py = (phi[i, j + 1, k] - phi[i, j - 1, k]) * inv2h
                pz = (phi[i, j, k + 1] - phi[i, j, k - 1]) * inv2h
                pxx = (phi[i + 1, j, k] - 2.0 * c + phi[i - 1, j, k]) * invh2
                pyy = (phi[i, j + 1, k] - 2.0 * c + phi[i, j - 1, k]) * invh2
                pzz = (phi[i, j, k + 1] - 2.0 * c + phi[i, j, k - 1]) * invh2
                pxy = (phi[i + 1, j + 1, k] - phi[i + 1, j - 1, k]
                       - phi[i - 1, j + 1, k] + phi[i - 1, j - 1, k]) * inv4h2
                pxz = (phi[i + 1, j, k + 1] - phi[i + 1, j, k - 1]
                       - phi[i - 1, j, k + 1] + phi[i - 1, j, k - 1]) * inv4h2
                pyz = (phi[i, j + 1, k + 1] - phi[i, j + 1, k - 1]
                       - phi[i, j - 1, k + 1] + phi[i, j - 1, k - 1]) * inv4h2
                g2 = px * px + py * py + pz * pz
                if g2 < gfloor2:
                    g2 = gfloor2
                quad = (px * px * pxx + py * py * pyy + pz * pz * pzz
                        + 2.0 * (px * py * pxy + px * pz * pxz + py * pz * pyz))
                num = (pxx + pyy + pzz) * g2 - quad
                m = num / g2
                lim = kappa_cap * np.sqrt(g2)
                if m > lim:
                    m = lim
                elif m < -lim:
                    m = -lim
                out[i, j, k] = c + dt * m
    # linearly extrapolated frame faces, as in the 2-D kernel
    for i in range(1, n0 - 1):
        for j in range(1, n1 - 1):
            out[i, j, 0] = 2.0 * out[i, j, 1] - out[i, j, 2]
            out[i, j, n2 - 1] = 2.0 * out[i, j, n2 - 2] - out[i, j, n2 - 3]
    for i in range(1, n0 - 1):
        for k in range(n2):
            out[i, 0, k] = 2.0 * out[i, 1, k] - out[i, 2, k]
            out[i, n1 - 1, k] = 2.0 * out[i, n1 - 2, k] - out[i, n1 - 3, k]
    for j in range(n1):
        for k in range(n2):
            out[0, j, k] = 2.0 * out[1, j, k] - out[2, j, k]
            out[n0 - 1, j, k] = 2.0 * out[n0 - 2, j, k] - out[n0 - 3, j, k]
    return out


@njit(cache=True)
def reinit_sweep_2d(phi, out, sgn, pinned, target, h, dtau):
    """One Godunov relaxation sweep of |grad phi| = 1.

    sgn is the smoothed sign of the field at the start of reinitialization.
    Nodes flagged in `pinned` (interface-adjacent) relax toward their frozen
    linearized distances `target`, which pins the zero contour in place.
    """
    n0, n1 = phi.shape
    invh = 1.0 / h
    relax = dtau * invh
    for i in range(n0):
        out[i, 0] = phi[i, 0]
        out[i, n1 - 1] = phi[i, n1 - 1]
    for j in range(n1):
        out[0, j] = phi[0, j]
        out[n0 - 1, j] = phi[n0 - 1, j]
    for i in range(1, n0 - 1):
        for j in range(1, n1 - 1):
            c = phi[i, j]
            if pinned[i, j]:
                out[i, j] = c + relax * (target[i, j] - c)
                continue
            s = sgn[i, j]
            a = (c - phi[i - 1, j]) * invh
            b = (phi[i + 1, j] - c) * invh
            cc = (c - phi[i, j - 1]) * invh
            d = (phi[i, j + 1] - c) * invh
            if s > 0.0:
                am = a if a > 0.0 else 0.0
                bm = b if b < 0.0 else 0.0
                cm = cc if cc > 0.0 else 0.0
                dm = d if d < 0.0 else 0.0
            else:
                am = a if a < 0.0 else 0.0
                bm = b if b > 0.0 else 0.0
                cm = cc if cc < 0.0 else 0.0
                dm = d if d > 0.0 else 0.0
            gx2 = max(am * am, bm * bm)
            gy2 = max(cm * cm, dm * dm)
            g = np.sqrt(gx2 + gy2)
            out[i, j] = c - dtau * s * (g - 1.0)
    return out


@njit(cache=True)
def reinit_sweep_3d(phi, out, sgn, pinned, target, h, dtau):
    """3-D analogue of reinit_sweep_2d."""
    n0, n1, n2 = phi.shape
    invh = 1.0 / h
    relax = dtau * invh
    for i in range(n0):
        for j in range(n1):
            out[i, j, 0] = phi[i, j, 0]
            out[i, j, n2 - 1] = phi[i, j, n2 - 1]
    for i in range(n0):
        for k in range(n2):
            out[i, 0, k] = phi[i, 0, k]
            out[i, n1 - 1, k] = phi[i, n1 - 1, k]
    for j in range(n1):
        for k in range(n2):
            out[0, j, k] = phi[0, j, k]
            out[n0 - 1, j, k] = phi[n0 - 1, j, k]
    for i in range(1, n0 - 1):
        for j in range(1, n1 - 1):
            for k in range(1, n2 - 1):
                c = phi[i, j, k]
                if pinned[i, j, k]:
                    out[i, j, k] = c + relax * (target[i, j, k] - c)
                    continue
                s = sgn[i, j, k]
                a = (c - phi[i - 1, j, k]) * invh
                b = (phi[i + 1, j, k] - c) * invh
                cc = (c - phi[i, j - 1, k]) * invh
                d = (phi[i, j + 1, k] - c) * invh
                e = (c - phi[i, j, k - 1]) * invh
                f = (phi[i, j, k + 1] - c) * invh
                if s > 0.0:
                    am = a if a > 0.0 else 0.0
                    bm = b if b < 0.0 else 0.0
                    cm = cc if cc > 0.0 else 0.0
                    dm = d if d < 0.0 else 0.0
                    em = e if e > 0.0 else 0.0
                    fm = f if f < 0.0 else 0.0
                else:
                    am = a if a < 0.0 else 0.0
                    bm = b if b > 0.0 else 0.0
                    cm = cc if cc < 0.0 else 0.0
                    dm = d if d > 0.0 else 0.0
                    em = e if e < 0.0 else 0.0
                    fm = f if f > 0.0 else 0.0
                gx2 = max(am * am, bm * bm)
                gy2 = max(cm * cm, dm * dm)
                gz2 = max(em * em, fm * fm)
                g = np.sqrt(gx2 + gy2 + gz2)
                out[i, j, k] = c - dtau * s * (g - 1.0)
    return out


@njit(cache=True)
def axisym_step(r, out, lo, hi, dx, dt, nm2, periodic):
    """One explicit Euler step of r_t = r_xx/(1 + r_x^2) - (N-2)/r.

    Active nodes are lo..hi inclusive. For capped profiles the cap nodes lo
    and hi are pinned at r = 0 (odd-reflection convention) and only interior
    nodes move; for periodic profiles all nodes move with wrapped stencils.
    """
    n = r.shape[0]
    invdx2 = 1.0 / (dx * dx)
    inv2dx = 1.0 / (2.0 * dx)
    for i in range(n):
        out[i] = r[i]
    if periodic:
        # last node duplicates the first; treat nodes 0..n-2 as the period
        m = n - 1
        for i in range(m):
            im = i - 1 if i > 0 else m - 1
            ip = i + 1 if i < m - 1 else 0
            rxx = (r[im] - 2.0 * r[i] + r[ip]) * invdx2
            rx = (r[ip] - r[im]) * inv2dx
            out[i] = r[i] + dt * (rxx / (1.0 + rx * rx) - nm2 / r[i])
        out[m] = out[0]
    else:
        for i in range(lo + 1, hi):
            rxx = (r[i - 1] - 2.0 * r[i] + r[i + 1]) * invdx2
            rx = (r[i + 1] - r[i - 1]) * inv2dx
            out[i] = r[i] + dt * (rxx / (1.0 + rx * rx) - nm2 / r[i])
    return out
