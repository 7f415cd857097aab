"""Hot numeric kernels.

Everything here is straight-line arithmetic that works on scalars (the numba
path, one curve at a time) and on numpy arrays (the fallback path, all
curves at once). Set ``SIGCHANGE_DISABLE_NUMBA=1`` to force the fallback.
"""

import os

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None

HAVE_NUMBA = njit is not None
USE_NUMBA = HAVE_NUMBA and os.environ.get("SIGCHANGE_DISABLE_NUMBA", "0") in ("", "0")

MODEL_FLAT = 0
MODEL_ROTATING = 1
MODEL_CROSSCAP = 2

TOPO_PLANE = 0
TOPO_MOBIUS_INF = 1
TOPO_MOBIUS_COMPACT = 2
TOPO_RP2 = 3

STATUS_COMPLETED = 0
STATUS_HIT_DEGENERACY = 1
STATUS_LEFT_WINDOW = 2
STATUS_STEP_FAILURE = 3

# canonicalization result codes
CANON_OK = 0
CANON_OFF_EDGE = 1  # left through a non-identified boundary
CANON_TOO_DEEP = 2  # needs more than one germ per edge

# seam crossing bits
# a failed step counts as running into the degeneracy locus when |det| shrank
# by more than this fraction over the step (or a stage landed on the locus)
DEG_APPROACH = 1e-3

SEAM_X = 1
SEAM_T = 2

RP2_HALF = np.sqrt(2.0)


def preset_metric(model, a, t, x):
    """Components and first partials of a preset metric.

    Returns (gtt, gtx, gxx, dt_gtt, dt_gtx, dt_gxx, dx_gtt, dx_gtx, dx_gxx).
    """
    z = 0.0 * t + 0.0 * x
    if model == MODEL_ROTATING:
        c = np.cos(2.0 * a * x) + z
        s = np.sin(2.0 * a * x) + z
        return (-c, s, c, z, z, z, 2.0 * a * s, 2.0 * a * c, -2.0 * a * s)
    if model == MODEL_CROSSCAP:
        return (
            1.0 - t * t + z,
            t * x + z,
            1.0 - x * x + z,
            -2.0 * t + z,
            x + z,
            z,
            z,
            t + z,
            -2.0 * x + z,
        )
    one = 1.0 + z
    return (-one, z, one, z, z, z, z, z, z)


def christoffel(gtt, gtx, gxx, att, atx, axx, btt, btx, bxx):
    """Levi-Civita symbols from components and partials (a* = d_t, b* = d_x).

    Returns (G^t_tt, G^t_tx, G^t_xx, G^x_tt, G^x_tx, G^x_xx).
    """
    # first kind: L_a,bc = (d_b g_ac + d_c g_ab - d_a g_bc) / 2
    lt_tt = 0.5 * att
    lt_tx = 0.5 * btt
    lt_xx = btx - 0.5 * axx
    lx_tt = atx - 0.5 * btt
    lx_tx = 0.5 * axx
    lx_xx = 0.5 * bxx
    det = gtt * gxx - gtx * gtx
    itt = gxx / det
    itx = -gtx / det
    ixx = gtt / det
    return (
        itt * lt_tt + itx * lx_tt,
        itt * lt_tx + itx * lx_tx,
        itt * lt_xx + itx * lx_xx,
        itx * lt_tt + ixx * lx_tt,
        itx * lt_tx + ixx * lx_tx,
        itx * lt_xx + ixx * lx_xx,
    )


def geodesic_accel(gam, vt, vx):
    g_ttt, g_ttx, g_txx, g_xtt, g_xtx, g_xxx = gam
    at = -(g_ttt * vt * vt + 2.0 * g_ttx * vt * vx + g_txx * vx * vx)
    ax = -(g_xtt * vt * vt + 2.0 * g_xtx * vt * vx + g_xxx * vx * vx)
    return at, ax


def canonicalize(topo, t, x):
    """Map raw chart coordinates into the fundamental domain.

    Returns (t, x, jt, jx, seam_bits, code). The deck differential is always
    diagonal, diag(jt, jx).
    """
    one = 1.0 + 0.0 * t + 0.0 * x
    if topo == TOPO_MOBIUS_INF or topo == TOPO_MOBIUS_COMPACT:
        k = np.floor(x)
        xc = x - k
        extra = (xc >= 1.0) * 1.0
        xc = xc - extra
        k = k + extra
        odd = k - 2.0 * np.floor(0.5 * k)
        sgn = 1.0 - 2.0 * odd
        if topo == TOPO_MOBIUS_INF:
            tc = sgn * t
            code = 0.0 * one
        else:
            tc = t + odd * (1.0 - 2.0 * t)
            code = ((t < 0.0) | (t > 1.0)) * float(CANON_OFF_EDGE)
        bits = (k != 0.0) * float(SEAM_X)
        return tc, xc, sgn * one, one, bits, code
    if topo == TOPO_RP2:
        r = RP2_HALF
        span = 2.0 * r
        below = (x < -r) * 1.0
        above = (x >= r) * 1.0
        flip_x = below + above
        x1 = x + span * (below - above)
        t1 = t * (1.0 - 2.0 * flip_x)
        below_t = (t1 < -r) * 1.0
        above_t = (t1 >= r) * 1.0
        flip_t = below_t + above_t
        t2 = t1 + span * (below_t - above_t)
        x2 = x1 * (1.0 - 2.0 * flip_t)
        inside = (t2 >= -r) & (t2 < r) & (x2 >= -r) & (x2 < r)
        code = (1.0 - inside * 1.0) * float(CANON_TOO_DEEP)
        bits = flip_x * float(SEAM_X) + flip_t * float(SEAM_T)
        return t2, x2, (1.0 - 2.0 * flip_x) * one, (1.0 - 2.0 * flip_t) * one, bits, code
    return t * one, x * one, one, one, 0.0 * one, 0.0 * one


# -- numpy path: vectorized over curves --------------------------------------


def integrate_batch_numpy(geom, topo, states, dlam, nsteps, window, deg_stop, norm_guard, energy_guard=False):
    """Fixed-step RK4 for a batch of geodesics.

    ``geom(t, x)`` returns the 9-tuple of ``preset_metric``. ``states`` has
    shape (n, 4) with rows (t, x, vt, vx). Returns (traj, seams, n_rec, status)
    where traj is (n, nsteps + 1, 4), seams (n, nsteps + 1) seam bits.

    A step is rejected when g(v, v), and with ``energy_guard`` also
    g(d_t, v), drifts from its starting value by more than
    ``norm_guard * max(1, |start|)``.
    """
    states = np.array(states, dtype=float)
    n = states.shape[0]
    traj = np.full((n, nsteps + 1, 4), np.nan)
    seams = np.zeros((n, nsteps + 1), dtype=np.int64)
    status = np.full(n, STATUS_COMPLETED, dtype=np.int64)
    n_rec = np.ones(n, dtype=np.int64)
    traj[:, 0] = states
    active = np.ones(n, dtype=bool)
    use_e = 1.0 if energy_guard else 0.0

    def rhs(s):
        g = geom(s[:, 0], s[:, 1])
        gam = christoffel(*g)
        at, ax = geodesic_accel(gam, s[:, 2], s[:, 3])
        return np.stack([s[:, 2], s[:, 3], at, ax], axis=1), g[0] * g[2] - g[1] * g[1]

    def invariants(s):
        g = geom(s[:, 0], s[:, 1])
        gtt, gtx, gxx = g[0], g[1], g[2]
        vt, vx = s[:, 2], s[:, 3]
        det = gtt * gxx - gtx * gtx
        return det, gtt * vt * vt + 2.0 * gtx * vt * vx + gxx * vx * vx, gtt * vt + gtx * vx

    cur_det, norm0, e0 = invariants(states)
    cur = states.copy()
    for step in range(1, nsteps + 1):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        s = cur[idx]
        with np.errstate(all="ignore"):
            k1, _ = rhs(s)
            k2, d2 = rhs(s + 0.5 * dlam * k1)
            k3, d3 = rhs(s + 0.5 * dlam * k2)
            k4, d4 = rhs(s + dlam * k3)
            new = s + (dlam / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            tc, xc, jt, jx, bits, code = canonicalize(topo, new[:, 0], new[:, 1])
            new = np.stack([tc, xc, jt * new[:, 2], jx * new[:, 3]], axis=1)
            det, norm, energy = invariants(new)
            bad = ~np.all(np.isfinite(new), axis=1)
            off = code == CANON_OFF_EDGE
            deep = code == CANON_TOO_DEEP
            outside = ~((new[:, 0] >= window[0]) & (new[:, 0] <= window[1]) & (new[:, 1] >= window[2]) & (new[:, 1] <= window[3]))
            prev = cur_det[idx]
            degenerate = (np.abs(det) < deg_stop) | (det * prev < 0.0)
            # a stage that lands on or past the locus, or a step over which |det|
            # collapses, means the trouble comes from the degeneracy locus
            sgn = np.sign(prev)
            stage_min = np.minimum(np.minimum(d2 * sgn, d3 * sgn), d4 * sgn)
            shrink = (np.abs(prev) - np.abs(det)) / np.abs(prev)
            touched = ~(stage_min > deg_stop) | (shrink > DEG_APPROACH)
            # a deck map need not be an isometry, so invariants are re-based after a seam
            crossed = bits != 0
            n_ref = np.where(crossed, norm, norm0[idx])
            e_ref = np.where(crossed, energy, e0[idx])
            drift = (np.abs(norm - n_ref) > norm_guard * np.maximum(1.0, np.abs(n_ref))) | (
                use_e * np.abs(energy - e_ref) > norm_guard * np.maximum(1.0, np.abs(e_ref))
            )
        stop = np.full(idx.size, -1, dtype=np.int64)
        # precedence: first matching condition wins
        for mask, code_ in (
            (deep, STATUS_STEP_FAILURE),
            (bad & touched, STATUS_HIT_DEGENERACY),
            (bad, STATUS_STEP_FAILURE),
            (off | outside, STATUS_LEFT_WINDOW),
            (degenerate | (drift & touched), STATUS_HIT_DEGENERACY),
            (drift, STATUS_STEP_FAILURE),
        ):
            stop = np.where((stop < 0) & mask, code_, stop)
        ok = stop < 0
        good = idx[ok]
        traj[good, step] = new[ok]
        seams[good, step] = bits[ok].astype(np.int64)
        n_rec[good] = step + 1
        cur[good] = new[ok]
        cur_det[good] = det[ok]
        norm0[good] = n_ref[ok]
        e0[good] = e_ref[ok]
        halted = idx[~ok]
        status[halted] = stop[~ok]
        active[halted] = False
    return traj, seams, n_rec, status


# -- numba path: one curve at a time ----------------------------------------


def _jit(fn):
    return njit(cache=True)(fn) if HAVE_NUMBA else fn


metric_nb = _jit(preset_metric)
christoffel_nb = _jit(christoffel)
canon_nb = _jit(canonicalize)


@_jit
def _rhs_nb(model, a, t, x, vt, vx):
    g = metric_nb(model, a, t, x)
    gam = christoffel_nb(g[0], g[1], g[2], g[3], g[4], g[5], g[6], g[7], g[8])
    at = -(gam[0] * vt * vt + 2.0 * gam[1] * vt * vx + gam[2] * vx * vx)
    ax = -(gam[3] * vt * vt + 2.0 * gam[4] * vt * vx + gam[5] * vx * vx)
    return at, ax, g[0] * g[2] - g[1] * g[1]


@_jit
def _invariants_nb(model, a, t, x, vt, vx):
    g = metric_nb(model, a, t, x)
    det = g[0] * g[2] - g[1] * g[1]
    return det, g[0] * vt * vt + 2.0 * g[1] * vt * vx + g[2] * vx * vx, g[0] * vt + g[1] * vx


@_jit
def _integrate_nb(model, a, topo, states, dlam, nsteps, window, deg_stop, norm_guard, use_e):
    n = states.shape[0]
    traj = np.full((n, nsteps + 1, 4), np.nan)
    seams = np.zeros((n, nsteps + 1), dtype=np.int64)
    status = np.zeros(n, dtype=np.int64)
    n_rec = np.ones(n, dtype=np.int64)
    h = dlam
    for i in range(n):
        t, x, vt, vx = states[i, 0], states[i, 1], states[i, 2], states[i, 3]
        traj[i, 0, 0] = t
        traj[i, 0, 1] = x
        traj[i, 0, 2] = vt
        traj[i, 0, 3] = vx
        det_prev, norm0, e0 = _invariants_nb(model, a, t, x, vt, vx)
        for step in range(1, nsteps + 1):
            a1t, a1x, _ = _rhs_nb(model, a, t, x, vt, vx)
            t2, x2, vt2, vx2 = t + 0.5 * h * vt, x + 0.5 * h * vx, vt + 0.5 * h * a1t, vx + 0.5 * h * a1x
            a2t, a2x, d2 = _rhs_nb(model, a, t2, x2, vt2, vx2)
            t3, x3, vt3, vx3 = t + 0.5 * h * vt2, x + 0.5 * h * vx2, vt + 0.5 * h * a2t, vx + 0.5 * h * a2x
            a3t, a3x, d3 = _rhs_nb(model, a, t3, x3, vt3, vx3)
            t4, x4, vt4, vx4 = t + h * vt3, x + h * vx3, vt + h * a3t, vx + h * a3x
            a4t, a4x, d4 = _rhs_nb(model, a, t4, x4, vt4, vx4)
            nt = t + h / 6.0 * (vt + 2.0 * vt2 + 2.0 * vt3 + vt4)
            nx = x + h / 6.0 * (vx + 2.0 * vx2 + 2.0 * vx3 + vx4)
            nvt = vt + h / 6.0 * (a1t + 2.0 * a2t + 2.0 * a3t + a4t)
            nvx = vx + h / 6.0 * (a1x + 2.0 * a2x + 2.0 * a3x + a4x)
            ct, cx, jt, jx, bits, code = canon_nb(topo, nt, nx)
            nvt = jt * nvt
            nvx = jx * nvx
            sgn = 1.0 if det_prev > 0.0 else -1.0
            touched = not (min(d2 * sgn, d3 * sgn, d4 * sgn) > deg_stop)
            if code == CANON_TOO_DEEP:
                status[i] = STATUS_STEP_FAILURE
                break
            if not (np.isfinite(ct) and np.isfinite(cx) and np.isfinite(nvt) and np.isfinite(nvx)):
                status[i] = STATUS_HIT_DEGENERACY if touched else STATUS_STEP_FAILURE
                break
            if code == CANON_OFF_EDGE or ct < window[0] or ct > window[1] or cx < window[2] or cx > window[3]:
                status[i] = STATUS_LEFT_WINDOW
                break
            det, norm, energy = _invariants_nb(model, a, ct, cx, nvt, nvx)
            if abs(det) < deg_stop or det * det_prev < 0.0:
                status[i] = STATUS_HIT_DEGENERACY
                break
            if bits != 0:
                norm0 = norm
                e0 = energy
            drift = abs(norm - norm0) > norm_guard * max(1.0, abs(norm0))
            if use_e and abs(energy - e0) > norm_guard * max(1.0, abs(e0)):
                drift = True
            if drift:
                shrink = (abs(det_prev) - abs(det)) / abs(det_prev)
                status[i] = STATUS_HIT_DEGENERACY if (touched or shrink > DEG_APPROACH) else STATUS_STEP_FAILURE
                break
            t, x, vt, vx = ct, cx, nvt, nvx
            det_prev = det
            traj[i, step, 0] = t
            traj[i, step, 1] = x
            traj[i, step, 2] = vt
            traj[i, step, 3] = vx
            seams[i, step] = np.int64(bits)
            n_rec[i] = step + 1
    return traj, seams, n_rec, status


def integrate_batch_numba(model, a, topo, states, dlam, nsteps, window, deg_stop, norm_guard, energy_guard=False):
    if not HAVE_NUMBA:
        raise RuntimeError("numba is not available")
    return _integrate_nb(
        int(model),
        float(a),
        int(topo),
        np.ascontiguousarray(states, dtype=np.float64),
        float(dlam),
        int(nsteps),
        np.asarray(window, dtype=np.float64),
        float(deg_stop),
        float(norm_guard),
        bool(energy_guard),
    )


def integrate_preset(model, a, topo, states, dlam, nsteps, window, deg_stop, norm_guard, energy_guard=False, use_numba=None):
    """Integrate preset-metric geodesics on whichever path is enabled."""
    if use_numba is None:
        use_numba = USE_NUMBA
    if use_numba:
        return integrate_batch_numba(model, a, topo, states, dlam, nsteps, window, deg_stop, norm_guard, energy_guard)

    def geom(t, x):
        return preset_metric(model, a, t, x)

    return integrate_batch_numpy(geom, topo, states, dlam, nsteps, window, deg_stop, norm_guard, energy_guard)
