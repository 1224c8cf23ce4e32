"""Linear stability and dispersion analysis on q'' + w^2 q = -eps * q.

With V = (h w)^2 and z = h^2 * eps, the analysis matrix acting on
(q, h p) is, writing b_q, b_p for the scalar q/p weights, A for the raw
stage-coupling weights, N = I + z A, F0[i] = phi0(c_i^2 V) and
F1[i] = c_i phi1(c_i^2 V):

  S = [[phi0 - z b_q' N^-1 F0,  phi1 - z b_q' N^-1 F1],
       [-V phi1 - z b_p' N^-1 F0,  phi0 - z b_p' N^-1 F1]]

The stage coupling enters N unscaled.  The integrator's stage system
carries an extra c_i^2 factor on the coupling, so S reproduces the true
one-step propagator exactly at z = 0 and to first order in z, and the
two differ at O(z^2); the unscaled normalization is the one under which
the dissipation and dispersion measures below have their quoted leading
orders (zeta^4 and zeta^3).

Spectral radii come from the closed-form 2x2 eigenvalues.  The scan
orders points row-major in V then z and reuses the V-only scalar data
across each row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import lagrange as lg
from .coeffs import WeightKind, scalar_weight
from .errors import OutsidePeriodicityError, SingularStageSystemError
from .matfun import sinc

# |rho - 1| window used for the periodicity flag.
PERIODIC_RHO_TOL = 1e-9

# Reciprocal condition number below which N = I + zA is treated singular.
_SINGULAR_RCOND = 1e-12


@dataclass(frozen=True)
class StabilityMatrix:
    S: np.ndarray

    @property
    def trace(self) -> float:
        return float(self.S[0, 0] + self.S[1, 1])

    @property
    def det(self) -> float:
        return float(self.S[0, 0] * self.S[1, 1] - self.S[0, 1] * self.S[1, 0])

    @property
    def rho(self) -> float:
        return spectral_radius_2x2(self.trace, self.det)


def spectral_radius_2x2(trace: float, det: float) -> float:
    """Largest eigenvalue magnitude of a real 2x2 matrix from (tr, det)."""
    disc = trace * trace - 4.0 * det
    if disc >= 0.0:
        r = math.sqrt(disc)
        return max(abs(trace + r), abs(trace - r)) / 2.0
    return math.sqrt(det)


@dataclass(frozen=True)
class _ScalarData:
    """V-only ingredients of S, reusable across z."""

    phi0: float
    phi1: float
    stage_phi0: np.ndarray
    stage_phi1: np.ndarray
    b_q: np.ndarray
    b_p: np.ndarray
    A: np.ndarray


def _scalar_data(ns: lg.NodeSet, V: float) -> _ScalarData:
    if V < 0.0:
        raise ValueError(f"V must be >= 0, got {V}")
    lam = math.sqrt(V)
    c = ns.nodes
    s = ns.s
    b_q = np.array([scalar_weight(ns, WeightKind.Q, j, lam) for j in range(s)])
    b_p = np.array([scalar_weight(ns, WeightKind.P, j, lam) for j in range(s)])
    A = np.array(
        [
            [scalar_weight(ns, WeightKind.STAGE, j, lam, i) for j in range(s)]
            for i in range(s)
        ]
    )
    return _ScalarData(
        phi0=math.cos(lam),
        phi1=float(sinc(lam)),
        stage_phi0=np.cos(c * lam),
        stage_phi1=c * sinc(c * lam),
        b_q=b_q,
        b_p=b_p,
        A=A,
    )


def _assemble(data: _ScalarData, V: float, z: float) -> StabilityMatrix:
    N = np.eye(len(data.b_q)) + z * data.A
    if np.linalg.cond(N) > 1.0 / _SINGULAR_RCOND:
        raise SingularStageSystemError(
            f"stage system singular at (V, z) = ({V:.6g}, {z:.6g})", V=V, z=z
        )
    y0 = np.linalg.solve(N, data.stage_phi0)
    y1 = np.linalg.solve(N, data.stage_phi1)
    S = np.array(
        [
            [data.phi0 - z * (data.b_q @ y0), data.phi1 - z * (data.b_q @ y1)],
            [-V * data.phi1 - z * (data.b_p @ y0), data.phi0 - z * (data.b_p @ y1)],
        ]
    )
    return StabilityMatrix(S=S)


def stability_matrix(ns: lg.NodeSet, V: float, z: float) -> StabilityMatrix:
    """S(V, z) for the test equation; raises on a singular stage system."""
    return _assemble(_scalar_data(ns, V), V, z)


def scan_region(ns: lg.NodeSet, v_range, z_range, grid) -> np.ndarray:
    """Scan S over a (V, z) grid; rows ordered row-major in V then z.

    Returns an array with columns (V, z, rho, trace, det, stable,
    periodic).  Singular stage systems yield rho/trace/det = nan with
    both flags 0 instead of aborting the scan.
    """
    v_lo, v_hi = map(float, v_range)
    z_lo, z_hi = map(float, z_range)
    n_v, n_z = map(int, grid)
    if n_v < 2 or n_z < 2:
        raise ValueError(f"grid must be at least 2x2, got {n_v}x{n_z}")
    if v_lo < 0.0:
        raise ValueError(f"V range must be nonnegative, got lower bound {v_lo}")
    vs = np.linspace(v_lo, v_hi, n_v)
    zs = np.linspace(z_lo, z_hi, n_z)
    out = np.empty((n_v * n_z, 7))
    row = 0
    for V in vs:
        data = _scalar_data(ns, V)
        for z in zs:
            try:
                sm = _assemble(data, V, z)
            except SingularStageSystemError:
                out[row] = (V, z, np.nan, np.nan, np.nan, 0.0, 0.0)
                row += 1
                continue
            tr, det = sm.trace, sm.det
            rho = spectral_radius_2x2(tr, det)
            stable = 1.0 if rho < 1.0 else 0.0
            periodic = (
                1.0
                if abs(rho - 1.0) <= PERIODIC_RHO_TOL and tr * tr < 4.0 * det
                else 0.0
            )
            out[row] = (V, z, rho, tr, det, stable, periodic)
            row += 1
    return out


def dispersion_dissipation(ns: lg.NodeSet, V: float, z: float) -> tuple[float, float]:
    """Phase error zeta - arccos(tr / (2 sqrt(det))) and amplitude error
    1 - sqrt(det) at zeta = sqrt(V + z).

    Requires V + z > 0 and a periodic-regime S (det > 0 and
    |tr| <= 2 sqrt(det)); outside that an OutsidePeriodicityError is
    raised.
    """
    if V + z <= 0.0:
        raise OutsidePeriodicityError(f"V + z must be > 0, got {V + z:.6g}")
    sm = stability_matrix(ns, V, z)
    tr, det = sm.trace, sm.det
    if det <= 0.0:
        raise OutsidePeriodicityError(f"det S = {det:.6g} <= 0 at (V, z)")
    root = math.sqrt(det)
    ratio = tr / (2.0 * root)
    if abs(ratio) > 1.0:
        raise OutsidePeriodicityError(
            f"|tr| / (2 sqrt(det)) = {abs(ratio):.6g} > 1: outside the periodicity regime"
        )
    zeta = math.sqrt(V + z)
    return zeta - math.acos(ratio), 1.0 - root
