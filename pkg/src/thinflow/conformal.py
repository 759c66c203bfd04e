"""Exterior conformal map of the slit [-1, 1] and its shrinking envelopes.

The slit exterior goes to the unit-disk exterior under

    T(z) = z + sqrt(z^2 - 1),

where the root is taken as z*sqrt(1 - 1/z^2) with the principal branch,
which places the cut exactly on the segment and makes T(z) ~ 2z at
infinity.  The inverse is the averaged map (w + 1/w)/2.  Level sets
|T| = 1 + eps are confocal ellipses; dividing the map by (1 + eps) turns
the ellipse interior into the "thick plate" obstacle of size eps, and
eps -> 0 collapses the family back onto the slit.

Complex numbers double as 2-vectors throughout: the Jacobian of a
holomorphic map acts as multiplication by T'(z), its transpose as
multiplication by conj(T'(z)), and the quarter-turn v -> v-perp as
multiplication by i.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import BranchCutError, DomainError, EndpointError
from .quadrature import tensor_rectangle

ENDPOINTS = (-1.0 + 0.0j, 1.0 + 0.0j)


# ---------------------------------------------------------------------------
# the slit map and friends (vectorised, unchecked)
# ---------------------------------------------------------------------------

def _sqrt_cut(z):
    """sqrt(z^2 - 1) with the branch cut on the segment [-1, 1]."""
    z = np.asarray(z, dtype=complex)
    return z * np.sqrt(1.0 - 1.0 / (z * z))


def slit_map(z):
    z = np.asarray(z, dtype=complex)
    return z + _sqrt_cut(z)


def slit_map_derivative(z):
    z = np.asarray(z, dtype=complex)
    return 1.0 + z / _sqrt_cut(z)


def slit_map_second_derivative(z):
    s = _sqrt_cut(z)
    return -1.0 / (s * s * s)


def slit_map_inverse(w):
    w = np.asarray(w, dtype=complex)
    return 0.5 * (w + 1.0 / w)


def slit_map_inverse_derivative(w):
    w = np.asarray(w, dtype=complex)
    return 0.5 * (1.0 - 1.0 / (w * w))


def on_slit(z, tol=0.0):
    """True where z sits on the closed segment [-1, 1] (within tol of it)."""
    z = np.asarray(z, dtype=complex)
    return (np.abs(z.imag) <= tol) & (np.abs(z.real) <= 1.0 + tol)


def segment_distance(x):
    """Euclidean distance from complex points to the segment [-1, 1]."""
    x = np.asarray(x, dtype=complex)
    clamped = np.clip(x.real, -1.0, 1.0)
    return np.hypot(x.real - clamped, x.imag)


# ---------------------------------------------------------------------------
# curve and map objects
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SegmentArc:
    """The flat slit, parametrised over [0, 1] from -1 to +1."""

    kind: str = "segment"

    def point(self, s):
        s = np.asarray(s, dtype=float)
        return (2.0 * s - 1.0) + 0.0j * s

    def tangent(self, s):
        s = np.asarray(s, dtype=float)
        return np.ones_like(s) * (1.0 + 0.0j)

    @staticmethod
    def distance(x):
        return segment_distance(x)


@dataclass(frozen=True)
class ExteriorMap:
    """Biholomorphism from a curve exterior to the unit-disk exterior.

    Only the slit map ships; other arcs would plug in through the same
    callables.  farfield_beta is the leading coefficient at infinity.
    """

    map: Callable = slit_map
    derivative: Callable = slit_map_derivative
    second_derivative: Callable = slit_map_second_derivative
    inverse: Callable = slit_map_inverse
    inverse_derivative: Callable = slit_map_inverse_derivative
    arc: SegmentArc = field(default_factory=SegmentArc)
    farfield_beta: float = 2.0
    label: str = "segment"

    @staticmethod
    def segment():
        return ExteriorMap()


@dataclass(frozen=True)
class ObstacleFamily:
    """The rescaled exterior map T/(1+eps) and its thick obstacle.

    eps = 0 degenerates exactly to the bare slit map.  The obstacle is
    the region where |T| < 1 + eps (an ellipse for the slit); its
    boundary maps onto the unit circle under the rescaled map.
    """

    base: ExteriorMap = field(default_factory=ExteriorMap.segment)
    epsilon: float = 0.0

    def __post_init__(self):
        if self.epsilon < 0.0:
            raise DomainError(f"epsilon must be >= 0, got {self.epsilon}")

    @property
    def scale(self):
        return 1.0 + self.epsilon

    def map(self, z, check=True):
        if check:
            self._require_exterior(z)
        return self.base.map(z) / self.scale

    def derivative(self, z, check=True):
        if check:
            self._require_exterior(z)
        return self.base.derivative(z) / self.scale

    def second_derivative(self, z, check=True):
        if check:
            self._require_exterior(z)
        return self.base.second_derivative(z) / self.scale

    def inverse(self, w, check=True):
        w = np.asarray(w, dtype=complex)
        if check and np.any(np.abs(w) < 1.0 - 1e-13):
            raise DomainError("inverse requires |w| >= 1")
        return self.base.inverse(self.scale * w)

    def inverse_derivative(self, w):
        w = np.asarray(w, dtype=complex)
        return self.scale * self.base.inverse_derivative(self.scale * w)

    def is_exterior(self, z, margin=0.0):
        """True where z lies strictly outside the obstacle (off the slit)."""
        z = np.asarray(z, dtype=complex)
        if self.epsilon == 0.0:
            return ~on_slit(z, tol=margin)
        bad = on_slit(z)
        mod = np.where(bad, 0.0, np.abs(self.base.map(np.where(bad, 2.0, z))))
        return ~bad & (mod > self.scale + margin)

    def _require_exterior(self, z):
        z = np.asarray(z, dtype=complex)
        if np.any(on_slit(z)):
            if self.epsilon == 0.0:
                offenders = z[on_slit(z)]
                if np.any(np.abs(np.abs(offenders.real) - 1.0) < 1e-14):
                    raise EndpointError("evaluation at a slit endpoint")
                raise BranchCutError(
                    "point on the slit; use one_sided_trace to pick a side"
                )
            raise DomainError("point inside the obstacle (on the slit)")
        if self.epsilon > 0.0:
            mod = np.abs(self.base.map(z))
            if np.any(mod < self.scale * (1.0 - 1e-13)):
                raise DomainError(
                    f"point inside the obstacle: |T(z)| < {self.scale}"
                )


def boundary_sample(family, n):
    """n obstacle-boundary points, counterclockwise, plus tangents d z / d t.

    Parametrised by t in [0, 1) through the inverse map of the unit
    circle; requires eps > 0 (the slit itself has no Jordan boundary).
    """
    if family.epsilon <= 0.0:
        raise DomainError("boundary_sample needs a thick obstacle (eps > 0)")
    if n < 4:
        raise DomainError("need at least 4 boundary samples")
    t = np.arange(n) / n
    w = np.exp(2j * np.pi * t)
    z = family.inverse(w)
    dz = family.inverse_derivative(w) * 2j * np.pi * w
    return z, dz


def one_sided_trace(s, side):
    """Slit-map trace values (T, T') on the given side of the slit.

    s in (0, 1) parametrises the slit from -1 to +1; side is 'above' or
    'below'.  On the upper side T lands on the upper unit semicircle.
    """
    s = np.asarray(s, dtype=float)
    if np.any((s <= 0.0) | (s >= 1.0)):
        raise EndpointError("trace parameter must lie strictly inside (0, 1)")
    if side not in ("above", "below"):
        raise DomainError(f"side must be 'above' or 'below', got {side!r}")
    x = 2.0 * s - 1.0
    root = np.sqrt(1.0 - x * x)
    sq = 1j * root if side == "above" else -1j * root
    tmap = x + sq
    tprime = 1.0 + x / sq
    return tmap, tprime


def family_trace(family, s, side):
    """One-sided trace of the rescaled map (only meaningful at eps = 0)."""
    tmap, tprime = one_sided_trace(s, side)
    return tmap / family.scale, tprime / family.scale


def winding_number(points, about):
    """Winding of a closed polyline (given in order) about a point."""
    rel = np.asarray(points, dtype=complex) - about
    ang = np.angle(rel)
    dang = np.diff(np.concatenate([ang, ang[:1]]))
    dang = (dang + np.pi) % (2.0 * np.pi) - np.pi
    return dang.sum() / (2.0 * np.pi)


# ---------------------------------------------------------------------------
# family health report: the shrinking-envelope quantities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FamilyCheckRow:
    epsilon: float
    sup_rel_map_dev: float      # sup |(T_eps - T)/T| over an exterior cloud
    sup_det_inverse_jac: float  # sup |det D(T_eps^-1)| over the disk exterior
    l3_derivative_dev: float    # ||DT_eps - DT||_L3 on a truncated exterior
    sup_far_derivative: float   # sup |DT_eps| outside the truncation ball
    sup_far_curvature: float    # sup |x| |D^2 T_eps(x)| outside the ball

    def to_dict(self):
        return {
            "epsilon": self.epsilon,
            "sup_rel_map_dev": self.sup_rel_map_dev,
            "sup_det_inverse_jac": self.sup_det_inverse_jac,
            "l3_derivative_dev": self.l3_derivative_dev,
            "sup_far_derivative": self.sup_far_derivative,
            "sup_far_curvature": self.sup_far_curvature,
        }


@dataclass(frozen=True)
class FamilyCheckReport:
    rows: tuple
    radius: float
    sleeve: float
    sleeve_area_excluded: float
    monotone_rel_map: bool
    monotone_l3: bool

    def to_dict(self):
        return {
            "radius": self.radius,
            "sleeve": self.sleeve,
            "sleeve_area_excluded": self.sleeve_area_excluded,
            "monotone_rel_map": self.monotone_rel_map,
            "monotone_l3": self.monotone_l3,
            "rows": [r.to_dict() for r in self.rows],
        }


def _exterior_cloud(family, n_radial=12, n_angular=128, r_far=1000.0):
    """Deterministic sample of the obstacle exterior, hugging the boundary."""
    lev = family.scale
    rho = np.concatenate(
        [
            lev * (1.0 + np.logspace(-9, 0, n_radial)),
            np.logspace(np.log10(2.0 * lev), np.log10(r_far), n_radial),
        ]
    )
    th = np.arange(n_angular) * (2.0 * np.pi / n_angular) + 1e-3
    W = rho[:, None] * np.exp(1j * th[None, :])
    return family.base.inverse(W).ravel()


def _l3_derivative_dev(eps, radius, sleeve, cells=64, order=20):
    """||DT_eps - DT||_{L^3} over B(0,R) minus obstacle minus slit sleeve."""
    base = ExteriorMap.segment()
    fam = ObstacleFamily(base, eps)
    edges = np.linspace(-radius, radius, cells + 1)
    total = 0.0
    excluded = 0.0
    for i in range(cells):
        # one strip of cells at a time keeps the node arrays small
        nodes = []
        wts = []
        for j in range(cells):
            nd, wt = tensor_rectangle(
                edges[i], edges[i + 1], edges[j], edges[j + 1], order
            )
            nodes.append(nd)
            wts.append(wt)
        nd = np.concatenate(nodes)
        wt = np.concatenate(wts)
        keep = (np.abs(nd) <= radius) & (segment_distance(nd) > sleeve)
        mod = np.where(keep, np.abs(base.map(np.where(keep, nd, 2.0))), 0.0)
        keep &= mod > fam.scale
        excluded += wt[(np.abs(nd) <= radius) & ~keep].sum()
        if not np.any(keep):
            continue
        dev = np.abs(base.derivative(nd[keep]) * (1.0 / fam.scale - 1.0))
        total += (wt[keep] * dev**3).sum()
    return total ** (1.0 / 3.0), excluded


def check_shrinking_family(
    eps_list, radius=4.0, sleeve=1e-3, base=None, l3_cells=64, l3_order=20
):
    """Quantitative health report for the rescaled obstacle family.

    Evaluates, for each eps, the five quantities that control the
    collapsing-obstacle limit, plus monotonicity flags for the two that
    must shrink with eps.
    """
    base = base or ExteriorMap.segment()
    rows = []
    excluded = 0.0
    for eps in eps_list:
        fam = ObstacleFamily(base, eps)
        cloud = _exterior_cloud(fam)
        tvals = base.map(cloud)
        rel = np.abs((tvals / fam.scale - tvals) / tvals)

        # disk-exterior cloud for the inverse Jacobian
        rho = np.concatenate([[1.0], np.logspace(1e-4, 2, 40)])
        th = np.arange(128) * (2.0 * np.pi / 128)
        W = (rho[:, None] * np.exp(1j * th[None, :])).ravel()
        det = np.abs(fam.inverse_derivative(W)) ** 2

        l3, excluded = _l3_derivative_dev(
            eps, radius, sleeve, cells=l3_cells, order=l3_order
        )

        rr = np.logspace(np.log10(radius), np.log10(10 * radius), 24)
        th2 = np.arange(64) * (2.0 * np.pi / 64) + 5e-4
        far = (rr[:, None] * np.exp(1j * th2[None, :])).ravel()
        dfar = np.abs(base.derivative(far)) / fam.scale
        curv = np.abs(far) * np.abs(base.second_derivative(far)) / fam.scale

        rows.append(
            FamilyCheckRow(
                epsilon=eps,
                sup_rel_map_dev=float(rel.max()),
                sup_det_inverse_jac=float(det.max()),
                l3_derivative_dev=float(l3),
                sup_far_derivative=float(dfar.max()),
                sup_far_curvature=float(curv.max()),
            )
        )
    by_eps = sorted(rows, key=lambda r: r.epsilon, reverse=True)
    mono_rel = all(
        a.sup_rel_map_dev > b.sup_rel_map_dev for a, b in zip(by_eps, by_eps[1:])
    )
    mono_l3 = all(
        a.l3_derivative_dev > b.l3_derivative_dev for a, b in zip(by_eps, by_eps[1:])
    )
    return FamilyCheckReport(
        rows=tuple(rows),
        radius=radius,
        sleeve=sleeve,
        sleeve_area_excluded=float(excluded),
        monotone_rel_map=mono_rel,
        monotone_l3=mono_l3,
    )


def derivative_lp_norm(p, radius=4.0, sleeve=1e-3, cells=64, order=20):
    """||T'||_{L^p} over B(0,R) minus a sleeve around the slit.

    Finite for p < 4 because the endpoint singularity is |T'| ~ d^(-1/2).
    Used by the self-check suite at p = 3 and p = 3.9.
    """
    base = ExteriorMap.segment()
    edges = np.linspace(-radius, radius, cells + 1)
    total = 0.0
    for i in range(cells):
        nodes = []
        wts = []
        for j in range(cells):
            nd, wt = tensor_rectangle(
                edges[i], edges[i + 1], edges[j], edges[j + 1], order
            )
            nodes.append(nd)
            wts.append(wt)
        nd = np.concatenate(nodes)
        wt = np.concatenate(wts)
        keep = (np.abs(nd) <= radius) & (segment_distance(nd) > sleeve)
        if not np.any(keep):
            continue
        total += (wt[keep] * np.abs(base.derivative(nd[keep])) ** p).sum()
    return total ** (1.0 / p)


# ---------------------------------------------------------------------------
# self-check suite used by `map check`
# ---------------------------------------------------------------------------

def invariant_report(seed=7):
    """Run the geometric identities and return measured residuals.

    Covers: inverse round trip, boundary modulus, one-sided traces,
    analytic-vs-finite-difference derivative, holomorphy residual,
    far-field coefficient, endpoint exponent, and the p-integrability of
    the map derivative near the slit.
    """
    rng = np.random.default_rng(seed)
    base = ExteriorMap.segment()

    # round trip through 1000 exterior points
    w = (1.0 + rng.uniform(1e-6, 50.0, 1000)) * np.exp(
        2j * np.pi * rng.uniform(0.0, 1.0, 1000)
    )
    z = base.inverse(w)
    round_trip = float(np.max(np.abs(base.map(z) - w) / np.abs(w)))

    # one-sided boundary modulus
    s = rng.uniform(0.01, 0.99, 200)
    above, _ = one_sided_trace(s, "above")
    below, _ = one_sided_trace(s, "below")
    boundary_mod = float(
        max(np.max(np.abs(np.abs(above) - 1.0)), np.max(np.abs(np.abs(below) - 1.0)))
    )
    trace_conjugacy = float(np.max(np.abs(above - np.conj(below))))

    # derivative against centred differences, on points the stencil
    # cannot push across the cut
    wd = (1.1 + rng.uniform(0.0, 5.0, 200)) * np.exp(
        2j * np.pi * rng.uniform(0.0, 1.0, 200)
    )
    pts = base.inverse(wd)
    h = 1e-6
    fd = (base.map(pts + h) - base.map(pts - h)) / (2.0 * h)
    deriv_fd = float(np.max(np.abs(fd - base.derivative(pts)) / np.abs(fd)))

    # holomorphy: d/dx T + i d/dy T = 0 for conformal maps
    hh = 1e-5
    dx = (base.map(pts + hh) - base.map(pts - hh)) / (2.0 * hh)
    dy = (base.map(pts + 1j * hh) - base.map(pts - 1j * hh)) / (2.0 * hh)
    holomorphy = float(np.max(np.abs(dx + 1j * dy) / np.abs(dx)))

    # far-field coefficient
    rr = np.logspace(2, 4, 20)
    th = np.arange(8) * (2.0 * np.pi / 8) + 0.05
    far = (rr[:, None] * np.exp(1j * th[None, :])).ravel()
    ratios = base.map(far) / far
    beta_hat = float(np.mean(ratios.real))
    beta_dev = float(np.max(np.abs(ratios - base.farfield_beta)))

    # endpoint exponent of |T'| approaching +1 along the axis
    d = np.logspace(-6, -3, 12)
    slope = float(
        np.polyfit(np.log(d), np.log(np.abs(base.derivative(1.0 + d))), 1)[0]
    )
    root_scale = float(np.sqrt(1e-6) * np.abs(base.derivative(1.0 + 1e-6)))

    lp3 = derivative_lp_norm(3.0, cells=32, order=12)
    lp39 = derivative_lp_norm(3.9, cells=32, order=12)

    return {
        "round_trip_rel": round_trip,
        "boundary_modulus_dev": boundary_mod,
        "trace_conjugacy_dev": trace_conjugacy,
        "derivative_vs_fd_rel": deriv_fd,
        "holomorphy_residual_rel": holomorphy,
        "farfield_beta_hat": beta_hat,
        "farfield_beta_dev": beta_dev,
        "endpoint_exponent": slope,
        "endpoint_root_scale": root_scale,
        "derivative_l3_ball4": float(lp3),
        "derivative_l3p9_ball4": float(lp39),
    }
