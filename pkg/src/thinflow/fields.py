"""Velocity fields outside the slit and its thick envelopes.

All fields are built from the rescaled exterior map.  With complex
numbers standing in for 2-vectors (quarter turn = multiplication by i,
transposed Jacobian = multiplication by the conjugate derivative), the
two building blocks are

    circulation carrier   H(x) = (1/2pi) conj(T'(x)) i / conj(T(x))

which is divergence-free, tangent to every level set of |T|, and carries
unit circulation around the obstacle, and the obstacle-aware vortex
kernel

    K(x, y) = (1/2pi) conj(T'(x)) i [ 1/conj(T(x) - T(y))
                                     - 1/conj(T(x) - T(y)*) ]

with the disk image T(y)* = T(y)/|T(y)|^2, which inverts the curl with
zero normal flow through the obstacle.  The starting velocity is
K[vorticity] plus (curve circulation + vorticity mass) times H.
"""

from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from . import _kernels
from .bumps import bump_value
from .conformal import (
    ExteriorMap,
    ObstacleFamily,
    one_sided_trace,
    segment_distance,
)
from .errors import BranchCutError, DomainError, QuadratureError, SupportError
from .quadrature import (
    gauss_interval,
    integrate_doubling,
    polar_disk,
    tensor_rectangle,
    trapezoid_closed_doubling,
)

TWO_PI = 2.0 * np.pi


# ---------------------------------------------------------------------------
# data carriers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VorticityBump:
    """One compactly supported blob: amplitude * F(|x-c|^2/rho^2)."""

    center: complex
    radius: float
    amplitude: float


@lru_cache(maxsize=None)
def _profile_unit_integral(tol=1e-12):
    """integral_0^1 F(u) du for the standard profile, by order doubling."""

    def value(n):
        x, w = gauss_interval(0.0, 1.0, n)
        return float((w * np.exp(1.0 - 1.0 / (1.0 - x))).sum())

    val, _ = integrate_doubling(value, n0=32, n_max=8192, tol=tol)
    return val


@dataclass(frozen=True)
class BumpVorticity:
    """A finite union of mollifier bumps, kept clear of slit and obstacles.

    Placement rules, enforced at construction: every support disk stays
    at least `clearance` away from the slit and strictly outside every
    obstacle of the family up to `eps_max`.  Because log|T| is harmonic,
    the minimum of |T| over a closed disk is attained on its boundary,
    so the obstacle check samples the disk edge only.
    """

    bumps: tuple = ()
    eps_max: float = 0.25
    clearance: float = 0.05

    def __post_init__(self):
        base = ExteriorMap.segment()
        for k, b in enumerate(self.bumps):
            if b.radius <= 0.0:
                raise SupportError(f"bump {k}: radius must be positive")
            gap = float(segment_distance(b.center)) - b.radius
            if gap < self.clearance:
                raise SupportError(
                    f"bump {k}: support clears the slit by {gap:.4g}, "
                    f"need at least {self.clearance}"
                )
            edge = b.center + b.radius * np.exp(
                2j * np.pi * np.arange(512) / 512
            )
            mod_min = float(np.abs(base.map(edge)).min())
            if mod_min <= 1.0 + self.eps_max:
                raise SupportError(
                    f"bump {k}: support reaches |T| = {mod_min:.6g}, inside "
                    f"the eps = {self.eps_max} obstacle"
                )

    def __call__(self, x):
        x = np.asarray(x, dtype=complex)
        out = np.zeros(x.shape, dtype=float)
        for b in self.bumps:
            out += bump_value(x, b.center, b.radius, b.amplitude)
        return out

    def total_mass(self, tol=1e-12):
        """Integral of the vorticity; radial quadrature per bump."""
        c = _profile_unit_integral(tol)
        return float(
            sum(b.amplitude * np.pi * b.radius**2 * c for b in self.bumps)
        )

    @property
    def support_radius(self):
        """Radius of the smallest origin-centred disk holding all supports."""
        if not self.bumps:
            return 0.0
        return max(abs(b.center) + b.radius for b in self.bumps)


@dataclass(frozen=True)
class FlowData:
    """Problem data: initial vorticity, circulation on the curve, viscosity."""

    vorticity: BumpVorticity = field(default_factory=BumpVorticity)
    curve_circulation: float = 0.0
    viscosity: float = 1e-2

    def __post_init__(self):
        if self.viscosity <= 0.0:
            raise DomainError("viscosity must be positive")

    @cached_property
    def vorticity_mass(self):
        return self.vorticity.total_mass()

    @property
    def total_circulation(self):
        """Circulation seen from far away; recomputed, never stored."""
        return self.curve_circulation + self.vorticity_mass


@dataclass(frozen=True)
class CutoffProfile:
    """Smooth 0-to-1 ramp in the mapped radius.

    shape(s) vanishes for s <= 1 and equals 1 for s >= 2; the field-level
    value ramps over the annulus 1 + width <= |T_eps| <= 1 + 2*width.
    Widths below 2 are rejected: the ramp must stay well clear of the
    obstacle while remaining inside any truncation ball.
    """

    width: float = 4.0

    def __post_init__(self):
        if self.width < 2.0:
            raise DomainError(f"cutoff width must be >= 2, got {self.width}")

    @staticmethod
    def shape(s):
        s = np.asarray(s, dtype=float)
        lo = s <= 1.0
        hi = s >= 2.0
        mid = ~lo & ~hi
        sm = np.where(mid, s, 1.5)
        f1 = np.exp(-1.0 / (sm - 1.0))
        f2 = np.exp(-1.0 / (2.0 - sm))
        out = np.where(mid, f1 / (f1 + f2), 0.0)
        return np.where(hi, 1.0, out)

    def value(self, family, x, check=True):
        mod = np.abs(family.map(x, check=check))
        return self.shape((mod - 1.0) / self.width)


# ---------------------------------------------------------------------------
# closed-form fields
# ---------------------------------------------------------------------------

def harmonic_field(family, x, check=True):
    """Unit-circulation carrier H at points x (complex velocities)."""
    tmap = family.map(x, check=check)
    ctp = np.conj(family.derivative(x, check=False))
    return ctp * 1j / (TWO_PI * np.conj(tmap))


def biot_savart_kernel(family, x, y, check=True):
    """Kernel K(x, y): velocity at x of a unit point vortex at y."""
    tx = family.map(x, check=check)
    ty = family.map(y, check=check)
    ctp = np.conj(family.derivative(x, check=False))
    img = ty / np.abs(ty) ** 2
    return (
        ctp
        * 1j
        / TWO_PI
        * (1.0 / np.conj(tx - ty) - 1.0 / np.conj(tx - img))
    )


# ---------------------------------------------------------------------------
# induced velocity: quadrature over the bump supports
# ---------------------------------------------------------------------------

def _bump_sources(family, bump, order):
    """Mapped quadrature sources for one bump at a given tensor order."""
    c1, c2 = bump.center.real, bump.center.imag
    r = bump.radius
    nodes, wts = tensor_rectangle(c1 - r, c1 + r, c2 - r, c2 + r, order)
    vort = bump_value(nodes, bump.center, r, bump.amplitude)
    sel = vort != 0.0
    src = family.map(nodes[sel], check=False)
    img = src / np.abs(src) ** 2
    return src, img, wts[sel] * vort[sel]


def _one_bump_mapped(family, bump, tmap, ctp, tol=1e-9, n_max=512):
    """Tensor-rule contribution of a single bump at pre-mapped targets."""

    def value(order):
        src, img, w = _bump_sources(family, bump, order)
        return _kernels.biot_savart_sum(tmap, ctp, src, img, w)

    val, _ = integrate_doubling(value, n0=16, n_max=n_max, tol=tol)
    return val


def _induced_mapped(vorticity, family, tmap, ctp, tol=1e-9, n_max=512):
    """Induced velocity at pre-mapped targets lying outside every support."""
    out = np.zeros(tmap.shape, dtype=complex)
    for bump in vorticity.bumps:
        out += _one_bump_mapped(family, bump, tmap, ctp, tol=tol, n_max=n_max)
    return out


def _induced_polar(vorticity, family, x, tol=1e-9, n_max=512):
    """Single target inside some support: polar rule centred on the target.

    Only the supports containing the target need the singularity-
    cancelling polar rule; every other bump keeps the tensor rule it
    would get for an exterior target, which converges much faster than
    a far-off-centre polar sweep.
    """
    out = 0.0 + 0.0j
    tx = family.map(x, check=False)
    ctp = np.conj(family.derivative(x, check=False))
    tarr = np.array([tx], dtype=complex)
    carr = np.array([ctp], dtype=complex)
    for bump in vorticity.bumps:
        if abs(x - bump.center) > bump.radius * (1.0 + 1e-12):
            out += complex(
                _one_bump_mapped(family, bump, tarr, carr, tol=tol, n_max=n_max)[0]
            )
            continue
        cover = abs(x - bump.center) + bump.radius

        def value(order, _b=bump, _cover=cover):
            nodes, wts = polar_disk(x, _cover, order, 2 * order)
            vort = bump_value(nodes, _b.center, _b.radius, _b.amplitude)
            sel = vort != 0.0
            if not np.any(sel):
                return np.zeros(1, dtype=complex)
            src = family.map(nodes[sel], check=False)
            img = src / np.abs(src) ** 2
            return _kernels.biot_savart_sum(tarr, carr, src, img, wts[sel] * vort[sel])

        val, _ = integrate_doubling(value, n0=32, n_max=n_max, tol=tol)
        out += complex(val[0])
    return out


def induced_velocity(flow, family, x, tol=1e-9, check=True):
    """Velocity induced by the bump vorticity through the obstacle kernel.

    Scalar or array targets.  Targets inside a support disk switch to a
    polar rule centred on the target, which cancels the kernel
    singularity; everything else shares tensor rules over the supports.
    Raises QuadratureError when order doubling stalls above tolerance.
    """
    scalar = np.isscalar(x) or np.asarray(x).ndim == 0
    xs = np.atleast_1d(np.asarray(x, dtype=complex))
    if check:
        family._require_exterior(xs)
    vort = flow.vorticity if isinstance(flow, FlowData) else flow
    out = np.zeros(xs.shape, dtype=complex)
    inside = np.zeros(xs.shape, dtype=bool)
    for b in vort.bumps:
        inside |= np.abs(xs - b.center) <= b.radius * (1.0 + 1e-12)
    if np.any(~inside):
        far = xs[~inside]
        tmap = family.map(far, check=False)
        ctp = np.conj(family.derivative(far, check=False))
        out[~inside] = _induced_mapped(vort, family, tmap, ctp, tol=tol)
    for idx in np.nonzero(inside)[0]:
        out[idx] = _induced_polar(vort, family, complex(xs[idx]), tol=tol)
    return complex(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# assembled fields
# ---------------------------------------------------------------------------

def initial_velocity(flow, family, x, tol=1e-9, check=True):
    """Starting velocity outside the thick obstacle."""
    return induced_velocity(
        flow, family, x, tol=tol, check=check
    ) + flow.total_circulation * harmonic_field(family, x, check=check)


def limit_velocity(flow, x, side=None, tol=1e-9):
    """Starting velocity of the collapsed problem (eps = 0).

    Off the slit this is the eps = 0 field; on the open slit a side
    ('above' or 'below') must be chosen and the one-sided trace values
    of the map are used.  Blows up like 1/sqrt(distance) at the tips.
    """
    fam = ObstacleFamily(ExteriorMap.segment(), 0.0)
    scalar = np.isscalar(x) or np.asarray(x).ndim == 0
    xs = np.atleast_1d(np.asarray(x, dtype=complex))
    onslit = (xs.imag == 0.0) & (np.abs(xs.real) < 1.0)
    if np.any(onslit) and side is None:
        raise BranchCutError("points on the slit need side='above' or 'below'")
    out = np.empty(xs.shape, dtype=complex)
    if np.any(~onslit):
        off = xs[~onslit]
        out[~onslit] = initial_velocity(flow, fam, off, tol=tol, check=True)
    if np.any(onslit):
        s = (xs[onslit].real + 1.0) / 2.0
        tmap, tprime = one_sided_trace(s, side)
        ctp = np.conj(tprime)
        alpha = flow.total_circulation
        h = ctp * 1j / (TWO_PI * np.conj(tmap))
        k = _induced_mapped(flow.vorticity, fam, tmap, ctp, tol=tol)
        out[onslit] = k + alpha * h
    return complex(out[0]) if scalar else out


def background_field(flow, family, profile, x, check=True):
    """Cutoff-damped circulation carrier: alpha * H * ramp(|T_eps|)."""
    h = harmonic_field(family, x, check=check)
    phi = profile.value(family, x, check=False)
    return flow.total_circulation * phi * h


def shifted_initial_data(flow, family, profile, x, tol=1e-9, check=True):
    """Starting velocity minus the background: K[w] + alpha (1 - ramp) H.

    Decays like |x|^-2, hence square integrable, which is what the
    energy bookkeeping of the solver runs on.
    """
    h = harmonic_field(family, x, check=check)
    phi = profile.value(family, x, check=False)
    k = induced_velocity(flow, family, x, tol=tol, check=False)
    return k + flow.total_circulation * (1.0 - phi) * h


def velocity_sampler(flow, family, kind="initial", profile=None, tol=1e-9):
    """Vectorised callable z -> velocity for the named assembled field."""
    if kind == "harmonic":
        return lambda z: harmonic_field(family, z)
    if kind == "induced":
        return lambda z: induced_velocity(flow, family, z, tol=tol)
    if kind == "initial":
        return lambda z: initial_velocity(flow, family, z, tol=tol)
    if kind == "background":
        return lambda z: background_field(flow, family, profile, z)
    if kind == "shifted":
        return lambda z: shifted_initial_data(flow, family, profile, z, tol=tol)
    raise DomainError(f"unknown field kind {kind!r}")


# ---------------------------------------------------------------------------
# slit sheet strength
# ---------------------------------------------------------------------------

def jump_density(flow, s, tol=1e-9):
    """Tangential velocity jump across the slit at parameters s in (0,1).

    Returns (below - above) . tangent, the sign that makes the slit
    sheet carry positive mass for positive circulation: the curl of the
    collapsed starting velocity is the bump vorticity plus this density
    times arc length on the slit.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    alpha = flow.total_circulation
    out = np.zeros(s.shape, dtype=float)
    fam = ObstacleFamily(ExteriorMap.segment(), 0.0)
    vals = {}
    for side in ("above", "below"):
        tmap, tprime = one_sided_trace(s, side)
        ctp = np.conj(tprime)
        u = alpha * ctp * 1j / (TWO_PI * np.conj(tmap))
        if flow.vorticity.bumps:
            u = u + _induced_mapped(flow.vorticity, fam, tmap, ctp, tol=tol)
        vals[side] = u
    # unit tangent of the slit points along +x
    jump = vals["below"] - vals["above"]
    out = jump.real
    return out if out.size > 1 else float(out[0])


def sheet_total(flow, n=256, tol=1e-9):
    """Integral of the jump density over the slit, in arc length.

    Substituting x = -cos(phi) removes the endpoint singularity, so a
    midpoint rule in phi converges quickly; doubling still guards it.
    """

    def value(m):
        phi = (np.arange(m) + 0.5) * (np.pi / m)
        x = -np.cos(phi)
        s = (x + 1.0) / 2.0
        g = jump_density(flow, s, tol=tol)
        return float((g * np.sin(phi)).sum() * (np.pi / m))

    val, _ = integrate_doubling(value, n0=n, n_max=1 << 14, tol=1e-6)
    return val


# ---------------------------------------------------------------------------
# contours, circulation, probes, exceedance statistic
# ---------------------------------------------------------------------------

def circle_contour(center, radius):
    """Closed contour t in [0,1) -> (z, dz/dt) around a circle."""

    def gamma(t):
        e = np.exp(2j * np.pi * np.asarray(t, dtype=float))
        return center + radius * e, radius * 2j * np.pi * e

    return gamma


def obstacle_contour(family):
    """The thick-obstacle boundary, counterclockwise, with tangents."""
    if family.epsilon <= 0.0:
        raise DomainError("obstacle contour needs eps > 0")

    def gamma(t):
        w = np.exp(2j * np.pi * np.asarray(t, dtype=float))
        z = family.inverse(w)
        dz = family.inverse_derivative(w) * 2j * np.pi * w
        return z, dz

    return gamma


def circulation(sampler, contour, tol=1e-8, n0=64, n_max=1 << 20):
    """Line integral of the velocity along a closed contour.

    Trapezoid in the contour parameter with node doubling; smooth
    periodic integrands make this converge spectrally.
    """

    def f(t):
        z, dz = contour(t)
        u = sampler(z)
        return np.real(np.conj(u) * dz)

    val, _ = trapezoid_closed_doubling(f, n0=n0, n_max=n_max, tol=tol)
    return float(val)


def _stencil_ok(x, h):
    x = complex(x)
    for p in (x + h, x - h, x + 1j * h, x - 1j * h):
        if segment_distance(p) == 0.0:
            return False
    # vertical leg of the stencil must not straddle the slit
    if abs(x.real) <= 1.0 and abs(x.imag) < h:
        return False
    return True


def divergence_probe(sampler, x, h=1e-4):
    """Centred-difference divergence at one point; guards the slit."""
    if not _stencil_ok(x, h):
        raise DomainError("stencil crosses the slit; move the probe or shrink h")
    pts = np.array([x + h, x - h, x + 1j * h, x - 1j * h], dtype=complex)
    u = sampler(pts)
    return float((u[0].real - u[1].real + u[2].imag - u[3].imag) / (2.0 * h))


def curl_probe(sampler, x, h=1e-4):
    """Centred-difference curl (d1 u2 - d2 u1) at one point."""
    if not _stencil_ok(x, h):
        raise DomainError("stencil crosses the slit; move the probe or shrink h")
    pts = np.array([x + h, x - h, x + 1j * h, x - 1j * h], dtype=complex)
    u = sampler(pts)
    return float((u[0].imag - u[1].imag) / (2.0 * h) - (u[2].real - u[3].real) / (2.0 * h))


def exceedance_statistic(sampler, threshold, box=(-2.0, 2.0, -2.0, 2.0), n=160):
    """threshold * sqrt(area where |u| > threshold) on the box.

    The exceedance set of the collapsed field concentrates in shrinking
    neighbourhoods of the slit tips, far below any uniform grid, so the
    measurement grid is a coarse background mesh plus log-polar
    refinements around both tips (half-offset in angle to dodge the
    slit).
    """
    x0, x1, y0, y1 = box
    r0 = 0.125
    hx = (x1 - x0) / n
    hy = (y1 - y0) / n
    cx = x0 + (np.arange(n) + 0.5) * hx
    cy = y0 + (np.arange(n) + 0.5) * hy
    X, Y = np.meshgrid(cx, cy, indexing="ij")
    pts = (X + 1j * Y).ravel()
    keep = (
        (np.abs(pts - 1.0) > r0)
        & (np.abs(pts + 1.0) > r0)
        & (segment_distance(pts) > 1e-9)
    )
    area = 0.0
    vals = np.abs(sampler(pts[keep]))
    area += hx * hy * float((vals > threshold).sum())

    edges = np.logspace(-8, np.log10(r0), 161)
    mid = np.sqrt(edges[:-1] * edges[1:])
    nphi = 96
    phi = (np.arange(nphi) + 0.5) * (2.0 * np.pi / nphi)
    cell = (edges[1:] - edges[:-1])[:, None] * mid[:, None] * (2.0 * np.pi / nphi)
    for tip in (1.0, -1.0):
        nodes = tip + mid[:, None] * np.exp(1j * phi[None, :])
        inside_box = (
            (nodes.real >= x0)
            & (nodes.real <= x1)
            & (nodes.imag >= y0)
            & (nodes.imag <= y1)
        )
        v = np.abs(sampler(nodes.ravel())).reshape(nodes.shape)
        area += float((cell * ((v > threshold) & inside_box)).sum())
    return threshold * np.sqrt(area)
