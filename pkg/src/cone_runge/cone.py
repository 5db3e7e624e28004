"""The quadratic cone of R3, its root sphere, and slice coordinates.

The cone consists of elements with real trace and real norm form. Two
independent membership tests are kept side by side: one through trace and
norm, one through the algebraic-set equations
``x123 = 0`` and ``x2*x13 - x1*x23 - x3*x12 = 0``.
They must agree; a wide disagreement aborts rather than guessing.
"""

from dataclasses import dataclass

import numpy as np

from .algebra import (
    Cl3Element,
    E0,
    Quaternion,
    check_finite,
    conj_many,
    embed_quaternion,
    mul_many,
    norm_many,
    split,
    split_many,
    trace_many,
    unsplit,
    QuatPair,
)
from .errors import CharacterizationMismatch, NotInCone, NotRootSphere

DEFAULT_TOL = 1e-9

# rank of H_k for the root sphere (a product of two 2-spheres), k = 0..6
SPHERE_HOMOLOGY_RANKS = {0: 1, 1: 0, 2: 2, 3: 0, 4: 1, 5: 0, 6: 0}


@dataclass(frozen=True)
class SphereHomologyTable:
    ranks: dict

    @classmethod
    def standard(cls):
        return cls(dict(SPHERE_HOMOLOGY_RANKS))


@dataclass(frozen=True)
class SliceCoords:
    """Coordinates alpha + beta*J of a cone point; J is None for real points."""

    alpha: float
    beta: float
    J: Cl3Element | None

    def to_dict(self):
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "J": None if self.J is None else list(self.J.coeffs),
        }


def _cone_residuals_many(arr):
    """Residuals of both cone characterizations for (..., 8) input."""
    arr = np.asarray(arr, dtype=np.float64)
    t = trace_many(arr)
    n = norm_many(arr)
    r_tn = np.maximum(
        np.abs(t[..., 1:]).max(axis=-1), np.abs(n[..., 1:]).max(axis=-1)
    )
    r_alg = np.maximum(
        np.abs(arr[..., 7]),
        np.abs(
            arr[..., 2] * arr[..., 5]
            - arr[..., 1] * arr[..., 6]
            - arr[..., 3] * arr[..., 4]
        ),
    )
    mag = np.linalg.norm(arr, axis=-1)
    scale = 1.0 + mag + mag * mag
    return r_tn, r_alg, scale


def in_cone_many(arr, tol=DEFAULT_TOL):
    """Vectorized cone membership; returns a boolean array."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    arr = np.asarray(arr, dtype=np.float64)
    if not np.isfinite(arr).all():
        raise ValueError("non-finite coefficients")
    r_tn, r_alg, scale = _cone_residuals_many(arr)
    thr = tol * scale
    tn_ok = r_tn <= thr
    alg_ok = r_alg <= thr
    clash = (tn_ok != alg_ok) & (
        (np.minimum(r_tn, r_alg) < thr / 32.0)
        & (np.maximum(r_tn, r_alg) > 32.0 * thr)
    )
    if clash.any():
        k = int(np.flatnonzero(clash.ravel())[0])
        raise CharacterizationMismatch(
            f"cone tests disagree at flat index {k}: "
            f"trace/norm residual vs algebraic residual far apart"
        )
    return tn_ok


def in_cone(x, tol=DEFAULT_TOL):
    check_finite(x)
    return bool(in_cone_many(x.coeffs[None, :], tol)[0])


def _root_residuals(x):
    sq = x * x
    r_sq = float(np.abs((sq + E0).coeffs).max())
    q, p = split(x)
    r_split = max(
        abs(q.w),
        abs(q.norm_sq() - 1.0),
        abs(p.w),
        abs(p.norm_sq() - 1.0),
    )
    return r_sq, r_split


def in_root_sphere(x, tol=DEFAULT_TOL):
    """Whether x*x = -e0 within tol; cross-checked on the split components."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    check_finite(x)
    r_sq, r_split = _root_residuals(x)
    mag = x.euclid_norm()
    thr = tol * (1.0 + mag + mag * mag)
    sq_ok = r_sq <= thr
    split_ok = r_split <= 4.0 * thr
    if sq_ok != split_ok and (
        min(r_sq, r_split) < thr / 32.0 and max(r_sq, r_split) > 32.0 * thr
    ):
        raise CharacterizationMismatch(
            "square test and split test for the root sphere disagree"
        )
    return bool(sq_ok)


def _unit_imaginary(rng):
    v = rng.standard_normal(3)
    nrm = np.linalg.norm(v)
    while nrm < 1e-12:
        v = rng.standard_normal(3)
        nrm = np.linalg.norm(v)
    v = v / nrm
    return Quaternion(0.0, v[0], v[1], v[2])


def sample_root_sphere(seed):
    """Deterministic uniform sample from the root sphere.

    Draws one unit imaginary quaternion per factor (gaussian-normalize)
    and assembles them through the idempotent splitting.
    """
    rng = np.random.default_rng(seed)
    i1 = _unit_imaginary(rng)
    i2 = _unit_imaginary(rng)
    return unsplit(QuatPair(i1, i2))


def root_sphere_from_units(i1, i2):
    """Assemble a root-sphere point from two unit imaginary quaternions."""
    return unsplit(QuatPair(i1, i2))


def _project_to_root_sphere(x):
    """Snap a near-root-sphere element exactly onto the sphere."""
    q, p = split(x)

    def fix(u):
        v = np.array([u.x, u.y, u.z])
        nrm = np.linalg.norm(v)
        if nrm < 1e-12:
            raise NotRootSphere("imaginary part vanished while normalizing")
        v = v / nrm
        return Quaternion(0.0, v[0], v[1], v[2])

    return unsplit(QuatPair(fix(q), fix(p)))


def slice_coords(x, tol=DEFAULT_TOL):
    """Decompose a cone point as alpha*e0 + beta*J with beta >= 0.

    Real points (beta <= tol) are reported with J = None instead of a
    fabricated direction.
    """
    check_finite(x)
    if not in_cone(x, tol):
        raise NotInCone(f"{x!r} is not in the quadratic cone")
    alpha = 0.5 * float(x.trace().coeffs[0])
    n_real = float(x.norm_form().coeffs[0])
    beta_sq = n_real - alpha * alpha
    beta = float(np.sqrt(beta_sq)) if beta_sq > 0.0 else 0.0
    if beta <= tol:
        return SliceCoords(alpha=alpha, beta=0.0, J=None)
    j_raw = (x - Cl3Element.scalar(alpha)) * (1.0 / beta)
    j = _project_to_root_sphere(j_raw)
    rec = Cl3Element.scalar(alpha) + beta * j
    if float(np.abs((rec - x).coeffs).max()) > 1e-9 * (1.0 + x.euclid_norm()):
        raise NotInCone(f"slice reconstruction failed for {x!r}")
    return SliceCoords(alpha=alpha, beta=beta, J=j)


def slice_point(alpha, beta, j):
    """The cone point alpha*e0 + beta*J."""
    return Cl3Element.scalar(alpha) + float(beta) * j


def slice_points_many(alphas, betas, j):
    """Batched cone points over one direction J: returns (n, 8) array."""
    alphas = np.asarray(alphas, dtype=np.float64)
    betas = np.asarray(betas, dtype=np.float64)
    out = np.zeros(alphas.shape + (8,))
    out[..., 0] = alphas
    out += betas[..., None] * j.coeffs
    return out


def batch_in_root_sphere(arr, tol=DEFAULT_TOL):
    """Vectorized root-sphere membership for an (n, 8) array."""
    arr = np.asarray(arr, dtype=np.float64)
    sq = mul_many(arr, arr)
    sq[..., 0] += 1.0
    r_sq = np.abs(sq).max(axis=-1)
    q, p = split_many(arr)
    r_split = np.maximum.reduce(
        [
            np.abs(q[..., 0]),
            np.abs((q * q).sum(axis=-1) - 1.0),
            np.abs(p[..., 0]),
            np.abs((p * p).sum(axis=-1) - 1.0),
        ]
    )
    mag = np.linalg.norm(arr, axis=-1)
    thr = tol * (1.0 + mag + mag * mag)
    return (r_sq <= thr) & (r_split <= 4.0 * thr)


def cone_membership_counts(arr, tol=DEFAULT_TOL):
    """Diagnostic: how many rows pass each characterization."""
    r_tn, r_alg, scale = _cone_residuals_many(arr)
    thr = tol * scale
    return int((r_tn <= thr).sum()), int((r_alg <= thr).sum())
