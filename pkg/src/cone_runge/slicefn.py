"""Stem functions, induced slice functions, and their calculus.

A stem function maps a symmetric plane domain to complexified R3,
``F(z) = F1(z) + i*F2(z)`` with F1 even and F2 odd in the imaginary part.
It induces the slice function ``f(alpha + beta*J) = F1 + J*F2`` on the
axially symmetric subset of the quadratic cone swept over all root-sphere
directions J. Polynomials carry right coefficients: ``f(x) = sum x^k a_k``.
"""

import json

import numpy as np

from .algebra import (
    Cl3Element,
    E0,
    Quaternion,
    conj_many,
    mul_many,
    split,
    unsplit,
    QuatPair,
)
from .cone import (
    DEFAULT_TOL,
    in_cone,
    in_root_sphere,
    sample_root_sphere,
    slice_coords,
)
from .errors import (
    BadBasis,
    NotInCone,
    NotRealDenominator,
    NotRootSphere,
    OutOfDomain,
    ZeroDenominator,
)

SQRT2 = float(np.sqrt(2.0))


# ---------------------------------------------------------------------------
# stems


class StemFunction:
    """Base class; subclasses provide ``components`` on complex arrays."""

    kind = "tabulated"
    domain = None

    def components(self, z):
        raise NotImplementedError

    def contains(self, z):
        """Whether the plane points lie over the stem's domain."""
        if self.domain is None:
            return np.ones(np.shape(z), dtype=bool)
        return self.domain.contains_points(z)

    def norm16(self, z):
        """Euclidean norm of F(z) in R3 tensor C, i.e. sqrt(|F1|^2+|F2|^2)."""
        f1, f2 = self.components(z)
        return np.sqrt((f1 * f1).sum(axis=-1) + (f2 * f2).sum(axis=-1))


class PolynomialStem(StemFunction):
    kind = "polynomial"

    def __init__(self, coeffs, domain=None):
        coeffs = np.atleast_2d(np.asarray(coeffs, dtype=np.float64))
        if coeffs.shape[1] != 8:
            raise ValueError("coefficients must be rows of 8 reals")
        self.coeffs = coeffs
        self.domain = domain

    def components(self, z):
        z = np.asarray(z, dtype=np.complex128)
        powers = np.vander(z.ravel(), self.coeffs.shape[0], increasing=True)
        vals = powers @ self.coeffs.astype(np.complex128)
        vals = vals.reshape(z.shape + (8,))
        return vals.real.copy(), vals.imag.copy()


class RationalStem(StemFunction):
    """Numerator with R3 coefficients over a real scalar polynomial."""

    kind = "rational"

    def __init__(self, num_coeffs, den_coeffs, domain=None):
        self.num = np.atleast_2d(np.asarray(num_coeffs, dtype=np.float64))
        self.den = np.asarray(den_coeffs, dtype=np.float64)
        if not self.den.any():
            raise ZeroDenominator("denominator polynomial is identically zero")
        self.domain = domain

    def _den_at(self, z):
        z = np.asarray(z, dtype=np.complex128)
        w = np.zeros(z.shape, dtype=np.complex128)
        for c in self.den[::-1]:
            w = w * z + c
        return w

    def components(self, z):
        z = np.asarray(z, dtype=np.complex128)
        powers = np.vander(z.ravel(), self.num.shape[0], increasing=True)
        g = powers @ self.num.astype(np.complex128)
        w = self._den_at(z.ravel())
        scale = 1.0 + np.abs(z.ravel()) ** max(len(self.den) - 1, 1)
        bad = np.abs(w) < 1e-13 * scale
        if bad.any():
            zb = z.ravel()[bad][0]
            raise ZeroDenominator(f"evaluation at a denominator zero near z={zb}")
        vals = (g / w[:, None]).reshape(z.shape + (8,))
        return vals.real.copy(), vals.imag.copy()


class TabulatedStem(StemFunction):
    """Stem sampled on a raster grid with bilinear off-node interpolation."""

    kind = "tabulated"

    def __init__(self, grid, f1_table, f2_table):
        self.domain = grid
        self.f1 = np.asarray(f1_table, dtype=np.float64)
        self.f2 = np.asarray(f2_table, dtype=np.float64)
        if self.f1.shape != grid.mask.shape + (8,):
            raise ValueError("table shape must match the grid")

    def components(self, z):
        z = np.asarray(z, dtype=np.complex128)
        flat = z.ravel()
        g = self.domain
        fx = (flat.real - g.x0) * g.resolution
        fy = (flat.imag - g.y0) * g.resolution
        i0 = np.clip(np.floor(fx).astype(int), 0, g.mask.shape[1] - 2)
        j0 = np.clip(np.floor(fy).astype(int), 0, g.mask.shape[0] - 2)
        tx = (fx - i0)[:, None]
        ty = (fy - j0)[:, None]
        out1 = (
            self.f1[j0, i0] * (1 - tx) * (1 - ty)
            + self.f1[j0, i0 + 1] * tx * (1 - ty)
            + self.f1[j0 + 1, i0] * (1 - tx) * ty
            + self.f1[j0 + 1, i0 + 1] * tx * ty
        )
        out2 = (
            self.f2[j0, i0] * (1 - tx) * (1 - ty)
            + self.f2[j0, i0 + 1] * tx * (1 - ty)
            + self.f2[j0 + 1, i0] * (1 - tx) * ty
            + self.f2[j0 + 1, i0 + 1] * tx * ty
        )
        return (
            out1.reshape(z.shape + (8,)),
            out2.reshape(z.shape + (8,)),
        )

    @classmethod
    def from_function(cls, grid, fn):
        """Tabulate a callable z -> (F1, F2) on every grid node."""
        zz = grid.xs[None, :] + 1j * grid.ys[:, None]
        f1, f2 = fn(zz)
        return cls(grid, f1, f2)


# ---------------------------------------------------------------------------
# slice functions


class SliceFunction:
    """A slice function determined by its stem."""

    def __init__(self, stem):
        self.stem = stem

    def eval_slice_batch(self, z, j):
        """Values over the slice through J at complex plane points z."""
        f1, f2 = self.stem.components(z)
        return f1 + mul_many(np.broadcast_to(j.coeffs, f2.shape), f2)

    def __call__(self, x, tol=DEFAULT_TOL):
        return slice_eval(self, x, tol)


def slice_eval(f, x, tol=DEFAULT_TOL):
    """Evaluate a slice function at a cone point."""
    if not in_cone(x, tol):
        raise NotInCone(f"{x!r} is not in the quadratic cone")
    sc = slice_coords(x, tol)
    z = complex(sc.alpha, sc.beta)
    if not bool(np.all(f.stem.contains(np.array([z])))):
        raise OutOfDomain(f"point over z={z} is outside the stem domain")
    f1, f2 = f.stem.components(np.array([z]))
    if sc.J is None:
        odd = float(np.abs(f2[0]).max())
        scale = 1.0 + float(np.abs(f1[0]).max())
        if odd > 1e-9 * scale:
            raise AssertionError(
                f"odd stem component does not vanish on the real axis: {odd}"
            )
        return Cl3Element(f1[0])
    return Cl3Element(f1[0]) + sc.J * Cl3Element(f2[0])


def representation_eval(f, alpha, beta, i_dir, j_dir, tol=DEFAULT_TOL):
    """Recover f(alpha + beta*I) from its values on the slice through J."""
    for d in (i_dir, j_dir):
        if not in_root_sphere(d, max(tol, 1e-8)):
            raise NotRootSphere(f"{d!r} is not a root-sphere direction")
    zp = complex(alpha, beta)
    zm = complex(alpha, -beta)
    f1, f2 = f.stem.components(np.array([zp, zm]))
    f_plus = Cl3Element(f1[0]) + j_dir * Cl3Element(f2[0])
    f_minus = Cl3Element(f1[1]) + j_dir * Cl3Element(f2[1])
    half = 0.5 * (f_plus + f_minus)
    swing = j_dir * (f_minus - f_plus)
    return half + 0.5 * (i_dir * swing)


def norm_bounds(f, alpha, beta, j_dir, tol=DEFAULT_TOL):
    """The sandwich (|F|/sqrt2, max |f| over the two slice points, sqrt2 |F|)."""
    if not in_root_sphere(j_dir, max(tol, 1e-8)):
        raise NotRootSphere(f"{j_dir!r} is not a root-sphere direction")
    z = complex(alpha, beta)
    f1, f2 = f.stem.components(np.array([z]))
    stem_norm = float(np.sqrt((f1[0] ** 2).sum() + (f2[0] ** 2).sum()))
    jf2 = j_dir * Cl3Element(f2[0])
    v_plus = Cl3Element(f1[0]) + jf2
    v_minus = Cl3Element(f1[0]) - jf2
    mid = max(v_plus.euclid_norm(), v_minus.euclid_norm())
    lhs = stem_norm / SQRT2
    rhs = stem_norm * SQRT2
    if lhs > mid + 1e-12 or mid > rhs + 1e-12:
        raise AssertionError(
            f"norm sandwich violated: {lhs} <= {mid} <= {rhs} fails"
        )
    return lhs, mid, rhs


def is_intrinsic(f, n_samples=64, seed=0, tol=1e-9):
    """Whether f commutes with conjugation; cross-checked on the stem."""
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    rng = np.random.default_rng(seed)
    if f.stem.domain is not None:
        zs = f.stem.domain.sample_points(n_samples, rng)
    else:
        zs = rng.uniform(-2, 2, n_samples) + 1j * rng.uniform(0.05, 2, n_samples)
    dirs = [sample_root_sphere(seed * 977 + k) for k in range(min(n_samples, 16))]
    value_ok = True
    for k, z in enumerate(np.asarray(zs)):
        i_dir = dirs[k % len(dirs)]
        f1, f2 = f.stem.components(np.array([z]))
        v_plus = Cl3Element(f1[0]) + i_dir * Cl3Element(f2[0])
        v_minus = Cl3Element(f1[0]) - i_dir * Cl3Element(f2[0])
        scale = 1.0 + v_plus.euclid_norm()
        if not v_minus.allclose(v_plus.conj(), rtol=0, atol=tol * scale):
            value_ok = False
            break
    # stem route: intrinsic iff both components are real-valued
    f1, f2 = f.stem.components(np.asarray(zs))
    stem_ok = bool(
        max(np.abs(f1[..., 1:]).max(), np.abs(f2[..., 1:]).max())
        <= tol * (1.0 + np.abs(f1).max() + np.abs(f2).max())
    )
    if value_ok != stem_ok:
        raise AssertionError(
            "conjugation symmetry and stem realness disagree; "
            "the evaluation pipeline is inconsistent"
        )
    return value_ok


# ---------------------------------------------------------------------------
# polynomials with right R3 coefficients


class SlicePolynomial(SliceFunction):
    def __init__(self, coeffs, domain=None):
        if len(coeffs) == 0:
            coeffs = [np.zeros(8)]
        rows = []
        for c in coeffs:
            if isinstance(c, Cl3Element):
                rows.append(c.coeffs)
            elif np.isscalar(c):
                row = np.zeros(8)
                row[0] = float(c)
                rows.append(row)
            else:
                rows.append(np.asarray(c, dtype=np.float64))
        arr = np.vstack(rows)
        super().__init__(PolynomialStem(arr, domain))
        self.coeffs = self.stem.coeffs

    @property
    def degree(self):
        nz = np.flatnonzero(np.abs(self.coeffs).max(axis=1) > 0)
        return int(nz[-1]) if nz.size else 0

    def coefficient(self, k):
        if k >= self.coeffs.shape[0]:
            return Cl3Element(np.zeros(8))
        return Cl3Element(self.coeffs[k])

    def __add__(self, other):
        n = max(self.coeffs.shape[0], other.coeffs.shape[0])
        a = np.zeros((n, 8))
        a[: self.coeffs.shape[0]] += self.coeffs
        a[: other.coeffs.shape[0]] += other.coeffs
        return SlicePolynomial(a)

    def __neg__(self):
        return SlicePolynomial(-self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s):
        return SlicePolynomial(self.coeffs * float(s))

    def stem_mul(self, other):
        """Series product: coefficients convolve in order c_j * d_k."""
        na, nb = self.coeffs.shape[0], other.coeffs.shape[0]
        out = np.zeros((na + nb - 1, 8))
        for jj in range(na):
            prods = mul_many(
                np.broadcast_to(self.coeffs[jj], other.coeffs.shape), other.coeffs
            )
            out[jj : jj + nb] += prods
        return SlicePolynomial(out)

    def conj_coeffs(self):
        """The polynomial with conjugated coefficients (A^c)."""
        return SlicePolynomial(conj_many(self.coeffs))

    def is_zero(self, tol=0.0):
        return bool(np.abs(self.coeffs).max() <= tol)

    def to_json(self):
        return json.dumps({"coeffs": self.coeffs.tolist()})

    @classmethod
    def from_json(cls, text):
        return cls(json.loads(text)["coeffs"])

    @classmethod
    def variable(cls):
        """The identity polynomial x."""
        return cls([np.zeros(8), E0.coeffs])


def random_polynomial(degree, rng, scale=1.0):
    """Random right-coefficient polynomial, for tests and experiments."""
    return SlicePolynomial(rng.standard_normal((degree + 1, 8)) * scale)


# ---------------------------------------------------------------------------
# rational slice functions


class RationalSliceFunction(SliceFunction):
    """I((A^c A)^{-1} A^c B) for polynomials A, B with A^c A real."""

    def __init__(self, a_poly, b_poly, tol=1e-10):
        self.A = a_poly
        self.B = b_poly
        aca = a_poly.conj_coeffs().stem_mul(a_poly)
        nonreal = float(np.abs(aca.coeffs[:, 1:]).max()) if aca.coeffs.size else 0.0
        scale = 1.0 + float(np.abs(aca.coeffs).max())
        if nonreal > tol * scale:
            raise NotRealDenominator(
                f"A^c*A has non-real components of size {nonreal}"
            )
        den = aca.coeffs[:, 0].copy()
        if not np.any(np.abs(den) > tol):
            raise ZeroDenominator("A^c*A is identically zero")
        self.den_real = den
        self.realness_residual = nonreal
        num = a_poly.conj_coeffs().stem_mul(b_poly)
        super().__init__(RationalStem(num.coeffs, den))
        self.num_coeffs = num.coeffs

    def singular_set(self, tol=1e-8):
        """Poles as real points and spheres (alpha, beta) from the real
        denominator's zeros."""
        den = np.trim_zeros(self.den_real, "b")
        if den.size <= 1:
            return {"real_poles": [], "sphere_poles": []}
        roots = np.roots(den[::-1])
        real_poles, sphere_poles = [], []
        for r in roots:
            if abs(r.imag) <= tol * (1 + abs(r)):
                real_poles.append(float(r.real))
            elif r.imag > 0:
                sphere_poles.append((float(r.real), float(r.imag)))
        real_poles.sort()
        sphere_poles.sort()
        return {
            "real_poles": _dedupe(real_poles, tol),
            "sphere_poles": _dedupe_pairs(sphere_poles, tol),
        }

    def to_json(self):
        return json.dumps(
            {"A": {"coeffs": self.A.coeffs.tolist()}, "B": {"coeffs": self.B.coeffs.tolist()}}
        )

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        return cls(
            SlicePolynomial(d["A"]["coeffs"]), SlicePolynomial(d["B"]["coeffs"])
        )


def _dedupe(vals, tol):
    out = []
    for v in vals:
        if not out or abs(v - out[-1]) > tol * (1 + abs(v)):
            out.append(v)
    return out


def _dedupe_pairs(vals, tol):
    out = []
    for v in vals:
        if not out or max(
            abs(v[0] - out[-1][0]), abs(v[1] - out[-1][1])
        ) > tol * (1 + abs(v[0]) + abs(v[1])):
            out.append(v)
    return out


def rational_build(a_poly, b_poly, tol=1e-10):
    return RationalSliceFunction(a_poly, b_poly, tol)


# ---------------------------------------------------------------------------
# refined splitting along a slice


def completion_basis(i_dir, seed=0):
    """Complete I to (I, I2, I3) satisfying the anticommutation relations.

    Orthogonal completions are chosen in each quaternionic factor with
    opposite handedness so the eight products I_A stay linearly
    independent (same-handed completions collapse onto a single factor).
    """
    if not in_root_sphere(i_dir, 1e-8):
        raise NotRootSphere(f"{i_dir!r} is not a root-sphere direction")
    q, p = split(i_dir)
    rng = np.random.default_rng(seed)

    def orth_pair(u, flip):
        v = np.array([u.x, u.y, u.z])
        v /= np.linalg.norm(v)
        a = rng.standard_normal(3)
        a -= a.dot(v) * v
        while np.linalg.norm(a) < 1e-8:
            a = rng.standard_normal(3)
            a -= a.dot(v) * v
        a /= np.linalg.norm(a)
        b = np.cross(v, a)
        if flip:
            b = -b
        return (
            Quaternion(0, a[0], a[1], a[2]),
            Quaternion(0, b[0], b[1], b[2]),
        )

    a1, b1 = orth_pair(q, flip=False)
    a2, b2 = orth_pair(p, flip=True)
    i2 = unsplit(QuatPair(a1, a2))
    i3 = unsplit(QuatPair(b1, b2))
    return i2, i3


SUBSETS = ((), (1,), (2,), (3,), (1, 2), (1, 3), (2, 3), (1, 2, 3))


def _basis_products(i1, i2, i3):
    gens = {1: i1, 2: i2, 3: i3}
    prods = {}
    for sub in SUBSETS:
        v = E0
        for g in sub:
            v = v * gens[g]
        prods[sub] = v
    return prods


def check_completion_basis(i_dir, basis, tol=1e-10):
    gens = (i_dir, basis[0], basis[1])
    for r in range(3):
        for s in range(3):
            want = -2.0 * E0 if r == s else Cl3Element(np.zeros(8))
            got = gens[r] * gens[s] + gens[s] * gens[r]
            if not got.allclose(want, rtol=0, atol=tol):
                raise BadBasis(
                    f"anticommutation fails for generators {r + 1},{s + 1}"
                )


def refined_split_components(f, i_dir, basis, samples, tol=1e-10):
    """Split f on the slice through I into complex component functions.

    Returns ``(components, residual)`` where ``components`` maps each index
    subset A to the complex values of F_A at the samples. The canonical
    solution is supported on subsets not containing 1 (I itself acts as the
    complex unit); the other four components are identically zero.
    """
    check_completion_basis(i_dir, basis, tol)
    prods = _basis_products(i_dir, basis[0], basis[1])
    scalar_subsets = ((), (2,), (3,), (2, 3))
    cols = []
    for sub in scalar_subsets:
        cols.append(prods[sub].coeffs)
        cols.append((i_dir * prods[sub]).coeffs)
    m = np.column_stack(cols)
    if abs(np.linalg.det(m)) < 1e-8:
        raise BadBasis("products of the completion basis are degenerate")
    m_inv = np.linalg.inv(m)

    zs = np.asarray(samples, dtype=np.complex128)
    values = f.eval_slice_batch(zs, i_dir)
    sol = values @ m_inv.T
    components = {sub: np.zeros(zs.shape, dtype=np.complex128) for sub in SUBSETS}
    for k, sub in enumerate(scalar_subsets):
        components[sub] = sol[..., 2 * k] + 1j * sol[..., 2 * k + 1]

    # reconstruction residual
    recon = np.zeros(zs.shape + (8,))
    for sub in scalar_subsets:
        c = components[sub]
        recon += c.real[..., None] * prods[sub].coeffs
        recon += c.imag[..., None] * (i_dir * prods[sub]).coeffs
    residual = float(np.abs(recon - values).max())
    return components, residual
