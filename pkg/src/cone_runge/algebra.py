"""Arithmetic in the eight-dimensional real Clifford algebra R3.

Elements are stored as 8 coefficients on the basis
``[e0, e1, e2, e3, e12, e13, e23, e123]``. The multiplication table is
generated from the defining relations ``e_i e_j + e_j e_i = -2 delta_ij``
by normalizing index words with transposition sign tracking, never entered
by hand. The central idempotents ``omega_pm = (e0 +- e123)/2`` split the
algebra into two quaternionic factors; ``split``/``unsplit`` move between
the two pictures.
"""

import itertools
import json

import numpy as np

from . import kernels
from .errors import NonFiniteInput

BASIS_NAMES = ("e0", "e1", "e2", "e3", "e12", "e13", "e23", "e123")
BASIS_WORDS = ((), (1,), (2,), (3,), (1, 2), (1, 3), (2, 3), (1, 2, 3))
_WORD_INDEX = {w: k for k, w in enumerate(BASIS_WORDS)}


def _normalize_word(word):
    """Sort a generator word, tracking the transposition sign and
    cancelling adjacent equal generators with e_i^2 = -1."""
    sign = 1
    letters = list(word)
    # insertion sort; each adjacent swap of distinct generators flips sign
    i = 1
    while i < len(letters):
        j = i
        while j > 0 and letters[j - 1] > letters[j]:
            letters[j - 1], letters[j] = letters[j], letters[j - 1]
            sign = -sign
            j -= 1
        i += 1
    # cancel equal adjacent pairs
    out = []
    k = 0
    while k < len(letters):
        if k + 1 < len(letters) and letters[k] == letters[k + 1]:
            sign = -sign
            k += 2
        else:
            out.append(letters[k])
            k += 1
    return sign, tuple(out)


def _build_tables():
    idx = np.zeros((8, 8), dtype=np.int64)
    sgn = np.zeros((8, 8), dtype=np.float64)
    for i, wi in enumerate(BASIS_WORDS):
        for j, wj in enumerate(BASIS_WORDS):
            s, w = _normalize_word(wi + wj)
            idx[i, j] = _WORD_INDEX[w]
            sgn[i, j] = s
    return idx, sgn


MUL_INDEX, MUL_SIGN = _build_tables()

# Clifford conjugation: +e0, -e_i, -e_ij, +e123
CONJ_SIGNS = np.array([1.0, -1.0, -1.0, -1.0, -1.0, -1.0, -1.0, 1.0])


def mul_many(a, b):
    """Batched product of (..., 8) coefficient arrays."""
    return kernels.mul_batch(a, b, MUL_INDEX, MUL_SIGN)


def conj_many(a):
    return np.asarray(a, dtype=np.float64) * CONJ_SIGNS


def trace_many(a):
    return np.asarray(a, dtype=np.float64) + conj_many(a)


def norm_many(a):
    a = np.asarray(a, dtype=np.float64)
    return mul_many(a, conj_many(a))


class Cl3Element:
    """Immutable element of R3 as 8 real coefficients."""

    __slots__ = ("_c",)

    def __init__(self, coeffs):
        c = np.array(coeffs, dtype=np.float64)
        if c.shape != (8,):
            raise ValueError("Cl3Element needs exactly 8 coefficients")
        c.setflags(write=False)
        object.__setattr__(self, "_c", c)

    @property
    def coeffs(self):
        return self._c

    @classmethod
    def scalar(cls, value):
        c = np.zeros(8)
        c[0] = value
        return cls(c)

    @classmethod
    def basis(cls, k):
        c = np.zeros(8)
        c[k] = 1.0
        return cls(c)

    def __add__(self, other):
        return Cl3Element(self._c + _as_coeffs(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Cl3Element(self._c - _as_coeffs(other))

    def __rsub__(self, other):
        return Cl3Element(_as_coeffs(other) - self._c)

    def __neg__(self):
        return Cl3Element(-self._c)

    def __mul__(self, other):
        if isinstance(other, Cl3Element):
            return Cl3Element(mul_many(self._c, other._c))
        if np.isscalar(other):
            return Cl3Element(self._c * float(other))
        return NotImplemented

    def __rmul__(self, other):
        if np.isscalar(other):
            return Cl3Element(self._c * float(other))
        return NotImplemented

    def __truediv__(self, other):
        if np.isscalar(other):
            return Cl3Element(self._c / float(other))
        return NotImplemented

    def conj(self):
        return Cl3Element(conj_many(self._c))

    def trace(self):
        return Cl3Element(trace_many(self._c))

    def norm_form(self):
        return Cl3Element(norm_many(self._c))

    def euclid_norm(self):
        """Euclidean norm of the 8-coefficient vector."""
        return float(np.linalg.norm(self._c))

    def scalar_part(self):
        return float(self._c[0])

    def is_finite(self):
        return bool(np.isfinite(self._c).all())

    def allclose(self, other, rtol=1e-10, atol=1e-12):
        return bool(np.allclose(self._c, _as_coeffs(other), rtol=rtol, atol=atol))

    def __eq__(self, other):
        if not isinstance(other, Cl3Element):
            return NotImplemented
        return bool(np.array_equal(self._c, other._c))

    def __repr__(self):
        terms = [
            f"{v:+g}*{n}" for v, n in zip(self._c, BASIS_NAMES) if v != 0.0
        ]
        return "Cl3(" + (" ".join(terms) if terms else "0") + ")"

    def to_json(self):
        return json.dumps(list(self._c))

    @classmethod
    def from_json(cls, text):
        return cls(json.loads(text))


def _as_coeffs(x):
    if isinstance(x, Cl3Element):
        return x.coeffs
    if np.isscalar(x):
        c = np.zeros(8)
        c[0] = float(x)
        return c
    return np.asarray(x, dtype=np.float64)


E0, E1, E2, E3, E12, E13, E23, E123 = (Cl3Element.basis(k) for k in range(8))
OMEGA_PLUS = (E0 + E123) * 0.5
OMEGA_MINUS = (E0 - E123) * 0.5


def mul(x, y):
    return x * y


def conj(x):
    return x.conj()


def trace(x):
    return x.trace()


def norm_form(x):
    return x.norm_form()


class Quaternion:
    """Quaternion on basis {1, i, j, k} with ij = k, i^2 = -1."""

    __slots__ = ("w", "x", "y", "z")

    def __init__(self, w, x=0.0, y=0.0, z=0.0):
        self.w = float(w)
        self.x = float(x)
        self.y = float(y)
        self.z = float(z)

    @classmethod
    def from_array(cls, a):
        return cls(a[0], a[1], a[2], a[3])

    def as_array(self):
        return np.array([self.w, self.x, self.y, self.z])

    def __add__(self, q):
        q = _as_quat(q)
        return Quaternion(self.w + q.w, self.x + q.x, self.y + q.y, self.z + q.z)

    def __sub__(self, q):
        q = _as_quat(q)
        return Quaternion(self.w - q.w, self.x - q.x, self.y - q.y, self.z - q.z)

    def __neg__(self):
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def __mul__(self, q):
        if np.isscalar(q):
            return Quaternion(self.w * q, self.x * q, self.y * q, self.z * q)
        q = _as_quat(q)
        return Quaternion(
            self.w * q.w - self.x * q.x - self.y * q.y - self.z * q.z,
            self.w * q.x + self.x * q.w + self.y * q.z - self.z * q.y,
            self.w * q.y - self.x * q.z + self.y * q.w + self.z * q.x,
            self.w * q.z + self.x * q.y - self.y * q.x + self.z * q.w,
        )

    def __rmul__(self, s):
        if np.isscalar(s):
            return Quaternion(self.w * s, self.x * s, self.y * s, self.z * s)
        return NotImplemented

    def conj(self):
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def norm_sq(self):
        return self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z

    def __abs__(self):
        return float(np.sqrt(self.norm_sq()))

    def allclose(self, q, rtol=1e-10, atol=1e-12):
        return bool(np.allclose(self.as_array(), _as_quat(q).as_array(), rtol=rtol, atol=atol))

    def __repr__(self):
        return f"Quaternion({self.w:g}, {self.x:g}, {self.y:g}, {self.z:g})"


def _as_quat(q):
    if isinstance(q, Quaternion):
        return q
    if np.isscalar(q):
        return Quaternion(q)
    return Quaternion.from_array(q)


def _find_embedding():
    """Fix the isomorphism from quaternions onto the even subalgebra.

    The even subalgebra is spanned by {e0, e12, e13, e23}; candidate maps
    send i -> a*e23, j -> b*e13, k -> c*e12 and the first sign assignment
    that is multiplicative on the quaternion basis wins.
    """
    targets = np.array([6, 5, 4])  # indices of e23, e13, e12
    quat_words = [Quaternion(1), Quaternion(0, 1), Quaternion(0, 0, 1), Quaternion(0, 0, 0, 1)]
    for signs in itertools.product((1.0, -1.0), repeat=3):
        cols = np.zeros((8, 4))
        cols[0, 0] = 1.0
        for m, (t, s) in enumerate(zip(targets, signs), start=1):
            cols[t, m] = s
        ok = True
        for a in range(4):
            for b in range(4):
                qa, qb = quat_words[a], quat_words[b]
                lhs = mul_many(cols[:, a], cols[:, b])
                rhs = cols @ (qa * qb).as_array()
                if not np.allclose(lhs, rhs, atol=1e-14):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return cols
    raise RuntimeError("no multiplicative embedding of the quaternions found")


# columns: images of 1, i, j, k in R3 coefficients
EMBED_COLS = _find_embedding()
EMBED_COLS.setflags(write=False)


def embed_quaternion(q):
    """Image of a quaternion in the even subalgebra of R3."""
    return Cl3Element(EMBED_COLS @ _as_quat(q).as_array())


def _build_split_matrix():
    m = np.zeros((8, 8))
    wp = OMEGA_PLUS.coeffs
    wm = OMEGA_MINUS.coeffs
    for k in range(4):
        m[:, k] = mul_many(wp, EMBED_COLS[:, k])
        m[:, 4 + k] = mul_many(wm, EMBED_COLS[:, k])
    return m


SPLIT_MATRIX = _build_split_matrix()
SPLIT_MATRIX.setflags(write=False)
# columns are orthogonal with squared norm 1/2, so the inverse is exact
SPLIT_INVERSE = 2.0 * SPLIT_MATRIX.T
SPLIT_INVERSE.setflags(write=False)


class QuatPair:
    """The two quaternionic components of an R3 element."""

    __slots__ = ("q", "p")

    def __init__(self, q, p):
        self.q = _as_quat(q)
        self.p = _as_quat(p)

    def __iter__(self):
        return iter((self.q, self.p))

    def __repr__(self):
        return f"QuatPair(q={self.q!r}, p={self.p!r})"

    def to_json(self):
        return json.dumps({"q": list(self.q.as_array()), "p": list(self.p.as_array())})

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        return cls(Quaternion.from_array(d["q"]), Quaternion.from_array(d["p"]))


def split(x):
    """Quaternionic components (q, p) with x = omega_plus q + omega_minus p."""
    qp = SPLIT_INVERSE @ x.coeffs
    return QuatPair(Quaternion.from_array(qp[:4]), Quaternion.from_array(qp[4:]))


def unsplit(pair):
    qp = np.concatenate([pair.q.as_array(), pair.p.as_array()])
    return Cl3Element(SPLIT_MATRIX @ qp)


def split_many(arr):
    """Batched split: (..., 8) -> ((..., 4) q-part, (..., 4) p-part)."""
    qp = np.asarray(arr, dtype=np.float64) @ SPLIT_INVERSE.T
    return qp[..., :4], qp[..., 4:]


def unsplit_many(q, p):
    qp = np.concatenate([np.asarray(q), np.asarray(p)], axis=-1)
    return qp @ SPLIT_MATRIX.T


def check_finite(x):
    if not x.is_finite():
        raise NonFiniteInput(f"non-finite coefficients: {x!r}")
    return x
