"""Rasterized symmetric plane domains and their combinatorial topology.

Cell centers sit on the lattice (i/res, k/res) so reflection across the
real axis is an exact row flip and row k=0 is the symmetry row. Domains
use 4-connectivity, complements 8-connectivity; with that pairing the
Euler-characteristic hole count is a theorem at grid level and is checked
on every summary. The window border keeps a clear 2-cell margin, making
the outer complement component unique and unbounded.
"""

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import EulerMismatch, ResolutionTooLow, ThinFeature
from .kernels import euler_characteristic, label_components

MARGIN_CELLS = 2
MIN_RESOLUTION = 8
MIN_FEATURE_CELLS = 3


@dataclass(frozen=True)
class Shape:
    op: str  # add | subtract
    kind: str  # disk | rect | halfplane
    params: dict

    def to_dict(self):
        return {"op": self.op, self.kind: self.params}


@dataclass(frozen=True)
class DomainSpec:
    """Recipe for a symmetric open subset of the plane."""

    window: tuple  # (xmin, xmax, ymin, ymax)
    resolution: int
    shapes: tuple

    @classmethod
    def build(cls, window, resolution, shapes):
        parsed = []
        for s in shapes:
            if isinstance(s, Shape):
                parsed.append(s)
                continue
            op = s["op"]
            kinds = [k for k in ("disk", "rect", "halfplane") if k in s]
            if op not in ("add", "subtract") or len(kinds) != 1:
                raise ValueError(f"bad shape entry: {s}")
            parsed.append(Shape(op=op, kind=kinds[0], params=dict(s[kinds[0]])))
        return cls(window=tuple(window), resolution=int(resolution), shapes=tuple(parsed))

    @classmethod
    def from_dict(cls, d):
        return cls.build(d["window"], d["resolution"], d["shapes"])

    def to_dict(self):
        return {
            "window": list(self.window),
            "resolution": self.resolution,
            "shapes": [s.to_dict() for s in self.shapes],
        }

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def disk(cx, cy, r, op="add"):
    return Shape(op=op, kind="disk", params={"c": [cx, cy], "r": r})


def rect(x0, y0, x1, y1, op="add"):
    return Shape(op=op, kind="rect", params={"corners": [[x0, y0], [x1, y1]]})


def halfplane(nx, ny, offset, op="add"):
    return Shape(op=op, kind="halfplane", params={"normal": [nx, ny], "offset": offset})


class DomainGrid:
    """Immutable rasterized symmetric domain."""

    def __init__(self, mask, resolution, x_index0, y_index0, spec=None):
        mask = np.asarray(mask, dtype=bool)
        mask.setflags(write=False)
        self.mask = mask
        self.resolution = int(resolution)
        self._ix0 = int(x_index0)  # lattice x-index of column 0
        self._iy0 = int(y_index0)  # lattice y-index of row 0 (negative)
        self.spec = spec
        self._cache = {}

    # -- geometry ---------------------------------------------------------

    @property
    def xs(self):
        return (np.arange(self.mask.shape[1]) + self._ix0) / self.resolution

    @property
    def ys(self):
        return (np.arange(self.mask.shape[0]) + self._iy0) / self.resolution

    @property
    def x0(self):
        return self._ix0 / self.resolution

    @property
    def y0(self):
        return self._iy0 / self.resolution

    @property
    def symmetry_row(self):
        return -self._iy0

    def cell_center(self, row, col):
        return (
            (col + self._ix0) / self.resolution,
            (row + self._iy0) / self.resolution,
        )

    def mirror(self):
        return DomainGrid(
            self.mask[::-1].copy(), self.resolution, self._ix0, self._iy0, self.spec
        )

    def contains_points(self, z):
        """Membership of complex plane points (nearest-cell lookup)."""
        z = np.asarray(z, dtype=np.complex128)
        cols = np.rint(z.real * self.resolution).astype(int) - self._ix0
        rows = np.rint(z.imag * self.resolution).astype(int) - self._iy0
        ny, nx = self.mask.shape
        ok = (rows >= 0) & (rows < ny) & (cols >= 0) & (cols < nx)
        out = np.zeros(z.shape, dtype=bool)
        out[ok] = self.mask[rows[ok], cols[ok]]
        return out

    def sample_points(self, n, rng):
        """n cell centers drawn from the domain, closed under conjugation."""
        rows, cols = np.nonzero(self.mask)
        if rows.size == 0:
            return np.zeros(0, dtype=np.complex128)
        upper = rows >= self.symmetry_row
        ru, cu = rows[upper], cols[upper]
        take = min(max(n // 2 + 1, 1), ru.size)
        pick = rng.choice(ru.size, size=take, replace=False)
        xs = (cu[pick] + self._ix0) / self.resolution
        ys = (ru[pick] + self._iy0) / self.resolution
        pts = xs + 1j * ys
        return np.unique(np.concatenate([pts, pts.conj()]))

    # -- labelings --------------------------------------------------------

    def domain_labels(self):
        if "domain_labels" not in self._cache:
            self._cache["domain_labels"] = label_components(self.mask, 4)
        return self._cache["domain_labels"]

    def complement_labels(self):
        if "complement_labels" not in self._cache:
            self._cache["complement_labels"] = label_components(~self.mask, 8)
        return self._cache["complement_labels"]

    def complement_components(self):
        """List of complement components with boundedness and a
        representative plane point."""
        if "complement_components" in self._cache:
            return self._cache["complement_components"]
        labels, count = self.complement_labels()
        border = np.zeros(self.mask.shape, dtype=bool)
        border[0, :] = border[-1, :] = True
        border[:, 0] = border[:, -1] = True
        unbounded = set(np.unique(labels[border & ~self.mask]).tolist())
        comps = []
        for lab in range(count):
            cells = labels == lab
            rows, cols = np.nonzero(cells)
            k = int(np.argmin(rows * self.mask.shape[1] + cols))
            comps.append(
                {
                    "label": lab,
                    "bounded": lab not in unbounded,
                    "size": int(cells.sum()),
                    "rep_cell": (int(rows[k]), int(cols[k])),
                    "rep_point": self.cell_center(int(rows[k]), int(cols[k])),
                }
            )
        self._cache["complement_components"] = comps
        return comps

    def bounded_holes(self):
        return [c for c in self.complement_components() if c["bounded"]]

    def to_pgm(self):
        """P5 preview, top row = largest y."""
        ny, nx = self.mask.shape
        img = np.where(self.mask[::-1], 255, 0).astype(np.uint8)
        return b"P5\n%d %d\n255\n" % (nx, ny) + img.tobytes()


@dataclass
class TopoSummary:
    b0_D: int
    b1_D: int
    b0_Dreal: int
    b0_Dplus: int
    k_offreal: int
    euler_char: int
    bounded_complement_components: list = field(default_factory=list)

    def to_dict(self):
        return {
            "b0": self.b0_D,
            "b1": self.b1_D,
            "b0_real": self.b0_Dreal,
            "b0_plus": self.b0_Dplus,
            "k_offreal": self.k_offreal,
            "euler_char": self.euler_char,
            "holes": [list(c["rep_point"]) for c in self.bounded_complement_components],
        }


def _count_runs(row):
    padded = np.zeros(row.size + 1, dtype=np.int8)
    padded[: row.size] = row
    return int((np.diff(padded, prepend=0) == 1).sum())


def rasterize(spec):
    """Rasterize a DomainSpec onto its lattice grid.

    The window is extended to be symmetric in y if needed; the border
    margin is cleared afterwards so the outer complement component is
    unique and unbounded.
    """
    xmin, xmax, ymin, ymax = spec.window
    if not (xmax > xmin and ymax > ymin):
        raise ValueError(f"empty window {spec.window}")
    res = spec.resolution
    if res < MIN_RESOLUTION:
        raise ResolutionTooLow(f"resolution {res} < {MIN_RESOLUTION} cells per unit")
    ymag = max(abs(ymin), abs(ymax))
    iy_max = int(np.floor(ymag * res + 1e-9))
    ix0 = int(np.ceil(xmin * res - 1e-9))
    ix1 = int(np.floor(xmax * res + 1e-9))
    xs = np.arange(ix0, ix1 + 1) / res
    ys = np.arange(-iy_max, iy_max + 1) / res
    xx = xs[None, :]
    yy = ys[:, None]
    grid = np.zeros((ys.size, xs.size), dtype=bool)
    min_feature = MIN_FEATURE_CELLS / res
    for k, shape in enumerate(spec.shapes):
        if shape.kind == "disk":
            (cx, cy), r = shape.params["c"], shape.params["r"]
            if r < min_feature:
                raise ThinFeature(
                    f"shape {k}: disk radius {r} below {min_feature} "
                    f"({MIN_FEATURE_CELLS} cells at resolution {res})"
                )
            m = (xx - cx) ** 2 + (yy - cy) ** 2 < r * r
        elif shape.kind == "rect":
            (x0, y0), (x1, y1) = shape.params["corners"]
            x0, x1 = min(x0, x1), max(x0, x1)
            y0, y1 = min(y0, y1), max(y0, y1)
            if min(x1 - x0, y1 - y0) < min_feature:
                raise ThinFeature(f"shape {k}: rectangle side below {min_feature}")
            m = (xx > x0) & (xx < x1) & (yy > y0) & (yy < y1)
        elif shape.kind == "halfplane":
            nx_, ny_ = shape.params["normal"]
            off = shape.params["offset"]
            m = nx_ * xx + ny_ * yy < off
        else:
            raise ValueError(f"unknown shape kind {shape.kind}")
        m = m | m[::-1]  # symmetrize: a cell counts if it or its mirror hits
        if shape.op == "add":
            grid |= m
        else:
            grid &= ~m
    # clear the border margin
    grid[:MARGIN_CELLS, :] = False
    grid[-MARGIN_CELLS:, :] = False
    grid[:, :MARGIN_CELLS] = False
    grid[:, -MARGIN_CELLS:] = False
    if not grid.any():
        warnings.warn("domain rasterized empty", UserWarning, stacklevel=2)
    return DomainGrid(grid, res, ix0, -iy_max, spec)


def connected_components(mask, connectivity):
    """Flood-fill labeling; 4-connectivity for domains, 8 for complements."""
    return label_components(np.asarray(mask, dtype=bool), connectivity)


def summarize(grid):
    """TopoSummary of a rasterized domain, with the Euler cross-check."""
    mask = grid.mask
    _, b0 = grid.domain_labels()
    holes = grid.bounded_holes()
    b1 = len(holes)
    chi = euler_characteristic(mask)
    if b1 != b0 - chi:
        raise EulerMismatch(
            f"flood-fill holes {b1} != b0 - chi = {b0} - {chi}"
        )
    krow = grid.symmetry_row
    b0_real = _count_runs(mask[krow])
    upper = mask[krow:]
    up_labels, b0_plus = label_components(upper, 4)
    on_axis = set(np.unique(up_labels[0][up_labels[0] >= 0]).tolist()) if b0_plus else set()
    k_off = b0_plus - len(on_axis)
    return TopoSummary(
        b0_D=b0,
        b1_D=b1,
        b0_Dreal=b0_real,
        b0_Dplus=b0_plus,
        k_offreal=k_off,
        euler_char=chi,
        bounded_complement_components=holes,
    )


def symmetric_components(grid):
    """Group the 4-connected components of D into symmetric classes.

    Returns a list of dicts: self-symmetric components stay alone, an
    off-axis component is paired with its mirror (listed once, with the
    upper member identified).
    """
    labels, count = grid.domain_labels()
    if count == 0:
        return []
    mirrored = labels[::-1]
    partner = {}
    for lab in range(count):
        cells = labels == lab
        rows, cols = np.nonzero(cells)
        partner[lab] = int(mirrored[rows[0], cols[0]])
    classes = []
    seen = set()
    for lab in range(count):
        if lab in seen:
            continue
        mate = partner[lab]
        if mate == lab:
            classes.append({"labels": (lab,), "mask": labels == lab, "paired": False})
            seen.add(lab)
        else:
            mask = (labels == lab) | (labels == mate)
            upper_lab = lab
            rows_a, _ = np.nonzero(labels == lab)
            rows_b, _ = np.nonzero(labels == mate)
            if rows_a.max() < rows_b.max():
                upper_lab = mate
            classes.append(
                {
                    "labels": tuple(sorted((lab, mate))),
                    "mask": mask,
                    "paired": True,
                    "upper_mask": labels == upper_lab,
                }
            )
            seen.update((lab, mate))
    return classes


def count_bounded_holes(mask):
    """Bounded 8-connected complement components of a standalone cell set."""
    labels, count = label_components(~mask, 8)
    border = np.zeros(mask.shape, dtype=bool)
    border[0, :] = border[-1, :] = True
    border[:, 0] = border[:, -1] = True
    unbounded = set(np.unique(labels[border & ~mask]).tolist())
    return count - len(unbounded)


def erode(mask, steps):
    """Chebyshev erosion by whole cells."""
    out = np.asarray(mask, dtype=bool).copy()
    for _ in range(steps):
        p = np.pad(out, 1, constant_values=False)
        out = (
            p[1:-1, 1:-1]
            & p[:-2, 1:-1]
            & p[2:, 1:-1]
            & p[1:-1, :-2]
            & p[1:-1, 2:]
            & p[:-2, :-2]
            & p[:-2, 2:]
            & p[2:, :-2]
            & p[2:, 2:]
        )
    return out


def deepest_cell(mask):
    """A cell of maximal Chebyshev depth inside the set (erosion survivor)."""
    if not mask.any():
        raise ValueError("empty set has no deepest cell")
    cur = np.asarray(mask, dtype=bool)
    while True:
        nxt = erode(cur, 1)
        if not nxt.any():
            rows, cols = np.nonzero(cur)
            k = int(np.argmin(np.abs(rows - rows.mean()) + np.abs(cols - cols.mean())))
            return int(rows[k]), int(cols[k])
        cur = nxt
