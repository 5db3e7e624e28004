"""Runge-pair decisions for nested symmetric plane domains.

Three equivalent conditions are computed through genuinely different
routes and must agree:

* condition 5 -- every bounded hole of the small domain keeps a cell of
  the big domain's complement (direct cell test);
* condition 3 -- the induced map on first homology is injective, computed
  from the incidence of the big domain's holes inside the small domain's
  holes (rank test);
* condition 6 -- the same question transported to the quadratic cone via
  the correspondence between symmetrized plane holes and cone complement
  components.

The homology ranks of the swept cone domain come in closed form from the
plane data; condition 4 (injectivity on the cone's odd homology) follows
from condition 3 by the proven equivalence and is reported as derived.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .domains import (
    DomainGrid,
    count_bounded_holes,
    rasterize,
    summarize,
    symmetric_components,
)
from .errors import NotNested, ParityViolation

__all__ = [
    "OmegaBetti",
    "RungeReport",
    "check_condition3",
    "check_condition5",
    "check_condition6",
    "component_betti",
    "betti_omega",
    "analyze_pair",
]


@dataclass
class OmegaBetti:
    """Ranks of H_1..H_5 of the axially symmetric domain over D."""

    b1: int = 0
    b2: int = 0
    b3: int = 0
    b4: int = 0
    b5: int = 0
    h2_rank: int = 0
    h4_rank: int = 0
    components: list = field(default_factory=list)

    def as_tuple(self):
        return (self.b1, self.b2, self.b3, self.b4, self.b5)

    def to_dict(self):
        return {
            "b": list(self.as_tuple()),
            "h2": self.h2_rank,
            "h4": self.h4_rank,
            "components": self.components,
        }


@dataclass
class Verdict:
    ok: bool
    witness: tuple | None = None
    detail: str = ""

    def to_dict(self):
        return {
            "ok": self.ok,
            "witness": None if self.witness is None else list(self.witness),
            "detail": self.detail,
        }


@dataclass
class RungeReport:
    runge_pair: bool
    cond3: Verdict
    cond5: Verdict
    cond6: Verdict
    cond4_derived: bool
    betti_D: OmegaBetti
    betti_D1: OmegaBetti
    consistency: bool

    def to_dict(self):
        witnesses = [
            list(v.witness)
            for v in (self.cond3, self.cond5, self.cond6)
            if v.witness is not None
        ]
        return {
            "runge_pair": self.runge_pair,
            "cond3": self.cond3.to_dict(),
            "cond5": self.cond5.to_dict(),
            "cond6": self.cond6.to_dict(),
            "cond4_derived": self.cond4_derived,
            "betti_D": self.betti_D.to_dict(),
            "betti_D1": self.betti_D1.to_dict(),
            "witnesses": witnesses,
            "consistency": self.consistency,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_text(self):
        rows = [
            ("condition 3 (H1 injective)", self.cond3),
            ("condition 5 (holes keep complement)", self.cond5),
            ("condition 6 (cone complement)", self.cond6),
        ]
        lines = [f"runge pair: {'yes' if self.runge_pair else 'no'}"]
        for name, v in rows:
            w = "" if v.witness is None else f"  witness at {v.witness}"
            lines.append(f"  {name:<38} {'pass' if v.ok else 'FAIL'}{w}")
        lines.append(f"  condition 4 (derived)                  "
                     f"{'pass' if self.cond4_derived else 'FAIL'}")
        lines.append(f"  betti(D)  = {self.betti_D.as_tuple()}  "
                     f"h2={self.betti_D.h2_rank} h4={self.betti_D.h4_rank}")
        lines.append(f"  betti(D1) = {self.betti_D1.as_tuple()}  "
                     f"h2={self.betti_D1.h2_rank} h4={self.betti_D1.h4_rank}")
        return "\n".join(lines)


def _validate_nested(d_grid, d1_grid):
    if d_grid.mask.shape != d1_grid.mask.shape or d_grid.resolution != d1_grid.resolution:
        raise NotNested("grids must share window and resolution")
    extra = d_grid.mask & ~d1_grid.mask
    if extra.any():
        rows, cols = np.nonzero(extra)
        raise NotNested(
            f"D is not contained in D1; first violation at cell "
            f"{d_grid.cell_center(int(rows[0]), int(cols[0]))}"
        )


def check_condition5(d_grid, d1_grid):
    """Every bounded hole of D must contain a complement cell of D1."""
    _validate_nested(d_grid, d1_grid)
    comp1 = ~d1_grid.mask
    for hole in d_grid.bounded_holes():
        labels, _ = d_grid.complement_labels()
        cells = labels == hole["label"]
        if not (cells & comp1).any():
            return Verdict(
                ok=False,
                witness=hole["rep_point"],
                detail="bounded hole of D lies entirely inside D1",
            )
    return Verdict(ok=True)


def check_condition3(d_grid, d1_grid):
    """Injectivity of H1(D) -> H1(D1) through the hole-incidence rank."""
    _validate_nested(d_grid, d1_grid)
    d_holes = d_grid.bounded_holes()
    if not d_holes:
        return Verdict(ok=True, detail="H1(D) = 0")
    d1_holes = d1_grid.bounded_holes()
    d_labels, _ = d_grid.complement_labels()
    d1_labels, _ = d1_grid.complement_labels()
    # each D1-hole sits inside exactly one complement component of D
    incidence = np.zeros((len(d1_holes), len(d_holes)), dtype=np.int64)
    col_of = {h["label"]: k for k, h in enumerate(d_holes)}
    for row, h1 in enumerate(d1_holes):
        r, c = h1["rep_cell"]
        lab = int(d_labels[r, c])
        if lab >= 0 and lab in col_of:
            incidence[row, col_of[lab]] = 1
    rank = int(np.linalg.matrix_rank(incidence)) if incidence.size else 0
    if rank == len(d_holes):
        return Verdict(ok=True, detail=f"cycle map rank {rank}")
    dead = np.flatnonzero(~incidence.any(axis=0))
    witness = d_holes[int(dead[0])]["rep_point"] if dead.size else None
    return Verdict(
        ok=False,
        witness=witness,
        detail=f"cycle map rank {rank} < {len(d_holes)}",
    )


def check_condition6(d_grid, d1_grid):
    """Condition 5 transported to the cone: symmetrized hole classes of D
    correspond to bounded cone-complement components."""
    _validate_nested(d_grid, d1_grid)
    labels, _ = d_grid.complement_labels()
    mirrored = labels[::-1]
    comp1 = ~d1_grid.mask
    seen = set()
    for hole in d_grid.bounded_holes():
        lab = hole["label"]
        if lab in seen:
            continue
        r, c = hole["rep_cell"]
        mate = int(mirrored[r, c])
        seen.update((lab, mate))
        cells = (labels == lab) | (labels == mate)
        if not (cells & comp1).any():
            x, y = hole["rep_point"]
            return Verdict(
                ok=False,
                witness=(x, abs(y)),
                detail="bounded cone-complement component misses the"
                " complement of the larger cone domain",
            )
    return Verdict(ok=True)


def component_betti(b1_plane, r, meets_real, b1_upper=None):
    """Closed-form Betti contribution of one symmetric component.

    ``meets_real`` distinguishes the two cases; for a conjugate pair,
    ``b1_upper`` is the hole count of the upper member.
    """
    if meets_real:
        if (b1_plane - r) % 2 != 0:
            raise ParityViolation(
                f"(b1 - r) = ({b1_plane} - {r}) is odd; rasterization artifact"
            )
        return {
            "b1": (b1_plane - r) // 2,
            "b2": 0,
            "b3": b1_plane + r,
            "b4": 0,
            "b5": (b1_plane + r) // 2,
        }
    if b1_upper is None:
        raise ValueError("a conjugate pair needs the upper member's hole count")
    return {
        "b1": b1_upper,
        "b2": 2,
        "b3": 2 * b1_upper,
        "b4": 1,
        "b5": b1_upper,
    }


def betti_omega(d_grid):
    """Homology ranks of the swept cone domain from plane data."""
    total = OmegaBetti()
    summary = summarize(d_grid)
    for cls in symmetric_components(d_grid):
        mask = cls["mask"]
        if cls["paired"]:
            b1_upper = count_bounded_holes(cls["upper_mask"])
            contrib = component_betti(2 * b1_upper, 0, False, b1_upper=b1_upper)
            entry = {
                "meets_real": False,
                "b1_plane": 2 * b1_upper,
                "r": 0,
                "betti": [contrib[k] for k in ("b1", "b2", "b3", "b4", "b5")],
            }
        else:
            b1_plane = count_bounded_holes(mask)
            runs = _real_runs(d_grid, mask)
            r = runs - 1
            contrib = component_betti(b1_plane, r, True)
            entry = {
                "meets_real": True,
                "b1_plane": b1_plane,
                "r": r,
                "betti": [contrib[k] for k in ("b1", "b2", "b3", "b4", "b5")],
            }
        total.b1 += contrib["b1"]
        total.b2 += contrib["b2"]
        total.b3 += contrib["b3"]
        total.b4 += contrib["b4"]
        total.b5 += contrib["b5"]
        total.components.append(entry)
    total.h2_rank = 2 * summary.k_offreal
    total.h4_rank = summary.k_offreal
    if total.b2 != total.h2_rank or total.b4 != total.h4_rank:
        raise ParityViolation(
            "pair count from the upper half disagrees with the component sum"
        )
    return total


def _real_runs(grid, mask):
    row = mask[grid.symmetry_row]
    padded = np.zeros(row.size + 1, dtype=np.int8)
    padded[: row.size] = row
    return int((np.diff(padded, prepend=0) == 1).sum())


def analyze_pair(d_spec, d1_spec):
    """Full verdict sheet for a nested pair of domain specs."""
    d_grid = d_spec if isinstance(d_spec, DomainGrid) else rasterize(d_spec)
    d1_grid = d1_spec if isinstance(d1_spec, DomainGrid) else rasterize(d1_spec)
    c5 = check_condition5(d_grid, d1_grid)
    c3 = check_condition3(d_grid, d1_grid)
    c6 = check_condition6(d_grid, d1_grid)
    consistency = c3.ok == c5.ok == c6.ok
    report = RungeReport(
        runge_pair=c5.ok and consistency,
        cond3=c3,
        cond5=c5,
        cond6=c6,
        cond4_derived=c3.ok,
        betti_D=betti_omega(d_grid),
        betti_D1=betti_omega(d1_grid),
        consistency=consistency,
    )
    return report
