"""The sixteen-scheme catalog.

Scheme identifiers "K1".."K6" (row-action), "C1".."C6" (column-action) and
"S1".."S4" (symmetric, SPD systems only) name the members of one family of
iterations

    x_next = x + Z (Y^T A Z)^+ Y^T (b - A x),

where the pair (Y, Z) is rebuilt from a fresh random draw every step:

    K1  one row index i          Y = e_i,   Z = A^T e_i      (randomized Kaczmarz)
    K2  Gaussian vector w (m)    Y = w,     Z = A^T w        (Gaussian Kaczmarz)
    K3  row subset R             Y = I_R,   Z = A^T I_R      (block Kaczmarz)
    K4  Gaussian matrix W (mxl)  Y = W,     Z = A^T W
    K5  row subset R, SPD G      Y = I_R,   Z = G A^T I_R
    K6  Gaussian W (mxl), SPD G  Y = W,     Z = G A^T W
    C1  one column index j       Y = A e_j, Z = e_j          (randomized coordinate descent)
    C2  Gaussian vector w (n)    Y = A w,   Z = w
    C3  column subset C          Y = A I_C, Z = I_C          (block coordinate descent)
    C4  Gaussian matrix W (nxl)  Y = A W,   Z = W
    C5  column subset C, SPD G   Y = G A I_C, Z = I_C
    C6  Gaussian W (nxl), SPD G  Y = G A W, Z = W
    S1  one index i              Y = Z = e_i                 (diagonal coordinate update)
    S2  Gaussian vector w (n)    Y = Z = w
    S3  column subset C          Y = Z = I_C                 (randomized Newton / block CD)
    S4  Gaussian matrix W (nxl)  Y = Z = W

:func:`step` applies the cheap specialized update for each scheme;
:func:`step_generic` assembles the (Y, Z) pair explicitly and serves as the
oracle path the specialized updates are tested against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import sketch
from .linalg import SpdMatrix, pseudoinverse
from .sketch import (COL_SUBSET, COORD_COL, COORD_ROW, GAUSS_MATRIX,
                     GAUSS_VECTOR, ROW_SUBSET, SketchDraw, SketchSpec)

ROW_SCHEMES = ("K1", "K2", "K3", "K4", "K5", "K6")
COL_SCHEMES = ("C1", "C2", "C3", "C4", "C5", "C6")
SYM_SCHEMES = ("S1", "S2", "S3", "S4")
ALL_SCHEMES = ROW_SCHEMES + COL_SCHEMES + SYM_SCHEMES

WEIGHTED_SCHEMES = ("K5", "K6", "C5", "C6")
SCALAR_SCHEMES = ("K1", "K2", "C1", "C2", "S1", "S2")

_KIND_FOR = {
    "K1": COORD_ROW, "K2": GAUSS_VECTOR, "K3": ROW_SUBSET,
    "K4": GAUSS_MATRIX, "K5": ROW_SUBSET, "K6": GAUSS_MATRIX,
    "C1": COORD_COL, "C2": GAUSS_VECTOR, "C3": COL_SUBSET,
    "C4": GAUSS_MATRIX, "C5": COL_SUBSET, "C6": GAUSS_MATRIX,
    "S1": COORD_ROW, "S2": GAUSS_VECTOR, "S3": COL_SUBSET,
    "S4": GAUSS_MATRIX,
}


class SkipStep(Exception):
    """Raised when a draw hits a degenerate denominator (zero row/column);
    the solver keeps the iterate unchanged and counts the step."""


def family(scheme_id: str) -> str:
    """"K", "C" or "S"."""
    if scheme_id not in ALL_SCHEMES:
        raise ValueError(f"unknown scheme {scheme_id!r}")
    return scheme_id[0]


def sketch_kind(scheme_id: str) -> str:
    """The draw kind a scheme consumes."""
    if scheme_id not in ALL_SCHEMES:
        raise ValueError(f"unknown scheme {scheme_id!r}")
    return _KIND_FOR[scheme_id]


def _gauss_axis(scheme_id: str) -> str:
    # row-action schemes sketch the m equations; column/symmetric schemes
    # sketch the n unknowns
    return "rows" if family(scheme_id) == "K" else "cols"


@dataclass(frozen=True, eq=False)
class Scheme:
    """One catalog entry: an identifier, its draw description, and the SPD
    weight for the weighted variants (required for K5/K6/C5/C6, forbidden
    otherwise; n x n for row schemes, m x m for column schemes)."""

    id: str
    spec: SketchSpec
    g: SpdMatrix | None = None

    def __post_init__(self):
        if self.id not in ALL_SCHEMES:
            raise ValueError(f"unknown scheme {self.id!r}")
        if self.spec.kind != _KIND_FOR[self.id]:
            raise ValueError(f"scheme {self.id} draws {_KIND_FOR[self.id]}, "
                             f"got spec for {self.spec.kind}")
        if (self.g is not None) != (self.id in WEIGHTED_SCHEMES):
            want = "requires" if self.id in WEIGHTED_SCHEMES else "forbids"
            raise ValueError(f"scheme {self.id} {want} a weight matrix G")


def make_scheme(scheme_id: str, block_size: int = 1,
                distribution: str = sketch.UNIFORM,
                g: SpdMatrix | None = None) -> Scheme:
    """Build a scheme with the matching sketch description."""
    kind = _KIND_FOR.get(scheme_id)
    if kind is None:
        raise ValueError(f"unknown scheme {scheme_id!r}")
    if scheme_id in SCALAR_SCHEMES:
        block_size = 1
    axis = _gauss_axis(scheme_id) if kind in (GAUSS_VECTOR, GAUSS_MATRIX) else None
    spec = SketchSpec(kind=kind, block_size=block_size,
                      distribution=distribution, axis=axis)
    return Scheme(id=scheme_id, spec=spec, g=g)


def sampling_weights(scheme: Scheme, a: np.ndarray) -> np.ndarray | None:
    """Weights handed to :func:`sketch.draw_sketch` for proportional sampling:
    squared row/column norms, or the diagonal for trace-proportional draws."""
    dist = scheme.spec.distribution
    if dist == sketch.UNIFORM:
        return None
    if dist == sketch.TRACE_PROPORTIONAL:
        return np.diag(a).copy()
    if scheme.spec.kind == COORD_ROW:
        return (a * a).sum(axis=1)
    return (a * a).sum(axis=0)


def _selection(dim: int, idx: np.ndarray) -> np.ndarray:
    """Columns of the identity indexed by idx, as a dense dim x l block."""
    s = np.zeros((dim, len(idx)))
    s[idx, np.arange(len(idx))] = 1.0
    return s


def _check_draw(scheme: Scheme, draw: SketchDraw):
    want = scheme.spec.kind
    got = draw.kind
    # a width-1 Gaussian block is interchangeable with a Gaussian vector
    gauss = (GAUSS_VECTOR, GAUSS_MATRIX)
    if want == got or (want in gauss and got in gauss and
                       (want == GAUSS_MATRIX or draw.width == 1)):
        return
    raise ValueError(f"scheme {scheme.id} expects a {want} draw, got {got}")


def realize_sketch(scheme: Scheme, a: np.ndarray,
                   draw: SketchDraw) -> tuple[np.ndarray, np.ndarray]:
    """Materialize the (Y, Z) pair for one draw.

    Y is the m x l equation-sketching matrix, Z the n x l search-space
    basis; both follow the catalog table above entrywise.
    """
    _check_draw(scheme, draw)
    m, n = a.shape
    sid = scheme.id
    fam = family(sid)
    g = scheme.g.mat if scheme.g is not None else None

    if fam == "K":
        if draw.indices is not None:
            y = _selection(m, draw.indices)
            at_y = a[draw.indices, :].T
        else:
            y = draw.dense
            at_y = a.T @ y
        z = at_y if g is None else g @ at_y
        return y, z

    if fam == "C":
        if draw.indices is not None:
            z = _selection(n, draw.indices)
            az = a[:, draw.indices]
        else:
            z = draw.dense
            az = a @ z
        y = az if g is None else g @ az
        return y, z

    # symmetric family: Y = Z
    if draw.indices is not None:
        z = _selection(n, draw.indices)
    else:
        z = draw.dense
    return z, z


def step_generic(scheme: Scheme, a: np.ndarray, b: np.ndarray,
                 x: np.ndarray, draw: SketchDraw) -> np.ndarray:
    """One iteration through the explicit x + Z (Y^T A Z)^+ Y^T r formula.

    Reference path: always defined (pseudoinverse handles singular sketched
    systems), but forms n x l and m x l factors even for scalar schemes.
    """
    y, z = realize_sketch(scheme, a, draw)
    e = y.T @ a @ z
    r = b - a @ x
    return x + z @ (pseudoinverse(e) @ (y.T @ r))


def step(scheme: Scheme, a: np.ndarray, b: np.ndarray,
         x: np.ndarray, draw: SketchDraw) -> np.ndarray:
    """One iteration via the specialized update for ``scheme``.

    Scalar schemes use their closed-form denominators and raise
    :class:`SkipStep` when the drawn row/column is degenerate; block schemes
    factor through the small l x l sketched system only.
    """
    _check_draw(scheme, draw)
    sid = scheme.id
    g = scheme.g.mat if scheme.g is not None else None

    if sid == "K1":
        i = draw.indices[0]
        row = a[i, :]
        denom = float(row @ row)
        if denom <= 0.0:
            raise SkipStep(f"zero row {i}")
        return x + ((b[i] - row @ x) / denom) * row

    if sid == "K2":
        w = draw.dense[:, 0]
        u = a.T @ w
        denom = float(u @ u)
        if denom <= 0.0:
            raise SkipStep("sketched row vanished")
        return x + ((w @ (b - a @ x)) / denom) * u

    if sid == "K3":
        rows = draw.indices
        ar = a[rows, :]
        e = ar @ ar.T
        return x + ar.T @ (pseudoinverse(e) @ (b[rows] - ar @ x))

    if sid == "K4":
        w = draw.dense
        u = a.T @ w
        e = u.T @ u
        return x + u @ (pseudoinverse(e) @ (w.T @ (b - a @ x)))

    if sid == "K5":
        rows = draw.indices
        ar = a[rows, :]
        zfac = g @ ar.T
        e = ar @ zfac
        return x + zfac @ (pseudoinverse(e) @ (b[rows] - ar @ x))

    if sid == "K6":
        w = draw.dense
        u = a.T @ w
        zfac = g @ u
        e = u.T @ zfac
        return x + zfac @ (pseudoinverse(e) @ (w.T @ (b - a @ x)))

    if sid == "C1":
        j = draw.indices[0]
        col = a[:, j]
        denom = float(col @ col)
        if denom <= 0.0:
            raise SkipStep(f"zero column {j}")
        out = x.copy()
        out[j] += (col @ (b - a @ x)) / denom
        return out

    if sid == "C2":
        w = draw.dense[:, 0]
        v = a @ w
        denom = float(v @ v)
        if denom <= 0.0:
            raise SkipStep("sketched column vanished")
        return x + ((v @ (b - a @ x)) / denom) * w

    if sid == "C3":
        cols = draw.indices
        ac = a[:, cols]
        e = ac.T @ ac
        out = x.copy()
        out[cols] += pseudoinverse(e) @ (ac.T @ (b - a @ x))
        return out

    if sid == "C4":
        w = draw.dense
        v = a @ w
        e = v.T @ v
        return x + w @ (pseudoinverse(e) @ (v.T @ (b - a @ x)))

    if sid == "C5":
        cols = draw.indices
        ac = a[:, cols]
        gac = g @ ac
        e = ac.T @ gac
        out = x.copy()
        out[cols] += pseudoinverse(e) @ (gac.T @ (b - a @ x))
        return out

    if sid == "C6":
        w = draw.dense
        v = a @ w
        gv = g @ v
        e = v.T @ gv
        return x + w @ (pseudoinverse(e) @ (gv.T @ (b - a @ x)))

    if sid == "S1":
        i = draw.indices[0]
        denom = float(a[i, i])
        if denom <= 0.0:
            raise SkipStep(f"nonpositive diagonal entry {i}")
        out = x.copy()
        out[i] += (b[i] - a[i, :] @ x) / denom
        return out

    if sid == "S2":
        w = draw.dense[:, 0]
        denom = float(w @ (a @ w))
        if denom <= 0.0:
            raise SkipStep("nonpositive sketched quadratic form")
        return x + ((w @ (b - a @ x)) / denom) * w

    if sid == "S3":
        cols = draw.indices
        sub = a[np.ix_(cols, cols)]
        r = b - a @ x
        out = x.copy()
        out[cols] += pseudoinverse(sub) @ r[cols]
        return out

    if sid == "S4":
        w = draw.dense
        e = w.T @ a @ w
        return x + w @ (pseudoinverse(e) @ (w.T @ (b - a @ x)))

    raise ValueError(f"unknown scheme {sid!r}")


def error_propagator(scheme: Scheme, a: np.ndarray,
                     draw: SketchDraw) -> np.ndarray:
    """The n x n matrix mapping the error before this draw's update to the
    error after it: I - Z (Y^T A Z)^+ Y^T A. Idempotent for every draw."""
    y, z = realize_sketch(scheme, a, draw)
    e = y.T @ a @ z
    n = a.shape[1]
    return np.eye(n) - z @ (pseudoinverse(e) @ (y.T @ a))


def reduction_discrepancy(a: SpdMatrix, draw: SketchDraw, b: np.ndarray,
                          x: np.ndarray, g: SpdMatrix | None = None) -> float:
    """Max entrywise disagreement between the weighted schemes and their
    symmetric counterparts on one shared draw.

    With ``g`` equal to the exact inverse of ``a`` (the default), the updates
    of K5, C5 and S3 coincide on a shared index set, as do K6, C6 and S4 on a
    shared Gaussian block; any other ``g`` generically breaks the identity,
    which makes it a usable negative control.
    """
    amat = a.mat
    if g is None:
        g = SpdMatrix(np.linalg.inv(amat))

    if draw.indices is not None:
        idx = draw.indices
        l = len(idx)
        row_draw = SketchDraw(kind=ROW_SUBSET, indices=idx)
        col_draw = SketchDraw(kind=COL_SUBSET, indices=idx)
        updates = [
            step(make_scheme("K5", block_size=l, g=g), amat, b, x, row_draw),
            step(make_scheme("C5", block_size=l, g=g), amat, b, x, col_draw),
            step(make_scheme("S3", block_size=l), amat, b, x, col_draw),
        ]
    else:
        l = draw.width
        gauss = SketchDraw(kind=GAUSS_MATRIX, dense=draw.dense)
        updates = [
            step(make_scheme("K6", block_size=l, g=g), amat, b, x, gauss),
            step(make_scheme("C6", block_size=l, g=g), amat, b, x, gauss),
            step(make_scheme("S4", block_size=l), amat, b, x, gauss),
        ]

    worst = 0.0
    for i in range(len(updates)):
        for j in range(i + 1, len(updates)):
            worst = max(worst, float(np.abs(updates[i] - updates[j]).max()))
    return worst
