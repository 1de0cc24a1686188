"""Equality-form feasibility problems ``A q = b, q >= 0`` and their text format."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np
import scipy.sparse as sp


class LpFormatError(ValueError):
    pass


@dataclass
class LpProblem:
    """Find ``q >= 0`` with ``A q = b``.

    ``row_kind`` tags every row with an index into ``kind_names`` (normalization,
    symmetry, ...) so certificates can be explained per constraint family.
    ``meta`` carries whatever the builder needs to decode a witness.
    """

    A: sp.csr_matrix
    b: np.ndarray
    row_kind: np.ndarray | None = None
    kind_names: tuple[str, ...] = ("row",)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.A = sp.csr_matrix(self.A, dtype=float)
        self.A.sum_duplicates()
        self.b = np.asarray(self.b, dtype=float).reshape(-1)
        if self.row_kind is None:
            self.row_kind = np.zeros(self.A.shape[0], dtype=np.int32)
        self.row_kind = np.asarray(self.row_kind, dtype=np.int32)
        self.validate()

    @property
    def n_vars(self) -> int:
        return self.A.shape[1]

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    def validate(self):
        m, n = self.A.shape
        if self.b.shape != (m,):
            raise ValueError(f"rhs has shape {self.b.shape}, expected ({m},)")
        if self.row_kind.shape != (m,):
            raise ValueError("row_kind must tag every row")
        if m and (self.row_kind.min() < 0 or self.row_kind.max() >= len(self.kind_names)):
            raise ValueError("row_kind refers to an unknown constraint family")
        if self.A.nnz:
            if self.A.indices.min() < 0 or self.A.indices.max() >= n:
                raise ValueError("constraint references an undeclared variable")
            if not np.all(np.isfinite(self.A.data)):
                raise ValueError("non-finite coefficient")
        if not np.all(np.isfinite(self.b)):
            raise ValueError("non-finite right-hand side")

    def residual(self, q: np.ndarray) -> float:
        """Largest violation of the equalities or of nonnegativity."""
        q = np.asarray(q, dtype=float)
        eq = np.max(np.abs(self.A @ q - self.b)) if self.n_rows else 0.0
        neg = max(0.0, -float(q.min())) if q.size else 0.0
        return float(max(eq, neg))

    def kind_counts(self) -> dict[str, int]:
        counts = np.bincount(self.row_kind, minlength=len(self.kind_names))
        return {name: int(c) for name, c in zip(self.kind_names, counts)}

    def rows_of_kind(self, *names: str) -> np.ndarray:
        ids = [self.kind_names.index(n) for n in names if n in self.kind_names]
        return np.flatnonzero(np.isin(self.row_kind, ids))

    def subproblem(self, rows: np.ndarray) -> "LpProblem":
        rows = np.asarray(rows, dtype=int)
        return LpProblem(
            self.A[rows], self.b[rows], self.row_kind[rows], self.kind_names, dict(self.meta)
        )


# -- text interchange format ------------------------------------------------------
#
#   # comment
#   vars <n>
#   <row name>: <coef>*x<j> <coef>*x<j> ... = <rhs>
#
# All variables are implicitly nonnegative and only "=" relations appear; the row
# name prefix before the first '.' is the constraint family.

_FMT = ".17g"
_TERM = re.compile(r"^([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\*x(\d+)$")


def write_lp(lp: LpProblem, fh: TextIO):
    fh.write("# equality-form LP: find x >= 0 with every row satisfied\n")
    fh.write(f"vars {lp.n_vars}\n")
    A = lp.A
    for i in range(lp.n_rows):
        lo, hi = A.indptr[i], A.indptr[i + 1]
        terms = " ".join(
            f"{format(v, _FMT)}*x{j}" for j, v in zip(A.indices[lo:hi], A.data[lo:hi])
        )
        name = f"{lp.kind_names[lp.row_kind[i]]}.{i}"
        fh.write(f"{name}: {terms} = {format(lp.b[i], _FMT)}\n")


def read_lp(fh: TextIO) -> LpProblem:
    n = None
    rows, cols, vals, rhs, kinds = [], [], [], [], []
    kind_names: list[str] = []
    for lineno, raw in enumerate(fh, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("vars "):
            try:
                n = int(line.split()[1])
            except (IndexError, ValueError):
                raise LpFormatError(f"line {lineno}: bad vars declaration") from None
            continue
        if n is None:
            raise LpFormatError(f"line {lineno}: constraint before 'vars' declaration")
        name, sep, body = line.partition(":")
        if not sep:
            raise LpFormatError(f"line {lineno}: missing row name")
        lhs, sep, rhs_txt = body.rpartition("=")
        if not sep or lhs.rstrip().endswith(("<", ">")):
            raise LpFormatError(f"line {lineno}: only '=' constraints are supported")
        kind = name.split(".")[0].strip() or "row"
        if kind not in kind_names:
            kind_names.append(kind)
        r = len(rhs)
        for tok in lhs.split():
            mt = _TERM.match(tok)
            if not mt:
                raise LpFormatError(f"line {lineno}: cannot parse term {tok!r}")
            j = int(mt.group(2))
            if j >= n:
                raise LpFormatError(f"line {lineno}: variable x{j} not declared")
            rows.append(r)
            cols.append(j)
            vals.append(float(mt.group(1)))
        try:
            rhs.append(float(rhs_txt))
        except ValueError:
            raise LpFormatError(f"line {lineno}: bad right-hand side {rhs_txt!r}") from None
        kinds.append(kind_names.index(kind))
    if n is None:
        raise LpFormatError("missing 'vars' declaration")
    A = sp.csr_matrix((vals, (rows, cols)), shape=(len(rhs), n))
    return LpProblem(A, np.array(rhs), np.array(kinds), tuple(kind_names) or ("row",))
