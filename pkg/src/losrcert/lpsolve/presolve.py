"""Reductions for ``A q = b, q >= 0`` that keep an exact record for postsolve.

Reductions applied until nothing changes:

* empty rows with zero right-hand side are dropped;
* singleton rows fix their variable (``a z = b``);
* forcing rows (all coefficients one sign, zero rhs) fix every variable to 0;
* two-term rows ``a x_j + a' x_k = 0`` with opposite signs merge ``x_k`` into
  ``x_j`` (this is what the symmetry equalities look like);
* finally, duplicate rows are removed and rows are scaled to unit max-norm.

Variables are tracked as groups: every original column ``j`` satisfies
``q_j = coef_j * z_root``. Certificates for the reduced problem are lifted
back by replaying the record in reverse, choosing the multiplier of each
removed row so that every original column stays nonpositive in ``y.A``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .problem import LpProblem

ZERO_RHS = 1e-12
CANCEL = 1e-12


@dataclass
class PresolvedLp:
    original: LpProblem
    reduced: LpProblem
    rows: np.ndarray  # original index of each reduced row
    row_scale: np.ndarray
    var_roots: np.ndarray  # root column of each reduced variable
    parent: np.ndarray
    ratio: np.ndarray
    fixed: dict
    ops: list = field(default_factory=list)

    def _find(self, j):
        coef = 1.0
        while self.parent[j] != j:
            coef *= self.ratio[j]
            j = self.parent[j]
        return j, coef

    def primal(self, z) -> np.ndarray:
        """Map a reduced solution back to the original variables."""
        z = np.asarray(z, dtype=float)
        value = dict(self.fixed)
        for k, root in enumerate(self.var_roots):
            value[int(root)] = float(z[k])
        x = np.zeros(self.original.n_vars)
        for j in range(self.original.n_vars):
            root, coef = self._find(j)
            x[j] = coef * value.get(root, 0.0)
        return x

    def dual(self, y_red) -> np.ndarray:
        """Lift a Farkas vector of the reduced problem to the original rows."""
        A = self.original.A
        y = np.zeros(self.original.n_rows)
        y[self.rows] = self.row_scale * np.asarray(y_red, dtype=float)
        s = A.T @ y
        for op in reversed(self.ops):
            kind, i = op[0], op[1]
            if kind == "drop":
                continue
            row = A.getrow(i)
            rowvals = dict(zip(row.indices, row.data))
            if kind == "fix":
                members = op[2]
                agg = sum(c * s[j] for j, c in members)
                a = sum(c * rowvals.get(j, 0.0) for j, c in members)
                t = -agg / a
            elif kind == "force":
                cands = []
                sgn = 0.0
                for members in op[2]:
                    agg = sum(c * s[j] for j, c in members)
                    a = sum(c * rowvals.get(j, 0.0) for j, c in members)
                    sgn = np.sign(a)
                    cands.append(-agg / a)
                t = min(cands) if sgn > 0 else max(cands)
            else:  # merge
                members, jc, cjc = op[2], op[3], op[4]
                agg = sum(c * s[j] for j, c in members)
                t = -agg / (cjc * rowvals[jc])
            if t:
                y[i] += t
                s[row.indices] += t * row.data
        return y


def presolve(lp: LpProblem, merge: bool = True, max_passes: int = 100) -> PresolvedLp:
    A = lp.A.tocsr()
    m, n = A.shape
    rows = [
        dict(zip(A.indices[A.indptr[i] : A.indptr[i + 1]].tolist(), A.data[A.indptr[i] : A.indptr[i + 1]].tolist()))
        for i in range(m)
    ]
    orig_rows = [dict(r) for r in rows]
    rhs = lp.b.astype(float).copy()
    cols: list[set] = [set() for _ in range(n)]
    for i, r in enumerate(rows):
        for j in r:
            cols[j].add(i)
    alive = np.ones(m, dtype=bool)
    parent = np.arange(n)
    ratio = np.ones(n)
    members = {j: [j] for j in range(n)}
    fixed: dict[int, float] = {}
    ops: list = []

    def find(j):
        coef = 1.0
        path = []
        while parent[j] != j:
            path.append(j)
            coef *= ratio[j]
            j = parent[j]
        # path compression
        acc = coef
        for p in path:
            r = ratio[p]
            parent[p] = j
            ratio[p] = acc
            acc /= r
        return j, coef

    def member_coefs(u):
        return [(j, find(j)[1]) for j in members[u]]

    def kill_row(i):
        alive[i] = False
        for w in rows[i]:
            cols[w].discard(i)
        rows[i] = {}

    def fix(u, z):
        fixed[u] = z
        for k in list(cols[u]):
            coef = rows[k].pop(u)
            if z:
                rhs[k] -= coef * z
        cols[u].clear()

    changed, passes = True, 0
    while changed and passes < max_passes:
        changed = False
        passes += 1
        for i in range(m):
            if not alive[i]:
                continue
            r = rows[i]
            if not r:
                if abs(rhs[i]) <= ZERO_RHS:
                    kill_row(i)
                    ops.append(("drop", i))
                    changed = True
                continue
            if len(r) == 1:
                (u, a), = r.items()
                z = rhs[i] / a
                if z < -ZERO_RHS:
                    continue
                ops.append(("fix", i, member_coefs(u)))
                kill_row(i)
                fix(u, max(z, 0.0))
                changed = True
                continue
            if abs(rhs[i]) > ZERO_RHS:
                continue
            vals = list(r.values())
            if all(v > 0 for v in vals) or all(v < 0 for v in vals):
                ops.append(("force", i, [member_coefs(u) for u in r]))
                us = list(r)
                kill_row(i)
                for u in us:
                    fix(u, 0.0)
                changed = True
                continue
            if not merge or len(r) != 2 or len(orig_rows[i]) != 2 or lp.b[i] != 0:
                continue
            (j1, a1), (j2, a2) = orig_rows[i].items()
            u1, c1 = find(j1)
            u2, c2 = find(j2)
            if u1 == u2 or u1 in fixed or u2 in fixed:
                continue
            kappa = -(a1 * c1) / (a2 * c2)  # z_u2 = kappa * z_u1
            if kappa <= 0:
                continue
            if len(members[u1]) >= len(members[u2]):
                root, child, rho, jc = u1, u2, kappa, j2
            else:
                root, child, rho, jc = u2, u1, 1.0 / kappa, j1
            ops.append(("merge", i, member_coefs(child), jc, find(jc)[1]))
            kill_row(i)
            parent[child] = root
            ratio[child] = rho
            for k in list(cols[child]):
                coef = rows[k].pop(child)
                new = rows[k].get(root, 0.0) + rho * coef
                scale = max(abs(coef), abs(rows[k].get(root, 0.0)), 1.0)
                if abs(new) <= CANCEL * scale:
                    rows[k].pop(root, None)
                    cols[root].discard(k)
                else:
                    rows[k][root] = new
                    cols[root].add(k)
            cols[child].clear()
            members[root].extend(members.pop(child))
            changed = True

    # duplicates and scaling
    seen = {}
    keep_rows, scales = [], []
    for i in np.flatnonzero(alive):
        r = rows[i]
        if not r:
            keep_rows.append(i)
            scales.append(1.0)
            continue
        mx = max(abs(v) for v in r.values())
        first = r[min(r)]
        sgn = 1.0 if first > 0 else -1.0
        key = (tuple(sorted((u, sgn * v / mx) for u, v in r.items())), sgn * rhs[i] / mx)
        if key in seen:
            ops.append(("drop", int(i)))
            alive[i] = False
            continue
        seen[key] = i
        keep_rows.append(i)
        scales.append(1.0 / mx)

    var_roots = sorted({u for i in keep_rows for u in rows[i]})
    col_of = {u: k for k, u in enumerate(var_roots)}
    data, ri, ci = [], [], []
    for k, (i, sc) in enumerate(zip(keep_rows, scales)):
        for u, v in rows[i].items():
            ri.append(k)
            ci.append(col_of[u])
            data.append(v * sc)
    keep_rows = np.array(keep_rows, dtype=int)
    scales = np.array(scales)
    reduced = LpProblem(
        sp.csr_matrix((data, (ri, ci)), shape=(len(keep_rows), len(var_roots))),
        rhs[keep_rows] * scales if len(keep_rows) else np.zeros(0),
        lp.row_kind[keep_rows],
        lp.kind_names,
        dict(lp.meta),
    )
    return PresolvedLp(
        original=lp,
        reduced=reduced,
        rows=keep_rows,
        row_scale=scales,
        var_roots=np.array(var_roots, dtype=int),
        parent=parent,
        ratio=ratio,
        fixed=fixed,
        ops=ops,
    )
