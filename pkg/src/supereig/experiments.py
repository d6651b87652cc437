"""Convergence studies over nested mesh families.

An :class:`ExperimentConfig` names a domain, boundary conditions, reference
eigenvalues, element kinds, refinement levels and post-processing steps;
:func:`run_experiment` solves every level and returns a report with one
table per (element, eigenvalue index).  Reports are written as CSV (three
significant digits) or JSON (full precision) with deterministic layout.

Post-processing names

* ``rea``    -- recovering eigenvalue ``lambda_h + F``
* ``exp``    -- extrapolation ``(4 lambda_h - lambda_2h) / 3``
* ``p1star`` -- Rayleigh quotient of the averaged conforming function (CR)
* ``cea``    -- combination of ``lambda_CR`` and ``lambda_P1*`` weighted by
  their estimators (CR)
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .assembly import assemble_mass, assemble_stiffness, write_coo
from .estimators import DegenerateWeightsError, combining_eigenvalue, estimator_F, extrapolate
from .fespaces import ElementKind, build_dofmap
from .mesh import build_domain
from .recovery import project_p1star, recover_Kh, recover_ppr
from .solver import solve_evp

PI2 = math.pi**2
POSTPROCESS = ("rea", "exp", "p1star", "cea")
#: column groups in output order; ``p1star`` also yields the recovered
#: eigenvalue of the averaged P1 function
OUTPUT_GROUPS = ("rea", "exp", "p1star", "p1star_rea", "cea")
UNDEFINED = "undefined"
#: desk-scale ceiling on the number of free dofs per solve
MAX_DOFS = 300_000


class ExperimentError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    domain: str
    bc: object
    references: dict  # eigen index (0-based) -> exact value
    elements: tuple = ("CR",)
    levels: tuple = (1, 2, 3, 4, 5)
    k: int = 1
    post: tuple = ()
    name: str = "custom"
    #: indices whose reference is computed by P1 on the finest level
    computed_references: bool = False
    max_dofs: int = MAX_DOFS
    export_matrices: bool = False

    def __post_init__(self):
        self.elements = tuple(ElementKind(str(e).upper()) for e in self.elements)
        bad = [e.value for e in self.elements if e not in (ElementKind.CR, ElementKind.ECR, ElementKind.P1)]
        if bad:
            raise ExperimentError(f"unsupported element(s) {bad}; expected CR, ECR or P1")
        self.levels = tuple(int(v) for v in self.levels)
        if not self.levels or min(self.levels) < 1 or list(self.levels) != sorted(set(self.levels)):
            raise ExperimentError("levels must be distinct increasing positive integers")
        self.post = tuple(str(p).lower() for p in self.post)
        bad = [p for p in self.post if p not in POSTPROCESS]
        if bad:
            raise ExperimentError(f"unknown post-processing {bad}; expected a subset of {POSTPROCESS}")
        self.references = {int(i): float(v) for i, v in dict(self.references).items()}
        need = max(self.references, default=-1) + 1
        self.k = max(int(self.k), need, 1)


def example_config(example, elements=("CR",), levels=None, k=None, post=("rea", "exp")):
    """Configuration of one of the four benchmark examples.

    1. unit square, Dirichlet, ``lambda_1 = 2 pi^2``
    2. unit square, Neumann on ``x1 = 1``, ``lambda_1 = 5 pi^2 / 4``
    3. equilateral triangle, Neumann on ``x1 = 1``, ``lambda_2 = 16 pi^2 / 3``
    4. L-shape, Dirichlet, ``lambda_3 = 2 pi^2`` and ``lambda_8 = 5 pi^2``; the
       other six references are computed by P1 on the finest level and
       flagged as such
    """
    example = int(example)
    if example == 1:
        cfg = dict(domain="unit-square", bc="dirichlet", references={0: 2 * PI2},
                   levels=range(2, 7))
    elif example == 2:
        cfg = dict(domain="unit-square",
                   bc={"left": "dirichlet", "bottom": "dirichlet", "top": "dirichlet",
                       "right": "neumann"},
                   references={0: 1.25 * PI2}, levels=range(2, 7))
    elif example == 3:
        cfg = dict(domain="equilateral-triangle",
                   bc={"gamma1": "dirichlet", "gamma2": "dirichlet", "gamma3": "neumann"},
                   references={1: 16 * PI2 / 3}, levels=range(2, 7))
    elif example == 4:
        # 5 pi^2 (not 4 pi^2) is the eighth eigenvalue of this L-shape
        cfg = dict(domain="l-shape", bc="dirichlet", references={2: 2 * PI2, 7: 5 * PI2},
                   levels=range(2, 7), computed_references=True)
    else:
        raise ExperimentError(f"unknown example {example}; expected 1, 2, 3 or 4")
    if levels is not None:
        cfg["levels"] = levels
    if k is not None:
        cfg["k"] = k
    return ExperimentConfig(elements=tuple(elements), post=tuple(post), name=f"example{example}", **cfg)


def parse_levels(spec):
    """``"6"`` -> 1..6, ``"2-6"`` -> 2..6, ``"2,4,5"`` -> (2, 4, 5)."""
    spec = str(spec).strip()
    try:
        if "," in spec:
            return tuple(int(s) for s in spec.split(","))
        if "-" in spec:
            a, b = spec.split("-", 1)
            return tuple(range(int(a), int(b) + 1))
        return tuple(range(1, int(spec) + 1))
    except ValueError:
        raise ExperimentError(f"cannot parse levels {spec!r}") from None


def observed_orders(errors):
    """``log2(|e_{k-1}| / |e_k|)`` for 2:1 nested refinement.

    The first entry is ``None`` (no coarser level); a zero error on either
    side gives :data:`UNDEFINED`.
    """
    errors = list(errors)
    out = [None]
    for a, b in zip(errors[:-1], errors[1:]):
        if a is None or b is None or a == 0 or b == 0:
            out.append(UNDEFINED)
        else:
            out.append(math.log2(abs(a) / abs(b)))
    return out


@dataclass
class ConvergenceRow:
    level: int
    h: float
    h_max: float
    n_dofs: int
    lambda_h: float
    error: float
    order: object = None
    post: dict = field(default_factory=dict)  # name -> {"value", "error", "order"}

    def to_dict(self):
        d = {"level": self.level, "h": self.h, "h_max": self.h_max, "n_dofs": self.n_dofs,
             "lambda_h": self.lambda_h, "error": self.error}
        if self.order is not None:
            d["order"] = self.order
        for name in OUTPUT_GROUPS:
            if name not in self.post:
                continue
            for key in ("value", "error", "order", "effectivity"):
                val = self.post[name].get(key)
                if val is not None:
                    d[f"{name}_{key}"] = val
        return d


def _post_for_level(cfg, kind, t, res, i):
    u = res.function(i)
    lam = float(res.eigenvalues[i])
    out = {}
    if "rea" in cfg.post:
        if kind == ElementKind.P1:
            rec = recover_ppr(u)
        else:
            rec = recover_Kh(u)
        rep = estimator_F(u, lam, rec)
        out["rea"] = rep.lambda_rea
        out["F"] = rep.F
    if kind == ElementKind.CR and ("p1star" in cfg.post or "cea" in cfg.post):
        p = project_p1star(u)
        kq = recover_Kh(u)
        f_p1 = estimator_F(p.u_p1star, p.lambda_p1star, kq, "P1").F
        if "p1star" in cfg.post:
            out["p1star"] = p.lambda_p1star
            out["p1star_rea"] = p.lambda_p1star + f_p1
        if "cea" in cfg.post:
            f_cr = estimator_F(u, lam, kq).F
            try:
                out["cea"] = combining_eigenvalue(p.lambda_p1star, f_p1, lam, f_cr)
            except DegenerateWeightsError:
                out["cea"] = None
    return out


def _solve_level(cfg, kind, level, out_dir=None):
    t = build_domain(cfg.domain, level)
    dm = build_dofmap(t, kind, cfg.bc)
    if dm.n_free > cfg.max_dofs:
        return t, dm, None
    A = assemble_stiffness(t, dm)
    M = assemble_mass(t, dm)
    if cfg.export_matrices and out_dir is not None:
        write_coo(A, Path(out_dir) / f"{cfg.name}_{kind.value}_L{level}_stiffness.txt")
        write_coo(M, Path(out_dir) / f"{cfg.name}_{kind.value}_L{level}_mass.txt")
    return t, dm, solve_evp(A, M, min(cfg.k, dm.n_free), dm)


def _references(cfg, finest_level):
    refs = {i: (v, "exact") for i, v in cfg.references.items()}
    if cfg.computed_references and len(refs) < cfg.k:
        _, _, res = _solve_level(cfg, ElementKind.P1, finest_level)
        if res is not None:
            for i in range(cfg.k):
                if i not in refs and i < len(res):
                    refs[i] = (float(res.eigenvalues[i]), "computed-P1-finest")
    return refs


def run_experiment(cfg, out_dir=None, fmt="json"):
    """Run a convergence study; optionally write report files to ``out_dir``.

    Returns the report dict.  Levels whose dof count exceeds
    ``cfg.max_dofs`` are not solved; the report then carries a
    ``truncated`` entry naming the first skipped level.
    """
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
    solved = {}
    truncated = None
    for kind in cfg.elements:
        for level in cfg.levels:
            t, dm, res = _solve_level(cfg, kind, level, out_dir)
            if res is None:
                mark = {"element": kind.value, "level": level, "n_dofs": dm.n_free,
                        "reason": f"more than {cfg.max_dofs} dofs"}
                truncated = truncated or mark
                break
            solved[kind, level] = (t, dm, res)
    finest = max((lv for (_, lv) in solved), default=cfg.levels[0])
    refs = _references(cfg, finest)

    tables = []
    for kind in cfg.elements:
        levels = [lv for lv in cfg.levels if (kind, lv) in solved]
        for i in sorted(refs):
            ref, source = refs[i]
            rows = []
            prev_lam = None
            for level in levels:
                t, dm, res = solved[kind, level]
                if i >= len(res):
                    continue
                lam = float(res.eigenvalues[i])
                post = {}
                extra = _post_for_level(cfg, kind, t, res, i)
                for name in ("rea", "p1star", "p1star_rea", "cea"):
                    if name in extra and extra[name] is not None:
                        post[name] = {"value": extra[name], "error": extra[name] - ref}
                if "F" in extra and lam != ref:
                    post["rea"]["effectivity"] = extra["F"] / (ref - lam)
                if "exp" in cfg.post and prev_lam is not None:
                    v = extrapolate(lam, prev_lam)
                    post["exp"] = {"value": v, "error": v - ref}
                prev_lam = lam
                rows.append(ConvergenceRow(level, 2.0 ** -(level - 1), t.h, dm.n_free, lam,
                                           lam - ref, post=post))
            orders = observed_orders([r.error for r in rows])
            for r, o in zip(rows, orders):
                r.order = o
            names = sorted({n for r in rows for n in r.post})
            for name in names:
                idx = [j for j, r in enumerate(rows) if name in r.post]
                errs = observed_orders([rows[j].post[name]["error"] for j in idx])
                for j, o in zip(idx, errs):
                    rows[j].post[name]["order"] = o
            tables.append({"element": kind.value, "eigen_index": i + 1, "reference": ref,
                           "reference_source": source, "rows": [r.to_dict() for r in rows]})
    report = {"experiment": cfg.name, "domain": cfg.domain,
              "bc": cfg.bc if isinstance(cfg.bc, (str, type(None))) else dict(sorted(cfg.bc.items())),
              "levels": list(cfg.levels), "k": cfg.k, "post": list(cfg.post), "tables": tables}
    if truncated:
        report["truncated"] = truncated
    if out_dir is not None:
        write_report(report, out_dir, fmt)
    return report


# ---------------------------------------------------------------------------
# output


def _fmt3(v):
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{v:.2E}"


def table_columns(table):
    """Union of the row keys, base columns first, then each post-processing group."""
    keys = {k for row in table["rows"] for k in row}
    base = ["level", "h", "h_max", "n_dofs", "lambda_h", "error", "order"]
    cols = [c for c in base if c in keys]
    for name in OUTPUT_GROUPS:
        cols += [f"{name}_{k}" for k in ("value", "error", "order", "effectivity")
                 if f"{name}_{k}" in keys]
    return cols


def table_to_csv(table, truncated=None):
    buf = io.StringIO()
    cols = table_columns(table)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in table["rows"]:
        w.writerow([_fmt3(row.get(c)) if c != "level" else row[c] for c in cols])
    if truncated:
        buf.write(f"# truncated at level {truncated['level']} ({truncated['reason']})\n")
    return buf.getvalue()


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    raise TypeError(type(o))


def write_report(report, out_dir, fmt="json"):
    """Write ``report`` as one JSON file or one CSV file per table; returns the paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    if fmt == "json":
        p = out_dir / f"{report['experiment']}.json"
        p.write_text(json.dumps(report, indent=2, sort_keys=True, default=_json_default) + "\n")
        paths.append(p)
    elif fmt == "csv":
        for table in report["tables"]:
            p = out_dir / f"{report['experiment']}_{table['element']}_eig{table['eigen_index']}.csv"
            p.write_text(table_to_csv(table, report.get("truncated")))
            paths.append(p)
    else:
        raise ExperimentError(f"unknown format {fmt!r}; expected csv or json")
    return paths
