"""Batch driver: every verification as a subcommand with a machine-readable report.

Exit status is 0 when every check passes, 1 on a failed check and 2 on a
usage or parameter-domain error.  ``HRL_THREADS`` caps worker threads.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from datetime import datetime, timezone

import numpy as np

from . import emden_fowler as ef
from . import extremals as ex
from . import spectrum as sp
from . import stability as st
from .params import DomainError, derive_constants, gamma_product, sphere_eigen
from .quadrature import QuadratureConfig, inner_product_mu

COMMANDS = ("constants", "extremal-check", "transform-check", "spectrum", "stability", "report-all")
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
TIMESTAMP_KEY = "generated_at"


@dataclass(frozen=True)
class RunConfig:
    N: int = 5
    mu: float = 0.5
    grid_size: int = 800
    rel_tol: float = 1e-10
    sectors: tuple[int, ...] = (0, 1, 2, 3)
    sample_count: int = 50
    seed: int = 0
    output_format: str = "json"
    output_path: str | None = None

    def validate(self) -> None:
        derive_constants(self.N, self.mu)
        if self.grid_size < 8 or self.grid_size % 2:
            raise DomainError(f"grid_size must be an even integer >= 8, got {self.grid_size}")
        if not self.rel_tol > 0:
            raise DomainError("rel_tol must be positive")
        if not self.sectors or min(self.sectors) < 0:
            raise DomainError("sectors must be a non-empty list of integers >= 0")
        if self.sample_count < 1:
            raise DomainError("sample_count must be >= 1")
        if self.output_format not in ("json", "csv"):
            raise DomainError(f"unknown format {self.output_format!r}")

    def public(self) -> dict:
        d = asdict(self)
        d.pop("output_path")
        d["sectors"] = list(self.sectors)
        return d


def thread_cap() -> int:
    try:
        return max(1, int(os.environ.get("HRL_THREADS", "1")))
    except ValueError:
        return 1


class Report:
    """Ordered list of named checks plus a data payload."""

    def __init__(self, command: str):
        self.command = command
        self.checks: list[dict] = []
        self.data: dict = {}

    def check(self, name: str, anchor: str, got, expected, tolerance, passed: bool) -> None:
        self.checks.append({
            "name": name,
            "anchor": anchor,
            "got": _plain(got),
            "expected": _plain(expected),
            "tolerance": _plain(tolerance),
            "passed": bool(passed),
        })

    def extend(self, other: "Report") -> None:
        for row in other.checks:
            self.checks.append({**row, "name": f"{other.command}/{row['name']}"})
        self.data[other.command] = other.data

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def failures(self) -> list[dict]:
        return [c for c in self.checks if not c["passed"]]


def _plain(x):
    if isinstance(x, (np.floating, np.integer)):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_plain(v) for v in x]
    return x


def _rel(a, b):
    return abs(a - b) / abs(b)


# ---------------------------------------------------------------- subcommands

def cmd_constants(cfg: RunConfig) -> Report:
    rep = Report("constants")
    p = derive_constants(cfg.N, cfg.mu)
    rep.data = {"params": _plain(p.as_dict()), "gamma_N": gamma_product(cfg.N),
                "sphere_eigen": [list(sphere_eigen(k, cfg.N)) for k in range(4)]}
    anc = "S_mu = (1 - mu/(N-4))^(4-4/N) S_0"
    expect = (1 - cfg.mu / (cfg.N - 4)) ** (4 - 4 / cfg.N) * p.s0
    rep.check("s_mu_scaling", anc, p.s_mu, expect, 1e-14, _rel(p.s_mu, expect) < 1e-14)
    rep.check("s_mu_below_s0", "0 < S_mu < S_0", p.s_mu, p.s0, 0.0, 0 < p.s_mu < p.s0)
    rep.check("c1_positive", "C_mu1 > 0 on 0 < mu < N-4", p.c1, 0.0, 0.0, p.c1 > 0)
    rep.check("b_range", "0 < b = 1 - mu/(N-4) < 1", p.b, [0, 1], 0.0, 0 < p.b < 1)
    return rep


def cmd_extremal(cfg: RunConfig) -> Report:
    rep = Report("extremal-check")
    p = derive_constants(cfg.N, cfg.mu)
    q = QuadratureConfig(rel_tol=cfg.rel_tol)
    U = ex.make_bubble(p).profile
    r = np.logspace(-3, 3, 50)
    res = float(ex.relative_el_residual(U, p, r).max())
    rep.check("el_residual", "U_mu solves the radial Euler-Lagrange equation", res, 0.0, 1e-6, res < 1e-6)
    lhs, rhs, gap = ex.equality_case_check(p, q)
    rep.check("equality_case", "||U||_mu^2 = S_mu ||U||_2**^2", gap / lhs, 0.0, 1e-6, abs(gap / lhs) < 1e-6)
    val = ex.sharp_constant_identity(p, q, rtol=math.inf)
    rep.check("sharp_constant_identity", "S_mu = ||U||_mu^(2-4/2**)", val, p.s_mu, 1e-6,
              _rel(val, p.s_mu) < 1e-6)
    norms = [inner_product_mu(ex.make_bubble(p, lam).profile, ex.make_bubble(p, lam).profile, p, q)
             for lam in (0.25, 1.0, 4.0)]
    spread = (max(norms) - min(norms)) / norms[1]
    rep.check("scaling_invariance", "||U_lam||_mu independent of lam", spread, 0.0, 1e-7, spread < 1e-7)
    rep.data = {"equality": {"lhs": lhs, "rhs": rhs, "gap": gap}, "max_relative_residual": res}
    return rep


def cmd_transform(cfg: RunConfig) -> Report:
    rep = Report("transform-check")
    p = derive_constants(cfg.N, cfg.mu)
    q = QuadratureConfig(rel_tol=cfg.rel_tol)
    raw = ef.raw_coefficients(p).as_tuple()
    col = ef.collapsed_coefficients(cfg.N).as_tuple()
    err = max(abs(a - b) for a, b in zip(raw, col))
    rep.check("coefficient_collapse", "A = 2(N-1), B = C = (N-1)(N-3), D = 0", list(raw), list(col), 1e-9,
              err < 1e-9)
    v = ef.push_forward(ex.make_bubble(p).profile, p)
    s = np.logspace(-2, 2, 41)
    shape = v(s) * (1 + s * s) ** p.m
    spread = float(np.ptp(shape) / shape.mean())
    rep.check("bubble_maps_to_bubble", "v(s) (1+s^2)^((N-4)/2) constant", spread, 0.0, 1e-8, spread < 1e-8)
    rows = []
    ok = True
    for i, u in enumerate(st.random_profiles(p, 5, cfg.seed)):
        du, dw, good = ef.deficit_comparison(u, p, q)
        rows.append({"profile": i, "deficit_unweighted": du, "deficit_weighted": dw, "bound_ok": good})
        ok &= good
    rep.check("deficit_comparison", "deficit_0(v) <= (1-mu/(N-4))^-3 deficit_mu(u)",
              sum(r["bound_ok"] for r in rows), len(rows), 1e-8, ok)
    rep.data = {"coefficients": list(raw), "deficits": rows}
    return rep


def cmd_spectrum(cfg: RunConfig) -> Report:
    rep = Report("spectrum")
    p = derive_constants(cfg.N, cfg.mu)
    q = QuadratureConfig(rel_tol=cfg.rel_tol)
    gs = sp.GridSpec(cfg.grid_size)
    target = p.two_crit - 1.0

    def solve(k):
        return sp.sector_spectrum(k, p, 3, gs)

    with ThreadPoolExecutor(max_workers=thread_cap()) as pool:
        results = list(pool.map(solve, cfg.sectors))
    records = []
    for k, res in zip(cfg.sectors, results):
        records.append(res.to_record())
        rmax = float(res.residuals.max())
        rep.check(f"k{k}_residuals", "stiffness x = nu mass x", rmax, 0.0, 1e-8, rmax < 1e-8)
        nu = res.eigenvalues
        if k == 0:
            rep.check("nu1", "nu_1 = 1 with eigenfunction U_mu", nu[0], 1.0, 1e-3, abs(nu[0] - 1) < 1e-3)
            rep.check("nu2", "nu_2 = 2** - 1", nu[1], target, 1e-3, _rel(nu[1], target) < 1e-3)
            conv = sp.convergence_study(0, p, 3, gs)
            rep.check("nu3_gap", "nu_3 > nu_2", nu[2], nu[1], conv.shift, nu[2] > nu[1] and conv.shift < 1e-4)
            a1 = sp.eigenfunction_alignment(res, p, q, index=0)
            a2 = sp.eigenfunction_alignment(res, p, q, index=1)
            rep.check("e1_alignment", "e_1 parallel to U_mu", a1, 1.0, 1e-3, a1 > 0.999)
            rep.check("e2_alignment", "e_2 parallel to (N-4)/2 U + r U'", a2, 1.0, 1e-3, a2 > 0.999)
        else:
            margin = float(np.min(np.abs(nu - target)))
            rep.check(f"k{k}_exclusion", "no sector-k eigenvalue equal to 2** - 1", margin, 0.0, 1e-2,
                      margin > 1e-2)
            lhs, rhs, pos = sp.lift_conditions(k, p)
            rep.check(f"k{k}_lift", "(2**-1) Gamma_N <= Gamma_{N+2k} and positivity factor > 0",
                      [lhs, rhs, pos], "lhs <= rhs, pos > 0", 0.0, lhs <= rhs and pos > 0)
    rep.data = {"sectors": records}
    return rep


def cmd_stability(cfg: RunConfig) -> Report:
    rep = Report("stability")
    p = derive_constants(cfg.N, cfg.mu)
    q = QuadratureConfig(rel_tol=cfg.rel_tol)
    study = st.local_ratio_study(p, q, cfg.sample_count, cfg.seed, grid_spec=sp.GridSpec(cfg.grid_size),
                                 workers=thread_cap())
    rep.check("ratio_bound", "deficit / dist^2 >= 1 - nu_2/nu_3 (5% slack)", study.min_ratio,
              study.bound, 0.05, study.passed)
    rel = abs(study.eigen_direction_ratio / study.bound - 1)
    rep.check("ratio_along_e3", "ratio -> 1 - nu_2/nu_3 along e_3", study.eigen_direction_ratio, study.bound,
              0.05, rel < 0.05)
    dmin = min(s.deficit for s in study.samples)
    rep.check("deficit_nonnegative", "deficit >= 0", dmin, 0.0, 1e-9, dmin >= -1e-9)

    w = _taylor_direction(p, q, sp.GridSpec(cfg.grid_size))
    tay = st.taylor_check(w, st.DEFAULT_EPSILONS, p, q)
    factors = [abs(a.scaled) / abs(b.scaled) for a, b in zip(tay, tay[1:])]
    rep.check("taylor_remainder", "R(eps)/eps^2 -> 0", factors, ">= 1.8", 0.0, min(factors) >= 1.8)

    gaps = []
    for u in st.random_profiles(p, 3, cfg.seed):
        a = st.project_to_manifold(u, p, q)
        b = st.brute_force_projection(u, p, q)
        gaps.append(abs(a.distance - b.distance))
    rep.check("projection_vs_grid", "line search matches grid oracle", max(gaps), 0.0, 1e-3, max(gaps) < 1e-3)
    rep.data = {
        "nu2": study.nu2, "nu3": study.nu3, "bound": study.bound, "min_ratio": study.min_ratio,
        "taylor": [asdict(t) for t in tay],
        "samples": st.samples_as_dicts(study.samples),
    }
    rep.csv_rows = study.samples
    return rep


def _taylor_direction(p, q, gs):
    """Third k=0 eigenvector normalized in the mu-norm."""
    e3 = sp.sector_spectrum(0, p, 3, gs).eigenvectors[2]
    return (1.0 / math.sqrt(inner_product_mu(e3, e3, p, q))) * e3


def cmd_report_all(cfg: RunConfig) -> Report:
    rep = Report("report-all")
    for fn in (cmd_constants, cmd_extremal, cmd_transform, cmd_spectrum, cmd_stability):
        rep.extend(fn(cfg))
    return rep


HANDLERS = {
    "constants": cmd_constants,
    "extremal-check": cmd_extremal,
    "transform-check": cmd_transform,
    "spectrum": cmd_spectrum,
    "stability": cmd_stability,
    "report-all": cmd_report_all,
}


# ---------------------------------------------------------------- rendering

def render_json(rep: Report, cfg: RunConfig, timestamp: str) -> str:
    doc = {
        "command": rep.command,
        "config": cfg.public(),
        "passed": rep.passed,
        "checks": rep.checks,
        "data": rep.data,
        TIMESTAMP_KEY: timestamp,
    }
    return json.dumps(_plain_tree(doc), sort_keys=True, indent=2) + "\n"


def _plain_tree(x):
    if isinstance(x, dict):
        return {k: _plain_tree(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain_tree(v) for v in x]
    return _plain(x)


def render_csv(rep: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    rows = getattr(rep, "csv_rows", None)
    if rows is not None:
        w.writerow(st.DeficitSample.CSV_FIELDS)
        for s in rows:
            w.writerow(s.csv_row())
    else:
        w.writerow(["name", "anchor", "got", "expected", "tolerance", "passed"])
        for c in rep.checks:
            w.writerow([c["name"], c["anchor"], json.dumps(c["got"]), json.dumps(c["expected"]),
                        json.dumps(c["tolerance"]), c["passed"]])
    return buf.getvalue()


def report_body(text: str) -> str:
    """Report text with the timestamp line removed."""
    return "".join(line for line in text.splitlines(keepends=True) if f'"{TIMESTAMP_KEY}"' not in line)


def run_subcommand(name: str, cfg: RunConfig, stream=None) -> int:
    """Run one subcommand, write its report and return the exit status."""
    if name not in HANDLERS:
        raise ValueError(f"unknown subcommand {name!r}")
    stream = stream or sys.stdout
    try:
        cfg.validate()
    except DomainError as exc:
        print(json.dumps({"error": "domain", "message": str(exc)}), file=sys.stderr)
        return EXIT_USAGE
    rep = HANDLERS[name](cfg)
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    text = render_json(rep, cfg, stamp) if cfg.output_format == "json" else render_csv(rep)
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stream.write(text)
    for f in rep.failures():
        print(json.dumps({"failed": f["name"], "expected": f["expected"], "got": f["got"],
                          "tolerance": f["tolerance"]}), file=sys.stderr)
    return EXIT_OK if rep.passed else EXIT_FAIL


# ---------------------------------------------------------------- argument handling

_FLAG_FIELDS = {
    "N": "N", "mu": "mu", "grid_size": "grid_size", "rel_tol": "rel_tol", "sectors": "sectors",
    "samples": "sample_count", "seed": "seed", "format": "output_format", "out": "output_path",
}


def _sectors(text):
    if isinstance(text, (list, tuple)):
        return tuple(int(v) for v in text)
    try:
        return tuple(int(v) for v in str(text).split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"sectors must be comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rellich-sobolev", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--N", type=int)
    ap.add_argument("--mu", type=float)
    ap.add_argument("--grid-size", dest="grid_size", type=int)
    ap.add_argument("--rel-tol", dest="rel_tol", type=float)
    ap.add_argument("--sectors", type=_sectors)
    ap.add_argument("--samples", type=int)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--format", choices=("json", "csv"))
    ap.add_argument("--out")
    ap.add_argument("--config", help="flat JSON object with RunConfig fields")
    return ap


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Flags override the config file, which overrides defaults."""
    cfg = RunConfig()
    names = {f.name for f in fields(RunConfig)}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            doc = json.load(fh)
        if not isinstance(doc, dict):
            raise DomainError("config file must hold a JSON object")
        unknown = set(doc) - names
        if unknown:
            raise DomainError(f"unknown config keys: {sorted(unknown)}")
        if "sectors" in doc:
            doc["sectors"] = _sectors(doc["sectors"])
        cfg = replace(cfg, **doc)
    flags = {_FLAG_FIELDS[k]: v for k, v in vars(args).items() if k in _FLAG_FIELDS and v is not None}
    return replace(cfg, **flags)


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = resolve_config(args)
    except (DomainError, OSError, json.JSONDecodeError, TypeError) as exc:
        print(json.dumps({"error": "config", "message": str(exc)}), file=sys.stderr)
        return EXIT_USAGE
    return run_subcommand(args.command, cfg)


if __name__ == "__main__":
    sys.exit(main())
