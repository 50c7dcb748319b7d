"""Batch runner: ``rankone {build,run,validate,report} --config FILE [--out DIR]``.

Exit codes: 0 success, 1 runtime error, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import _kernels, __version__
from .config import Analysis, Experiment, build_experiment, load_config, check
from .errors import ConfigError, RankOneError
from .lab import (
    CorrelationEngine,
    TensorQuery,
    correlation_profile,
    cyclicity_probe,
    fit_weak_limit,
    mixing_profile,
    tensor_correlation,
)
from .tower import spacer_mass_report

BASE_COLUMNS = ["j", "J", "m", "pair_id", "value_num", "value_den", "error_bound"]
EXTRA_COLUMNS = {
    "correlate": [],
    "fit": ["basis_element", "coefficient", "residual", "relative_residual"],
    "mixing": ["product_num", "product_den", "sup_deviation", "min_ratio"],
    "tensor": ["exponent", "centered", "product"],
    "probe": ["lag", "exponent", "centered", "min_eigenvalue", "rank"],
}
MANIFEST = "manifest.json"
SCHEDULE = "schedule.json"


def fmt(x) -> str:
    """Floats with 12 significant digits; integers and strings verbatim; ``None`` as empty."""
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    return format(float(x), ".12g")


def _csv_text(columns: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def _base(j, J, m, pair_id, value: Fraction | None, hJ: int) -> dict:
    return {
        "j": j,
        "J": J,
        "m": m,
        "pair_id": pair_id,
        "value_num": value.numerator if value is not None else None,
        "value_den": value.denominator if value is not None else None,
        "error_bound": Fraction(abs(m), hJ + 1) if m is not None else None,
    }


# ---------------------------------------------------------------------------
# analyses


def _profile(exp: Experiment, an: Analysis, eng, threads):
    return correlation_profile(exp.schedule, exp.J, [t.m for t in an.times], an.pairs, engine=eng, threads=threads)


def _rows_correlate(exp, an, eng, threads):
    table = _profile(exp, an, eng, threads)
    n = len(an.pairs)
    rows = []
    for i, t in enumerate(an.times):
        for row in table.rows[i * n : (i + 1) * n]:
            rows.append(_base(t.j, exp.J, t.m, row.pair_id, row.value, eng.hJ))
    return rows, {}


def _rows_fit(exp, an, eng, threads):
    rows, summary = [], []
    for t in an.times:
        table = correlation_profile(exp.schedule, exp.J, [t.m], an.pairs, engine=eng, threads=threads)
        for row in table.rows:
            rows.append(_base(t.j, exp.J, t.m, row.pair_id, row.value, eng.hJ))
        fit = fit_weak_limit(table, an.options["K_max"])
        coefs = [(f"T^{k}", c) for k, c in fit.shift_coefficients.items()] + [("Theta", fit.theta_coefficient)]
        for label, c in coefs:
            r = _base(t.j, exp.J, t.m, None, None, eng.hJ)
            r.update(basis_element=label, coefficient=c, residual=fit.residual, relative_residual=fit.relative_residual)
            rows.append(r)
        summary.append({"j": t.j, "m": t.m, "coefficients": {k: float(fmt(v)) for k, v in coefs}, "residual": float(fmt(fit.residual)), "relative_residual": float(fmt(fit.relative_residual))})
    return rows, {"fits": summary}


def _rows_mixing(exp, an, eng, threads):
    table = _profile(exp, an, eng, threads)
    products = [eng.measure(A) * eng.measure(B) for A, B in an.pairs]
    prof = {p.m: p for p in mixing_profile(table)}
    n = len(an.pairs)
    rows, summary = [], []
    for i, t in enumerate(an.times):
        for row in table.rows[i * n : (i + 1) * n]:
            r = _base(t.j, exp.J, t.m, row.pair_id, row.value, eng.hJ)
            p = products[row.pair_id]
            r.update(product_num=p.numerator, product_den=p.denominator)
            rows.append(r)
        p = prof[t.m]
        r = _base(t.j, exp.J, t.m, None, None, eng.hJ)
        r.update(sup_deviation=p.sup_deviation, min_ratio=p.min_ratio)
        rows.append(r)
        summary.append({"j": t.j, "m": t.m, "sup_deviation": float(fmt(p.sup_deviation)), "min_ratio": float(fmt(p.min_ratio))})
    return rows, {"mixing": summary}


def _rows_tensor(exp, an, eng, threads):
    ks = an.options["exponents"]
    rows, summary = [], []
    for t in an.times:
        res = tensor_correlation(TensorQuery(tuple(ks), t.m, tuple(an.pairs)), exp.schedule, exp.J, engine=eng)
        for i, (k, (A, B)) in enumerate(zip(ks, an.pairs)):
            r = _base(t.j, exp.J, k * t.m, i, eng.correlation(k * t.m, A, B).value, eng.hJ)
            r.update(exponent=k, centered=res.factors[i])
            rows.append(r)
        r = _base(t.j, exp.J, t.m, None, None, eng.hJ)
        r.update(error_bound=None, product=res.value)
        rows.append(r)
        summary.append({"j": t.j, "m": t.m, "product": float(fmt(res.value))})
    return rows, {"tensor": summary}


def _rows_probe(exp, an, eng, threads):
    ks, M, step = an.options["exponents"], an.options["M"], an.options["step"]
    A = an.pairs[0][0]
    res = cyclicity_probe(exp.schedule, exp.J, ks, A, M, step, engine=eng)
    j = an.options.get("step_stage")
    rows = []
    for d in range(M):
        for k in ks:
            m = k * d * step
            r = _base(j, exp.J, m, 0, eng.correlation(m, A, A).value, eng.hJ)
            r.update(lag=d, exponent=k, centered=eng.windowed_centered(m, A, A))
            rows.append(r)
    r = _base(j, exp.J, None, None, None, eng.hJ)
    r.update(min_eigenvalue=res.min_eigenvalue, rank=res.rank)
    rows.append(r)
    extra = {
        "probe": {
            "step": step,
            "min_eigenvalue": float(fmt(res.min_eigenvalue)),
            "rank": res.rank,
            "gram": [[float(fmt(x)) for x in row] for row in res.gram],
        }
    }
    return rows, extra


RUNNERS = {
    "correlate": _rows_correlate,
    "fit": _rows_fit,
    "mixing": _rows_mixing,
    "tensor": _rows_tensor,
    "probe": _rows_probe,
}


# ---------------------------------------------------------------------------
# manifest


def _schedule_summary(exp: Experiment) -> dict:
    s = exp.schedule
    return {
        "heights": list(s.heights),
        "markers": {str(j): m for j, m in s.markers},
        "truncate_at": exp.J,
        "h_J": s.height(exp.J),
        "spacer_mass": [
            {
                "stage": r.stage,
                "added": r.added,
                "fraction": float(fmt(r.fraction)),
                "base_tower_measure": float(fmt(r.base_tower_measure)),
            }
            for r in spacer_mass_report(s)
        ],
    }


def _write(path: Path, text: str) -> None:
    path.write_text(text)


def build(exp: Experiment, out: Path) -> dict:
    """Write ``schedule.json`` and a manifest without analyses."""
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    _write(out / SCHEDULE, json.dumps(exp.schedule.to_dict(), indent=1) + "\n")
    manifest = {
        "version": __version__,
        "config": exp.config,
        "seed": exp.seed,
        "schedule": _schedule_summary(exp),
        "backend": _kernels.backend(),
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "wall_times": {"build": time.perf_counter() - t0},
        "analyses": [],
    }
    _write(out / MANIFEST, json.dumps(manifest, indent=1) + "\n")
    return manifest


def run(exp: Experiment, out: Path, threads: int = 1) -> dict:
    """Build, run every analysis, write one CSV each plus the manifest."""
    manifest = build(exp, out)
    eng = CorrelationEngine(exp.schedule, exp.J)
    for an in exp.analyses:
        t0 = time.perf_counter()
        rows, extra = RUNNERS[an.kind](exp, an, eng, threads)
        name = f"{an.index:02d}_{an.kind}.csv"
        _write(out / name, _csv_text(BASE_COLUMNS + EXTRA_COLUMNS[an.kind], rows))
        entry = {
            "index": an.index,
            "type": an.kind,
            "csv": name,
            "rows": len(rows),
            "times": [{"j": t.j, "m": t.m} for t in an.times],
            "pairs": [[A.label(), B.label()] for A, B in an.pairs],
        }
        entry.update(extra)
        manifest["analyses"].append(entry)
        manifest["wall_times"][name] = time.perf_counter() - t0
    manifest["threads"] = threads
    _write(out / MANIFEST, json.dumps(manifest, indent=1) + "\n")
    return manifest


def report(out: Path, stream=None) -> None:
    stream = stream or sys.stdout
    manifest = json.loads((out / MANIFEST).read_text())
    sch = manifest["schedule"]
    p = lambda *a: print(*a, file=stream)  # noqa: E731
    p(f"backend {manifest['backend']}  seed {manifest['seed']}  truncate_at {sch['truncate_at']}  h_J {sch['h_J']}")
    p("heights " + " ".join(str(h) for h in sch["heights"]))
    if sch["markers"]:
        p("markers " + " ".join(f"{j}:{m}" for j, m in sch["markers"].items()))
    for a in manifest["analyses"]:
        p(f"[{a['index']}] {a['type']}: {a['rows']} rows in {a['csv']} ({manifest['wall_times'].get(a['csv'], 0):.2f}s)")
        for f in a.get("fits", []):
            co = " ".join(f"{k}={v:+.4f}" for k, v in f["coefficients"].items())
            p(f"    j={f['j']} m={f['m']}: {co} rel.residual={f['relative_residual']:.4f}")
        for f in a.get("mixing", []):
            p(f"    j={f['j']} m={f['m']}: sup-deviation={f['sup_deviation']:.4g} min-ratio={f['min_ratio']:.4g}")
        for f in a.get("tensor", []):
            p(f"    j={f['j']} m={f['m']}: product={f['product']:.4g}")
        if "probe" in a:
            pr = a["probe"]
            p(f"    rank={pr['rank']} min-eigenvalue={pr['min_eigenvalue']:.6g}")


# ---------------------------------------------------------------------------
# entry point


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rankone", description="Rank-one tower experiments.")
    ap.add_argument("verb", choices=["build", "run", "validate", "report"])
    ap.add_argument("--config", help="experiment config (JSON)")
    ap.add_argument("--out", help="output directory (overrides the config 'output' field)")
    ap.add_argument("--seed", type=int, help="seed (overrides the config 'seed' field)")
    ap.add_argument("--threads", type=int, default=1, help="worker threads for correlation rows")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.verb == "report":
            out = args.out
            if out is None and args.config:
                out = load_config(args.config).data.get("output")
            if out is None:
                raise ConfigError("report needs --out or a config with 'output'")
            report(Path(out))
            return 0
        if not args.config:
            raise ConfigError(f"{args.verb} needs --config")
        if args.verb == "validate":
            _, diags = check(load_config(args.config), args.seed)
            for d in diags:
                print(d, file=sys.stderr)
            return 2 if diags else 0
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        exp = build_experiment(args.config, args.seed)
        out = args.out or exp.output
        if not out:
            raise ConfigError("no output directory: give --out or set 'output' in the config")
        if args.verb == "build":
            build(exp, Path(out))
        else:
            run(exp, Path(out), threads=args.threads)
        return 0
    except ConfigError as e:
        print(f"config error: {e}" if not e.diagnostics else str(e), file=sys.stderr)
        return 2
    except (RankOneError, OSError, ValueError, MemoryError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
