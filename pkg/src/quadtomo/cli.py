"""Command line front end: ``quadtomo <subcommand> ...``.

Exit status is 0 on success, 1 when a requested tolerance is exceeded, and a
per-error code (see ``EXIT_CODES``) when a module raises.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import errors
from .core import CouplingGraph, QuadraticHamiltonian, dumps, load_json, support_graph
from .dynamics import MeasurementRecord
from .generate import KINDS, generate
from .pipeline import RunConfig, compare, estimate_surface, run_pipeline, simulate_records
from .reconstruct import chain_auto, is_infecting, reconstruct_graph
from .spectral import SurfaceData
from .spinmap import SpinChain, jw_to_fermion, quasiparticle_spectrum, spin_spectrum

EXIT_TOLERANCE = 1
EXIT_CODES = {
    "ParseError": 10,
    "DimensionMismatch": 11,
    "ValidationError": 12,
    "NotHermitian": 12,
    "AnomalousSymmetryViolated": 12,
    "BosonicMNotPositiveDefinite": 12,
    "DegenerateSpectrum": 13,
    "ZeroMode": 13,
    "MismatchedRecords": 14,
    "RankDeficient": 15,
    "CollinearProbes": 16,
    "InconsistentSurface": 17,
    "ZeroAnchorEntry": 17,
    "EqualCouplingBond": 18,
    "DistinctCouplingBond": 18,
    "UnidentifiableRegimeSwitch": 18,
    "EqualCouplingEdge": 18,
    "BrokenChain": 19,
    "NoTransverseField": 19,
    "NotInfecting": 20,
    "SizeLimit": 21,
}
EXIT_USAGE = 2


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("QUADTOMO_THREADS", "1")))
    except ValueError:
        return 1


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def _probes(text: str):
    vals = [_complex(t) for t in text.split(",")]
    if len(vals) == 2:
        vals.append(0j)
    if len(vals) != 3:
        raise argparse.ArgumentTypeError("--probes takes c_a,c_b[,c_ref]")
    return tuple(vals)


def _emit(doc, out: str | None):
    text = dumps(doc) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_hamiltonian(path):
    """A Hamiltonian document or a {"hamiltonian", "graph"} bundle."""
    doc = load_json(path)
    if not isinstance(doc, dict):
        raise errors.ParseError(f"{path}: expected a JSON object")
    if "hamiltonian" in doc:
        h = QuadraticHamiltonian.from_dict(doc["hamiltonian"])
        g = CouplingGraph.from_dict(doc["graph"]) if "graph" in doc else None
        return h, g
    return QuadraticHamiltonian.from_dict(doc), None


def _config(args) -> RunConfig:
    return RunConfig(
        seed=args.seed,
        kappa=args.kappa,
        samples_per_mode=args.samples_per_mode,
        noise_sigma=args.noise,
        probes=args.probes,
        regime_tol=args.regime_tol,
    )


def _phases_from_file(path):
    if path is None:
        return None
    out = {}
    for item in load_json(path):
        try:
            z = item["phase"]
            out[(item["kind"], int(item["i"]), int(item["j"]))] = complex(z["re"], z["im"]) if isinstance(z, dict) else complex(z)
        except (KeyError, TypeError, ValueError) as exc:
            raise errors.ParseError(f"malformed phase entry {item!r}: {exc}") from exc
    return out


# -------------------------------------------------------------------- commands

def cmd_gen(args):
    _emit(generate(args.kind, args.n, args.statistics, args.seed), args.out)
    return 0


def cmd_simulate(args):
    h, g = _load_hamiltonian(args.hamiltonian)
    access = sorted(g.access) if g is not None else [1]
    records = simulate_records(h, _config(args), access)
    _emit({"n": h.n_sites, "statistics": h.statistics.value, "records": [r.to_dict() for r in records]}, args.out)
    if args.csv:
        _write_csv(records, Path(args.csv))
    return 0


def _write_csv(records, folder: Path):
    folder.mkdir(parents=True, exist_ok=True)
    for r in records:
        name = f"signal_init{r.init_site}_site{r.site}_c{r.c.real:+g}{r.c.imag:+g}i.csv"
        with open(folder / name, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "re", "im"])
            for t, v in zip(r.times, r.values):
                w.writerow([repr(float(t)), repr(float(v.real)), repr(float(v.imag))])


def _load_records(path):
    doc = load_json(path)
    try:
        recs = [MeasurementRecord.from_dict(r) for r in doc["records"]]
        return recs, int(doc["n"]), doc["statistics"]
    except (KeyError, TypeError) as exc:
        raise errors.ParseError(f"malformed records document: {exc}") from exc


def cmd_estimate(args):
    records, n, stats = _load_records(args.records)
    cfg = _config(args)
    if records and records[0].noise_sigma and not args.noise:
        cfg = RunConfig(**{**cfg.__dict__, "noise_sigma": records[0].noise_sigma})
    surface, spectra, recovered = estimate_surface(records, n, stats, cfg, real=not args.complex)
    doc = {
        "surface": surface.to_dict(),
        "spectra": {f"{k[0]}-{k[1]}": [v[0].to_dict(), v[2].to_dict()] for k, v in spectra.items()},
        "recovered_delta_c": {k: [{"re": z.real, "im": z.imag} for z in v] for k, v in recovered.items()},
    }
    _emit(doc, args.out)
    return 0


def cmd_reconstruct(args):
    doc = load_json(args.surface)
    surface = SurfaceData.from_dict(doc["surface"] if "surface" in doc else doc)
    phases = _phases_from_file(args.phases)
    if args.graph:
        g = CouplingGraph.from_dict(load_json(args.graph))
        h, diag = reconstruct_graph(surface, g, phases, regime_tol=args.regime_tol, diagnostics=True)
    else:
        h, diag = chain_auto(surface, phases, regime_tol=args.regime_tol, diagnostics=True)
    _emit({"hamiltonian": h.to_dict(), "diagnostics": diag}, args.out)
    return 0


def _pipeline_report(h, g, cfg, tol):
    res = run_pipeline(h, cfg, g)
    cmp = compare(h, res.estimate)
    ok = cmp["max_error"] <= tol
    lines = [
        {"event": "config", "seed": cfg.seed, "n": h.n_sites, "statistics": h.statistics.value, "kappa": cfg.kappa,
         "samples_per_mode": cfg.samples_per_mode, "noise_sigma": cfg.noise_sigma,
         "probes": [[c.real, c.imag] for c in cfg.probes]},
        {"event": "spectrum", "seed": cfg.seed, "energies": res.energies[: h.n_sites].tolist(),
         "frequency_error": res.diagnostics["frequency_error"]},
        {"event": "reconstruction", "seed": cfg.seed, "hamiltonian": res.estimate.to_dict(),
         "max_residual": res.diagnostics["max_residual"], "regime_per_bond": res.diagnostics["regime_per_bond"]},
        {"event": "comparison", "seed": cfg.seed, **{k: v for k, v in cmp.items() if not k.startswith("table")}},
        {"event": "status", "seed": cfg.seed, "ok": ok, "tol": tol},
    ]
    return lines, ok, res, cmp


def cmd_pipeline(args):
    h, g = _load_hamiltonian(args.hamiltonian)
    if g is None:
        g = support_graph(h)
    seeds = [args.seed + i for i in range(args.sweep)]
    configs = [RunConfig(**{**_config(args).__dict__, "seed": s}) for s in seeds]
    with ThreadPoolExecutor(max_workers=min(_threads(), len(configs))) as pool:
        results = list(pool.map(lambda c: _pipeline_report(h, g, c, args.tol), configs))
    ndjson = "".join(json.dumps(line, sort_keys=True) + "\n" for lines, *_ in results for line in lines)
    summary = []
    for (lines, ok, res, cmp), cfg in zip(results, configs):
        summary.append(
            f"seed {cfg.seed}: N={h.n_sites} {h.statistics.value} noise={cfg.noise_sigma:g} "
            f"max|dA|={cmp['max_error_A']:.3e} max|dB|={cmp['max_error_B']:.3e} "
            f"freq err={res.diagnostics['frequency_error']:.3e} -> {'ok' if ok else 'FAIL'} (tol {args.tol:g})"
        )
    all_ok = all(r[1] for r in results)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.ndjson").write_text(ndjson)
        (out / "summary.txt").write_text("\n".join(summary) + "\n")
        _write_csv(results[0][2].records, out / "signals")
        sys.stdout.write("\n".join(summary) + "\n")
    else:
        sys.stdout.write(ndjson)
        sys.stderr.write("\n".join(summary) + "\n")
    return 0 if all_ok else EXIT_TOLERANCE


def _format_table(name, table):
    rows = [f"|d{name}|"]
    for i, row in enumerate(table, 1):
        rows.append(f"{i:>3} " + " ".join(f"{v:.3e}" for v in row))
    return "\n".join(rows)


def cmd_compare(args):
    truth, _ = _load_hamiltonian(args.truth)
    est_doc = load_json(args.estimate)
    est = QuadraticHamiltonian.from_dict(est_doc["hamiltonian"] if "hamiltonian" in est_doc else est_doc)
    cmp = compare(truth, est)
    text = "\n".join(
        [
            _format_table("A", cmp["table_A"]),
            _format_table("B", cmp["table_B"]),
            f"max |dA| = {cmp['max_error_A']:.3e} at {tuple(cmp['argmax_A'])}, mean {cmp['mean_error_A']:.3e}",
            f"max |dB| = {cmp['max_error_B']:.3e} at {tuple(cmp['argmax_B'])}, mean {cmp['mean_error_B']:.3e}",
        ]
    )
    _emit(cmp, args.out)
    sys.stderr.write(text + "\n")
    return 0 if args.tol is None or cmp["max_error"] <= args.tol else EXIT_TOLERANCE


def cmd_jw(args):
    doc = load_json(args.spin)
    s = SpinChain.from_dict(doc)
    h, const = jw_to_fermion(s)
    out = {"hamiltonian": h.to_dict(), "constant": const}
    if args.check:
        qp = quasiparticle_spectrum(s)
        ex = spin_spectrum(s)
        err = float(np.max(np.abs(qp - ex)))
        out["spectrum_error"] = err
        _emit(out, args.out)
        return 0 if err <= args.tol else EXIT_TOLERANCE
    _emit(out, args.out)
    return 0


def cmd_infect(args):
    doc = load_json(args.graph)
    g = CouplingGraph.from_dict(doc["graph"] if "graph" in doc else doc)
    access = [int(v) for v in args.access.split(",")] if args.access else None
    ok, plan = is_infecting(g, access)
    _emit({"infecting": ok, "plan": [list(s) for s in plan]}, args.out)
    return 0


# ----------------------------------------------------------------------- parser

def _common(p, run=False):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output file (directory for pipeline)")
    p.add_argument("--tol", type=float, default=1e-4 if run else None)
    if run:
        p.add_argument("--noise", type=float, default=0.0, help="Gaussian sigma on Re and Im of each sample")
        p.add_argument("--kappa", type=float, default=4.0, help="time budget T = kappa N^2 / E_scale")
        p.add_argument("--samples-per-mode", type=int, default=RunConfig().samples_per_mode)
        p.add_argument("--probes", type=_probes, default=RunConfig().probes, help="c_a,c_b[,c_ref], e.g. 1,1i,0")
        p.add_argument("--regime-tol", type=float, default=1e-6)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="quadtomo", description="Quadratic Hamiltonian estimation from local dynamics.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="seeded random instance")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--statistics", choices=["fermion", "boson"], default="fermion")
    _common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("simulate", help="probe records for a Hamiltonian")
    p.add_argument("hamiltonian")
    p.add_argument("--csv", default=None, help="directory for per-record CSV (t, re, im)")
    _common(p, run=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="surface data from records")
    p.add_argument("records")
    p.add_argument("--complex", action="store_true", help="keep complex lower-row phases")
    _common(p, run=True)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("reconstruct", help="Hamiltonian from surface data")
    p.add_argument("surface")
    p.add_argument("--graph", default=None)
    p.add_argument("--phases", default=None, help='JSON list of {"kind","i","j","phase"}')
    p.add_argument("--regime-tol", type=float, default=1e-6)
    _common(p)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("pipeline", help="simulate, estimate, reconstruct and compare")
    p.add_argument("hamiltonian")
    p.add_argument("--sweep", type=int, default=1, help="number of consecutive seeds")
    _common(p, run=True)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("compare", help="elementwise error table")
    p.add_argument("truth")
    p.add_argument("estimate")
    _common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("jw", help="Jordan-Wigner map of a spin chain")
    p.add_argument("spin")
    p.add_argument("--check", action="store_true", help="compare with 2^N exact diagonalization")
    _common(p)
    p.set_defaults(func=cmd_jw)

    p = sub.add_parser("infect", help="infection plan of a graph")
    p.add_argument("graph")
    p.add_argument("--access", default=None, help="comma-separated sites (default: the graph's access set)")
    _common(p)
    p.set_defaults(func=cmd_infect)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "tol", None) is None and args.command == "jw":
        args.tol = 1e-9
    try:
        return args.func(args)
    except errors.QuadTomoError as exc:
        sys.stderr.write(json.dumps({"error": exc.code, "message": str(exc)}) + "\n")
        return EXIT_CODES.get(exc.code, 3)
    except (ValueError, OSError) as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
