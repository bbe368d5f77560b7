from dotenv import load_dotenv
load_dotenv()

import argparse
import asyncio
import json
import logging
import os
import sys
import uuid
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from core.context import RunConfig
from core.errors import CompilerError
from core.models import ChiMode, Gateset, GroupMode, RMode, TSParams
from core.report_store import REPORT_TYPES, ReportStore, dump_report

# Import from package (not submodules) so the stage modules load in dependency order
from simulation_compiler import (
    BaseNet,
    assemble_circuit,
    build_ts_step,
    emit_layers,
    emit_string,
    expected_model_counts,
    extrapolate_exp_counts,
    format_error_summary,
    gate_counts,
    group_scaling_experiment,
    make_honeycomb,
    make_pairing,
    norm_scaling_fit,
    run_pipeline,
    schedule_layers,
    sort_hamiltonian,
    ts_error_experiment,
    write_error_csv,
    write_rows_csv,
)

logger = logging.getLogger("core.main")

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2


def _int_list(text: str) -> list[int]:
    """'2,4,10' or an inclusive range '2-8'."""
    if "-" in text and "," not in text:
        lo, hi = (int(part) for part in text.split("-"))
        return list(range(lo, hi + 1))
    return [int(part) for part in text.split(",") if part]


def _float_list(text: str) -> list[float]:
    return [float(part) for part in text.split(",") if part]


def _write_or_print(text: str, path: Path | None) -> None:
    if path is None:
        print(text)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# compile
# ---------------------------------------------------------------------------
async def _record_compile(stats, run_id: str) -> None:
    from core.database import engine, init_db, save_compile_run

    await init_db()
    await save_compile_run(stats, run_id)
    # asyncio.run closes the loop; pooled connections must not outlive it.
    await engine.dispose()


def run_compile(config: RunConfig) -> int:
    """Compile one Hamiltonian file; returns the process exit status."""
    context, ir = run_pipeline(config)
    stats = context.stats

    if config.layered:
        _write_or_print(emit_layers(ir, schedule_layers(ir)), config.circuit_path)
    else:
        _write_or_print(emit_string(ir), config.circuit_path)
    if config.stats:
        _write_or_print(stats.model_dump_json(indent=2), config.stats_path)
    for warning in stats.warnings:
        print(f"warning: {warning}", file=sys.stderr)

    if config.record:
        run_id = uuid.uuid4().hex
        asyncio.run(_record_compile(stats, run_id))

    if config.verify and stats.verification is not None and stats.verification.passed is False:
        logger.error(
            "verification_failed measured=%.3e tolerance=%.3e",
            stats.verification.measured_error, stats.verification.tolerance,
        )
        return EXIT_VERIFY_FAILED
    return EXIT_OK


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        hamiltonian_path=args.hamiltonian,
        n=args.n,
        t=args.t,
        epsilon=args.eps,
        r=args.r,
        chi=args.chi,
        gateset=Gateset(args.gateset),
        group_mode=GroupMode(args.group),
        r_mode=RMode(args.r_mode),
        chi_mode=ChiMode(args.chi_mode),
        circuit_path=args.out,
        stats_path=args.stats_out,
        seed=args.seed,
        allow_zero=args.allow_zero,
        doubled_r=args.doubled_r,
        stats=not args.no_stats,
        verify=args.verify,
        layered=args.layered,
        record=args.record,
        sk_max_length=args.sk_max_length,
    )


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------
async def _record_report(kind: str, report) -> str:
    from core.database import engine, init_db, save_error_samples

    await init_db()
    report_id = await ReportStore().save_report(kind, report)
    if kind == "ts-error":
        await save_error_samples(report, report_id)
    await engine.dispose()
    return report_id


def _gate_counts_report(args: argparse.Namespace) -> dict:
    if args.model == "honeycomb":
        spec = make_honeycomb(args.rows, args.cols, args.jx, args.jy, args.jz)
    else:
        rng = np.random.default_rng(args.seed)
        n = args.n_qubits
        couplings = np.triu(rng.uniform(0.5, 1.5, (n, n)), 1)
        spec = make_pairing(n, rng.uniform(0.5, 1.5, n), couplings, couplings * 0.5)

    sorted_spec, partition = sort_hamiltonian(spec, GroupMode(args.group))
    params = TSParams(
        t=args.t, chi=args.chi, r=args.r, epsilon=1.0, epsilon_requested=1.0,
        a_max=spec.a_max, m=spec.m, auto_chi=False, auto_r=False,
    )
    ir = assemble_circuit(sorted_spec, build_ts_step(sorted_spec, params.dt, args.chi, args.r), params)
    counts = gate_counts(ir)
    expected = expected_model_counts(args.model, spec.n, args.chi, args.r)
    return {
        "model": args.model,
        "n": spec.n,
        "m": spec.m,
        "m_bar": partition.m_bar,
        "chi": args.chi,
        "r": args.r,
        "counts": counts.model_dump(),
        "expected": expected.model_dump(),
        "matches": counts == expected,
        "depth": schedule_layers(ir).depth,
    }


def run_experiment(subcommand: str, args: argparse.Namespace) -> int:
    report = None
    if subcommand == "ts-error":
        report = ts_error_experiment(args.n, args.t_grid, args.samples, args.order, args.seed)
        if args.out:
            write_error_csv(report, args.out)
        _write_or_print(format_error_summary(report), args.summary)

    elif subcommand == "norm-fit":
        report = norm_scaling_fit(args.n, args.samples, args.seed)
        _write_or_print(report.model_dump_json(indent=2), args.out)

    elif subcommand == "extrapolate":
        report = extrapolate_exp_counts(args.n, args.eps, args.t)
        if args.out:
            write_rows_csv(report, args.out)
        lines = ["n,m,n_exp_order1,n_exp_order2,ratio,reference_order1,reference_order2,deviates"]
        for row in report:
            lines.append(
                f"{row.n},{row.m},{row.n_exp_order1},{row.n_exp_order2},{row.ratio:.2f},"
                f"{row.reference_order1 or ''},{row.reference_order2 or ''},{row.deviates}"
            )
        print("\n".join(lines))

    elif subcommand == "gate-counts":
        summary = _gate_counts_report(args)
        _write_or_print(json.dumps(summary, indent=2), args.out)
        return EXIT_OK if summary["matches"] else EXIT_VERIFY_FAILED

    elif subcommand == "group-scaling":
        report = group_scaling_experiment(args.model, args.sizes, args.seed)
        if args.out:
            write_rows_csv(report, args.out)
        print("model,n,m,m_bar_commuting,m_bar_disjoint")
        for row in report:
            print(f"{row.model},{row.n},{row.m},{row.m_bar_commuting},{row.m_bar_disjoint}")

    elif subcommand == "sk-net":
        cache = args.cache or os.getenv("BASE_NET_CACHE_PATH")
        net = BaseNet.load_or_build(Path(cache) if cache else None, args.max_length, args.max_size)
        spacing = net.spacing(args.spacing_samples, args.seed)
        summary = {
            "size": len(net),
            "max_length": net.max_length,
            "spacing": spacing,
            "cache": str(cache) if cache else None,
        }
        print(json.dumps(summary))

    else:
        raise ValueError(f"unknown experiment {subcommand!r}")

    if getattr(args, "record", False) and report is not None:
        report_id = asyncio.run(_record_report(subcommand, report))
        logger.info("report_recorded kind=%s id=%s", subcommand, report_id)
    return EXIT_OK


# ---------------------------------------------------------------------------
# recorded reports
# ---------------------------------------------------------------------------
async def _reports_action(args: argparse.Namespace) -> str:
    from core.database import engine, init_db

    await init_db()
    store = ReportStore()
    try:
        if args.action == "list":
            return "\n".join(await store.list_reports(args.kind, args.limit))
        if args.action == "show":
            return dump_report(await store.load_report(args.report_id), indent=2)
        await store.delete_report(args.report_id)
        return f"deleted {args.report_id}"
    finally:
        await engine.dispose()


def run_reports(args: argparse.Namespace) -> int:
    output = asyncio.run(_reports_action(args))
    if output:
        print(output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trotter-compile",
        description="Compile Pauli-sum Hamiltonians into Trotter-Suzuki gate circuits.",
    )
    parser.add_argument("--log-level", default=os.getenv("LOG_LEVEL", "INFO"))
    sub = parser.add_subparsers(dest="command", required=True)

    compile_ = sub.add_parser("compile", help="compile a Hamiltonian file into a circuit")
    compile_.add_argument("hamiltonian", type=Path)
    compile_.add_argument("--n", type=int, default=None, help="override the qubit count")
    compile_.add_argument("--t", type=float, required=True)
    compile_.add_argument("--eps", type=float, required=True)
    compile_.add_argument("--r", type=int, default=0, help="time steps (0 = automatic)")
    compile_.add_argument("--chi", type=int, default=0, help="formula order (0 = automatic)")
    compile_.add_argument("--gateset", choices=[g.value for g in Gateset], default=Gateset.CONTINUOUS.value)
    compile_.add_argument("--group", choices=[g.value for g in GroupMode], default=GroupMode.COMMUTING.value)
    compile_.add_argument("--r-mode", choices=[m.value for m in RMode], default=RMode.RIGOROUS.value)
    compile_.add_argument("--chi-mode", choices=[m.value for m in ChiMode], default=ChiMode.DEFAULT.value)
    compile_.add_argument("--out", type=Path, default=None, help="circuit file (default stdout)")
    compile_.add_argument("--stats-out", type=Path, default=None, help="stats JSON file (default stdout)")
    compile_.add_argument("--no-stats", action="store_true")
    compile_.add_argument("--seed", type=int, default=0, help="random input state for --verify")
    compile_.add_argument("--allow-zero", action="store_true")
    compile_.add_argument("--doubled-r", action="store_true")
    compile_.add_argument("--verify", action="store_true")
    compile_.add_argument("--layered", action="store_true")
    compile_.add_argument("--record", action="store_true")
    compile_.add_argument("--sk-max-length", type=int, default=None)

    ts_error = sub.add_parser("ts-error", help="single-step Trotter error vs bound and fit")
    ts_error.add_argument("--order", type=int, choices=[1, 2], default=1)
    ts_error.add_argument("--n", type=_int_list, default=[4])
    ts_error.add_argument("--t-grid", type=_float_list, default=[1e-4, 1e-3, 1e-2, 1e-1])
    ts_error.add_argument("--samples", type=int, default=50)
    ts_error.add_argument("--seed", type=int, default=0)
    ts_error.add_argument("--out", type=Path, default=None, help="per-sample CSV")
    ts_error.add_argument("--summary", type=Path, default=None)
    ts_error.add_argument("--record", action="store_true")

    norm_fit = sub.add_parser("norm-fit", help="fit ||H|| ~ c n^alpha over the random ensemble")
    norm_fit.add_argument("--n", type=_int_list, default=list(range(2, 9)))
    norm_fit.add_argument("--samples", type=int, default=50)
    norm_fit.add_argument("--seed", type=int, default=0)
    norm_fit.add_argument("--out", type=Path, default=None)
    norm_fit.add_argument("--record", action="store_true")

    extrapolate = sub.add_parser("extrapolate", help="extrapolated exponential counts")
    extrapolate.add_argument("--eps", type=float, default=0.01)
    extrapolate.add_argument("--t", type=float, default=0.1)
    extrapolate.add_argument("--n", type=_int_list, default=[2, 4, 10, 40, 100])
    extrapolate.add_argument("--out", type=Path, default=None)
    extrapolate.add_argument("--record", action="store_true")

    counts = sub.add_parser("gate-counts", help="gate counts for the honeycomb and pairing models")
    counts.add_argument("--model", choices=["honeycomb", "pairing"], required=True)
    counts.add_argument("--rows", type=int, default=1)
    counts.add_argument("--cols", type=int, default=1)
    counts.add_argument("--n-qubits", type=int, default=2, help="pairing model size")
    counts.add_argument("--jx", type=float, default=1.0)
    counts.add_argument("--jy", type=float, default=1.0)
    counts.add_argument("--jz", type=float, default=1.0)
    counts.add_argument("--chi", type=int, default=1)
    counts.add_argument("--r", type=int, default=1)
    counts.add_argument("--t", type=float, default=1.0)
    counts.add_argument("--group", choices=[g.value for g in GroupMode], default=GroupMode.COMMUTING.value)
    counts.add_argument("--seed", type=int, default=0)
    counts.add_argument("--out", type=Path, default=None)

    scaling = sub.add_parser("group-scaling", help="group counts as the system grows")
    scaling.add_argument("--model", choices=["honeycomb", "random"], required=True)
    scaling.add_argument("--sizes", type=_int_list, required=True)
    scaling.add_argument("--seed", type=int, default=0)
    scaling.add_argument("--out", type=Path, default=None)
    scaling.add_argument("--record", action="store_true")

    net = sub.add_parser("sk-net", help="build and cache the Solovay-Kitaev base net")
    net.add_argument("--max-length", type=int, default=24)
    net.add_argument("--max-size", type=int, default=200_000)
    net.add_argument("--cache", type=Path, default=None)
    net.add_argument("--spacing-samples", type=int, default=2000)
    net.add_argument("--seed", type=int, default=0)

    reports = sub.add_parser("reports", help="list, show or delete recorded experiment reports")
    actions = reports.add_subparsers(dest="action", required=True)
    list_ = actions.add_parser("list", help="ids of recorded reports, newest first")
    list_.add_argument("kind", choices=sorted(REPORT_TYPES))
    list_.add_argument("--limit", type=int, default=50)
    show = actions.add_parser("show", help="print one report as JSON")
    show.add_argument("report_id")
    remove = actions.add_parser("delete", help="delete one report")
    remove.add_argument("report_id")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
    )

    try:
        if args.command == "compile":
            return run_compile(_config_from_args(args))
        if args.command == "reports":
            return run_reports(args)
        return run_experiment(args.command, args)
    except (CompilerError, ValidationError, ValueError, OSError) as exc:
        logger.error("%s_failed error=%s", args.command, exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception:
        logger.exception("%s_crashed", args.command)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
