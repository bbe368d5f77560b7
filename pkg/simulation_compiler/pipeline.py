"""
End-to-end compile flow: sort, choose parameters, build the product formula,
synthesize and schedule the circuit, optionally verify it densely.
"""

import logging
from pathlib import Path

from core.context import CompileContext, PipelineStage, RunConfig
from core.errors import ConfigError
from core.models import CompileStats, GateIR, Gateset, GroupMode, HamiltonianSpec, RMode
from simulation_compiler.circuitgen import assemble_circuit, gate_counts, schedule_layers
from simulation_compiler.commute import sort_hamiltonian
from simulation_compiler.hamiltonian import drop_zero_terms, parse_hamiltonian
from simulation_compiler.solovay_kitaev import sk_tolerance
from simulation_compiler.trotter import build_ts_step, resolve_params
from simulation_compiler.verify import dense_cap, hamiltonian_norm, verify_circuit

logger = logging.getLogger(__name__)

R_OVERRIDE_WARNING = "r was set by the user: the error in the quantum simulation is unknown"
HEURISTIC_WARNING = "r from the empirical fit: the error bound is not guaranteed"


def load_spec(config: RunConfig) -> tuple[HamiltonianSpec, list[str]]:
    if config.hamiltonian_path is None:
        raise ConfigError("a Hamiltonian file is required")
    spec = parse_hamiltonian(Path(config.hamiltonian_path).read_text(encoding="utf-8"))
    warnings = []
    if config.n is not None and config.n != spec.n:
        if config.n < spec.n:
            raise ConfigError(f"n override {config.n} is smaller than the file's n={spec.n}")
        spec = HamiltonianSpec(n=config.n, k=spec.k, terms=spec.terms, group_boundaries=spec.group_boundaries)
    if not config.allow_zero:
        spec, dropped = drop_zero_terms(spec)
        if dropped:
            warnings.append(f"dropped {dropped} zero-coefficient term(s)")
    return spec, warnings


def compile_spec(spec: HamiltonianSpec, config: RunConfig) -> tuple[CompileContext, GateIR]:
    context = CompileContext(config=config, spec=spec)

    context.advance(PipelineStage.SORT)
    logger.info("stage_start stage=%s", context.stage.value)
    context.sorted_spec, context.partition = sort_hamiltonian(spec, config.group_mode)

    context.advance(PipelineStage.PARAMETERS)
    norm_h = None
    if config.r_mode is RMode.HEURISTIC and spec.n <= dense_cap():
        norm_h = hamiltonian_norm(spec)
    context.params = resolve_params(
        context.sorted_spec,
        config.t,
        config.epsilon,
        chi=config.chi,
        r=config.r,
        r_mode=config.r_mode,
        chi_mode=config.chi_mode,
        doubled_r=config.doubled_r,
        norm_h=norm_h,
    )
    if config.r > 0:
        logger.warning("r_override r=%s: %s", config.r, R_OVERRIDE_WARNING)
        context.warnings.append(R_OVERRIDE_WARNING)
    if not context.params.rigorous:
        context.warnings.append(HEURISTIC_WARNING)

    context.advance(PipelineStage.TROTTER)
    logger.info("stage_start stage=%s", context.stage.value)
    params = context.params
    context.sequence = build_ts_step(context.sorted_spec, params.dt, params.chi, params.r)

    context.advance(PipelineStage.CIRCUIT)
    logger.info("stage_start stage=%s", context.stage.value)
    if config.gateset is Gateset.DISCRETE:
        context.sk_tolerance = sk_tolerance(params.epsilon, spec.m, params.chi, params.r)
    ir = assemble_circuit(
        context.sorted_spec, context.sequence, params, config.gateset, context.sk_tolerance, config.sk_max_length
    )

    context.advance(PipelineStage.SCHEDULE)
    depth = schedule_layers(ir).depth
    depth_ungrouped = None
    # Reported only in the stats output.
    if (config.stats or config.record) and config.group_mode is not GroupMode.NONE:
        unsorted_seq = build_ts_step(spec, params.dt, params.chi, params.r)
        unsorted_ir = assemble_circuit(
            spec, unsorted_seq, params, config.gateset, context.sk_tolerance, config.sk_max_length
        )
        depth_ungrouped = schedule_layers(unsorted_ir).depth

    if config.verify:
        context.advance(PipelineStage.VERIFY)
        logger.info("stage_start stage=%s", context.stage.value)
        context.verification = verify_circuit(
            spec,
            ir,
            config.t,
            tolerance=config.epsilon,
            phase_invariant=config.gateset is Gateset.DISCRETE,
            seed=config.seed,
        )
        if not context.verification.performed:
            context.warnings.append(context.verification.note)

    counts = gate_counts(ir)
    context.stats = CompileStats(
        n=spec.n,
        m=spec.m,
        m_bar=context.partition.m_bar,
        group_mode=config.group_mode,
        t=config.t,
        epsilon_requested=config.epsilon,
        epsilon=params.epsilon,
        chi=params.chi,
        r=params.r,
        rigorous=params.rigorous,
        gateset=config.gateset,
        sk_tolerance=context.sk_tolerance,
        counts=counts,
        total_gates=counts.total,
        depth=depth,
        depth_ungrouped=depth_ungrouped,
        warnings=context.warnings,
        verification=context.verification,
    )
    context.advance(PipelineStage.DONE)
    logger.info(
        "compile_done n=%s m=%s m_bar=%s chi=%s r=%s gates=%s depth=%s",
        spec.n, spec.m, context.partition.m_bar, params.chi, params.r, counts.total, depth,
    )
    return context, ir


def run_pipeline(config: RunConfig) -> tuple[CompileContext, GateIR]:
    spec, warnings = load_spec(config)
    context, ir = compile_spec(spec, config)
    if warnings:
        context.warnings[:0] = warnings
        context.stats = context.stats.model_copy(update={"warnings": list(context.warnings)})
    return context, ir
