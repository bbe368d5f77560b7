# Import the stages in dependency order: solovay_kitaev <- circuitgen <- trotter.
# trotter needs circuitgen's closed-form counts, and verify needs circuitgen's
# sequence check, so circuitgen must never import either of them.
# See: docs/architecture.md#module-dependencies
from simulation_compiler.solovay_kitaev import (
    BaseNet,
    default_base_net,
    inverse_word,
    projective_distance,
    rz_matrix,
    rz_word,
    simplify_word,
    sk_decompose,
    sk_tolerance,
    word_matrix,
)
from simulation_compiler.hamiltonian import (
    drop_zero_terms,
    make_honeycomb,
    make_pairing,
    parse_hamiltonian,
    sample_random_twobody,
    serialize_hamiltonian,
)
from simulation_compiler.commute import (
    commutes,
    disjoint,
    group_count_stats,
    partition_terms,
    sort_hamiltonian,
)
from simulation_compiler.circuitgen import (
    assemble_circuit,
    emit_layers,
    emit_string,
    expected_model_counts,
    fragment_gates,
    gate_counts,
    parse_circuit,
    pcircuit,
    predicted_counts,
    schedule_layers,
    validate_sequence,
)
from simulation_compiler.trotter import (
    build_ts_step,
    clamp_epsilon,
    default_chi,
    default_r,
    heuristic_r,
    merge_adjacent,
    order_crossover_epsilon,
    parse_sequence,
    preferred_order,
    resolve_params,
    s_coefficient,
)
from simulation_compiler.verify import (
    circuit_unitary,
    evolution_unitary,
    exact_unitary,
    hamiltonian_matrix,
    hamiltonian_norm,
    random_state,
    sequence_unitary,
    spectral_distance,
    state_distance,
    term_matrix,
    verify_circuit,
)
from simulation_compiler.experiments import (
    additivity_check,
    error_slope,
    extrapolate_exp_counts,
    format_error_summary,
    group_scaling_experiment,
    guarantee_experiment,
    norm_scaling_fit,
    sk_length_scaling,
    ts_error_experiment,
    write_error_csv,
    write_rows_csv,
)
from simulation_compiler.pipeline import compile_spec, load_spec, run_pipeline
