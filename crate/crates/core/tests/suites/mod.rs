//! Property suites shared by the `properties` test target and the acceptance
//! criteria.

pub mod assembler;
pub mod cluster;
pub mod exec_oracle;
pub mod sequences;

/// Every property check, as `(suite::name, check)`.
pub const ALL: &[(&str, fn())] = &[
    (
        "exec_oracle::vector_alu_matches_lane_reference",
        exec_oracle::vector_alu_matches_lane_reference,
    ),
    (
        "exec_oracle::dot_products_match_exact_sum",
        exec_oracle::dot_products_match_exact_sum,
    ),
    (
        "exec_oracle::fixed_point_matches_reference",
        exec_oracle::fixed_point_matches_reference,
    ),
    (
        "exec_oracle::bit_manipulation_matches_bitwise_reference",
        exec_oracle::bit_manipulation_matches_bitwise_reference,
    ),
    (
        "exec_oracle::multiply_divide_matches_reference",
        exec_oracle::multiply_divide_matches_reference,
    ),
    (
        "exec_oracle::base_alu_matches_reference",
        exec_oracle::base_alu_matches_reference,
    ),
    (
        "exec_oracle::subword_moves_match_lane_reference",
        exec_oracle::subword_moves_match_lane_reference,
    ),
    (
        "exec_oracle::vector_lanes_are_isolated",
        exec_oracle::vector_lanes_are_isolated,
    ),
    (
        "exec_oracle::clip_is_idempotent_and_bounded",
        exec_oracle::clip_is_idempotent_and_bounded,
    ),
    (
        "exec_oracle::division_identity_holds",
        exec_oracle::division_identity_holds,
    ),
    (
        "exec_oracle::shuffle_outputs_come_from_inputs",
        exec_oracle::shuffle_outputs_come_from_inputs,
    ),
    (
        "exec_oracle::writes_to_x0_leave_registers_unchanged",
        exec_oracle::writes_to_x0_leave_registers_unchanged,
    ),
    (
        "sequences::add_round_normalize_replaces_add_addi_srai",
        sequences::add_round_normalize_replaces_add_addi_srai,
    ),
    (
        "sequences::multiply_round_normalize_replaces_mul_add_srai",
        sequences::multiply_round_normalize_replaces_mul_add_srai,
    ),
    (
        "sequences::clip_table_programs_agree",
        sequences::clip_table_programs_agree,
    ),
    (
        "sequences::mulq_table_programs_agree",
        sequences::mulq_table_programs_agree,
    ),
    (
        "sequences::hardware_loops_equal_branch_loops",
        sequences::hardware_loops_equal_branch_loops,
    ),
    (
        "sequences::hardware_loop_counts",
        sequences::hardware_loop_counts,
    ),
    (
        "sequences::timing_never_changes_architectural_state",
        sequences::timing_never_changes_architectural_state,
    ),
    (
        "sequences::instruction_energy_microbench_shape",
        sequences::instruction_energy_microbench_shape,
    ),
    (
        "assembler::print_then_parse_is_identity",
        assembler::print_then_parse_is_identity,
    ),
    (
        "assembler::addresses_increase_by_instruction_size",
        assembler::addresses_increase_by_instruction_size,
    ),
    (
        "assembler::mutated_labels_never_yield_a_program",
        assembler::mutated_labels_never_yield_a_program,
    ),
    (
        "assembler::syntax_errors_report_their_line",
        assembler::syntax_errors_report_their_line,
    ),
    (
        "cluster::arbiter_grants_at_most_one_request_per_bank",
        cluster::arbiter_grants_at_most_one_request_per_bank,
    ),
    (
        "cluster::arbiter_is_round_robin_fair",
        cluster::arbiter_is_round_robin_fair,
    ),
    (
        "cluster::distinct_banks_never_conflict",
        cluster::distinct_banks_never_conflict,
    ),
    (
        "cluster::cluster_runs_are_deterministic_and_conserve_requests",
        cluster::cluster_runs_are_deterministic_and_conserve_requests,
    ),
    (
        "cluster::disjoint_writers_match_sequential_runs",
        cluster::disjoint_writers_match_sequential_runs,
    ),
    (
        "cluster::single_core_cluster_matches_pipeline",
        cluster::single_core_cluster_matches_pipeline,
    ),
    (
        "cluster::one_bank_hammered_by_four_cores",
        cluster::one_bank_hammered_by_four_cores,
    ),
    (
        "cluster::energy_is_additive_over_trace_concatenation",
        cluster::energy_is_additive_over_trace_concatenation,
    ),
    (
        "cluster::scm_never_costs_more_than_sram",
        cluster::scm_never_costs_more_than_sram,
    ),
    (
        "cluster::shuffle_is_cheaper_than_the_alu_ops_it_replaces",
        cluster::shuffle_is_cheaper_than_the_alu_ops_it_replaces,
    ),
];
