#pragma once

#include <stdexcept>
#include <string>

namespace ridgeflow {

// Failure conditions surfaced by the library. Flags that do not abort an
// operation (NotReachedRidge, NonUnimodal, MaxIterExceeded, ...) are carried
// in result structs instead.
enum class errc {
    too_few_vertices,
    non_convex,
    degenerate_edge,
    outside_domain,
    index_out_of_range,
    resolution_too_coarse,
    ball_not_contained,
    non_monotone_sequence,
    zero_denominator,
    non_finite_encountered,
    empty_region,
    ladder_too_short,
    grid_mismatch,
    start_outside,
    start_on_ridge,
    seed_outside,
    no_event,
    clearance_violated,
    quad_construction_failed,
    parse_error,
    invalid_argument,
};

const char* errc_name(errc c);

struct error : std::runtime_error {
    errc code;
    error(errc c, const std::string& what_arg);
};

[[noreturn]] void fail(errc c, const std::string& what_arg);

} // namespace ridgeflow
