#include "ridgeflow/errors.hpp"

namespace ridgeflow {

const char* errc_name(errc c) {
    switch (c) {
    case errc::too_few_vertices:        return "TooFewVertices";
    case errc::non_convex:              return "NonConvex";
    case errc::degenerate_edge:         return "DegenerateEdge";
    case errc::outside_domain:          return "OutsideDomain";
    case errc::index_out_of_range:      return "IndexOutOfRange";
    case errc::resolution_too_coarse:   return "ResolutionTooCoarse";
    case errc::ball_not_contained:      return "BallNotContained";
    case errc::non_monotone_sequence:   return "NonMonotoneSequence";
    case errc::zero_denominator:        return "ZeroDenominator";
    case errc::non_finite_encountered:  return "NonFiniteEncountered";
    case errc::empty_region:            return "EmptyRegion";
    case errc::ladder_too_short:        return "LadderTooShort";
    case errc::grid_mismatch:           return "GridMismatch";
    case errc::start_outside:           return "StartOutside";
    case errc::start_on_ridge:          return "StartOnRidge";
    case errc::seed_outside:            return "SeedOutside";
    case errc::no_event:                return "NoEvent";
    case errc::clearance_violated:      return "ClearanceViolated";
    case errc::quad_construction_failed:return "QuadConstructionFailed";
    case errc::parse_error:             return "ParseError";
    case errc::invalid_argument:        return "InvalidArgument";
    }
    return "UnknownError";
}

error::error(errc c, const std::string& what_arg)
    : std::runtime_error(std::string(errc_name(c)) + ": " + what_arg), code(c) {}

void fail(errc c, const std::string& what_arg) {
    throw error(c, what_arg);
}

} // namespace ridgeflow
