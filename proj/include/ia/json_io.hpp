/**
 * @file json_io.hpp
 * @brief JSON wire formats shared by the CLI and the tests. Field names are
 *        part of the tool's interface and pinned by golden-file tests; every
 *        document round-trips through the from_* parsers.
 */
#pragma once

#include <json.hpp>

#include "ia/csit_allocation.hpp"
#include "ia/feasibility.hpp"
#include "ia/precoding.hpp"

namespace ia {

nlohmann::json to_json(const SubIC& s);
SubIC subic_from_json(const nlohmann::json& j);

nlohmann::json feasibility_to_json(const AntennaConfig& config, const FeasibilityReport& report);
FeasibilityReport feasibility_from_json(const nlohmann::json& j);

nlohmann::json mask_to_json(const CsitMask& mask, int users);
CsitMask mask_from_json(const nlohmann::json& j, int users);

/// The `allocate` report: plan, masks, sizes, reduction ratio.
nlohmann::json allocation_to_json(const AntennaConfig& config, const RemovalPlan& plan,
                                  const CsitAllocation& alloc);
struct AllocationReport {
    AntennaConfig config;
    RemovalPlan plan;
    CsitAllocation alloc;
};
AllocationReport allocation_from_json(const nlohmann::json& j);

nlohmann::json precode_to_json(const AntennaConfig& config, const PrecodeResult& result,
                               const SolverOptions& opts, std::uint64_t channel_seed);

}  // namespace ia
