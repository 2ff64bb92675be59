#include "ia/json_io.hpp"

#include "ia/version.hpp"

namespace ia {

using nlohmann::json;

json to_json(const SubIC& s) { return {{"rx_set", s.rx}, {"tx_set", s.tx}}; }

SubIC subic_from_json(const json& j) {
    return SubIC{j.at("rx_set").get<std::vector<int>>(), j.at("tx_set").get<std::vector<int>>()};
}

json feasibility_to_json(const AntennaConfig& config, const FeasibilityReport& report) {
    json out{{"config", config.to_string()},
             {"feasible", report.feasible},
             {"classification", to_cstring(report.classification)},
             {"witness", nullptr},
             {"counts", nullptr}};
    if (report.witness) out["witness"] = to_json(*report.witness);
    if (report.counts) out["counts"] = json{{"n_var", report.counts->n_var}, {"n_eq", report.counts->n_eq}};
    return out;
}

FeasibilityReport feasibility_from_json(const json& j) {
    FeasibilityReport report;
    report.feasible = j.at("feasible").get<bool>();
    const std::string cls = j.at("classification").get<std::string>();
    report.classification = cls == "TIGHT"     ? Classification::Tight
                            : cls == "SUPER"   ? Classification::Super
                                               : Classification::Infeasible;
    if (!j.at("witness").is_null()) report.witness = subic_from_json(j.at("witness"));
    if (!j.at("counts").is_null())
        report.counts = WitnessCounts{j.at("counts").at("n_var").get<long>(),
                                      j.at("counts").at("n_eq").get<long>()};
    return report;
}

json mask_to_json(const CsitMask& mask, int users) {
    const SubIC sets = mask.effective_sets(users);
    return {{"tx", mask.owner_tx},
            {"kind", mask.kind == CsitMask::Kind::Complete ? "COMPLETE" : "SETS"},
            {"rx_set", sets.rx},
            {"tx_set", sets.tx}};
}

CsitMask mask_from_json(const json& j, int users) {
    const int owner = j.at("tx").get<int>();
    if (j.at("kind").get<std::string>() == "COMPLETE") return CsitMask::complete(owner);
    return CsitMask::of(owner,
                        SubIC{j.at("rx_set").get<std::vector<int>>(),
                              j.at("tx_set").get<std::vector<int>>()},
                        users);
}

json allocation_to_json(const AntennaConfig& config, const RemovalPlan& plan,
                        const CsitAllocation& alloc) {
    const long size = allocation_size(plan.reduced_config, alloc);
    const long complete = complete_size(config);
    json masks = json::array();
    for (const CsitMask& m : alloc.masks) masks.push_back(mask_to_json(m, plan.reduced_config.users()));
    return {{"config", config.to_string()},
            {"plan",
             {{"rx_removals", plan.rx_removals},
              {"tx_removals", plan.tx_removals},
              {"reduced_config", plan.reduced_config.to_string()}}},
            {"masks", masks},
            {"allocation_size", size},
            {"complete_size", complete},
            {"reduction_ratio", complete > 0 ? static_cast<double>(size) / static_cast<double>(complete)
                                             : 0.0}};
}

AllocationReport allocation_from_json(const json& j) {
    AntennaConfig config = AntennaConfig::parse(j.at("config").get<std::string>());
    AntennaConfig reduced = AntennaConfig::parse(j.at("plan").at("reduced_config").get<std::string>());
    RemovalPlan plan{j.at("plan").at("rx_removals").get<std::vector<int>>(),
                     j.at("plan").at("tx_removals").get<std::vector<int>>(), std::move(reduced)};
    CsitAllocation alloc;
    for (const json& m : j.at("masks")) alloc.masks.push_back(mask_from_json(m, plan.reduced_config.users()));
    return {std::move(config), std::move(plan), std::move(alloc)};
}

json precode_to_json(const AntennaConfig& config, const PrecodeResult& result,
                     const SolverOptions& opts, std::uint64_t channel_seed) {
    auto complex_vector = [](const Eigen::VectorXcd& v) {
        std::vector<double> re(static_cast<std::size_t>(v.size())), im(re.size());
        for (Eigen::Index r = 0; r < v.size(); ++r) {
            re[static_cast<std::size_t>(r)] = v(r).real();
            im[static_cast<std::size_t>(r)] = v(r).imag();
        }
        return json{{"re", re}, {"im", im}};
    };

    json beamformers = json::array();
    for (const auto& [id, vec] : result.beamformers.tx) {
        json entry = complex_vector(vec);
        entry["tx"] = id;
        beamformers.push_back(std::move(entry));
    }
    json filters = json::array();
    for (const auto& [id, vec] : result.beamformers.rx) {
        json entry = complex_vector(vec);
        entry["rx"] = id;
        filters.push_back(std::move(entry));
    }
    json solves = json::array();
    for (const SolveLog& log : result.solves) {
        solves.push_back({{"sub_ic", to_json(log.sub_ic)},
                          {"iterations", log.trace.iterations_used},
                          {"converged", log.trace.converged},
                          {"leakage", log.trace.final_leakage()},
                          {"trace", log.trace.leakage}});
    }
    return {{"config", config.to_string()},
            {"seed", channel_seed},
            {"tolerance", opts.tolerance},
            {"max_iterations", opts.max_iterations},
            {"converged", result.converged},
            {"residual_leakage", result.residual_leakage},
            {"beamformers", beamformers},
            {"filters", filters},
            {"solves", solves},
            {"version", std::string(kVersion)}};
}

}  // namespace ia
