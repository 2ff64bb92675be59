#include "ia/experiments.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <exception>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ia/channel.hpp"
#include "ia/csit_allocation.hpp"
#include "ia/rng.hpp"
#include "ia/version.hpp"

namespace ia {

const char* to_cstring(RatePolicy p) {
    return p == RatePolicy::Complete ? "COMPLETE" : "INCOMPLETE";
}

const char* to_cstring(FeedbackPolicy p) {
    switch (p) {
        case FeedbackPolicy::Complete: return "COMPLETE";
        case FeedbackPolicy::Heuristic: return "HEURISTIC";
        case FeedbackPolicy::Exhaustive: return "EXHAUSTIVE";
    }
    return "?";
}

void ResultTable::write_csv(std::ostream& out) const {
    out << "x,policy,mean,stderr,n\n";
    for (const ResultRow& r : rows) {
        std::ostringstream line;
        line.precision(12);
        line << r.x << ',' << r.policy << ',' << r.mean << ',' << r.stderr_ << ',' << r.n << '\n';
        out << line.str();
    }
}

nlohmann::json ResultTable::to_json() const {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const ResultRow& r : rows)
        rows_json.push_back({{"x", r.x}, {"policy", r.policy}, {"mean", r.mean},
                             {"stderr", r.stderr_}, {"n", r.n}});
    nlohmann::json failures_json = nlohmann::json::array();
    for (const FailureRecord& f : failures)
        failures_json.push_back({{"policy", f.policy}, {"trial", f.trial},
                                 {"channel_seed", f.channel_seed}, {"leakage", f.leakage}});
    return {{"metadata", metadata}, {"rows", rows_json}, {"failures", failures_json}};
}

AntennaConfig random_feasible_config(int users, int total_antennas, std::uint64_t seed) {
    if (users < 1) throw UsageError("user count must be >= 1");
    if (total_antennas < 2 * users)
        throw UsageError("total antennas must cover one antenna per node");
    if (total_antennas < users * (users + 1))
        throw UsageError("IA is infeasible for fewer than K(K+1) antennas in total");

    rng::Stream stream(rng::derive(seed, rng::tag("config-draw")));
    for (int attempt = 0; attempt < 1'000'000; ++attempt) {
        std::vector<int> rx(static_cast<std::size_t>(users), 1);
        std::vector<int> tx(static_cast<std::size_t>(users), 1);
        for (int extra = 0; extra < total_antennas - 2 * users; ++extra) {
            const int node = stream.next_below(2 * users);
            if (node < users)
                ++rx[static_cast<std::size_t>(node)];
            else
                ++tx[static_cast<std::size_t>(node - users)];
        }
        AntennaConfig candidate{std::move(rx), std::move(tx)};
        if (is_feasible(candidate).feasible) return candidate;
    }
    throw std::logic_error("no feasible configuration found after 1e6 redraws");
}

namespace {

double sample_mean(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_stderr(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double var = ss / static_cast<double>(v.size() - 1);
    return std::sqrt(var / static_cast<double>(v.size()));
}

#ifdef _OPENMP
int team_size(int workers) { return workers > 0 ? workers : omp_get_max_threads(); }
#endif

/// Captures the first exception thrown inside a parallel loop so it can be
/// rethrown on the calling thread (an escaping exception would terminate).
class ErrorLatch {
  public:
    template <typename Fn>
    void run(Fn&& fn) noexcept {
        try {
            fn();
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical(ia_error_latch)
#endif
            {
                if (!error_) error_ = std::current_exception();
            }
        }
    }

    void rethrow_if_set() const {
        if (error_) std::rethrow_exception(error_);
    }

  private:
    std::exception_ptr error_;
};

}  // namespace

ResultTable rate_vs_snr(const RateSweepSpec& spec, int workers) {
    if (spec.trials < 1) throw UsageError("trials must be >= 1");
    if (spec.snr_grid_db.empty() || !std::is_sorted(spec.snr_grid_db.begin(), spec.snr_grid_db.end()) ||
        std::adjacent_find(spec.snr_grid_db.begin(), spec.snr_grid_db.end()) != spec.snr_grid_db.end())
        throw UsageError("SNR grid must be non-empty and strictly increasing");
    if (spec.policies.empty()) throw UsageError("at least one policy required");

    // The allocation depends only on the configuration; compute it once.
    const SuperAllocation incomplete = allocate_super(spec.config, SuperMode::Heuristic);

    const std::size_t n_pol = spec.policies.size();
    const std::size_t n_snr = spec.snr_grid_db.size();

    struct TrialOutcome {
        std::vector<char> converged;        // per policy
        std::vector<double> leakage;        // per policy
        std::vector<double> rates;          // per policy * snr, user-averaged

        bool all_converged() const {
            return std::all_of(converged.begin(), converged.end(), [](char c) { return c != 0; });
        }
    };
    std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(spec.trials));
    ErrorLatch latch;

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(team_size(workers))
#else
    (void)workers;
#endif
    for (int trial = 0; trial < spec.trials; ++trial) {
        latch.run([&, trial] {
            TrialOutcome& result = outcomes[static_cast<std::size_t>(trial)];
            result.converged.assign(n_pol, 0);
            result.leakage.assign(n_pol, 0.0);
            result.rates.assign(n_pol * n_snr, 0.0);

            const std::uint64_t chan_seed =
                rng::derive(spec.seed, rng::tag("rate-trial"), static_cast<std::uint64_t>(trial));
            const ChannelMatrix channel = draw_channel(spec.config, chan_seed);

            for (std::size_t p = 0; p < n_pol; ++p) {
                SolverOptions opts = spec.solver;
                BeamformerSet bf;
                if (spec.policies[p] == RatePolicy::Complete) {
                    opts.init_seed = rng::derive(spec.seed, rng::tag("complete-init"),
                                                 static_cast<std::uint64_t>(trial));
                    auto [solved, trace] = min_leakage_solve(
                        SubChannel::restriction(channel, SubIC::full(spec.config.users())), {}, opts);
                    bf.tx = std::move(solved.tx);
                    bf.rx = rx_filters(channel, bf.tx);
                    result.converged[p] = trace.converged ? 1 : 0;
                    result.leakage[p] = leakage(channel, bf);
                } else {
                    opts.init_seed = rng::derive(spec.seed, rng::tag("incomplete-init"),
                                                 static_cast<std::uint64_t>(trial));
                    PrecodeResult pr = distributed_precode(spec.config, incomplete.alloc,
                                                           &incomplete.plan, channel, opts);
                    bf = std::move(pr.beamformers);
                    result.converged[p] = pr.converged ? 1 : 0;
                    result.leakage[p] = pr.residual_leakage;
                }
                for (std::size_t s = 0; s < n_snr; ++s) {
                    const double power = std::pow(10.0, spec.snr_grid_db[s] / 10.0);
                    const std::vector<double> rates = user_rates(channel, bf, power);
                    result.rates[p * n_snr + s] = sample_mean(rates);
                }
            }
        });
    }
    latch.rethrow_if_set();

    ResultTable table;
    std::vector<std::vector<double>> samples(n_pol * n_snr);
    for (int trial = 0; trial < spec.trials; ++trial) {
        const TrialOutcome& result = outcomes[static_cast<std::size_t>(trial)];
        if (!result.all_converged()) {
            // Failed trials are excluded from every policy (pairing) and reported.
            for (std::size_t p = 0; p < n_pol; ++p) {
                if (result.converged[p]) continue;
                table.failures.push_back({to_cstring(spec.policies[p]), trial,
                                          rng::derive(spec.seed, rng::tag("rate-trial"),
                                                      static_cast<std::uint64_t>(trial)),
                                          result.leakage[p]});
            }
            continue;
        }
        for (std::size_t i = 0; i < samples.size(); ++i) samples[i].push_back(result.rates[i]);
    }

    for (std::size_t s = 0; s < n_snr; ++s) {
        for (std::size_t p = 0; p < n_pol; ++p) {
            const std::vector<double>& v = samples[p * n_snr + s];
            const double mean = sample_mean(v);
            table.rows.push_back({spec.snr_grid_db[s], to_cstring(spec.policies[p]), mean,
                                  sample_stderr(v, mean), static_cast<long>(v.size())});
        }
    }

    nlohmann::json policies = nlohmann::json::array();
    for (RatePolicy p : spec.policies) policies.push_back(to_cstring(p));
    table.metadata = {{"experiment", "rate_vs_snr"},
                      {"config", spec.config.to_string()},
                      {"snr_grid_db", spec.snr_grid_db},
                      {"trials", spec.trials},
                      {"policies", policies},
                      {"seed", spec.seed},
                      {"tolerance", spec.solver.tolerance},
                      {"max_iterations", spec.solver.max_iterations},
                      {"version", std::string(kVersion)},
                      {"rng", std::string(rng::kStreamId)}};
    return table;
}

ResultTable feedback_size_sweep(const FeedbackSweepSpec& spec, int workers) {
    if (spec.trials < 1) throw UsageError("trials must be >= 1");
    if (spec.total_antennas_grid.empty()) throw UsageError("total antenna grid must be non-empty");
    for (int total : spec.total_antennas_grid) {
        if (total < spec.users * (spec.users + 1))
            throw UsageError("totals below K(K+1) can never be feasible");
    }
    if (spec.policies.empty()) throw UsageError("at least one policy required");

    const std::size_t n_pol = spec.policies.size();
    const std::size_t n_tot = spec.total_antennas_grid.size();
    const int n_tasks = static_cast<int>(n_tot) * spec.trials;
    std::vector<double> values(n_tot * static_cast<std::size_t>(spec.trials) * n_pol, 0.0);
    ErrorLatch latch;

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(team_size(workers))
#else
    (void)workers;
#endif
    for (int task = 0; task < n_tasks; ++task) {
        latch.run([&, task] {
            const std::size_t g = static_cast<std::size_t>(task) / static_cast<std::size_t>(spec.trials);
            const int trial = task % spec.trials;
            const int total = spec.total_antennas_grid[g];
            const std::uint64_t cfg_seed =
                rng::derive(spec.seed, rng::tag("feedback-trial"), static_cast<std::uint64_t>(total),
                            static_cast<std::uint64_t>(trial));
            const AntennaConfig cfg = random_feasible_config(spec.users, total, cfg_seed);
            const bool tight = excess_antennas(cfg) == 0;
            for (std::size_t p = 0; p < n_pol; ++p) {
                long size = 0;
                switch (spec.policies[p]) {
                    case FeedbackPolicy::Complete: size = complete_size(cfg); break;
                    case FeedbackPolicy::Heuristic: {
                        const SuperAllocation sa = allocate_super(cfg, SuperMode::Heuristic);
                        size = allocation_size(sa.plan.reduced_config, sa.alloc);
                        break;
                    }
                    case FeedbackPolicy::Exhaustive: {
                        const SuperAllocation sa =
                            tight ? allocate_super(cfg, SuperMode::Heuristic)
                                  : allocate_super(cfg, SuperMode::Exhaustive);
                        size = allocation_size(sa.plan.reduced_config, sa.alloc);
                        break;
                    }
                }
                values[(g * static_cast<std::size_t>(spec.trials) + static_cast<std::size_t>(trial)) *
                           n_pol +
                       p] = static_cast<double>(size);
            }
        });
    }
    latch.rethrow_if_set();

    ResultTable table;
    for (std::size_t g = 0; g < n_tot; ++g) {
        for (std::size_t p = 0; p < n_pol; ++p) {
            std::vector<double> v(static_cast<std::size_t>(spec.trials));
            for (int trial = 0; trial < spec.trials; ++trial)
                v[static_cast<std::size_t>(trial)] =
                    values[(g * static_cast<std::size_t>(spec.trials) +
                            static_cast<std::size_t>(trial)) *
                               n_pol +
                           p];
            const double mean = sample_mean(v);
            table.rows.push_back({static_cast<double>(spec.total_antennas_grid[g]),
                                  to_cstring(spec.policies[p]), mean, sample_stderr(v, mean),
                                  static_cast<long>(v.size())});
        }
    }

    nlohmann::json policies = nlohmann::json::array();
    for (FeedbackPolicy p : spec.policies) policies.push_back(to_cstring(p));
    table.metadata = {{"experiment", "feedback_size_sweep"},
                      {"users", spec.users},
                      {"totals", spec.total_antennas_grid},
                      {"trials", spec.trials},
                      {"policies", policies},
                      {"seed", spec.seed},
                      {"version", std::string(kVersion)},
                      {"rng", std::string(rng::kStreamId)}};
    return table;
}

namespace {

struct SpecFile {
    std::map<std::string, std::pair<int, std::string>> entries;  // key -> (line, value)

    bool has(const std::string& key) const { return entries.count(key) > 0; }

    std::string take(const std::string& key, const std::string& fallback = "") const {
        auto it = entries.find(key);
        return it == entries.end() ? fallback : it->second.second;
    }

    std::string require(const std::string& key) const {
        if (!has(key)) throw UsageError("spec file is missing required key '" + key + "'");
        return entries.at(key).second;
    }
};

SpecFile read_spec(std::istream& in, std::initializer_list<const char*> known) {
    SpecFile out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError("spec file line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (std::find_if(known.begin(), known.end(),
                         [&](const char* k) { return key == k; }) == known.end())
            throw UsageError("spec file line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        out.entries[key] = {lineno, value};
    }
    return out;
}

/// Comma-separated numbers; elements may be ranges `a..b` (step 1) or
/// `a..b:step`.
std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto dots = item.find("..");
        if (dots == std::string::npos) {
            out.push_back(std::stod(item));
            continue;
        }
        const double lo = std::stod(item.substr(0, dots));
        std::string rest = item.substr(dots + 2);
        double step = 1;
        const auto colon = rest.find(':');
        if (colon != std::string::npos) {
            step = std::stod(rest.substr(colon + 1));
            rest.erase(colon);
        }
        const double hi = std::stod(rest);
        if (step <= 0) throw UsageError("range step must be positive");
        for (double v = lo; v <= hi + 1e-9; v += step) out.push_back(v);
    }
    if (out.empty()) throw UsageError("empty list in spec file");
    return out;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::string cleaned;
        for (char c : item)
            if (!std::isspace(static_cast<unsigned char>(c)))
                cleaned.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
        if (!cleaned.empty()) out.push_back(cleaned);
    }
    return out;
}

}  // namespace

RateSweepSpec parse_rate_spec(std::istream& in) {
    const SpecFile file =
        read_spec(in, {"config", "snr_db", "trials", "policies", "seed", "tol", "max_iter"});
    RateSweepSpec spec{AntennaConfig::parse(file.require("config")), {}, 200, {}, 1, {}};
    spec.snr_grid_db = parse_grid(file.require("snr_db"));
    spec.trials = std::stoi(file.take("trials", "200"));
    spec.seed = std::stoull(file.take("seed", "1"));
    if (file.has("tol")) spec.solver.tolerance = std::stod(file.take("tol"));
    if (file.has("max_iter")) spec.solver.max_iterations = std::stoi(file.take("max_iter"));
    spec.policies.clear();
    for (const std::string& name : split_list(file.take("policies", "complete,incomplete"))) {
        if (name == "COMPLETE")
            spec.policies.push_back(RatePolicy::Complete);
        else if (name == "INCOMPLETE")
            spec.policies.push_back(RatePolicy::Incomplete);
        else
            throw UsageError("unknown rate policy '" + name + "'");
    }
    return spec;
}

FeedbackSweepSpec parse_feedback_spec(std::istream& in) {
    const SpecFile file = read_spec(in, {"users", "totals", "trials", "policies", "seed"});
    FeedbackSweepSpec spec;
    spec.users = std::stoi(file.require("users"));
    spec.total_antennas_grid.clear();
    for (double v : parse_grid(file.require("totals")))
        spec.total_antennas_grid.push_back(static_cast<int>(std::lround(v)));
    spec.trials = std::stoi(file.take("trials", "1000"));
    spec.seed = std::stoull(file.take("seed", "1"));
    spec.policies.clear();
    for (const std::string& name : split_list(file.take("policies", "complete,heuristic,exhaustive"))) {
        if (name == "COMPLETE")
            spec.policies.push_back(FeedbackPolicy::Complete);
        else if (name == "HEURISTIC")
            spec.policies.push_back(FeedbackPolicy::Heuristic);
        else if (name == "EXHAUSTIVE")
            spec.policies.push_back(FeedbackPolicy::Exhaustive);
        else
            throw UsageError("unknown feedback policy '" + name + "'");
    }
    return spec;
}

}  // namespace ia
