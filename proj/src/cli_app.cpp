#include "qdecide/cli_app.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "qdecide/decision.hpp"
#include "qdecide/montecarlo.hpp"
#include "qdecide/sequential.hpp"
#include "qdecide/states.hpp"

namespace qdecide::cli {

using states::HalfAngle;
using states::PolarisationAngle;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Output records
// ---------------------------------------------------------------------------

struct OutputRecord {
    double xi = 0.0;
    double delta_rad = 0.0;
    int n = 1;
    std::string strategy;
    std::string method;
    double cost = 0.0;
    std::vector<std::pair<std::string, std::string>> extra;
};

std::string join_extra(const OutputRecord& r) {
    std::ostringstream out;
    for (std::size_t i = 0; i < r.extra.size(); ++i) {
        if (i > 0) {
            out << ';';
        }
        out << r.extra[i].first << '=' << r.extra[i].second;
    }
    return out.str();
}

void write_records_csv(std::ostream& out, const std::vector<OutputRecord>& records,
                       bool with_extra) {
    out << kCsvVersionLine << '\n'
        << (with_extra ? kCsvHeaderWithExtra : kCsvHeader) << '\n';
    for (const OutputRecord& r : records) {
        out << format_number(r.xi) << ',' << format_number(r.delta_rad) << ',' << r.n << ','
            << r.strategy << ',' << r.method << ',' << format_number(r.cost);
        if (with_extra) {
            out << ',' << join_extra(r);
        }
        out << '\n';
    }
}

void write_records_json(std::ostream& out, const std::vector<OutputRecord>& records) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const OutputRecord& r : records) {
        nlohmann::ordered_json obj;
        obj["xi"] = r.xi;
        obj["delta_rad"] = r.delta_rad;
        obj["n"] = r.n;
        obj["strategy"] = r.strategy;
        obj["method"] = r.method;
        obj["cost"] = r.cost;
        nlohmann::ordered_json extra = nlohmann::ordered_json::object();
        for (const auto& [key, value] : r.extra) {
            extra[key] = value;
        }
        obj["extra"] = std::move(extra);
        arr.push_back(std::move(obj));
    }
    out << arr.dump(2) << '\n';
}

void write_records(std::ostream& out, const std::vector<OutputRecord>& records,
                   const std::string& format, bool with_extra = false) {
    if (format == "json") {
        write_records_json(out, records);
    } else {
        write_records_csv(out, records, with_extra);
    }
}

// ---------------------------------------------------------------------------
// Shared flag handling
// ---------------------------------------------------------------------------

constexpr double kUnsetAngle = std::numeric_limits<double>::quiet_NaN();

struct ProblemFlags {
    double xi = 0.5;
    double delta = kUnsetAngle;
    double theta1 = kUnsetAngle;
    double theta2 = kUnsetAngle;
    int n = 1;
    bool degrees = false;
};

void register_problem_flags(CLI::App* sub, ProblemFlags& f, bool with_n = true) {
    sub->add_option("--xi", f.xi, "Prior probability of hypothesis 1")
        ->required()
        ->check(CLI::Range(0.0, 1.0));
    auto* delta = sub->add_option("--delta", f.delta,
                                  "Half separation angle, |theta2-theta1|/2, in [0, pi/2]");
    auto* theta1 = sub->add_option("--theta1", f.theta1, "Polarisation angle of hypothesis 1");
    auto* theta2 = sub->add_option("--theta2", f.theta2, "Polarisation angle of hypothesis 2");
    theta1->needs(theta2);
    theta2->needs(theta1);
    delta->excludes(theta1);
    delta->excludes(theta2);
    sub->add_flag("--degrees", f.degrees, "Interpret angle flags as degrees");
    if (with_n) {
        sub->add_option("--n", f.n, "Number of particles in the ensemble")
            ->required()
            ->check(CLI::PositiveNumber);
    }
}

struct ResolvedAngles {
    PolarisationAngle theta1;
    PolarisationAngle theta2;
    HalfAngle delta;
};

ResolvedAngles resolve_angles(const ProblemFlags& f) {
    const double scale = f.degrees ? std::numbers::pi / 180.0 : 1.0;
    try {
        if (!std::isnan(f.delta)) {
            const double d = f.delta * scale;
            return ResolvedAngles{PolarisationAngle(d), PolarisationAngle(-d), HalfAngle(d)};
        }
        if (!std::isnan(f.theta1) && !std::isnan(f.theta2)) {
            const PolarisationAngle t1(f.theta1 * scale);
            const PolarisationAngle t2(f.theta2 * scale);
            return ResolvedAngles{t1, t2, HalfAngle::between(t1, t2)};
        }
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    throw UsageError("provide either --delta or both --theta1 and --theta2");
}

// ---------------------------------------------------------------------------
// Worker fan-out (QDECIDE_THREADS caps the pool; default is sequential)
// ---------------------------------------------------------------------------

unsigned worker_count(std::size_t cells) {
    unsigned requested = 1;
    if (const char* env = std::getenv("QDECIDE_THREADS")) {
        const long parsed = std::strtol(env, nullptr, 10);
        if (parsed > 0) {
            requested = static_cast<unsigned>(parsed);
        }
    }
    return static_cast<unsigned>(
        std::min<std::size_t>(requested, std::max<std::size_t>(cells, 1)));
}

template <typename Fn>
void parallel_for(std::size_t count, Fn&& fill_slot) {
    const unsigned workers = worker_count(count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            fill_slot(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) {
                    return;
                }
                try {
                    fill_slot(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                    return;
                }
            }
        });
    }
    for (std::thread& t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

// ---------------------------------------------------------------------------
// Partitions and hashes
// ---------------------------------------------------------------------------

sequential::Partition parse_partition(const std::string& text, int n_particles) {
    if (text == "sequential") {
        return sequential::Partition::singles(n_particles);
    }
    if (text == "combined") {
        return sequential::Partition::combined(n_particles);
    }
    std::vector<int> groups;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, '+')) {
        try {
            std::size_t used = 0;
            const int g = std::stoi(item, &used);
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
            groups.push_back(g);
        } catch (const std::exception&) {
            throw UsageError("cannot parse partition group '" + item + "' in '" + text + "'");
        }
    }
    try {
        sequential::Partition partition(std::move(groups));
        if (partition.total_particles() != n_particles) {
            std::ostringstream msg;
            msg << "partition '" << text << "' sums to " << partition.total_particles()
                << " but --n is " << n_particles;
            throw UsageError(msg.str());
        }
        return partition;
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

std::string strategy_tag(const sequential::Partition& partition) {
    if (partition.groups().size() == 1) {
        return "combined";
    }
    bool all_ones = true;
    for (int g : partition.groups()) {
        all_ones = all_ones && g == 1;
    }
    if (all_ones) {
        return "sequential";
    }
    return "partition:" + partition.to_string();
}

void compositions_of(int remaining, std::vector<int>& current,
                     std::vector<sequential::Partition>& out) {
    if (remaining == 0) {
        out.emplace_back(current);
        return;
    }
    for (int g = 1; g <= remaining; ++g) {
        current.push_back(g);
        compositions_of(remaining - g, current, out);
        current.pop_back();
    }
}

std::string fnv1a_hex(const std::vector<double>& values) {
    std::uint64_t hash = 14695981039346656037ULL;
    for (double v : values) {
        unsigned char bytes[sizeof(double)];
        std::memcpy(bytes, &v, sizeof(double));
        for (unsigned char b : bytes) {
            hash ^= b;
            hash *= 1099511628211ULL;
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

std::string outcomes_string(const std::vector<std::int8_t>& outcomes) {
    std::string s;
    s.reserve(outcomes.size());
    for (std::int8_t o : outcomes) {
        s.push_back(o > 0 ? '+' : '-');
    }
    return s;
}

// ---------------------------------------------------------------------------
// cost / sweep
// ---------------------------------------------------------------------------

std::vector<OutputRecord> cost_records(double xi, const ResolvedAngles& angles, int n,
                                       const std::string& method) {
    const bool all = method == "all";
    std::vector<OutputRecord> records;
    if (all || method == "closed") {
        records.push_back(OutputRecord{xi, angles.delta.radians(), n, "combined", "closed",
                                       decision::combined_cost_closed(xi, angles.delta, n),
                                       {}});
    }
    if (all || method == "eigen") {
        const decision::BinaryProblem problem{angles.theta1, angles.theta2, xi,
                                              decision::CostMatrix::zero_one(), n};
        records.push_back(OutputRecord{xi, angles.delta.radians(), n, "combined", "eigen",
                                       decision::binary_bayes_cost_eigen(problem),
                                       {}});
    }
    if (method == "tree" || (all && n <= sequential::TreeOptions{}.enumeration_cap)) {
        sequential::TreeOptions options;
        options.collect_leaves = false;
        if (n > options.enumeration_cap) {
            std::ostringstream msg;
            msg << "--method tree requires --n <= " << options.enumeration_cap;
            throw UsageError(msg.str());
        }
        const auto tree = sequential::enumerate_tree(xi, angles.theta1, angles.theta2, n, options);
        records.push_back(OutputRecord{xi, angles.delta.radians(), n, "sequential", "tree",
                                       tree.bayes_cost,
                                       {}});
    }
    return records;
}

int run_cost(const ProblemFlags& flags, const std::string& method, const std::string& format,
             std::ostream& out) {
    const ResolvedAngles angles = resolve_angles(flags);
    write_records(out, cost_records(flags.xi, angles, flags.n, method), format);
    return 0;
}

struct SweepFlags {
    double xi_from = 0.0;
    double xi_to = std::numeric_limits<double>::quiet_NaN();
    int xi_steps = 1;
    double delta_from = 0.0;
    double delta_to = std::numeric_limits<double>::quiet_NaN();
    int delta_steps = 1;
    int n_from = 1;
    int n_to = 0;  // 0 means "same as n_from"
    bool degrees = false;
};

std::vector<double> linear_range(double from, double to, int steps, const char* name) {
    if (steps < 1) {
        throw UsageError(std::string(name) + ": step count must be >= 1 (empty range)");
    }
    if (std::isnan(to)) {
        to = from;
    }
    if (to < from) {
        throw UsageError(std::string(name) + ": range end is below range start");
    }
    if (steps == 1 && to != from) {
        throw UsageError(std::string(name) + ": a single step needs matching endpoints");
    }
    std::vector<double> values(steps);
    for (int i = 0; i < steps; ++i) {
        values[i] = steps == 1 ? from : from + (to - from) * i / (steps - 1);
    }
    return values;
}

int run_sweep(const SweepFlags& flags, const std::string& method, const std::string& format,
              std::ostream& out) {
    const double scale = flags.degrees ? std::numbers::pi / 180.0 : 1.0;
    const std::vector<double> xis = linear_range(flags.xi_from, flags.xi_to, flags.xi_steps, "xi");
    const std::vector<double> deltas =
        linear_range(flags.delta_from * scale,
                     std::isnan(flags.delta_to) ? flags.delta_from * scale : flags.delta_to * scale,
                     flags.delta_steps, "delta");
    const int n_to = flags.n_to == 0 ? flags.n_from : flags.n_to;
    if (flags.n_from < 1 || n_to < flags.n_from) {
        throw UsageError("n: empty particle range");
    }
    for (double xi : xis) {
        if (xi < 0.0 || xi > 1.0) {
            throw UsageError("xi range leaves [0, 1]");
        }
    }
    std::vector<ResolvedAngles> angle_cells;
    angle_cells.reserve(deltas.size());
    for (double d : deltas) {
        try {
            angle_cells.push_back(
                ResolvedAngles{PolarisationAngle(d), PolarisationAngle(-d), HalfAngle(d)});
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }
    const std::size_t n_count = static_cast<std::size_t>(n_to - flags.n_from + 1);
    const std::size_t cells = xis.size() * deltas.size() * n_count;

    // Cells are evaluated independently (possibly across workers) and always
    // emitted in lexicographic (xi, delta, n) order.
    std::vector<std::vector<OutputRecord>> per_cell(cells);
    parallel_for(cells, [&](std::size_t i) {
        const std::size_t n_index = i % n_count;
        const std::size_t d_index = (i / n_count) % deltas.size();
        const std::size_t x_index = i / (n_count * deltas.size());
        per_cell[i] = cost_records(xis[x_index], angle_cells[d_index],
                                   flags.n_from + static_cast<int>(n_index), method);
    });

    std::vector<OutputRecord> records;
    records.reserve(cells);
    for (auto& cell : per_cell) {
        for (auto& r : cell) {
            records.push_back(std::move(r));
        }
    }
    write_records(out, records, format);
    return 0;
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

int run_compare(const ProblemFlags& flags, const std::string& partitions_text,
                const std::string& format, std::ostream& out) {
    const ResolvedAngles angles = resolve_angles(flags);
    std::vector<sequential::Partition> partitions;
    if (partitions_text == "all") {
        constexpr int kAllCap = 8;
        if (flags.n > kAllCap) {
            std::ostringstream msg;
            msg << "--partitions all enumerates every composition and requires --n <= " << kAllCap;
            throw UsageError(msg.str());
        }
        std::vector<int> current;
        compositions_of(flags.n, current, partitions);
    } else {
        std::stringstream stream(partitions_text);
        std::string item;
        while (std::getline(stream, item, ';')) {
            if (!item.empty()) {
                partitions.push_back(parse_partition(item, flags.n));
            }
        }
        if (partitions.empty()) {
            throw UsageError("--partitions lists no partitions");
        }
    }

    const double combined = decision::combined_cost_closed(flags.xi, angles.delta, flags.n);
    std::vector<OutputRecord> records(partitions.size());
    parallel_for(partitions.size(), [&](std::size_t i) {
        const double cost =
            sequential::partition_cost(flags.xi, angles.theta1, angles.theta2, partitions[i]);
        records[i] = OutputRecord{flags.xi,
                                  angles.delta.radians(),
                                  flags.n,
                                  strategy_tag(partitions[i]),
                                  "partition",
                                  cost,
                                  {{"gap", format_number(cost - combined)}}};
    });
    write_records(out, records, format, /*with_extra=*/true);
    return 0;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

int run_verify(const ProblemFlags& flags, const std::string& pom_choice, double tol,
               std::ostream& out) {
    if (!(flags.xi > 0.0 && flags.xi < 1.0)) {
        throw UsageError("verify requires a non-degenerate prior (0 < xi < 1)");
    }
    const ResolvedAngles angles = resolve_angles(flags);
    const auto rho1 = states::ensemble_density(angles.theta1, flags.n);
    const auto rho2 = states::ensemble_density(angles.theta2, flags.n);
    const auto costs = decision::CostMatrix::zero_one();

    decision::Pom pom{{}};
    if (pom_choice == "optimal") {
        pom = decision::binary_optimal_pom(rho1, rho2, flags.xi, costs);
    } else if (pom_choice == "always-first") {
        pom = decision::Pom{{linalg::ComplexMatrix::identity(rho1.matrix.dim()),
                             linalg::ComplexMatrix(rho1.matrix.dim())}};
    } else {
        throw UsageError("--pom must be 'optimal' or 'always-first'");
    }

    const std::vector<decision::Hypothesis> hypotheses{
        decision::Hypothesis{"theta1", rho1, flags.xi},
        decision::Hypothesis{"theta2", rho2, 1.0 - flags.xi}};
    const auto risks = decision::risk_operators(hypotheses, costs);
    const auto report = decision::check_optimality(risks, pom, tol);
    const double cost = decision::expected_cost(hypotheses, costs, pom);
    const double upsilon_trace =
        linalg::trace(decision::upsilon_operator(risks, pom)).real();

    out << "upsilon_asymmetry=" << format_number(report.upsilon_asymmetry) << '\n';
    for (std::size_t j = 0; j < report.min_eigenvalue_excess.size(); ++j) {
        out << "min_excess_" << hypotheses[j].label << '='
            << format_number(report.min_eigenvalue_excess[j]) << '\n';
    }
    out << "expected_cost=" << format_number(cost) << '\n';
    out << "upsilon_trace=" << format_number(upsilon_trace) << '\n';
    out << "verdict=" << (report.is_optimal ? "optimal" : "not-optimal") << '\n';
    return report.is_optimal ? 0 : 1;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

int run_simulate(const ProblemFlags& flags, const std::string& partition_text,
                 std::uint64_t trials, std::uint64_t seed, const std::string& format,
                 std::ostream& out) {
    const ResolvedAngles angles = resolve_angles(flags);
    const sequential::Partition partition = parse_partition(partition_text, flags.n);
    if (trials < 1) {
        throw UsageError("--trials must be >= 1");
    }
    const decision::BinaryProblem problem{angles.theta1, angles.theta2, flags.xi,
                                          decision::CostMatrix::zero_one(), flags.n};
    const montecarlo::SimulationConfig config{problem, partition, trials, seed};
    const montecarlo::SimulationResult result = montecarlo::simulate(config);
    const double analytic =
        sequential::partition_cost(flags.xi, angles.theta1, angles.theta2, partition);
    const double diff = result.error_rate - analytic;
    double z = 0.0;
    if (diff != 0.0) {
        z = result.standard_error > 0.0 ? diff / result.standard_error
                                        : std::copysign(1e300, diff);
    }

    if (format == "json") {
        nlohmann::ordered_json obj;
        obj["xi"] = flags.xi;
        obj["delta_rad"] = angles.delta.radians();
        obj["n"] = flags.n;
        obj["strategy"] = strategy_tag(partition);
        obj["method"] = "montecarlo";
        obj["trials"] = result.trials;
        obj["seed"] = seed;
        obj["error_rate"] = result.error_rate;
        obj["standard_error"] = result.standard_error;
        obj["per_hypothesis_error"] = result.per_hypothesis_error;
        obj["analytic_cost"] = analytic;
        obj["z_score"] = z;
        out << obj.dump(2) << '\n';
    } else {
        OutputRecord record{flags.xi,
                            angles.delta.radians(),
                            flags.n,
                            strategy_tag(partition),
                            "montecarlo",
                            result.error_rate,
                            {{"stderr", format_number(result.standard_error)},
                             {"trials", std::to_string(result.trials)},
                             {"seed", std::to_string(seed)},
                             {"analytic", format_number(analytic)},
                             {"z", format_number(z)},
                             {"error_h1", format_number(result.per_hypothesis_error[0])},
                             {"error_h2", format_number(result.per_hypothesis_error[1])}}};
        write_records_csv(out, {record}, /*with_extra=*/true);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// tree
// ---------------------------------------------------------------------------

int run_tree(const ProblemFlags& flags, const std::string& format, std::ostream& out) {
    const ResolvedAngles angles = resolve_angles(flags);
    sequential::TreeOptions options;
    if (flags.n > options.enumeration_cap) {
        std::ostringstream msg;
        msg << "tree requires --n <= " << options.enumeration_cap;
        throw UsageError(msg.str());
    }
    const auto tree =
        sequential::enumerate_tree(flags.xi, angles.theta1, angles.theta2, flags.n, options);

    if (format == "json") {
        nlohmann::ordered_json obj;
        obj["xi"] = flags.xi;
        obj["delta_rad"] = angles.delta.radians();
        obj["n"] = flags.n;
        obj["cost"] = tree.bayes_cost;
        nlohmann::ordered_json counts = nlohmann::ordered_json::array();
        for (const auto& values : tree.distinct_posteriors) {
            counts.push_back(values.size());
        }
        obj["distinct_posteriors_per_depth"] = std::move(counts);
        nlohmann::ordered_json branches = nlohmann::ordered_json::array();
        for (const auto& leaf : tree.leaves) {
            nlohmann::ordered_json b;
            b["outcomes"] = outcomes_string(leaf.outcomes);
            b["weight"] = leaf.weight;
            b["posterior"] = leaf.posterior;
            b["phi_sequence_hash"] = fnv1a_hex(leaf.detector_angles);
            branches.push_back(std::move(b));
        }
        obj["branches"] = std::move(branches);
        out << obj.dump(2) << '\n';
        return 0;
    }

    out << kCsvVersionLine << '\n';
    out << "depth,outcomes,weight,posterior,phi_sequence_hash\n";
    for (const auto& leaf : tree.leaves) {
        out << leaf.outcomes.size() << ',' << outcomes_string(leaf.outcomes) << ','
            << format_number(leaf.weight) << ',' << format_number(leaf.posterior) << ','
            << fnv1a_hex(leaf.detector_angles) << '\n';
    }
    out << "# cost=" << format_number(tree.bayes_cost) << '\n';
    out << "# distinct_posteriors_per_depth=";
    for (std::size_t d = 0; d < tree.distinct_posteriors.size(); ++d) {
        if (d > 0) {
            out << ';';
        }
        out << tree.distinct_posteriors[d].size();
    }
    out << '\n';
    return 0;
}

}  // namespace

std::string format_number(double x) {
    if (!std::isfinite(x)) {
        throw std::invalid_argument("format_number: value must be finite");
    }
    if (x == 0.0) {
        x = 0.0;  // collapse negative zero
    }
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.11e", x);
    const char* epos = std::strchr(buf, 'e');
    const int exp10 = std::atoi(epos + 1);
    if (exp10 >= -4 && exp10 <= 5) {
        std::snprintf(buf, sizeof buf, "%.*f", 11 - exp10, x);
    }
    return buf;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bayesian binary decision costs for ensembles of polarised spin-1/2 particles"};
    app.set_version_flag("--version", "qdecide 1.0.0");
    app.set_config("--config", "",
                   "Key-value config file mirroring the flags (sections per subcommand); "
                   "command-line flags win on conflict");
    app.require_subcommand(1);

    ProblemFlags cost_flags;
    std::string cost_method = "closed";
    std::string cost_format = "csv";
    auto* cost_cmd = app.add_subcommand("cost", "Bayes cost of one problem instance");
    register_problem_flags(cost_cmd, cost_flags);
    cost_cmd->add_option("--method", cost_method, "closed|eigen|tree|all (tree needs n <= 20)")
        ->check(CLI::IsMember({"closed", "eigen", "tree", "all"}));
    cost_cmd->add_option("--format", cost_format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}));

    SweepFlags sweep_flags;
    std::string sweep_method = "closed";
    std::string sweep_format = "csv";
    auto* sweep_cmd = app.add_subcommand("sweep", "Cost over a (xi, delta, n) grid");
    sweep_cmd->add_option("--xi-from", sweep_flags.xi_from, "Start of the prior range")
        ->required();
    sweep_cmd->add_option("--xi-to", sweep_flags.xi_to, "End of the prior range (default: start)");
    sweep_cmd->add_option("--xi-steps", sweep_flags.xi_steps, "Points in the prior range");
    sweep_cmd->add_option("--delta-from", sweep_flags.delta_from, "Start of the half-angle range")
        ->required();
    sweep_cmd->add_option("--delta-to", sweep_flags.delta_to,
                          "End of the half-angle range (default: start)");
    sweep_cmd->add_option("--delta-steps", sweep_flags.delta_steps,
                          "Points in the half-angle range");
    sweep_cmd->add_option("--n-from", sweep_flags.n_from, "Smallest particle count")->required();
    sweep_cmd->add_option("--n-to", sweep_flags.n_to, "Largest particle count (default: smallest)");
    sweep_cmd->add_flag("--degrees", sweep_flags.degrees, "Interpret angle flags as degrees");
    sweep_cmd->add_option("--method", sweep_method, "closed|eigen|tree|all")
        ->check(CLI::IsMember({"closed", "eigen", "tree", "all"}));
    sweep_cmd->add_option("--format", sweep_format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}));

    ProblemFlags compare_flags;
    std::string compare_partitions = "all";
    std::string compare_format = "csv";
    auto* compare_cmd =
        app.add_subcommand("compare", "Partitioned strategies against the combined cost");
    register_problem_flags(compare_cmd, compare_flags);
    compare_cmd->add_option("--partitions", compare_partitions,
                            "'all' (n <= 8) or a ';'-separated list like '2+1;1+1+1'");
    compare_cmd->add_option("--format", compare_format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}));

    ProblemFlags verify_flags;
    std::string verify_pom = "optimal";
    double verify_tol = 1e-9;
    auto* verify_cmd =
        app.add_subcommand("verify", "Check the optimality conditions of a strategy");
    register_problem_flags(verify_cmd, verify_flags);
    verify_cmd->add_option("--pom", verify_pom, "optimal|always-first");
    verify_cmd->add_option("--tol", verify_tol, "Optimality tolerance");

    ProblemFlags simulate_flags;
    std::string simulate_partition = "sequential";
    std::uint64_t simulate_trials = 100000;
    std::uint64_t simulate_seed = 0;
    std::string simulate_format = "json";
    auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo run of one strategy");
    register_problem_flags(simulate_cmd, simulate_flags);
    simulate_cmd->add_option("--partition", simulate_partition,
                             "'sequential', 'combined', or groups like '2+1'");
    simulate_cmd->add_option("--trials", simulate_trials, "Number of trials");
    simulate_cmd->add_option("--seed", simulate_seed, "RNG seed");
    simulate_cmd->add_option("--format", simulate_format, "json|csv")
        ->check(CLI::IsMember({"csv", "json"}));

    ProblemFlags tree_flags;
    std::string tree_format = "csv";
    auto* tree_cmd = app.add_subcommand("tree", "Enumerate the posterior tree (n <= 20)");
    register_problem_flags(tree_cmd, tree_flags);
    tree_cmd->add_option("--format", tree_format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        const auto parsed = app.get_subcommands();
        out << (parsed.empty() ? app.help() : parsed.front()->help());
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << app.version() << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (cost_cmd->parsed()) {
            return run_cost(cost_flags, cost_method, cost_format, out);
        }
        if (sweep_cmd->parsed()) {
            return run_sweep(sweep_flags, sweep_method, sweep_format, out);
        }
        if (compare_cmd->parsed()) {
            return run_compare(compare_flags, compare_partitions, compare_format, out);
        }
        if (verify_cmd->parsed()) {
            return run_verify(verify_flags, verify_pom, verify_tol, out);
        }
        if (simulate_cmd->parsed()) {
            return run_simulate(simulate_flags, simulate_partition, simulate_trials,
                                simulate_seed, simulate_format, out);
        }
        if (tree_cmd->parsed()) {
            return run_tree(tree_flags, tree_format, out);
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    err << "error: no subcommand selected\n";
    return 2;
}

}  // namespace qdecide::cli
