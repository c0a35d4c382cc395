#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "qdecide/cli_app.hpp"
#include "qdecide/sequential.hpp"
#include "qdecide/states.hpp"

using qdecide::cli::format_number;
using qdecide::cli::run_cli;

namespace {

constexpr double kPi = std::numbers::pi;

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult run(std::vector<std::string> args) {
    args.insert(args.begin(), "qdecide");
    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return CliResult{code, out.str(), err.str()};
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::stringstream stream(text);
    std::string line;
    while (std::getline(stream, line)) {
        lines.push_back(line);
    }
    return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream stream(line);
    std::string field;
    while (std::getline(stream, field, ',')) {
        fields.push_back(field);
    }
    return fields;
}

// data rows of a v1 CSV payload (skips comments and the header)
std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    bool seen_header = false;
    for (const auto& line : lines_of(text)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        if (!seen_header) {
            seen_header = true;
            continue;
        }
        rows.push_back(split_csv(line));
    }
    return rows;
}

}  // namespace

TEST_CASE("number formatting is pinned") {
    CHECK(format_number(0.1464466094067262) == "0.146446609407");
    CHECK(format_number(0.0) == "0.00000000000");
    CHECK(format_number(1.0) == "1.00000000000");
    CHECK(format_number(123.456) == "123.456000000");
    CHECK(format_number(0.000977518041521519) == "0.000977518041522");
    CHECK(format_number(-2.5e7) == "-2.50000000000e+07");
    CHECK(format_number(3.0e-5) == "3.00000000000e-05");
    CHECK_THROWS(format_number(std::nan("")));
}

TEST_CASE("cost emits the versioned csv schema") {
    const auto r = run({"cost", "--xi", "0.5", "--delta", "0.7853981633974483", "--n", "1"});
    REQUIRE(r.code == 0);
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] == qdecide::cli::kCsvVersionLine);
    CHECK(lines[1] == qdecide::cli::kCsvHeader);
    const auto fields = split_csv(lines[2]);
    REQUIRE(fields.size() == 6);
    CHECK(fields[3] == "combined");
    CHECK(fields[4] == "closed");
    CHECK(std::stod(fields[5]) == doctest::Approx(0.1464466094067262).epsilon(1e-12));
}

TEST_CASE("cost handles the trivial endpoints") {
    const auto zero_prior = run({"cost", "--xi", "0", "--delta", "0.5", "--n", "5"});
    REQUIRE(zero_prior.code == 0);
    CHECK(std::stod(csv_rows(zero_prior.out)[0][5]) == 0.0);

    const auto orthogonal =
        run({"cost", "--xi", "0.5", "--delta", "1.5707963267948966", "--n", "1"});
    REQUIRE(orthogonal.code == 0);
    CHECK(std::stod(csv_rows(orthogonal.out)[0][5]) == 0.0);
}

TEST_CASE("cost with --method all prints the three agreeing routes") {
    const auto r = run({"cost", "--xi", "0.5", "--delta", "0.7853981633974483", "--n", "3",
                        "--method", "all"});
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0][4] == "closed");
    CHECK(rows[1][4] == "eigen");
    CHECK(rows[2][4] == "tree");
    const double closed = std::stod(rows[0][5]);
    CHECK(closed == doctest::Approx(0.032292826653257334).epsilon(1e-12));
    CHECK(std::stod(rows[1][5]) == doctest::Approx(closed).epsilon(1e-10));
    CHECK(std::stod(rows[2][5]) == doctest::Approx(closed).epsilon(1e-10));
}

TEST_CASE("usage errors exit with code 2") {
    CHECK(run({"cost", "--xi", "1.5", "--delta", "0.5", "--n", "1"}).code == 2);
    CHECK(run({"cost", "--xi", "0.5", "--delta", "2.0", "--n", "1"}).code == 2);
    CHECK(run({"cost", "--xi", "0.5", "--n", "1"}).code == 2);  // no angles
    CHECK(run({"cost", "--xi", "0.5", "--delta", "0.4", "--n", "0"}).code == 2);
    CHECK(run({"cost", "--xi", "0.5", "--delta", "0.4", "--n", "25", "--method", "tree"}).code ==
          2);
    CHECK(run({"nonsense"}).code == 2);
    CHECK(run({}).code == 2);
    const auto bad = run({"cost", "--xi", "oops", "--delta", "0.4", "--n", "1"});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("error") != std::string::npos);
}

TEST_CASE("help and version succeed") {
    CHECK(run({"--help"}).code == 0);
    const auto sub = run({"cost", "--help"});
    CHECK(sub.code == 0);
    CHECK(sub.out.find("--xi") != std::string::npos);
    const auto version = run({"--version"});
    CHECK(version.code == 0);
    CHECK(version.out.find("qdecide") != std::string::npos);
}

TEST_CASE("degrees convert at parse time") {
    const auto deg = run({"cost", "--xi", "0.5", "--delta", "45", "--degrees", "--n", "2"});
    const auto rad = run({"cost", "--xi", "0.5", "--delta", "0.7853981633974483", "--n", "2"});
    REQUIRE(deg.code == 0);
    REQUIRE(rad.code == 0);
    CHECK(std::stod(csv_rows(deg.out)[0][5]) ==
          doctest::Approx(std::stod(csv_rows(rad.out)[0][5])).epsilon(1e-12));
}

TEST_CASE("theta pair input matches the delta form") {
    const auto pair =
        run({"cost", "--xi", "0.4", "--theta1", "1.0", "--theta2", "1.8", "--n", "2"});
    const auto direct = run({"cost", "--xi", "0.4", "--delta", "0.4", "--n", "2"});
    REQUIRE(pair.code == 0);
    CHECK(std::stod(csv_rows(pair.out)[0][5]) ==
          doctest::Approx(std::stod(csv_rows(direct.out)[0][5])).epsilon(1e-12));
    // --delta excludes the pair flags
    CHECK(run({"cost", "--xi", "0.4", "--delta", "0.4", "--theta1", "1.0", "--theta2", "1.8",
               "--n", "2"})
              .code == 2);
}

TEST_CASE("sweep rows cover the cartesian product in order") {
    const auto r = run({"sweep", "--xi-from", "0.3", "--xi-to", "0.5", "--xi-steps", "3",
                        "--delta-from", "0.4", "--delta-to", "0.8", "--delta-steps", "2",
                        "--n-from", "1", "--n-to", "2"});
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 3 * 2 * 2);
    // lexicographic (xi, delta, n)
    CHECK(std::stod(rows[0][0]) == doctest::Approx(0.3));
    CHECK(std::stod(rows[0][1]) == doctest::Approx(0.4));
    CHECK(rows[0][2] == "1");
    CHECK(rows[1][2] == "2");
    CHECK(std::stod(rows[2][1]) == doctest::Approx(0.8));
    CHECK(std::stod(rows[4][0]) == doctest::Approx(0.4));
}

TEST_CASE("sweep cost is non-increasing in n") {
    const auto r = run({"sweep", "--xi-from", "0.5", "--delta-from", "0.7853981633974483",
                        "--n-from", "1", "--n-to", "10"});
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 10);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(std::stod(rows[i][5]) <= std::stod(rows[i - 1][5]));
    }
}

TEST_CASE("a one-point sweep reproduces cmd cost byte for byte") {
    const auto sweep = run({"sweep", "--xi-from", "0.3", "--delta-from", "0.5", "--n-from", "2"});
    const auto cost = run({"cost", "--xi", "0.3", "--delta", "0.5", "--n", "2"});
    CHECK(sweep.code == 0);
    CHECK(sweep.out == cost.out);
}

TEST_CASE("empty sweep ranges are usage errors") {
    CHECK(run({"sweep", "--xi-from", "0.5", "--xi-steps", "0", "--delta-from", "0.4", "--n-from",
               "1"})
              .code == 2);
    CHECK(run({"sweep", "--xi-from", "0.5", "--delta-from", "0.4", "--n-from", "5", "--n-to",
               "3"})
              .code == 2);
}

TEST_CASE("compare lists every composition with its gap") {
    const auto r = run({"compare", "--xi", "0.5", "--delta", "0.7853981633974483", "--n", "3"});
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 4);  // compositions of 3
    double combined = -1.0;
    double singles = -1.0;
    for (const auto& row : rows) {
        REQUIRE(row.size() == 7);
        CHECK(row[4] == "partition");
        const double cost = std::stod(row[5]);
        const std::string& extra = row[6];
        REQUIRE(extra.rfind("gap=", 0) == 0);
        CHECK(std::stod(extra.substr(4)) >= -1e-9);
        if (row[3] == "combined") {
            combined = cost;
        }
        if (row[3] == "sequential") {
            singles = cost;
        }
    }
    REQUIRE(combined >= 0.0);
    REQUIRE(singles >= 0.0);
    CHECK(std::abs(combined - singles) <= 1e-10);

    const auto single = run({"compare", "--xi", "0.4", "--delta", "0.5", "--n", "1"});
    const auto single_rows = csv_rows(single.out);
    REQUIRE(single_rows.size() == 1);
    CHECK(std::abs(std::stod(single_rows[0][6].substr(4))) <= 1e-12);

    CHECK(run({"compare", "--xi", "0.5", "--delta", "0.5", "--n", "9"}).code == 2);
    const auto listed = run({"compare", "--xi", "0.5", "--delta", "0.5", "--n", "4",
                             "--partitions", "2+2;1+3"});
    CHECK(csv_rows(listed.out).size() == 2);
    CHECK(run({"compare", "--xi", "0.5", "--delta", "0.5", "--n", "4", "--partitions", "2+1"})
              .code == 2);
}

TEST_CASE("verify reports the optimality verdict through the exit code") {
    const auto good = run({"verify", "--xi", "0.5", "--delta", "0.7853981633974483", "--n", "2"});
    CHECK(good.code == 0);
    CHECK(good.out.find("verdict=optimal") != std::string::npos);

    const auto bad = run({"verify", "--xi", "0.5", "--delta", "0.7853981633974483", "--n", "2",
                          "--pom", "always-first"});
    CHECK(bad.code == 1);
    CHECK(bad.out.find("verdict=not-optimal") != std::string::npos);
    // a negative excess is reported
    bool negative_excess = false;
    for (const auto& line : lines_of(bad.out)) {
        if (line.rfind("min_excess_", 0) == 0) {
            negative_excess = negative_excess || std::stod(line.substr(line.find('=') + 1)) < 0.0;
        }
    }
    CHECK(negative_excess);

    const auto identical = run({"verify", "--xi", "0.5", "--delta", "0", "--n", "2"});
    CHECK(identical.code == 0);
}

TEST_CASE("simulate is byte-deterministic and statistically calibrated") {
    const std::vector<std::string> args{"simulate", "--xi",    "0.5",  "--delta", "0.7853981633974483",
                                        "--n",      "3",       "--trials", "20000", "--seed",
                                        "42",       "--partition", "2+1"};
    const auto a = run(args);
    const auto b = run(args);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);

    const auto parsed = nlohmann::json::parse(a.out);
    CHECK(parsed["method"] == "montecarlo");
    CHECK(parsed["strategy"] == "partition:2+1");
    CHECK(parsed["trials"] == 20000);
    CHECK(std::abs(parsed["z_score"].get<double>()) <= 4.0);

    const auto orthogonal = run({"simulate", "--xi", "0.3", "--delta", "1.5707963267948966",
                                 "--n", "1", "--trials", "5000", "--seed", "7"});
    const auto json = nlohmann::json::parse(orthogonal.out);
    CHECK(json["error_rate"].get<double>() == 0.0);

    const auto csv = run({"simulate", "--xi", "0.5", "--delta", "0.5", "--n", "2", "--trials",
                          "1000", "--seed", "3", "--format", "csv"});
    REQUIRE(csv.code == 0);
    const auto rows = csv_rows(csv.out);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0][4] == "montecarlo");
    CHECK(rows[0][6].find("seed=3") != std::string::npos);
}

TEST_CASE("tree output lists leaves and the recombination summary") {
    const auto r = run({"tree", "--xi", "0.5", "--delta", "0.7853981633974483", "--n", "2"});
    REQUIRE(r.code == 0);
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() >= 2);
    CHECK(lines[0] == qdecide::cli::kCsvVersionLine);
    CHECK(lines[1] == "depth,outcomes,weight,posterior,phi_sequence_hash");
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 4);
    double weight_sum = 0.0;
    for (const auto& row : rows) {
        CHECK(row[0] == "2");
        CHECK(row[1].size() == 2);
        weight_sum += std::stod(row[2]);
    }
    CHECK(weight_sum == doctest::Approx(1.0).epsilon(1e-10));

    std::string cost_line;
    std::string distinct_line;
    for (const auto& line : lines) {
        if (line.rfind("# cost=", 0) == 0) {
            cost_line = line;
        }
        if (line.rfind("# distinct_posteriors_per_depth=", 0) == 0) {
            distinct_line = line;
        }
    }
    REQUIRE(!cost_line.empty());
    CHECK(std::stod(cost_line.substr(7)) ==
          doctest::Approx(qdecide::sequential::sequential_cost_closed(
                              0.5, qdecide::states::HalfAngle(kPi / 4), 2))
              .epsilon(1e-10));
    CHECK(distinct_line == "# distinct_posteriors_per_depth=2;2");

    CHECK(run({"tree", "--xi", "0.5", "--delta", "0.5", "--n", "21"}).code == 2);

    const auto json_run =
        run({"tree", "--xi", "0.5", "--delta", "0.5", "--n", "3", "--format", "json"});
    REQUIRE(json_run.code == 0);
    const auto parsed = nlohmann::json::parse(json_run.out);
    CHECK(parsed["branches"].size() == 8);
    CHECK(parsed["distinct_posteriors_per_depth"] == nlohmann::json({2, 2, 2}));
}

TEST_CASE("json format mirrors the csv records") {
    const auto r = run({"cost", "--xi", "0.5", "--delta", "0.7853981633974483", "--n", "3",
                        "--format", "json"});
    REQUIRE(r.code == 0);
    const auto parsed = nlohmann::json::parse(r.out);
    REQUIRE(parsed.is_array());
    REQUIRE(parsed.size() == 1);
    CHECK(parsed[0]["strategy"] == "combined");
    CHECK(parsed[0]["method"] == "closed");
    CHECK(parsed[0]["cost"].get<double>() ==
          doctest::Approx(0.032292826653257334).epsilon(1e-12));
}

TEST_CASE("config files mirror the flags and flags win") {
    const std::string path = "qdecide_test_config.ini";
    {
        std::ofstream file(path);
        file << "[cost]\n"
             << "xi=0.5\n"
             << "delta=0.7853981633974483\n"
             << "n=1\n";
    }
    const auto from_config = run({"--config", path, "cost"});
    REQUIRE(from_config.code == 0);
    CHECK(std::stod(csv_rows(from_config.out)[0][5]) ==
          doctest::Approx(0.1464466094067262).epsilon(1e-12));

    const auto overridden = run({"--config", path, "cost", "--xi", "0"});
    REQUIRE(overridden.code == 0);
    CHECK(std::stod(csv_rows(overridden.out)[0][5]) == 0.0);

    std::remove(path.c_str());
}
