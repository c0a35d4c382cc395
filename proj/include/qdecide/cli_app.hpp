// Command-line frontend: costs, parameter sweeps, strategy comparison,
// optimality verification, posterior-tree listings and Monte Carlo runs,
// emitted as versioned CSV or JSON.

#pragma once

#include <iosfwd>
#include <string>

namespace qdecide::cli {

// Exit codes: 0 success/verified, 1 verification failure, 2 usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// 12 significant digits; lowercase scientific notation outside
// |x| in [1e-4, 1e6). Fixed so golden files stay stable.
std::string format_number(double x);

inline constexpr const char* kCsvVersionLine = "# qdecide-csv v1";
inline constexpr const char* kCsvHeader = "xi,delta_rad,n,strategy,method,cost";
inline constexpr const char* kCsvHeaderWithExtra = "xi,delta_rad,n,strategy,method,cost,extra";

}  // namespace qdecide::cli
