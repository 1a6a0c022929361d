#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lvfb::cli {

// Exit codes
inline constexpr int kOk = 0;
inline constexpr int kSolverFailure = 1;  ///< NonConverged, other solver errors, failed frozen check
inline constexpr int kUndetermined = 2;
inline constexpr int kUsage = 64;
inline constexpr int kConfig = 66;

struct Invocation {
    std::string subcommand;
    std::optional<std::filesystem::path> config;
    std::filesystem::path out_dir = "lvfb_out";
    bool quiet = false;
    std::vector<std::string> scenarios;  ///< freeze / check
    std::filesystem::path store;
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    std::string note;
    std::vector<double> s_list;          ///< semiwave override
};

/// Parses argv. Returns the exit code instead of an invocation for
/// --help / --version (0) and usage errors (64).
struct ParseResult {
    std::optional<Invocation> invocation;
    int exit_code = kOk;
};

ParseResult parse_args(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

int execute(const Invocation& inv, std::ostream& out, std::ostream& err);

/// parse_args followed by execute.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

std::string version_text();

}  // namespace lvfb::cli
