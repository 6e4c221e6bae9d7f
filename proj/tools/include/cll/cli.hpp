#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace cll::cli {

enum ExitCode : int {
  kSuccess = 0,
  kValidation = 1,
  kVerificationFailed = 2,
  kDiverged = 3,
};

/// Parses `args` (without the program name) into a fully resolved run
/// configuration. `replay` resolves to the configuration stored in the
/// manifest. Throws CLI::ParseError on usage errors and cll::Error on
/// invalid values.
nlohmann::json resolve(const std::vector<std::string>& args);

/// Runs a resolved configuration, writes its artifacts plus manifest.json
/// into config["out"], and returns the exit code.
int execute(const nlohmann::json& config, std::ostream& out, std::ostream& err);

/// resolve + execute with exit-code mapping for every error kind.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "3", "K-1", "1,2,4", "1..4" (inclusive) or a mix, resolved against K.
std::vector<int> parse_count_list(const std::string& text, int num_classes);

}  // namespace cll::cli
