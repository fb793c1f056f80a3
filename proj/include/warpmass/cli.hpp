#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "warpmass/model_geometry.hpp"

namespace warpmass::cli {

using json = nlohmann::json;

// Exit codes of every command.
constexpr int kSuccess = 0;
constexpr int kInputError = 1;
constexpr int kCheckFailed = 2;

// Every recognised key with its default value.
json default_config();

// Defaults merged with the user tree, then with `key.path=value` overrides (values parsed as JSON when
// possible, otherwise taken as strings). Unknown keys are rejected with ConfigError.
json resolve_config(const json& user, const std::vector<std::string>& overrides = {});
json load_config_file(const std::string& path);

ModelSpace model_from_config(const json& config);

std::string sha256_hex(const std::string& data);
// SHA-256 of the compact serialization of the resolved config.
std::string config_hash(const json& config);

// printf-style %.17g.
std::string format_double(double v);

const std::vector<std::string>& command_names();

// Runs one command on a resolved config, writing reports into output.directory.
// Returns the exit code; `log` receives a one-line summary.
int run_command(const std::string& command, const json& config, std::ostream& log);

}  // namespace warpmass::cli
