#ifndef BLINDID_TOOLS_CLI_HPP
#define BLINDID_TOOLS_CLI_HPP

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace blindid::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitRuntime = 3;

/// Flat key=value configuration. Keys are checked against the known set.
using Settings = std::map<std::string, std::string>;

/// Every accepted key with its default ("" means unset).
const Settings& default_settings();

/// Parses "key=value" lines; '#' starts a comment line.
Settings parse_config(std::istream& in);

/// Named parameter sets: "fig3", "pat".
Settings preset(const std::string& name);

/// Entry point behind the blindid executable. CSV goes to --out or `out`,
/// summaries and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace blindid::cli

#endif  // BLINDID_TOOLS_CLI_HPP
