#ifndef KAMTOOL_KAMTOOL_HPP
#define KAMTOOL_KAMTOOL_HPP

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace kamtool {

using json = nlohmann::json;

class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kModuleError = 1;
inline constexpr int kSchemaError = 2;
inline constexpr int kIoError = 3;

struct Artifacts {
    json document;                  // {"config": normalized config, "result": ...}
    std::vector<std::string> lines; // JSON-lines stream (kam)
    std::vector<std::pair<std::string, std::string>> tables; // suffix, CSV text
};

// Validates the config, fills defaults and runs the command. Pure apart from
// reading input files named in the config.
Artifacts execute(const json &config);

// execute + writing of outputs. Errors are printed as one JSON line on err.
int run(const json &config, std::ostream &out, std::ostream &err);

int main_cli(int argc, char **argv, std::ostream &out, std::ostream &err);

} // namespace kamtool

#endif
