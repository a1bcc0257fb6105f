#pragma once

#include <json.hpp>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace stk::experiments {

using Json = nlohmann::json;

/// Invalid command-line configuration.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Independent generator for one named purpose (truth, mask, noise, ...) of a seeded run.
std::mt19937_64 random_stream(std::uint64_t seed, std::uint64_t stream_id);

/// Shortest text that reads back to exactly `v`, at most 17 significant digits.
std::string format_double(double v);

/// Comma-separated table with a header row.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    void add_row(std::vector<std::string> cells);
    std::string str() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

/// git-describe string of the build.
std::string version_string();

/// {"experiment", "version", "config"} with the given config echo.
Json manifest(const std::string& experiment, const Json& config);

/// Create `dir` (and parents) if needed.
void ensure_directory(const std::string& dir);
/// Write `content` to `dir/name`, replacing any existing file.
void write_file(const std::string& dir, const std::string& name, const std::string& content);
/// JSON with two-space indentation and a trailing newline.
std::string dump_json(const Json& j);

}  // namespace stk::experiments
