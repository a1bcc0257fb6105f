#include "stk/experiments/report.hpp"

#include "stk/errors.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#ifndef STK_VERSION
#define STK_VERSION "unknown"
#endif

namespace stk::experiments {

std::mt19937_64 random_stream(std::uint64_t seed, std::uint64_t stream_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32)};
    return std::mt19937_64(seq);
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size()) {
        throw DomainError("CSV row has " + std::to_string(cells.size()) + " cells, header has " +
                          std::to_string(header_.size()));
    }
    rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
}

std::string version_string() {
    return STK_VERSION;
}

Json manifest(const std::string& experiment, const Json& config) {
    return Json{{"experiment", experiment}, {"version", version_string()}, {"config", config}};
}

void ensure_directory(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory " + dir + ": " + ec.message());
}

void write_file(const std::string& dir, const std::string& name, const std::string& content) {
    ensure_directory(dir);
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot open " + path.string() + " for writing");
    f << content;
    if (!f) throw DataError("failed writing " + path.string());
}

std::string dump_json(const Json& j) {
    return j.dump(2) + "\n";
}

}  // namespace stk::experiments
