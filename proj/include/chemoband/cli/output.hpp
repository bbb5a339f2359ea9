#pragma once

// Tables, output files and run manifests for the command line tool.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "chemoband/cli/config.hpp"

namespace chemoband::cli {

using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add_row(std::vector<Cell> row);
};

/// printf "%.17g"; round-trips every finite double.
std::string format_double(double x);

/// One header line, comma separated, no quoting (cells never hold commas).
std::string to_csv(const Table& table);
/// {"columns": [...], "rows": [[...], ...]}
nlohmann::json to_json(const Table& table);

std::string sha256_hex(std::string_view bytes);

struct OutputRecord {
    std::string name; ///< file name, relative to the manifest directory
    std::string sha256;
    std::uintmax_t bytes = 0;
};

/// Collects the files of one run and writes the manifest last.
///
/// `out` is either a directory or a file path. A path whose extension is
/// .csv or .json names the primary output; every other file of the run is
/// placed beside it with the same stem. Otherwise `out` is a directory and
/// files are named after the command.
class OutputSet {
public:
    OutputSet(const std::filesystem::path& out, std::string command, OutputFormat format);

    /// Primary table, written as <stem>.csv or <stem>.json.
    void write_primary(const Table& table);
    /// Secondary table, written as <stem>_<suffix>.csv or .json.
    void write_table(std::string_view suffix, const Table& table);
    /// JSON document written as <stem>_<suffix>.json.
    void write_json(std::string_view suffix, const nlohmann::json& doc);

    /// Raw bytes written as <stem>_<suffix>; the suffix carries the extension.
    void write_text(std::string_view suffix, const std::string& bytes);

    /// Writes <stem>.manifest.json and returns its path.
    std::filesystem::path write_manifest(const RunSpec& spec) const;

    const std::vector<OutputRecord>& records() const noexcept { return records_; }
    const std::filesystem::path& directory() const noexcept { return dir_; }

private:
    void write_file(const std::string& name, const std::string& bytes);
    std::string table_bytes(const Table& table) const;
    std::string extension() const;

    std::filesystem::path dir_;
    std::string stem_;
    std::string command_;
    OutputFormat format_;
    std::vector<OutputRecord> records_;
};

/// Canonical hash of a spec: SHA-256 of its compact JSON echo.
std::string spec_hash(const RunSpec& spec);

/// Library and toolchain versions recorded in manifests.
nlohmann::json version_info();

/// Checks every file listed in a manifest: it must exist and its hash and
/// size must match. Returns the names of files that fail.
std::vector<std::string> verify_manifest(const std::filesystem::path& manifest_path);

} // namespace chemoband::cli
