#include "chemoband/cli/output.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <boost/version.hpp>
#include <openssl/evp.h>
#include <openssl/opensslv.h>

#ifndef CHEMOBAND_VERSION
#define CHEMOBAND_VERSION "0.0.0"
#endif

namespace chemoband::cli {

namespace fs = std::filesystem;

void Table::add_row(std::vector<Cell> row)
{
    if (row.size() != columns.size())
        throw Error(ErrorCode::InvalidArgument, "table row has the wrong number of cells");
    rows.push_back(std::move(row));
}

std::string format_double(double x)
{
    std::array<char, 40> buf{};
    std::snprintf(buf.data(), buf.size(), "%.17g", x);
    return buf.data();
}

namespace {

std::string cell_text(const Cell& c)
{
    if (const auto* d = std::get_if<double>(&c))
        return format_double(*d);
    if (const auto* i = std::get_if<std::int64_t>(&c))
        return std::to_string(*i);
    return std::get<std::string>(c);
}

nlohmann::json cell_json(const Cell& c)
{
    if (const auto* d = std::get_if<double>(&c))
        return *d;
    if (const auto* i = std::get_if<std::int64_t>(&c))
        return *i;
    return std::get<std::string>(c);
}

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot read '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

std::string to_csv(const Table& table)
{
    std::string out;
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
        if (j > 0)
            out += ',';
        out += table.columns[j];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j > 0)
                out += ',';
            out += cell_text(row[j]);
        }
        out += '\n';
    }
    return out;
}

nlohmann::json to_json(const Table& table)
{
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : table.rows) {
        nlohmann::json r = nlohmann::json::array();
        for (const Cell& c : row)
            r.push_back(cell_json(c));
        rows.push_back(std::move(r));
    }
    return nlohmann::json{{"columns", table.columns}, {"rows", std::move(rows)}};
}

std::string sha256_hex(std::string_view bytes)
{
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
        throw Error(ErrorCode::IoError, "SHA-256 digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xF];
    }
    return out;
}

OutputSet::OutputSet(const fs::path& out, std::string command, OutputFormat format)
    : command_(std::move(command)), format_(format)
{
    const std::string ext = out.extension().string();
    if (ext == ".csv" || ext == ".json") {
        dir_ = out.parent_path().empty() ? fs::path(".") : out.parent_path();
        stem_ = out.stem().string();
        // An explicit file name fixes the format of the primary table.
        format_ = ext == ".csv" ? OutputFormat::Csv : OutputFormat::Json;
    } else {
        dir_ = out.empty() ? fs::path(".") : out;
        stem_ = command_;
    }
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec)
        throw Error(ErrorCode::IoError, "cannot create output directory '" + dir_.string() + "': " + ec.message());
}

std::string OutputSet::extension() const
{
    return format_ == OutputFormat::Csv ? ".csv" : ".json";
}

std::string OutputSet::table_bytes(const Table& table) const
{
    if (format_ == OutputFormat::Csv)
        return to_csv(table);
    return to_json(table).dump(1) + "\n";
}

void OutputSet::write_file(const std::string& name, const std::string& bytes)
{
    const fs::path path = dir_ / name;
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out)
            throw Error(ErrorCode::IoError, "write to '" + path.string() + "' failed");
    }
    records_.push_back(OutputRecord{name, sha256_hex(bytes), bytes.size()});
}

void OutputSet::write_primary(const Table& table)
{
    write_file(stem_ + extension(), table_bytes(table));
}

void OutputSet::write_table(std::string_view suffix, const Table& table)
{
    write_file(stem_ + "_" + std::string(suffix) + extension(), table_bytes(table));
}

void OutputSet::write_json(std::string_view suffix, const nlohmann::json& doc)
{
    write_file(stem_ + "_" + std::string(suffix) + ".json", doc.dump(2) + "\n");
}

void OutputSet::write_text(std::string_view suffix, const std::string& bytes)
{
    write_file(stem_ + "_" + std::string(suffix), bytes);
}

fs::path OutputSet::write_manifest(const RunSpec& spec) const
{
    nlohmann::json outputs = nlohmann::json::array();
    for (const auto& r : records_)
        outputs.push_back({{"name", r.name}, {"sha256", r.sha256}, {"bytes", r.bytes}});
    const nlohmann::json manifest{
        {"command", command_},
        {"spec", to_json(spec)},
        {"spec_hash", spec_hash(spec)},
        {"seed", spec.run.seed},
        {"format", format_ == OutputFormat::Csv ? "csv" : "json"},
        {"versions", version_info()},
        {"outputs", std::move(outputs)},
    };
    const fs::path path = dir_ / (stem_ + ".manifest.json");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
    out << manifest.dump(2) << '\n';
    if (!out)
        throw Error(ErrorCode::IoError, "write to '" + path.string() + "' failed");
    return path;
}

std::string spec_hash(const RunSpec& spec)
{
    return sha256_hex(to_json(spec).dump());
}

nlohmann::json version_info()
{
    std::ostringstream nl;
    nl << NLOHMANN_JSON_VERSION_MAJOR << '.' << NLOHMANN_JSON_VERSION_MINOR << '.' << NLOHMANN_JSON_VERSION_PATCH;
    std::ostringstream boost;
    boost << BOOST_VERSION / 100000 << '.' << BOOST_VERSION / 100 % 1000 << '.' << BOOST_VERSION % 100;
    return nlohmann::json{
        {"chemoband", CHEMOBAND_VERSION},
        {"compiler", __VERSION__},
        {"boost", boost.str()},
        {"nlohmann_json", nl.str()},
        {"openssl", OPENSSL_VERSION_TEXT},
    };
}

std::vector<std::string> verify_manifest(const fs::path& manifest_path)
{
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(read_file(manifest_path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, "manifest '" + manifest_path.string() + "' is not valid JSON: " + e.what());
    }
    const fs::path dir = manifest_path.parent_path().empty() ? fs::path(".") : manifest_path.parent_path();
    std::vector<std::string> bad;
    for (const auto& entry : manifest.at("outputs")) {
        const std::string name = entry.at("name").get<std::string>();
        const fs::path path = dir / name;
        std::error_code ec;
        if (!fs::exists(path, ec)) {
            bad.push_back(name);
            continue;
        }
        const std::string bytes = read_file(path);
        if (bytes.size() != entry.at("bytes").get<std::uintmax_t>()
            || sha256_hex(bytes) != entry.at("sha256").get<std::string>())
            bad.push_back(name);
    }
    return bad;
}

} // namespace chemoband::cli
