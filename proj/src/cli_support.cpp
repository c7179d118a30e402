#include "cli_support.hpp"

#include "hawkesvol/errors.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <openssl/evp.h>

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unistd.h>

namespace hawkesvol::cli {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open input " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw NumericalError("SHA-256 digest failed");
    }
    std::string hex;
    for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open input " + path.string());
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw NumericalError("SHA-256 digest failed");
    }
    std::vector<char> block(1 << 16);
    while (in) {
        in.read(block.data(), static_cast<std::streamsize>(block.size()));
        EVP_DigestUpdate(ctx, block.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    EVP_DigestFinal_ex(ctx, digest, &length);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

void write_atomic(const fs::path& path, const std::string& bytes) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += fmt::format(".tmp.{}", ::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) throw DataError("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string format_number(double x) { return std::isfinite(x) ? fmt::format("{:.10g}", x) : std::string("NA"); }

double parse_number(const std::string& field, const std::string& context) {
    if (field.empty() || field == "NA" || field == "nan" || field == "NaN") {
        return std::numeric_limits<double>::quiet_NaN();
    }
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), x);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw DataError(fmt::format("{}: '{}' is not a number", context, field));
    }
    return x;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t comma = line.find(',', pos);
        out.push_back(line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
        if (comma == std::string::npos) return out;
        pos = comma + 1;
    }
}

}  // namespace

Table Table::parse(const std::string& text, const std::string& name) {
    Table t;
    t.source = name;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv(line);
        if (t.header.empty()) {
            t.header = std::move(fields);
            continue;
        }
        if (fields.size() != t.header.size()) {
            throw DataError(fmt::format("{} line {}: {} fields, header has {}", name, line_no, fields.size(),
                                        t.header.size()));
        }
        t.rows.push_back(std::move(fields));
    }
    if (t.header.empty()) throw DataError(name + ": missing header");
    return t;
}

std::size_t Table::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw DataError(fmt::format("{}: no column '{}'", source, name));
}

std::vector<std::string> Table::text_column(const std::string& name) const {
    const std::size_t c = column_index(name);
    std::vector<std::string> out;
    for (const auto& row : rows) out.push_back(row[c]);
    return out;
}

std::vector<double> Table::column(const std::string& name) const { return column(column_index(name)); }

std::vector<double> Table::column(std::size_t index) const {
    std::vector<double> out;
    for (const auto& row : rows) out.push_back(parse_number(row[index], source + ":" + header[index]));
    return out;
}

void Manifest::add_input(const fs::path& path, const std::string& digest) {
    inputs_.emplace_back(path.string(), digest);
}

void Manifest::add_output(const fs::path& path, const std::string& bytes) {
    outputs_.emplace_back(path.string(), sha256_hex(bytes));
}

std::string Manifest::render() const {
    std::string out = fmt::format("command={}\n", command_);
    const auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
    out += fmt::format("created_utc={:%Y-%m-%dT%H:%M:%SZ}\n", now);
    for (const auto& [k, v] : entries_) out += fmt::format("{}={}\n", k, v);
    for (std::size_t i = 0; i < inputs_.size(); ++i) {
        out += fmt::format("input.{}.path={}\ninput.{}.sha256={}\n", i, inputs_[i].first, i, inputs_[i].second);
    }
    for (std::size_t i = 0; i < outputs_.size(); ++i) {
        out += fmt::format("output.{}.path={}\noutput.{}.sha256={}\n", i, outputs_[i].first, i, outputs_[i].second);
    }
    return out;
}

}  // namespace hawkesvol::cli
