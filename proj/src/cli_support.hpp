#pragma once

// Plumbing for the command-line front end: file access, digests, atomic output, wide CSV
// tables and run manifests.

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace hawkesvol::cli {

namespace fs = std::filesystem;

/// Whole file as bytes. Throws ConfigError when the path cannot be opened.
std::string read_file(const fs::path& path);

/// Lower-case hex SHA-256.
std::string sha256_hex(const std::string& bytes);
/// Same digest, read in blocks so large tick files are never held in memory.
std::string sha256_file(const fs::path& path);

/// Write through a temporary sibling and rename it into place.
void write_atomic(const fs::path& path, const std::string& bytes);

/// `{:.10g}`, or NA for non-finite values.
std::string format_number(double x);
/// NA and empty fields become NaN. Throws DataError on anything else that is not a number.
double parse_number(const std::string& field, const std::string& context);

/// A CSV file with a header row; every row must have as many fields as the header.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    static Table parse(const std::string& text, const std::string& name);

    [[nodiscard]] std::size_t column_index(const std::string& name) const;
    [[nodiscard]] std::vector<std::string> text_column(const std::string& name) const;
    [[nodiscard]] std::vector<double> column(const std::string& name) const;
    [[nodiscard]] std::vector<double> column(std::size_t index) const;

    std::string source;
};

class Manifest {
public:
    explicit Manifest(std::string command) : command_(std::move(command)) {}

    void set(const std::string& key, const std::string& value) { entries_.emplace_back(key, value); }
    void add_input(const fs::path& path, const std::string& digest);
    void add_output(const fs::path& path, const std::string& bytes);
    /// key=value lines; the timestamp is the only field that varies between identical runs.
    [[nodiscard]] std::string render() const;

private:
    std::string command_;
    std::vector<std::pair<std::string, std::string>> entries_;
    std::vector<std::pair<std::string, std::string>> inputs_;
    std::vector<std::pair<std::string, std::string>> outputs_;
};

}  // namespace hawkesvol::cli
