#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli/config.hpp"

namespace leedecay::cli {

// A file produced by a subcommand, rendered in memory so reruns can be
// compared byte for byte before anything touches the disk.
struct Artifact {
    std::string name;
    std::string content;
};

struct ArtifactMeta {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string version = LEEDECAY_VERSION;
};

ArtifactMeta meta_for(const RunConfig& config);

// Scientific notation with 17 significant digits.
std::string format_value(double v);

class CsvTable {
public:
    CsvTable(const ArtifactMeta& meta, std::string_view title, std::initializer_list<std::string_view> columns);

    void row(std::initializer_list<double> values);
    std::size_t rows() const noexcept { return rows_; }
    std::string str() const { return text_; }

private:
    std::string text_;
    std::size_t columns_;
    std::size_t rows_ = 0;
};

// Pretty-printed JSON with a leading "meta" block, newline terminated.
std::string json_document(const ArtifactMeta& meta, std::string_view title, nlohmann::ordered_json body);

// Writes every artifact into dir (created if missing). Refuses to touch
// existing files: throws OutputError before writing anything if one exists.
void write_artifacts(const std::filesystem::path& dir, std::span<const Artifact> artifacts);

class OutputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace leedecay::cli
