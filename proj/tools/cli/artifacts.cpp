#include "cli/artifacts.hpp"

#include <cstdio>
#include <fstream>

#include "leedecay/errors.hpp"

namespace leedecay::cli {

ArtifactMeta meta_for(const RunConfig& config) {
    ArtifactMeta meta;
    meta.config_hash = config.hash();
    meta.seed = config.seed;
    return meta;
}

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

CsvTable::CsvTable(const ArtifactMeta& meta, std::string_view title,
                   std::initializer_list<std::string_view> columns)
    : columns_(columns.size()) {
    text_ += "# leedecay " + meta.version + "\n";
    text_ += "# artifact: " + std::string(title) + "\n";
    text_ += "# config_hash: fnv1a64:" + meta.config_hash + "\n";
    text_ += "# seed: " + std::to_string(meta.seed) + "\n";
    bool first = true;
    for (std::string_view c : columns) {
        if (!first) text_ += ',';
        text_ += c;
        first = false;
    }
    text_ += '\n';
}

void CsvTable::row(std::initializer_list<double> values) {
    if (values.size() != columns_) throw std::logic_error("CSV row width does not match the header");
    bool first = true;
    for (double v : values) {
        if (!first) text_ += ',';
        text_ += format_value(v);
        first = false;
    }
    text_ += '\n';
    ++rows_;
}

std::string json_document(const ArtifactMeta& meta, std::string_view title, nlohmann::ordered_json body) {
    nlohmann::ordered_json doc;
    doc["meta"] = {{"tool", "leedecay"},
                   {"version", meta.version},
                   {"artifact", std::string(title)},
                   {"config_hash", "fnv1a64:" + meta.config_hash},
                   {"seed", meta.seed}};
    for (auto& [key, value] : body.items()) doc[key] = value;
    return doc.dump(2) + "\n";
}

void write_artifacts(const std::filesystem::path& dir, std::span<const Artifact> artifacts) {
    for (const Artifact& a : artifacts) {
        if (std::filesystem::exists(dir / a.name)) {
            throw OutputError("refusing to overwrite existing output " + (dir / a.name).string());
        }
    }
    std::filesystem::create_directories(dir);
    for (const Artifact& a : artifacts) {
        std::ofstream out(dir / a.name, std::ios::binary);
        out << a.content;
        if (!out) throw OutputError("failed to write " + (dir / a.name).string());
    }
}

}  // namespace leedecay::cli
