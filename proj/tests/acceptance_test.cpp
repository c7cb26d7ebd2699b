// Runs the full verification suite on the default model twice, in separate
// output directories, and prints one line per criterion. The determinism
// criterion additionally requires every written file to match byte for byte
// across the two runs.
//
// usage: acceptance_test <work_dir> [config]
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cli/artifacts.hpp"
#include "cli/config.hpp"
#include "cli/verify.hpp"

namespace fs = std::filesystem;
using namespace leedecay::cli;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

VerifyReport run_into(const RunConfig& base, const fs::path& dir, unsigned threads) {
    RunConfig config = base;
    config.out_dir = dir.string();
    VerifyReport report = run_verify(config, threads, [&](const CriterionResult& r) {
        std::cerr << "  " << dir.filename().string() << ": " << format_line(r) << "\n";
    });
    write_artifacts(dir, report.artifacts);
    return report;
}

// Names of files that differ or exist in only one of the two directories.
std::vector<std::string> compare_dirs(const fs::path& a, const fs::path& b, std::size_t& checked) {
    std::vector<std::string> bad;
    checked = 0;
    for (const auto& e : fs::directory_iterator(a)) {
        const fs::path other = b / e.path().filename();
        ++checked;
        if (!fs::exists(other) || read_file(e.path()) != read_file(other)) {
            bad.push_back(e.path().filename().string());
        }
    }
    for (const auto& e : fs::directory_iterator(b)) {
        if (!fs::exists(a / e.path().filename())) bad.push_back(e.path().filename().string());
    }
    return bad;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2 || argc > 3) {
        std::cerr << "usage: acceptance_test <work_dir> [config]\n";
        return 2;
    }
    const fs::path work = argv[1];
    try {
        const RunConfig config = argc == 3 ? load_config(argv[2]) : RunConfig{};
        fs::remove_all(work);
        fs::create_directories(work);

        // Different thread counts, so the comparison also covers scheduling.
        std::cerr << "first run\n";
        VerifyReport first = run_into(config, work / "run1", 1);
        std::cerr << "second run\n";
        const VerifyReport second = run_into(config, work / "run2", 4);

        std::size_t checked = 0;
        const std::vector<std::string> differ = compare_dirs(work / "run1", work / "run2", checked);
        CriterionResult& det = first.criteria.back();
        if (differ.empty()) {
            det.detail += "; " + std::to_string(checked) + " files identical across two full runs";
        } else {
            det.status = Status::Fail;
            std::string names;
            for (const auto& n : differ) names += (names.empty() ? "" : ", ") + n;
            det.detail += "; files differ across runs: " + names;
        }

        for (const CriterionResult& r : first.criteria) std::cout << format_line(r) << "\n";
        const bool ok = first.passed() && second.passed();
        std::cout << (ok ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED") << "\n";
        return ok ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "acceptance run aborted: " << e.what() << "\n";
        return 1;
    }
}
