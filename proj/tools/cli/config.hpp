#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "leedecay/master.hpp"
#include "leedecay/model.hpp"

namespace leedecay::cli {

// Unset optionals mean "auto": derived from the pole at run time.
struct GridSettings {
    std::size_t n_modes = 1024;
    std::optional<double> k_max;
};

struct KernelSettings {
    double e_min = -20.0;
    double e_max = 20.0;
    std::size_t points = 400;
};

struct SectorSettings {
    std::size_t n_modes = 1024;
    std::optional<double> t_max;       // auto: 2.5 / Gamma
    std::size_t t_points = 2001;
    std::optional<double> fit_t_lo;    // auto: 0.2 / Gamma
    std::optional<double> fit_t_hi;    // auto: 2 / Gamma
    std::optional<double> recurrence_threshold;  // auto: 0.5 Z_V^2
};

struct MasterSettings {
    std::size_t n_modes = 128;
    std::optional<double> t_max;   // auto: 3 / Gamma
    std::size_t t_points = 301;
    std::optional<double> dt;      // auto: largest stable step
    std::optional<double> decoherence_rate;  // auto: gamma m_V
    DissipatorVariant variant = DissipatorVariant::Hermitized;
    InitialState initial_state = InitialState::ExcitedV;
};

struct LangevinSettings {
    double momentum = 0.0;
    std::optional<double> dt;      // auto: 0.05 / |drift|
    std::optional<double> t_max;   // auto: 8 / mean decay rate
    std::size_t n_trajectories = 10000;
    std::size_t record_points = 500;
    std::complex<double> phi0{1.0, 0.0};
};

struct RunConfig {
    ModelParams model;
    GridSettings grid;
    KernelSettings kernels;
    SectorSettings sector;
    MasterSettings master;
    LangevinSettings langevin;
    std::uint64_t seed = 42;
    std::string out_dir = "out";

    // Every setting as sorted "section.key = value" lines; comments, ordering
    // and whitespace of the source file do not affect it.
    std::string canonical() const;
    // FNV-1a of canonical(), as 16 hex digits.
    std::string hash() const;

    void validate() const;
};

// Parses the key=value grammar with [section] headers. Throws ConfigError
// with the offending line on any syntax error, unknown key or duplicate.
RunConfig parse_config(std::istream& in, std::string_view source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

std::string to_string(DissipatorVariant v);
std::string to_string(InitialState s);
std::string to_string(FormFactorKind f);

}  // namespace leedecay::cli
