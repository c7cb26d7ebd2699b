#include "cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "leedecay/errors.hpp"

namespace leedecay::cli {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(std::string_view text) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
        throw ConfigError("expected a finite number, got '" + std::string(text) + "'");
    }
    return v;
}

std::uint64_t parse_unsigned(std::string_view text) {
    std::uint64_t v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError("expected a non-negative integer, got '" + std::string(text) + "'");
    }
    return v;
}

std::optional<double> parse_auto(std::string_view text) {
    if (text == "auto") return std::nullopt;
    return parse_double(text);
}

std::string show_auto(const std::optional<double>& v) { return v ? format_number(*v) : "auto"; }

struct Field {
    std::function<void(RunConfig&, std::string_view)> set;
    std::function<std::string(const RunConfig&)> show;
};

template <class T>
Field number(T RunConfig::*section, double T::*member) {
    return {[=](RunConfig& c, std::string_view v) { c.*section.*member = parse_double(v); },
            [=](const RunConfig& c) { return format_number(c.*section.*member); }};
}

template <class T>
Field count(T RunConfig::*section, std::size_t T::*member) {
    return {[=](RunConfig& c, std::string_view v) {
                c.*section.*member = static_cast<std::size_t>(parse_unsigned(v));
            },
            [=](const RunConfig& c) { return std::to_string(c.*section.*member); }};
}

template <class T>
Field optional_number(T RunConfig::*section, std::optional<double> T::*member) {
    return {[=](RunConfig& c, std::string_view v) { c.*section.*member = parse_auto(v); },
            [=](const RunConfig& c) { return show_auto(c.*section.*member); }};
}

template <class E>
Field choice(std::function<E&(RunConfig&)> ref, std::vector<std::pair<std::string, E>> names) {
    return {[=](RunConfig& c, std::string_view v) {
                for (const auto& [name, value] : names) {
                    if (v == name) {
                        ref(c) = value;
                        return;
                    }
                }
                std::string allowed;
                for (const auto& [name, value] : names) allowed += (allowed.empty() ? "" : ", ") + name;
                throw ConfigError("unknown value '" + std::string(v) + "' (allowed: " + allowed + ")");
            },
            [=](const RunConfig& c) {
                RunConfig copy = c;
                const E value = ref(copy);
                for (const auto& [name, e] : names) {
                    if (e == value) return name;
                }
                return std::string("?");
            }};
}

const std::map<std::string, Field>& fields() {
    static const std::map<std::string, Field> table = [] {
        std::map<std::string, Field> t;
        t["model.bare_mass_v"] = number(&RunConfig::model, &ModelParams::m_V0);
        t["model.mass_n"] = number(&RunConfig::model, &ModelParams::m_N);
        t["model.mass_theta"] = number(&RunConfig::model, &ModelParams::mu);
        t["model.coupling"] = number(&RunConfig::model, &ModelParams::lambda0);
        t["model.cutoff"] = number(&RunConfig::model, &ModelParams::cutoff);
        t["model.form_factor"] = choice<FormFactorKind>(
            [](RunConfig& c) -> FormFactorKind& { return c.model.form_factor; },
            {{"sharp", FormFactorKind::SharpCutoff}, {"lorentzian", FormFactorKind::Lorentzian}});

        t["grid.n_modes"] = count(&RunConfig::grid, &GridSettings::n_modes);
        t["grid.k_max"] = optional_number(&RunConfig::grid, &GridSettings::k_max);

        t["kernels.e_min"] = number(&RunConfig::kernels, &KernelSettings::e_min);
        t["kernels.e_max"] = number(&RunConfig::kernels, &KernelSettings::e_max);
        t["kernels.points"] = count(&RunConfig::kernels, &KernelSettings::points);

        t["sector.n_modes"] = count(&RunConfig::sector, &SectorSettings::n_modes);
        t["sector.t_max"] = optional_number(&RunConfig::sector, &SectorSettings::t_max);
        t["sector.t_points"] = count(&RunConfig::sector, &SectorSettings::t_points);
        t["sector.fit_t_lo"] = optional_number(&RunConfig::sector, &SectorSettings::fit_t_lo);
        t["sector.fit_t_hi"] = optional_number(&RunConfig::sector, &SectorSettings::fit_t_hi);
        t["sector.recurrence_threshold"] =
            optional_number(&RunConfig::sector, &SectorSettings::recurrence_threshold);

        t["master.n_modes"] = count(&RunConfig::master, &MasterSettings::n_modes);
        t["master.t_max"] = optional_number(&RunConfig::master, &MasterSettings::t_max);
        t["master.t_points"] = count(&RunConfig::master, &MasterSettings::t_points);
        t["master.dt"] = optional_number(&RunConfig::master, &MasterSettings::dt);
        t["master.decoherence_rate"] = optional_number(&RunConfig::master, &MasterSettings::decoherence_rate);
        t["master.variant"] = choice<DissipatorVariant>(
            [](RunConfig& c) -> DissipatorVariant& { return c.master.variant; },
            {{"hermitized", DissipatorVariant::Hermitized}, {"literal", DissipatorVariant::Literal}});
        t["master.initial_state"] = choice<InitialState>(
            [](RunConfig& c) -> InitialState& { return c.master.initial_state; },
            {{"excited", InitialState::ExcitedV},
             {"superposition", InitialState::VacuumVSuperposition},
             {"mixed", InitialState::MaximallyMixed}});

        t["langevin.momentum"] = number(&RunConfig::langevin, &LangevinSettings::momentum);
        t["langevin.dt"] = optional_number(&RunConfig::langevin, &LangevinSettings::dt);
        t["langevin.t_max"] = optional_number(&RunConfig::langevin, &LangevinSettings::t_max);
        t["langevin.n_trajectories"] = count(&RunConfig::langevin, &LangevinSettings::n_trajectories);
        t["langevin.record_points"] = count(&RunConfig::langevin, &LangevinSettings::record_points);
        t["langevin.phi0_re"] = {
            [](RunConfig& c, std::string_view v) { c.langevin.phi0.real(parse_double(v)); },
            [](const RunConfig& c) { return format_number(c.langevin.phi0.real()); }};
        t["langevin.phi0_im"] = {
            [](RunConfig& c, std::string_view v) { c.langevin.phi0.imag(parse_double(v)); },
            [](const RunConfig& c) { return format_number(c.langevin.phi0.imag()); }};

        t["run.seed"] = {[](RunConfig& c, std::string_view v) { c.seed = parse_unsigned(v); },
                         [](const RunConfig& c) { return std::to_string(c.seed); }};
        t["run.out"] = {[](RunConfig& c, std::string_view v) {
                            if (v.empty()) throw ConfigError("output directory must not be empty");
                            c.out_dir = std::string(v);
                        },
                        [](const RunConfig& c) { return c.out_dir; }};
        return t;
    }();
    return table;
}

void require_positive(std::optional<double> v, const char* name) {
    if (v && !(*v > 0.0)) throw ConfigError(std::string(name) + " must be positive or auto");
}

}  // namespace

std::string RunConfig::canonical() const {
    std::string out;
    for (const auto& [key, field] : fields()) {
        if (key == "run.out") continue;  // where files go does not change what they contain
        out += key + " = " + field.show(*this) + "\n";
    }
    return out;
}

std::string RunConfig::hash() const {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : canonical()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void RunConfig::validate() const {
    model.validate();
    if (grid.n_modes < 2) throw ConfigError("grid.n_modes must be at least 2");
    require_positive(grid.k_max, "grid.k_max");
    if (!(kernels.e_max > kernels.e_min)) throw ConfigError("kernels.e_max must exceed kernels.e_min");
    if (kernels.points < 2) throw ConfigError("kernels.points must be at least 2");
    if (sector.n_modes < 2) throw ConfigError("sector.n_modes must be at least 2");
    if (sector.t_points < 2) throw ConfigError("sector.t_points must be at least 2");
    require_positive(sector.t_max, "sector.t_max");
    require_positive(sector.fit_t_hi, "sector.fit_t_hi");
    if (sector.fit_t_lo && *sector.fit_t_lo < 0.0) throw ConfigError("sector.fit_t_lo must be >= 0");
    if (sector.fit_t_lo && sector.fit_t_hi && !(*sector.fit_t_hi > *sector.fit_t_lo)) {
        throw ConfigError("sector.fit_t_hi must exceed sector.fit_t_lo");
    }
    require_positive(sector.recurrence_threshold, "sector.recurrence_threshold");
    if (master.n_modes < 1) throw ConfigError("master.n_modes must be at least 1");
    if (master.t_points < 2) throw ConfigError("master.t_points must be at least 2");
    require_positive(master.t_max, "master.t_max");
    require_positive(master.dt, "master.dt");
    if (master.decoherence_rate && *master.decoherence_rate < 0.0) {
        throw ConfigError("master.decoherence_rate must be >= 0 or auto");
    }
    require_positive(langevin.dt, "langevin.dt");
    require_positive(langevin.t_max, "langevin.t_max");
    if (langevin.n_trajectories < 2) throw ConfigError("langevin.n_trajectories must be at least 2");
    if (langevin.record_points < 2) throw ConfigError("langevin.record_points must be at least 2");
}

RunConfig parse_config(std::istream& in, std::string_view source) {
    RunConfig config;
    std::set<std::string> seen;
    std::string section;
    std::string raw;
    int line_no = 0;
    auto fail = [&](const std::string& what) {
        throw ConfigError(std::string(source) + ":" + std::to_string(line_no) + ": " + what);
    };
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find_first_of("#;"); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail("malformed section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (section.empty()) fail("empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) fail("expected key = value");
        if (section.empty()) fail("key outside of any [section]");
        const std::string key = section + "." + std::string(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        const auto it = fields().find(key);
        if (it == fields().end()) fail("unknown key '" + key + "'");
        if (!seen.insert(key).second) fail("duplicate key '" + key + "'");
        if (value.empty()) fail("missing value for '" + key + "'");
        try {
            it->second.set(config, value);
        } catch (const ConfigError& e) {
            fail(key + ": " + e.what());
        }
    }
    config.validate();
    return config;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return parse_config(in, path.string());
}

std::string to_string(DissipatorVariant v) {
    return v == DissipatorVariant::Literal ? "literal" : "hermitized";
}

std::string to_string(InitialState s) {
    switch (s) {
        case InitialState::ExcitedV:
            return "excited";
        case InitialState::VacuumVSuperposition:
            return "superposition";
        case InitialState::MaximallyMixed:
            return "mixed";
    }
    return "?";
}

std::string to_string(FormFactorKind f) {
    return f == FormFactorKind::Lorentzian ? "lorentzian" : "sharp";
}

}  // namespace leedecay::cli
