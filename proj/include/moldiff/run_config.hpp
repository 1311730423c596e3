#pragma once

// Experiment configuration: channel presets, unit-suffixed quantities and
// JSON config files. Everything is normalized to SI on ingest.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "link.hpp"
#include "modem.hpp"
#include "montecarlo.hpp"
#include "physics.hpp"

namespace moldiff {

/// Invalid user configuration (maps to exit code 2 in the CLI).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class QuantityKind { diffusivity, length, velocity };

namespace detail {

struct UnitFactor {
    std::string_view suffix;
    double divisor;  ///< SI value = number / divisor
};

inline std::span<const UnitFactor> units_for(QuantityKind kind) {
    static constexpr UnitFactor diffusivity[] = {
        {"m2/s", 1.0}, {"cm2/s", 1e4}, {"mm2/s", 1e6}, {"um2/s", 1e12}};
    static constexpr UnitFactor length[] = {{"m", 1.0}, {"cm", 1e2}, {"mm", 1e3}, {"um", 1e6}};
    static constexpr UnitFactor velocity[] = {
        {"m/s", 1.0}, {"cm/s", 1e2}, {"mm/s", 1e3}, {"um/s", 1e6}};
    switch (kind) {
        case QuantityKind::diffusivity: return diffusivity;
        case QuantityKind::length: return length;
        case QuantityKind::velocity: return velocity;
    }
    return {};
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

}  // namespace detail

inline double parse_number(std::string_view text) {
    text = detail::trim(text);
    double value = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size() || !std::isfinite(value)) {
        throw ConfigError("not a number: '" + std::string(text) + "'");
    }
    return value;
}

/// "100um2/s" -> 1e-10, "2m" -> 2, "0.5" -> 0.5 (bare numbers are SI).
inline double parse_quantity(std::string_view text, QuantityKind kind) {
    text = detail::trim(text);
    std::size_t split = 0;
    while (split < text.size()) {
        const char c = text[split];
        const bool numeric = (c >= '0' && c <= '9') || c == '.' || c == '-' || c == '+' ||
                             ((c == 'e' || c == 'E') && split + 1 < text.size() &&
                              (std::isdigit(static_cast<unsigned char>(text[split + 1])) || text[split + 1] == '-' ||
                               text[split + 1] == '+'));
        if (!numeric) break;
        ++split;
    }
    const double value = parse_number(text.substr(0, split));
    const std::string_view suffix = detail::trim(text.substr(split));
    if (suffix.empty()) return value;
    std::string valid;
    for (const auto& unit : detail::units_for(kind)) {
        if (unit.suffix == suffix) return value / unit.divisor;
        if (!valid.empty()) valid += ", ";
        valid += unit.suffix;
    }
    throw ConfigError("unknown unit '" + std::string(suffix) + "' (expected one of " + valid + ")");
}

struct ChannelPreset {
    std::string_view name;
    ChannelParams params;
};

/// Midpoints of the intra-cellular and inter-organism signalling regimes.
inline std::span<const ChannelPreset> channel_presets() {
    static const ChannelPreset presets[] = {
        {"intracellular", {100e-12, 100e-6, 0.0}},
        {"interorganism", {0.5e-4, 2.0, 0.0}},
    };
    return presets;
}

inline ChannelParams preset_channel(std::string_view name) {
    std::string valid;
    for (const auto& p : channel_presets()) {
        if (p.name == name) return p.params;
        if (!valid.empty()) valid += ", ";
        valid += p.name;
    }
    throw ConfigError("unknown preset '" + std::string(name) + "' (valid presets: " + valid + ")");
}

inline Bits parse_bits(std::string_view text) {
    Bits bits;
    for (char c : text) {
        if (c == '0' || c == '1') {
            bits.push_back(static_cast<Bit>(c - '0'));
        } else {
            throw ConfigError("bit pattern may contain only '0' and '1': '" + std::string(text) + "'");
        }
    }
    if (bits.empty()) throw ConfigError("bit pattern must be nonempty");
    return bits;
}

inline std::string bits_to_string(const Bits& bits) {
    std::string s;
    for (Bit b : bits) s.push_back(b ? '1' : '0');
    return s;
}

enum class OutputFormat { csv, json };

struct RunConfig {
    std::optional<std::string> preset;
    std::optional<double> diffusivity;  ///< m²/s
    std::optional<double> distance;     ///< m
    double drift_velocity = 0.0;        ///< m/s, applies on top of a preset too

    std::optional<double> bit_period;  ///< explicit T [s]; otherwise guard_multiplier × delay spread
    double guard_multiplier = 10.0;
    std::uint64_t molecules_per_pulse = 10000;
    std::string preamble = "10101010";
    ThresholdPolicy threshold_policy = ThresholdPolicy::fixed;
    double alpha = 0.5;

    std::optional<double> dt;  ///< explicit walk step; otherwise bit_period / steps_per_slot
    unsigned steps_per_slot = 10;
    std::uint64_t seed = 1;
    unsigned shards = 1;
    bool bridge_correction = true;
    bool interpolate_crossing = false;
    double tail_delay_spreads = 5.0;
    bool noiseless = false;

    std::string output_dir = ".";
    OutputFormat format = OutputFormat::csv;

    ChannelParams channel() const {
        const bool explicit_channel = diffusivity.has_value() || distance.has_value();
        if (preset && explicit_channel) {
            throw ConfigError("give either a channel preset or an explicit diffusivity/distance, not both");
        }
        ChannelParams params;
        if (preset) {
            params = preset_channel(*preset);
        } else if (diffusivity && distance) {
            params.diffusivity = *diffusivity;
            params.distance = *distance;
        } else if (explicit_channel) {
            throw ConfigError("an explicit channel needs both diffusivity and distance");
        } else {
            throw ConfigError("no channel given: use --preset or --diffusivity with --distance");
        }
        params.drift_velocity = drift_velocity;
        try {
            params.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        return params;
    }

    ModulationConfig modulation(double resolved_bit_period) const {
        ModulationConfig mc;
        mc.bit_period = resolved_bit_period;
        mc.molecules_per_pulse = molecules_per_pulse;
        mc.preamble = parse_bits(preamble);
        mc.threshold_policy = threshold_policy;
        mc.alpha = alpha;
        try {
            mc.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        return mc;
    }

    LinkOptions link_options() const {
        LinkOptions opts;
        opts.noiseless = noiseless;
        opts.tail_delay_spreads = tail_delay_spreads;
        opts.steps_per_slot = dt ? 0U : steps_per_slot;
        opts.fit_horizon = true;
        return opts;
    }

    /// Walk settings; t_max and (without an explicit dt) the step are fitted per run.
    WalkConfig walk(const ChannelParams& params) const {
        WalkConfig wc;
        wc.channel = params;
        wc.dt = dt.value_or(1.0);
        wc.t_max = 2.0 * wc.dt;
        wc.seed = seed;
        wc.shards = shards;
        wc.bridge_correction = bridge_correction;
        wc.interpolate_crossing = interpolate_crossing;
        return wc;
    }

    void validate() const {
        if (!(guard_multiplier > 0.0) || !std::isfinite(guard_multiplier)) {
            throw ConfigError("guard multiplier must be positive");
        }
        if (bit_period && !(*bit_period > 0.0)) throw ConfigError("bit period must be positive");
        if (dt && !(*dt > 0.0)) throw ConfigError("dt must be positive");
        if (steps_per_slot < 1) throw ConfigError("steps per slot must be positive");
        if (shards < 1) throw ConfigError("shards must be positive");
        if (molecules_per_pulse < 1) throw ConfigError("molecules per pulse must be positive");
        if (!(tail_delay_spreads >= 0.0)) throw ConfigError("tail margin must be non-negative");
    }
};

inline ThresholdPolicy parse_threshold_policy(std::string_view name) {
    if (name == "fixed") return ThresholdPolicy::fixed;
    if (name == "calibrated") return ThresholdPolicy::calibrated;
    throw ConfigError("threshold policy must be 'fixed' or 'calibrated', got '" + std::string(name) + "'");
}

inline std::string_view to_string(ThresholdPolicy policy) {
    return policy == ThresholdPolicy::fixed ? "fixed" : "calibrated";
}

inline OutputFormat parse_output_format(std::string_view name) {
    if (name == "csv") return OutputFormat::csv;
    if (name == "json") return OutputFormat::json;
    throw ConfigError("output format must be 'csv' or 'json', got '" + std::string(name) + "'");
}

namespace detail {

inline double json_quantity(const nlohmann::json& value, QuantityKind kind, const char* key) {
    if (value.is_number()) return value.get<double>();
    if (value.is_string()) return parse_quantity(value.get<std::string>(), kind);
    throw ConfigError(std::string("config key '") + key + "' must be a number or a unit-suffixed string");
}

}  // namespace detail

/**
 * Applies a JSON config object onto `cfg`. Keys mirror the long CLI flags in
 * snake_case; unknown keys are rejected so typos do not pass silently.
 */
inline void apply_config_json(RunConfig& cfg, const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config file must contain a JSON object");
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "preset") {
                cfg.preset = value.get<std::string>();
            } else if (key == "diffusivity") {
                cfg.diffusivity = detail::json_quantity(value, QuantityKind::diffusivity, "diffusivity");
            } else if (key == "distance") {
                cfg.distance = detail::json_quantity(value, QuantityKind::length, "distance");
            } else if (key == "drift") {
                cfg.drift_velocity = detail::json_quantity(value, QuantityKind::velocity, "drift");
            } else if (key == "bit_period") {
                cfg.bit_period = value.get<double>();
            } else if (key == "guard_mult") {
                cfg.guard_multiplier = value.get<double>();
            } else if (key == "molecules") {
                cfg.molecules_per_pulse = value.get<std::uint64_t>();
            } else if (key == "preamble") {
                cfg.preamble = value.get<std::string>();
            } else if (key == "threshold") {
                cfg.threshold_policy = parse_threshold_policy(value.get<std::string>());
            } else if (key == "alpha") {
                cfg.alpha = value.get<double>();
            } else if (key == "dt") {
                cfg.dt = value.get<double>();
            } else if (key == "steps_per_slot") {
                cfg.steps_per_slot = value.get<unsigned>();
            } else if (key == "seed") {
                cfg.seed = value.get<std::uint64_t>();
            } else if (key == "shards") {
                cfg.shards = value.get<unsigned>();
            } else if (key == "bridge") {
                cfg.bridge_correction = value.get<bool>();
            } else if (key == "interpolate") {
                cfg.interpolate_crossing = value.get<bool>();
            } else if (key == "tail_mult") {
                cfg.tail_delay_spreads = value.get<double>();
            } else if (key == "noiseless") {
                cfg.noiseless = value.get<bool>();
            } else if (key == "out_dir") {
                cfg.output_dir = value.get<std::string>();
            } else if (key == "format") {
                cfg.format = parse_output_format(value.get<std::string>());
            } else {
                throw ConfigError("unknown config key '" + key + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
}

inline void load_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    apply_config_json(cfg, j);
}

}  // namespace moldiff
