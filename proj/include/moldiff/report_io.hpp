#pragma once

// CSV and JSON emission for traces, sweeps and link reports. Floats in CSV
// are written with 9 significant digits so golden files stay byte-stable.

#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "link.hpp"
#include "run_config.hpp"

namespace moldiff {

inline std::string format_float(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", value);
    return buf;
}

inline nlohmann::ordered_json to_json(const ChannelParams& p) {
    nlohmann::ordered_json j;
    j["diffusivity_m2_s"] = p.diffusivity;
    j["distance_m"] = p.distance;
    j["drift_velocity_m_s"] = p.drift_velocity;
    return j;
}

inline nlohmann::ordered_json to_json(const ModulationConfig& mc) {
    nlohmann::ordered_json j;
    j["bit_period_s"] = mc.bit_period;
    j["molecules_per_pulse"] = mc.molecules_per_pulse;
    j["preamble"] = bits_to_string(mc.preamble);
    j["threshold_policy"] = std::string(to_string(mc.threshold_policy));
    j["alpha"] = mc.alpha;
    return j;
}

// No shard count: results never depend on it.
inline nlohmann::ordered_json to_json(const WalkConfig& wc) {
    nlohmann::ordered_json j;
    j["dt_s"] = wc.dt;
    j["t_max_s"] = wc.t_max;
    j["seed"] = wc.seed;
    j["bridge_correction"] = wc.bridge_correction;
    j["interpolate_crossing"] = wc.interpolate_crossing;
    return j;
}

/// LinkReport schema: every scalar field in snake_case plus a config echo.
inline nlohmann::ordered_json to_json(const LinkReport& r) {
    nlohmann::ordered_json j;
    j["bits_sent"] = r.bits_sent;
    j["bit_errors"] = r.bit_errors;
    j["ber"] = r.ber;
    j["char_errors"] = r.char_errors;
    j["delay_spread_s"] = r.delay_spread_s;
    j["bit_period_s"] = r.bit_period_s;
    j["airtime_s"] = r.airtime_s;
    j["throughput_bps"] = r.throughput_bps;
    j["capacity_estimate_bps"] = r.capacity_estimate_bps;
    j["capacity_method"] = "binary symmetric channel bound on measured BER";
    j["seed"] = r.seed;
    j["recovered_text"] = r.recovered_text;
    j["sync_error"] = r.sync_error;
    j["framing_error"] = r.framing_error;
    j["noiseless"] = r.noiseless;
    j["threshold"] = r.threshold;
    j["config"] = {{"channel", to_json(r.channel)}, {"modulation", to_json(r.modulation)}, {"walk", to_json(r.walk)}};
    return j;
}

inline void write_slots_csv(std::ostream& out, std::span<const std::uint64_t> counts, double slot_period) {
    out << "slot_index,t_start_s,count\n";
    for (std::size_t k = 0; k < counts.size(); ++k) {
        out << k << ',' << format_float(static_cast<double>(k) * slot_period) << ',' << counts[k] << '\n';
    }
}

inline nlohmann::ordered_json slots_to_json(std::span<const std::uint64_t> counts, double slot_period) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < counts.size(); ++k) {
        rows.push_back({{"slot_index", k}, {"t_start_s", static_cast<double>(k) * slot_period}, {"count", counts[k]}});
    }
    return rows;
}

inline void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
    out << "guard_multiplier,bit_period_s,mean_ber,std_ber,n_seeds\n";
    for (const auto& r : rows) {
        out << format_float(r.guard_multiplier) << ',' << format_float(r.bit_period_s) << ','
            << format_float(r.mean_ber) << ',' << format_float(r.std_ber) << ',' << r.n_seeds << '\n';
    }
}

inline nlohmann::ordered_json sweep_to_json(std::span<const SweepRow> rows) {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        out.push_back({{"guard_multiplier", r.guard_multiplier},
                       {"bit_period_s", r.bit_period_s},
                       {"mean_ber", r.mean_ber},
                       {"std_ber", r.std_ber},
                       {"n_seeds", r.n_seeds}});
    }
    return out;
}

}  // namespace moldiff
