#pragma once

/**
 * @file link.hpp
 * @brief End-to-end text transmission over the diffusion channel and the
 *        rate/capacity bookkeeping around it.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "modem.hpp"
#include "montecarlo.hpp"
#include "physics.hpp"

namespace moldiff {

/// R = B × C. S is carried along but never transformed.
struct RateModel {
    double bandwidth_resource = 0.0;     ///< B: Hz, or number of chemical types
    double capacity_per_resource = 0.0;  ///< C: bits/s per resource unit
    double channel_quality = 0.0;        ///< S: linear signal-to-noise ratio (metadata)

    void validate() const {
        if (!std::isfinite(bandwidth_resource) || bandwidth_resource < 0.0) {
            throw std::invalid_argument("bandwidth resource must be finite and non-negative");
        }
        if (!std::isfinite(capacity_per_resource) || capacity_per_resource < 0.0) {
            throw std::invalid_argument("capacity per resource must be finite and non-negative");
        }
    }
};

inline double data_rate(const RateModel& rm) {
    rm.validate();
    return rm.bandwidth_resource * rm.capacity_per_resource;
}

/// H₂(p) in bits, with 0·log 0 = 0.
inline double binary_entropy(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("probability must lie in [0, 1]");
    auto term = [](double q) { return q > 0.0 ? -q * std::log2(q) : 0.0; };
    return term(p) + term(1.0 - p);
}

/// Binary-symmetric-channel bound (1 − H₂(ber)) / T in bits/s per molecule type.
/// A crossover above one half is folded to 1 − ber.
inline double capacity_estimate(double ber, double bit_period) {
    if (!(ber >= 0.0 && ber <= 1.0)) throw std::invalid_argument("bit error rate must lie in [0, 1]");
    if (!std::isfinite(bit_period) || bit_period <= 0.0) throw std::invalid_argument("bit period must be positive");
    const double p = ber > 0.5 ? 1.0 - ber : ber;
    return std::max(0.0, 1.0 - binary_entropy(p)) / bit_period;
}

struct LinkOptions {
    /// Feed the demodulator rounded expected counts instead of a Monte Carlo trace.
    bool noiseless = false;
    /// Airtime after the last bit slot, in delay spreads.
    double tail_delay_spreads = 5.0;
    /// When nonzero, the walk step is bit_period / steps_per_slot.
    unsigned steps_per_slot = 0;
    /// Set the walk horizon to the frame airtime instead of requiring it.
    bool fit_horizon = false;
    double spread_lo = 0.1;
    double spread_hi = 0.9;
};

struct LinkReport {
    std::size_t bits_sent = 0;
    std::size_t bit_errors = 0;
    double ber = 0.0;
    std::size_t char_errors = 0;
    double delay_spread_s = 0.0;
    double bit_period_s = 0.0;
    double airtime_s = 0.0;
    double throughput_bps = 0.0;
    double capacity_estimate_bps = 0.0;
    std::uint64_t seed = 0;
    std::string recovered_text;
    bool sync_error = false;
    bool framing_error = false;
    bool noiseless = false;
    double threshold = 0.0;

    // config echo
    ChannelParams channel;
    ModulationConfig modulation;
    WalkConfig walk;

    std::vector<std::uint64_t> slot_counts;
};

namespace detail {

inline WalkConfig pilot_walk(const ChannelParams& params, std::uint64_t seed, double horizon,
                             double steps = 2000.0) {
    WalkConfig cfg;
    cfg.channel = params;
    cfg.n_particles = 4000;
    cfg.t_max = horizon;
    cfg.dt = horizon / steps;
    cfg.seed = splitmix64(seed ^ 0x70696c6f74ULL);
    cfg.bridge_correction = true;
    cfg.interpolate_crossing = true;
    return cfg;
}

}  // namespace detail

/**
 * Single-pulse capture window. Pure diffusion uses the closed form; with
 * drift the window is measured on a seeded pilot walk whose horizon grows
 * until the upper quantile is reached.
 */
inline double channel_delay_spread(const ChannelParams& params, std::uint64_t seed, double lo = 0.1,
                                   double hi = 0.9) {
    params.validate();
    if (params.drift_velocity == 0.0) return delay_spread(params, lo, hi);
    if (params.distance == 0.0) throw std::domain_error("receiver at the source: capture is immediate");

    double t_scale = params.distance * params.distance / params.diffusivity;
    if (params.drift_velocity > 0.0) t_scale = std::min(t_scale, params.distance / params.drift_velocity);
    double horizon = 40.0 * t_scale;
    for (int attempt = 0; attempt < 8; ++attempt, horizon *= 4.0) {
        const auto record = simulate_walk(detail::pilot_walk(params, seed, horizon));
        if (record.absorbed_fraction() < hi) continue;
        // second pass resolves the window on a horizon just past the upper quantile
        const auto rank = static_cast<std::size_t>(std::ceil(hi * static_cast<double>(record.n_particles())));
        const double refined = 1.25 * record.absorption_times[rank - 1] + horizon / 2000.0;
        return empirical_delay_spread(detail::pilot_walk(params, seed, std::min(refined, horizon), 4000.0), lo, hi);
    }
    throw std::domain_error("capture fraction never reaches the upper quantile; drift points away from receiver?");
}

/// Probability that a molecule is captured within the bit slot of its own release.
inline double first_slot_fraction(const ChannelParams& params, double bit_period, std::uint64_t seed) {
    params.validate();
    if (params.drift_velocity == 0.0) return capture_probability(params, bit_period);
    return simulate_walk(detail::pilot_walk(params, seed, bit_period)).absorbed_fraction();
}

/// Airtime of a frame: every bit slot plus the configured tail.
inline double frame_airtime(std::size_t frame_bits, double bit_period, double delay_spread_s,
                            const LinkOptions& opts) {
    return static_cast<double>(frame_bits) * bit_period + opts.tail_delay_spreads * delay_spread_s;
}

/// Encode → modulate → channel → detect → decode for one text message.
inline LinkReport run_link(std::string_view text, const ChannelParams& params, const ModulationConfig& mc,
                           const WalkConfig& wc, const LinkOptions& opts = {}) {
    params.validate();
    mc.validate();
    if (!(opts.tail_delay_spreads >= 0.0)) throw std::invalid_argument("tail margin must be non-negative");

    const BitFrame frame = encode_text(text, mc.preamble);
    const std::size_t n_bits = frame.bits.size();

    LinkReport report;
    report.bits_sent = n_bits;
    report.seed = wc.seed;
    report.noiseless = opts.noiseless;
    report.channel = params;
    report.modulation = mc;
    report.bit_period_s = mc.bit_period;
    report.delay_spread_s = channel_delay_spread(params, wc.seed, opts.spread_lo, opts.spread_hi);
    report.airtime_s = frame_airtime(n_bits, mc.bit_period, report.delay_spread_s, opts);

    WalkConfig cfg = wc;
    cfg.channel = params;
    if (opts.steps_per_slot > 0) cfg.dt = mc.bit_period / static_cast<double>(opts.steps_per_slot);
    if (opts.fit_horizon) {
        cfg.t_max = report.airtime_s;
    } else if (cfg.t_max < report.airtime_s * (1.0 - 1e-12)) {
        throw std::invalid_argument("walk horizon " + std::to_string(cfg.t_max) + " s is shorter than the airtime " +
                                    std::to_string(report.airtime_s) + " s");
    }
    cfg.validate();
    report.walk = cfg;

    const EmissionSchedule schedule = modulate(frame, mc);
    if (opts.noiseless) {
        const auto n_slots = slot_of(cfg.t_max, mc.bit_period) + 1;
        const auto expected = expected_slot_counts(schedule, params, mc.bit_period, n_slots);
        report.slot_counts.reserve(expected.size());
        for (double c : expected) report.slot_counts.push_back(static_cast<std::uint64_t>(std::llround(c)));
    } else {
        report.slot_counts = slot_capture_counts(schedule, cfg, mc.bit_period).counts;
    }

    const double fraction =
        mc.threshold_policy == ThresholdPolicy::fixed ? first_slot_fraction(params, mc.bit_period, wc.seed) : 0.0;
    report.threshold = detection_threshold(report.slot_counts, mc, fraction);
    const BitFrame received = demodulate(report.slot_counts, mc, n_bits, fraction);

    for (std::size_t k = 0; k < n_bits; ++k) {
        if (received.bits[k] != frame.bits[k]) ++report.bit_errors;
    }
    report.ber = static_cast<double>(report.bit_errors) / static_cast<double>(n_bits);

    try {
        report.recovered_text = decode_bits(received, mc.preamble);
    } catch (const SyncError&) {
        report.sync_error = true;
        report.recovered_text = pack_payload(received.bits, mc.preamble.size());
    } catch (const FramingError&) {
        report.framing_error = true;
    }
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (i >= report.recovered_text.size() || report.recovered_text[i] != text[i]) ++report.char_errors;
    }

    report.throughput_bps = 8.0 * static_cast<double>(text.size()) / report.airtime_s;
    report.capacity_estimate_bps = capacity_estimate(report.ber, mc.bit_period);
    return report;
}

struct SweepRow {
    double guard_multiplier = 0.0;
    double bit_period_s = 0.0;
    double mean_ber = 0.0;
    double std_ber = 0.0;  ///< population standard deviation over seeds
    std::size_t n_seeds = 0;
};

/**
 * BER versus guard time. Each multiplier m sets bit_period = m × delay
 * spread; seeds wc.seed, wc.seed + 1, ... are run per multiplier. The walk
 * horizon always follows the frame airtime. Rows ascend by multiplier.
 */
inline std::vector<SweepRow> ber_sweep(std::string_view text, const ChannelParams& params,
                                       const ModulationConfig& base, const WalkConfig& wc,
                                       std::span<const double> guard_multipliers, std::size_t n_seeds,
                                       LinkOptions opts = {}) {
    if (n_seeds < 1) throw std::invalid_argument("sweep needs at least one seed");
    if (guard_multipliers.empty()) throw std::invalid_argument("sweep needs at least one guard multiplier");
    for (double m : guard_multipliers) {
        if (!std::isfinite(m) || m <= 0.0) throw std::invalid_argument("guard multipliers must be positive");
    }
    std::vector<double> multipliers(guard_multipliers.begin(), guard_multipliers.end());
    std::sort(multipliers.begin(), multipliers.end());
    opts.fit_horizon = true;

    const double spread = channel_delay_spread(params, wc.seed, opts.spread_lo, opts.spread_hi);
    std::vector<SweepRow> rows;
    rows.reserve(multipliers.size());
    for (double m : multipliers) {
        ModulationConfig mc = base;
        mc.bit_period = m * spread;
        std::vector<double> bers;
        bers.reserve(n_seeds);
        for (std::size_t s = 0; s < n_seeds; ++s) {
            WalkConfig cfg = wc;
            cfg.seed = wc.seed + s;
            bers.push_back(run_link(text, params, mc, cfg, opts).ber);
        }
        double mean = 0.0;
        for (double b : bers) mean += b;
        mean /= static_cast<double>(n_seeds);
        double var = 0.0;
        for (double b : bers) var += (b - mean) * (b - mean);
        var /= static_cast<double>(n_seeds);
        rows.push_back({m, mc.bit_period, mean, std::sqrt(var), n_seeds});
    }
    return rows;
}

}  // namespace moldiff
