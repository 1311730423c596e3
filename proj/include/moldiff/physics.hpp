#pragma once

/**
 * @file physics.hpp
 * @brief Closed-form 1-D diffusion channel: pulse response, first-passage
 *        capture probability, its inversion, delay spread and superposition.
 *
 * Geometry is a line with a point release at the origin and an absorbing
 * receiver at distance x. All quantities are SI (metres, seconds).
 */

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace moldiff {

/// Physical channel between transmitter and receiver.
struct ChannelParams {
    double diffusivity = 1.0;     ///< D [m²/s], > 0
    double distance = 1.0;        ///< x [m], >= 0
    double drift_velocity = 0.0;  ///< v [m/s], positive towards the receiver

    void validate() const {
        if (!std::isfinite(diffusivity) || !std::isfinite(distance) || !std::isfinite(drift_velocity)) {
            throw std::invalid_argument("channel parameters must be finite");
        }
        if (diffusivity <= 0.0) {
            throw std::invalid_argument("diffusivity must be positive");
        }
        if (distance < 0.0) {
            throw std::invalid_argument("distance must be non-negative");
        }
    }

    friend bool operator==(const ChannelParams&, const ChannelParams&) = default;
};

/// One instantaneous release.
struct Emission {
    double time = 0.0;              ///< [s], >= 0
    std::uint64_t molecules = 1;    ///< >= 1

    friend bool operator==(const Emission&, const Emission&) = default;
};

/// Timed impulses; the transmit waveform.
struct EmissionSchedule {
    std::vector<Emission> events;

    void validate() const {
        for (std::size_t i = 0; i < events.size(); ++i) {
            const auto& e = events[i];
            if (!std::isfinite(e.time) || e.time < 0.0) {
                throw std::invalid_argument("emission time must be finite and non-negative");
            }
            if (e.molecules < 1) {
                throw std::invalid_argument("emission must release at least one molecule");
            }
            if (i > 0 && !(e.time > events[i - 1].time)) {
                throw std::invalid_argument("emission times must be strictly increasing");
            }
        }
    }

    std::uint64_t total_molecules() const {
        std::uint64_t n = 0;
        for (const auto& e : events) n += e.molecules;
        return n;
    }

    friend bool operator==(const EmissionSchedule&, const EmissionSchedule&) = default;
};

namespace detail {

inline void require_no_drift(const ChannelParams& params, const char* what) {
    if (params.drift_velocity != 0.0) {
        throw std::invalid_argument(std::string(what) +
                                    ": closed form requires zero drift; use the Monte Carlo channel");
    }
}

}  // namespace detail

/**
 * Concentration density of a unit release at distance `params.distance`
 * after time t:
 *
 *   f(x, t) = (4πDt)^(-1/2) · exp(-(x - vt)² / (4Dt))
 *
 * With zero drift this is the free-space Gaussian pulse response.
 */
inline double concentration_pdf(const ChannelParams& params, double t) {
    params.validate();
    if (!std::isfinite(t) || t <= 0.0) {
        throw std::invalid_argument("pulse response is only defined for t > 0");
    }
    const double four_dt = 4.0 * params.diffusivity * t;
    const double offset = params.distance - params.drift_velocity * t;
    return std::exp(-offset * offset / four_dt) / std::sqrt(std::numbers::pi * four_dt);
}

/**
 * Probability that a molecule released at t = 0 has been absorbed by the
 * receiver by time t (1-D first passage under pure diffusion):
 *
 *   p_c(x, t) = erfc( x / (2·sqrt(D·t)) )
 */
inline double capture_probability(const ChannelParams& params, double t) {
    params.validate();
    detail::require_no_drift(params, "capture_probability");
    if (std::isnan(t) || t < 0.0) {
        throw std::invalid_argument("capture time must be non-negative");
    }
    if (params.distance == 0.0) return 1.0;
    if (t == 0.0) return 0.0;
    const double arg = params.distance / (2.0 * std::sqrt(params.diffusivity * t));
    return std::erfc(arg);
}

/**
 * Smallest t with capture_probability(params, t) = p_target, found by
 * bisection in log-time on the monotone capture curve. The bracket starts
 * at the diffusion time x²/D and only ever scales by powers of two, so the
 * result scales exactly as x²/D.
 */
inline double time_to_capture(const ChannelParams& params, double p_target) {
    params.validate();
    detail::require_no_drift(params, "time_to_capture");
    if (!(p_target > 0.0 && p_target < 1.0)) {
        throw std::invalid_argument("target capture probability must lie in (0, 1)");
    }
    if (params.distance == 0.0) {
        throw std::domain_error("receiver at the source: capture is immediate");
    }

    const double scale = params.distance * params.distance / params.diffusivity;
    auto below = [&](double t) { return capture_probability(params, t) < p_target; };

    double lo = scale;
    double hi = scale;
    while (below(hi)) hi *= 2.0;
    while (!below(lo)) {
        lo *= 0.5;
        if (lo == 0.0) return hi;  // unreachable for p_target in (0,1)
    }
    // invariant: p(lo) < p_target <= p(hi)
    for (int iter = 0; iter < 200 && hi / lo - 1.0 > 1e-14; ++iter) {
        const double mid = std::sqrt(lo * hi);
        if (mid <= lo || mid >= hi) break;
        if (below(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return hi;
}

/// Width of the capture window between quantiles lo and hi of a
/// single pulse (default 10% to 90%).
inline double delay_spread(const ChannelParams& params, double lo = 0.1, double hi = 0.9) {
    if (!(lo > 0.0 && lo < hi && hi < 1.0)) {
        throw std::invalid_argument("delay spread window requires 0 < lo < hi < 1");
    }
    return time_to_capture(params, hi) - time_to_capture(params, lo);
}

/// Expected cumulative number of molecules absorbed by time t for a train
/// of releases; the channel is linear so pulse responses add.
inline double superpose_capture(const EmissionSchedule& schedule, const ChannelParams& params, double t) {
    params.validate();
    detail::require_no_drift(params, "superpose_capture");
    schedule.validate();
    if (std::isnan(t) || t < 0.0) {
        throw std::invalid_argument("time must be non-negative");
    }
    double total = 0.0;
    for (const auto& e : schedule.events) {
        if (e.time > t) break;
        total += static_cast<double>(e.molecules) * capture_probability(params, t - e.time);
    }
    return total;
}

/// Expected number of molecules absorbed in each slot [k·T, (k+1)·T).
inline std::vector<double> expected_slot_counts(const EmissionSchedule& schedule, const ChannelParams& params,
                                                double slot_period, std::size_t n_slots) {
    if (!(slot_period > 0.0) || !std::isfinite(slot_period)) {
        throw std::invalid_argument("slot period must be positive");
    }
    std::vector<double> counts(n_slots, 0.0);
    double previous = superpose_capture(schedule, params, 0.0);
    for (std::size_t k = 0; k < n_slots; ++k) {
        const double next = superpose_capture(schedule, params, static_cast<double>(k + 1) * slot_period);
        counts[k] = next - previous;
        previous = next;
    }
    return counts;
}

}  // namespace moldiff
