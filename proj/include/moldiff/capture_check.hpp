#pragma once

// Time to reach a target capture fraction, checked against a seeded walk.

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "montecarlo.hpp"
#include "physics.hpp"

namespace moldiff {

struct CaptureCheck {
    double p_target = 0.0;
    double time_s = 0.0;
    double mc_fraction = 0.0;
    double mc_sigma = 0.0;  ///< binomial standard deviation at p_target
    std::uint64_t n_particles = 0;
    double dt_s = 0.0;

    bool within(double n_sigma) const { return std::abs(mc_fraction - p_target) <= n_sigma * mc_sigma; }
};

/// Root-found capture time plus the absorbed fraction of an independent
/// walk run to exactly that time (step fine per the x²/(100·D) rule).
inline CaptureCheck capture_time_check(const ChannelParams& params, double p_target, std::uint64_t n_particles,
                                       std::uint64_t seed, unsigned shards = 1, bool bridge_correction = true) {
    CaptureCheck check;
    check.p_target = p_target;
    check.time_s = time_to_capture(params, p_target);
    check.n_particles = n_particles;

    WalkConfig cfg;
    cfg.channel = params;
    cfg.n_particles = n_particles;
    cfg.t_max = check.time_s;
    const double steps = std::max(2.0, std::ceil(check.time_s / cfg.max_fine_dt()));
    cfg.dt = check.time_s / steps;
    cfg.seed = seed;
    cfg.shards = shards;
    cfg.bridge_correction = bridge_correction;
    check.dt_s = cfg.dt;
    check.mc_fraction = simulate_walk(cfg).absorbed_fraction();
    check.mc_sigma = std::sqrt(p_target * (1.0 - p_target) / static_cast<double>(n_particles));
    return check;
}

struct RegimePoint {
    std::string_view regime;
    ChannelParams params;
};

/// Corners of the intra-cellular (D 1–300 µm²/s, x 1–200 µm) and
/// inter-organism (D 0.1–1 cm²/s, x 1–5 m) signalling ranges.
inline std::vector<RegimePoint> regime_corners() {
    std::vector<RegimePoint> points;
    for (double d : {1e-12, 300e-12}) {
        for (double x : {1e-6, 200e-6}) points.push_back({"intracellular", {d, x, 0.0}});
    }
    for (double d : {0.1e-4, 1e-4}) {
        for (double x : {1.0, 5.0}) points.push_back({"interorganism", {d, x, 0.0}});
    }
    return points;
}

}  // namespace moldiff
