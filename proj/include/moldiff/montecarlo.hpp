#pragma once

// Seeded Brownian random-walk simulator for the 1-D absorbing receiver.
//
// Every particle owns an RNG stream derived from (seed, particle index), so
// results are identical for any shard count or thread interleaving.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "physics.hpp"

namespace moldiff {

struct WalkConfig {
    ChannelParams channel;
    std::uint64_t n_particles = 1;
    double dt = 1e-3;       ///< step [s]
    double t_max = 1.0;     ///< horizon [s]
    std::uint64_t seed = 0;
    unsigned shards = 1;
    /// Record absorption at the linearly interpolated crossing instant
    /// instead of the end of the crossing step.
    bool interpolate_crossing = false;
    /// Brownian-bridge test for excursions past the receiver between two
    /// sampled positions that both lie below it.
    bool bridge_correction = false;

    void validate() const {
        channel.validate();
        if (n_particles < 1) throw std::invalid_argument("n_particles must be positive");
        if (!std::isfinite(dt) || dt <= 0.0) throw std::invalid_argument("dt must be positive");
        if (!std::isfinite(t_max) || t_max <= 0.0) throw std::invalid_argument("t_max must be positive");
        if (!(dt < t_max)) throw std::invalid_argument("dt must be smaller than t_max");
        if (shards < 1) throw std::invalid_argument("shards must be positive");
    }

    /// Largest step keeping a single uncorrected step unlikely to jump the receiver.
    double max_fine_dt() const {
        return channel.distance * channel.distance / (100.0 * channel.diffusivity);
    }

    friend bool operator==(const WalkConfig&, const WalkConfig&) = default;
};

/// Warning text when the uncorrected step rule is coarser than x²/(100·D).
inline std::optional<std::string> coarse_step_warning(const WalkConfig& cfg) {
    if (cfg.bridge_correction || cfg.channel.distance == 0.0) return std::nullopt;
    if (cfg.dt <= cfg.max_fine_dt()) return std::nullopt;
    return "warning: dt = " + std::to_string(cfg.dt) + " s exceeds x^2/(100 D) = " +
           std::to_string(cfg.max_fine_dt()) + " s; boundary overshoot will bias capture low";
}

struct AbsorptionRecord {
    std::vector<double> absorption_times;  ///< sorted ascending, each in (0, t_max]
    std::uint64_t n_escaped = 0;

    std::uint64_t n_absorbed() const { return absorption_times.size(); }
    std::uint64_t n_particles() const { return n_absorbed() + n_escaped; }
    double absorbed_fraction() const {
        return static_cast<double>(n_absorbed()) / static_cast<double>(n_particles());
    }

    /// Number of particles absorbed at or before t.
    std::uint64_t absorbed_by(double t) const {
        return static_cast<std::uint64_t>(
            std::upper_bound(absorption_times.begin(), absorption_times.end(), t) - absorption_times.begin());
    }

    friend bool operator==(const AbsorptionRecord&, const AbsorptionRecord&) = default;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t particle_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

constexpr double kNotAbsorbed = -1.0;

// Walks one particle released at `start` until absorption or the horizon.
inline double walk_particle(const WalkConfig& cfg, double start, std::uint64_t stream) {
    const double x = cfg.channel.distance;
    const double d = cfg.channel.diffusivity;
    const double v = cfg.channel.drift_velocity;
    if (start >= cfg.t_max) return kNotAbsorbed;
    if (x == 0.0) return std::min(start + cfg.dt, cfg.t_max);

    boost::random::mt19937_64 engine(stream);
    boost::random::normal_distribution<double> gauss(0.0, 1.0);
    boost::random::uniform_01<double> unit;

    const double full_sd = std::sqrt(2.0 * d * cfg.dt);
    double pos = 0.0;
    double t_prev = start;
    for (std::uint64_t step = 1;; ++step) {
        double t_next = start + static_cast<double>(step) * cfg.dt;
        double h = cfg.dt;
        double sd = full_sd;
        if (t_next >= cfg.t_max * (1.0 - 1e-12)) {
            t_next = cfg.t_max;
            h = t_next - t_prev;
            if (h <= 0.0) return kNotAbsorbed;
            sd = std::sqrt(2.0 * d * h);
        }
        const double next = pos + v * h + sd * gauss(engine);
        if (next >= x) {
            if (cfg.interpolate_crossing) {
                return t_prev + h * (x - pos) / (next - pos);
            }
            return t_next;
        }
        if (cfg.bridge_correction) {
            // P(bridge between pos and next touches x) = exp(-(x-pos)(x-next)/(D h))
            const double exponent = (x - pos) * (x - next) / (d * h);
            if (exponent < 40.0 && unit(engine) < std::exp(-exponent)) return t_next;
        }
        pos = next;
        t_prev = t_next;
        if (t_next >= cfg.t_max) return kNotAbsorbed;
    }
}

// Walks particles with the given release times; particle i uses stream
// particle_seed(cfg.seed, i). Shards are contiguous index blocks.
inline std::vector<double> walk_all(const WalkConfig& cfg, std::span<const double> starts) {
    std::vector<double> out(starts.size(), kNotAbsorbed);
    const std::size_t n = starts.size();
    const std::size_t shards = std::min<std::size_t>(cfg.shards, std::max<std::size_t>(n, 1));
    auto run = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            out[i] = walk_particle(cfg, starts[i], particle_seed(cfg.seed, i));
        }
    };
    if (shards <= 1) {
        run(0, n);
        return out;
    }
    std::vector<std::jthread> workers;
    workers.reserve(shards);
    for (std::size_t s = 0; s < shards; ++s) {
        workers.emplace_back(run, n * s / shards, n * (s + 1) / shards);
    }
    workers.clear();
    return out;
}

}  // namespace detail

/// Releases cfg.n_particles at t = 0 and records when each is absorbed.
inline AbsorptionRecord simulate_walk(const WalkConfig& cfg) {
    cfg.validate();
    if (auto warning = coarse_step_warning(cfg)) std::clog << *warning << '\n';

    const std::vector<double> starts(cfg.n_particles, 0.0);
    const auto times = detail::walk_all(cfg, starts);

    AbsorptionRecord record;
    record.absorption_times.reserve(times.size());
    for (double t : times) {
        if (t == detail::kNotAbsorbed) {
            ++record.n_escaped;
        } else {
            record.absorption_times.push_back(t);
        }
    }
    std::sort(record.absorption_times.begin(), record.absorption_times.end());
    return record;
}

/// Fraction of particles absorbed by each sample time.
inline std::vector<double> empirical_capture_curve(const WalkConfig& cfg, std::span<const double> sample_times) {
    for (std::size_t i = 0; i < sample_times.size(); ++i) {
        if (!(sample_times[i] >= 0.0) || sample_times[i] > cfg.t_max) {
            throw std::invalid_argument("sample times must lie in [0, t_max]");
        }
        if (i > 0 && !(sample_times[i] > sample_times[i - 1])) {
            throw std::invalid_argument("sample times must be strictly increasing");
        }
    }
    const auto record = simulate_walk(cfg);
    std::vector<double> curve;
    curve.reserve(sample_times.size());
    for (double t : sample_times) {
        curve.push_back(static_cast<double>(record.absorbed_by(t)) / static_cast<double>(cfg.n_particles));
    }
    return curve;
}

/// Per-slot capture counts seen by the receiver for a whole emission schedule.
struct SlotTrace {
    double slot_period = 0.0;
    std::vector<std::uint64_t> counts;
    std::uint64_t n_escaped = 0;

    std::uint64_t total_absorbed() const {
        std::uint64_t n = 0;
        for (auto c : counts) n += c;
        return n;
    }

    friend bool operator==(const SlotTrace&, const SlotTrace&) = default;
};

/// Slot that receives an absorption recorded at time t. Absorptions are
/// stamped at the end of the step in which they occur, so slot k covers
/// (k·T, (k+1)·T]; the small tolerance keeps step ends that land on a slot
/// boundary in the slot they close.
inline std::size_t slot_of(double t, double slot_period) {
    const double ratio = t / slot_period;
    const double k = std::ceil(ratio - 1e-9) - 1.0;
    return k <= 0.0 ? 0 : static_cast<std::size_t>(k);
}

/**
 * Simulates molecule_count particles per emission (released at the emission
 * time) and counts absorptions per slot up to cfg.t_max. cfg.n_particles is
 * ignored; the schedule sets the population.
 */
inline SlotTrace slot_capture_counts(const EmissionSchedule& schedule, const WalkConfig& cfg, double slot_period) {
    if (!std::isfinite(slot_period) || slot_period <= 0.0) {
        throw std::invalid_argument("slot period must be positive");
    }
    schedule.validate();
    WalkConfig run = cfg;
    run.n_particles = std::max<std::uint64_t>(schedule.total_molecules(), 1);
    run.validate();
    if (auto warning = coarse_step_warning(run)) std::clog << *warning << '\n';

    std::vector<double> starts;
    starts.reserve(schedule.total_molecules());
    for (const auto& e : schedule.events) starts.insert(starts.end(), e.molecules, e.time);
    const auto times = detail::walk_all(run, starts);

    SlotTrace trace;
    trace.slot_period = slot_period;
    trace.counts.assign(slot_of(cfg.t_max, slot_period) + 1, 0);
    for (double t : times) {
        if (t == detail::kNotAbsorbed) {
            ++trace.n_escaped;
        } else {
            ++trace.counts[std::min(slot_of(t, slot_period), trace.counts.size() - 1)];
        }
    }
    return trace;
}

/**
 * Empirical lo→hi capture window of a single pulse: the difference between
 * the times at which fractions lo and hi of the released particles have been
 * absorbed. Throws when the horizon ends before fraction hi is reached.
 */
inline double empirical_delay_spread(const WalkConfig& cfg, double lo = 0.1, double hi = 0.9) {
    if (!(lo > 0.0 && lo < hi && hi < 1.0)) {
        throw std::invalid_argument("delay spread window requires 0 < lo < hi < 1");
    }
    const auto record = simulate_walk(cfg);
    const double n = static_cast<double>(record.n_particles());
    auto quantile = [&](double p) {
        const auto rank = static_cast<std::size_t>(std::ceil(p * n));
        if (rank == 0 || rank > record.absorption_times.size()) {
            throw std::domain_error("horizon too short to reach the requested capture fraction");
        }
        return record.absorption_times[rank - 1];
    };
    return quantile(hi) - quantile(lo);
}

}  // namespace moldiff
