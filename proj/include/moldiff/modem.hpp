#pragma once

// Text <-> bits framing, on-off keying onto molecular pulses, and threshold
// detection of per-slot capture counts.

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "physics.hpp"

namespace moldiff {

using Bit = std::uint8_t;
using Bits = std::vector<Bit>;

/// Frame could not be split into whole payload bytes.
class FramingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Received preamble does not match the configured one.
class SyncError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ThresholdPolicy {
    fixed,       ///< alpha times the expected first-slot count of one pulse
    calibrated,  ///< midpoint of mean 1-slot and mean 0-slot counts over the preamble
};

inline Bits default_preamble() { return {1, 0, 1, 0, 1, 0, 1, 0}; }

struct ModulationConfig {
    double bit_period = 1.0;  ///< guard time T [s]
    std::uint64_t molecules_per_pulse = 1000;
    Bits preamble = default_preamble();
    ThresholdPolicy threshold_policy = ThresholdPolicy::fixed;
    double alpha = 0.5;

    void validate() const {
        if (!std::isfinite(bit_period) || bit_period <= 0.0) {
            throw std::invalid_argument("bit period must be positive");
        }
        if (molecules_per_pulse < 1) throw std::invalid_argument("molecules per pulse must be positive");
        if (preamble.empty()) throw std::invalid_argument("preamble must be nonempty");
        for (Bit b : preamble) {
            if (b > 1) throw std::invalid_argument("preamble must contain only 0/1");
        }
        if (threshold_policy == ThresholdPolicy::fixed && !(alpha > 0.0 && alpha < 1.0)) {
            throw std::invalid_argument("threshold fraction alpha must lie in (0, 1)");
        }
    }
};

struct BitFrame {
    Bits bits;
    std::size_t payload_length_bytes = 0;

    friend bool operator==(const BitFrame&, const BitFrame&) = default;
};

/// Preamble followed by the text bytes, most significant bit first.
inline BitFrame encode_text(std::string_view text, const Bits& preamble = default_preamble()) {
    if (text.empty()) throw std::invalid_argument("cannot encode empty text");
    BitFrame frame;
    frame.payload_length_bytes = text.size();
    frame.bits.reserve(preamble.size() + 8 * text.size());
    frame.bits.insert(frame.bits.end(), preamble.begin(), preamble.end());
    for (unsigned char c : text) {
        for (int shift = 7; shift >= 0; --shift) frame.bits.push_back(static_cast<Bit>((c >> shift) & 1U));
    }
    return frame;
}

/// Packs the bits after `preamble_length` into bytes without checking the preamble.
inline std::string pack_payload(std::span<const Bit> bits, std::size_t preamble_length) {
    if (bits.size() < preamble_length || (bits.size() - preamble_length) % 8 != 0) {
        throw FramingError("payload of " + std::to_string(bits.size() - std::min(bits.size(), preamble_length)) +
                           " bits is not a whole number of bytes");
    }
    std::string out;
    out.reserve((bits.size() - preamble_length) / 8);
    for (std::size_t i = preamble_length; i < bits.size(); i += 8) {
        unsigned value = 0;
        for (std::size_t j = 0; j < 8; ++j) value = (value << 1) | (bits[i + j] & 1U);
        out.push_back(static_cast<char>(value));
    }
    return out;
}

inline std::string decode_bits(const BitFrame& frame, const Bits& preamble = default_preamble()) {
    if (frame.bits.size() < preamble.size()) throw FramingError("frame shorter than preamble");
    for (std::size_t i = 0; i < preamble.size(); ++i) {
        if (frame.bits[i] != preamble[i]) throw SyncError("preamble mismatch at bit " + std::to_string(i));
    }
    return pack_payload(frame.bits, preamble.size());
}

/// On-off keying: a 1 at position k releases a pulse at k·T; a 0 releases nothing.
inline EmissionSchedule modulate(const BitFrame& frame, const ModulationConfig& mc) {
    mc.validate();
    EmissionSchedule schedule;
    for (std::size_t k = 0; k < frame.bits.size(); ++k) {
        if (frame.bits[k] > 1) throw std::invalid_argument("frame must contain only 0/1");
        if (frame.bits[k] == 1) {
            schedule.events.push_back({static_cast<double>(k) * mc.bit_period, mc.molecules_per_pulse});
        }
    }
    return schedule;
}

/**
 * Decision threshold for per-slot counts. Under the fixed policy
 * `first_slot_fraction` is the probability that a molecule is captured in
 * the slot of its own release (capture_probability at T for pure diffusion).
 */
inline double detection_threshold(std::span<const std::uint64_t> slot_counts, const ModulationConfig& mc,
                                  double first_slot_fraction) {
    if (mc.threshold_policy == ThresholdPolicy::fixed) {
        if (!(first_slot_fraction >= 0.0 && first_slot_fraction <= 1.0)) {
            throw std::invalid_argument("first-slot capture fraction must lie in [0, 1]");
        }
        return mc.alpha * static_cast<double>(mc.molecules_per_pulse) * first_slot_fraction;
    }
    double sum_one = 0.0;
    double sum_zero = 0.0;
    std::size_t n_one = 0;
    std::size_t n_zero = 0;
    for (std::size_t i = 0; i < mc.preamble.size() && i < slot_counts.size(); ++i) {
        if (mc.preamble[i] == 1) {
            sum_one += static_cast<double>(slot_counts[i]);
            ++n_one;
        } else {
            sum_zero += static_cast<double>(slot_counts[i]);
            ++n_zero;
        }
    }
    const double mean_one = n_one ? sum_one / static_cast<double>(n_one) : 0.0;
    const double mean_zero = n_zero ? sum_zero / static_cast<double>(n_zero) : 0.0;
    return 0.5 * (mean_one + mean_zero);
}

/// Slot k decodes to 1 iff its count is at least the threshold.
inline BitFrame demodulate(std::span<const std::uint64_t> slot_counts, const ModulationConfig& mc,
                           std::size_t expected_bits, double first_slot_fraction) {
    mc.validate();
    if (slot_counts.size() < expected_bits) {
        throw FramingError("received " + std::to_string(slot_counts.size()) + " slots, expected " +
                           std::to_string(expected_bits));
    }
    const double threshold = detection_threshold(slot_counts, mc, first_slot_fraction);
    BitFrame frame;
    frame.bits.reserve(expected_bits);
    for (std::size_t k = 0; k < expected_bits; ++k) {
        frame.bits.push_back(static_cast<double>(slot_counts[k]) >= threshold ? 1 : 0);
    }
    frame.payload_length_bytes = expected_bits > mc.preamble.size() ? (expected_bits - mc.preamble.size()) / 8 : 0;
    return frame;
}

}  // namespace moldiff
