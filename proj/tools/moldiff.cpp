// moldiff: command-line front end for the molecular diffusion link simulator.
//
// Exit codes: 0 success, 2 usage/config error, 1 runtime failure.

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "moldiff/moldiff.hpp"

namespace fs = std::filesystem;
using namespace moldiff;

namespace {

struct Flags {
    std::optional<std::string> config;
    std::optional<std::string> preset;
    std::optional<std::string> diffusivity;
    std::optional<std::string> distance;
    std::optional<std::string> drift;
    std::optional<double> bit_period;
    std::optional<double> guard_mult;
    std::optional<std::uint64_t> molecules;
    std::optional<std::string> preamble;
    std::optional<std::string> threshold;
    std::optional<double> alpha;
    std::optional<double> dt;
    std::optional<unsigned> steps_per_slot;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> shards;
    bool no_bridge = false;
    bool interpolate = false;
    std::optional<double> tail_mult;
    bool noiseless = false;
    std::optional<std::string> out_dir;
    std::optional<std::string> format;
};

void add_channel_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "JSON config file; flags override its values");
    cmd->add_option("--preset", f.preset, "Channel preset: intracellular | interorganism");
    cmd->add_option("--diffusivity", f.diffusivity, "Diffusivity, e.g. 100um2/s, 0.5cm2/s, 1e-9 (m2/s)");
    cmd->add_option("--distance", f.distance, "Transmitter-receiver distance, e.g. 100um, 2m");
    cmd->add_option("--drift", f.drift, "Drift velocity towards the receiver, e.g. 0.5m/s");
    cmd->add_option("--seed", f.seed, "Random seed (default: $MOLDIFF_SEED or 1)");
    cmd->add_option("--shards", f.shards, "Parallel walk partitions; never changes results");
    cmd->add_flag("--no-bridge", f.no_bridge, "Disable the Brownian-bridge crossing test");
    cmd->add_option("--out-dir", f.out_dir, "Output directory");
    cmd->add_option("--format", f.format, "Trace/sweep file format: csv | json");
}

void add_link_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--bit-period", f.bit_period, "Bit period T in seconds (overrides --guard-mult)");
    cmd->add_option("--guard-mult", f.guard_mult, "Bit period as a multiple of the 10%-90% delay spread");
    cmd->add_option("--molecules", f.molecules, "Molecules per pulse");
    cmd->add_option("--preamble", f.preamble, "Preamble bit pattern");
    cmd->add_option("--threshold", f.threshold, "Threshold policy: fixed | calibrated");
    cmd->add_option("--alpha", f.alpha, "Fixed threshold fraction of the expected first-slot count");
    cmd->add_option("--dt", f.dt, "Walk step in seconds (default: bit period / steps-per-slot)");
    cmd->add_option("--steps-per-slot", f.steps_per_slot, "Walk steps per bit slot");
    cmd->add_flag("--interpolate", f.interpolate, "Interpolate absorption instants within the crossing step");
    cmd->add_option("--tail-mult", f.tail_mult, "Airtime tail after the last slot, in delay spreads");
    cmd->add_flag("--noiseless", f.noiseless, "Use the expected-count channel instead of Monte Carlo");
}

std::uint64_t parse_seed(const std::string& text) {
    std::uint64_t value = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size()) {
        throw ConfigError("MOLDIFF_SEED is not an unsigned integer: '" + text + "'");
    }
    return value;
}

// defaults < MOLDIFF_SEED < config file < flags
RunConfig resolve(const Flags& f) {
    RunConfig cfg;
    if (const char* env = std::getenv("MOLDIFF_SEED"); env && *env) cfg.seed = parse_seed(env);
    if (f.config) load_config_file(cfg, *f.config);

    if (f.preset) cfg.preset = *f.preset;
    if (f.diffusivity) cfg.diffusivity = parse_quantity(*f.diffusivity, QuantityKind::diffusivity);
    if (f.distance) cfg.distance = parse_quantity(*f.distance, QuantityKind::length);
    if (f.drift) cfg.drift_velocity = parse_quantity(*f.drift, QuantityKind::velocity);
    if (f.bit_period) cfg.bit_period = *f.bit_period;
    if (f.guard_mult) cfg.guard_multiplier = *f.guard_mult;
    if (f.molecules) cfg.molecules_per_pulse = *f.molecules;
    if (f.preamble) cfg.preamble = *f.preamble;
    if (f.threshold) cfg.threshold_policy = parse_threshold_policy(*f.threshold);
    if (f.alpha) cfg.alpha = *f.alpha;
    if (f.dt) cfg.dt = *f.dt;
    if (f.steps_per_slot) cfg.steps_per_slot = *f.steps_per_slot;
    if (f.seed) cfg.seed = *f.seed;
    if (f.shards) cfg.shards = *f.shards;
    if (f.no_bridge) cfg.bridge_correction = false;
    if (f.interpolate) cfg.interpolate_crossing = true;
    if (f.tail_mult) cfg.tail_delay_spreads = *f.tail_mult;
    if (f.noiseless) cfg.noiseless = true;
    if (f.out_dir) cfg.output_dir = *f.out_dir;
    if (f.format) cfg.format = parse_output_format(*f.format);
    cfg.validate();
    return cfg;
}

std::ofstream open_output(const RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.output_dir);
    const fs::path path = fs::path(cfg.output_dir) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

std::vector<double> parse_multipliers(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const double m = parse_number(item);
        if (!(m > 0.0)) throw ConfigError("guard multipliers must be positive: '" + item + "'");
        out.push_back(m);
    }
    if (out.empty() || text.back() == ',') throw ConfigError("malformed multiplier list: '" + text + "'");
    return out;
}

int cmd_send(const Flags& f, const std::string& text) {
    const RunConfig cfg = resolve(f);
    const ChannelParams params = cfg.channel();
    const double spread = channel_delay_spread(params, cfg.seed);
    const ModulationConfig mc = cfg.modulation(cfg.bit_period.value_or(cfg.guard_multiplier * spread));
    const LinkReport report = run_link(text, params, mc, cfg.walk(params), cfg.link_options());

    open_output(cfg, "report.json") << to_json(report).dump(2) << '\n';
    if (cfg.format == OutputFormat::csv) {
        auto out = open_output(cfg, "slots.csv");
        write_slots_csv(out, report.slot_counts, mc.bit_period);
    } else {
        open_output(cfg, "slots.json") << slots_to_json(report.slot_counts, mc.bit_period).dump(2) << '\n';
    }

    std::cout << "recovered: " << report.recovered_text << '\n'
              << "ber: " << format_float(report.ber) << " (" << report.bit_errors << '/' << report.bits_sent
              << " bits)\n";
    if (report.sync_error) std::cout << "warning: preamble mismatch\n";
    return 0;
}

int cmd_capture_time(const Flags& f, double p_target, std::uint64_t particles, bool regime_table) {
    const RunConfig cfg = resolve(f);
    if (!(p_target > 0.0 && p_target < 1.0)) throw ConfigError("--p must lie in (0, 1)");
    if (particles < 1) throw ConfigError("--particles must be positive");
    const ChannelParams params = cfg.channel();

    std::ostringstream table;
    table << "label,diffusivity_m2_s,distance_m,p_target,time_s,mc_fraction,mc_sigma,within_3sigma\n";
    const auto check = capture_time_check(params, p_target, particles, cfg.seed, cfg.shards, cfg.bridge_correction);
    table << "configured," << format_float(params.diffusivity) << ',' << format_float(params.distance) << ','
          << format_float(p_target) << ',' << format_float(check.time_s) << ',' << format_float(check.mc_fraction)
          << ',' << format_float(check.mc_sigma) << ',' << (check.within(3.0) ? "yes" : "no") << '\n';
    if (regime_table) {
        for (const auto& point : regime_corners()) {
            table << point.regime << ',' << format_float(point.params.diffusivity) << ','
                  << format_float(point.params.distance) << ',' << format_float(p_target) << ','
                  << format_float(time_to_capture(point.params, p_target)) << ",,,\n";
        }
    }
    std::cout << table.str();
    if (f.out_dir) open_output(cfg, "capture_time.csv") << table.str();
    return 0;
}

int cmd_sweep(const Flags& f, const std::string& text, const std::string& multipliers, std::size_t n_seeds) {
    const RunConfig cfg = resolve(f);
    const auto mults = parse_multipliers(multipliers);
    if (n_seeds < 1) throw ConfigError("--seeds must be positive");
    const ChannelParams params = cfg.channel();
    const ModulationConfig mc = cfg.modulation(1.0);
    const auto rows = ber_sweep(text, params, mc, cfg.walk(params), mults, n_seeds, cfg.link_options());

    if (cfg.format == OutputFormat::csv) {
        auto out = open_output(cfg, "sweep.csv");
        write_sweep_csv(out, rows);
    } else {
        open_output(cfg, "sweep.json") << sweep_to_json(rows).dump(2) << '\n';
    }
    write_sweep_csv(std::cout, rows);
    return 0;
}

int cmd_rate(const std::string& b_text, const std::string& c_text) {
    RateModel rm;
    rm.bandwidth_resource = parse_number(b_text);
    rm.capacity_per_resource = parse_number(c_text);
    if (rm.bandwidth_resource < 0.0 || rm.capacity_per_resource < 0.0) {
        throw ConfigError("bandwidth and capacity must be non-negative");
    }
    std::cout << format_float(data_rate(rm)) << " bits/s\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Molecular diffusion channel link simulator"};
    app.require_subcommand(1);

    Flags flags;

    std::string text;
    auto* send = app.add_subcommand("send", "Transmit a text message over the simulated link");
    send->add_option("--text", text, "Message to send")->required();
    add_channel_flags(send, flags);
    add_link_flags(send, flags);

    double p_target = 0.9;
    std::uint64_t particles = 100000;
    bool regime_table = false;
    auto* capture = app.add_subcommand("capture-time", "Time to capture a target fraction of a pulse");
    capture->add_option("--p", p_target, "Target capture probability in (0, 1)");
    capture->add_option("--particles", particles, "Monte Carlo particles for the check");
    capture->add_flag("--regime-table", regime_table, "Also tabulate the corners of both signalling regimes");
    add_channel_flags(capture, flags);

    std::string multipliers = "0.25,0.5,1,2,4";
    std::size_t n_seeds = 20;
    std::string sweep_text;
    auto* sweep = app.add_subcommand("sweep", "Mean BER versus guard time");
    sweep->add_option("--text", sweep_text, "Message to send")->required();
    sweep->add_option("--multipliers", multipliers, "Comma-separated guard multipliers of the delay spread");
    sweep->add_option("--seeds", n_seeds, "Seeds per multiplier");
    add_channel_flags(sweep, flags);
    add_link_flags(sweep, flags);

    std::string rate_b;
    std::string rate_c;
    auto* rate = app.add_subcommand("rate", "Data rate R = B x C");
    rate->add_option("B", rate_b, "Resource amount (Hz or number of chemical types)")->required();
    rate->add_option("C", rate_c, "Capacity per resource unit (bits/s per unit)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (send->parsed()) return cmd_send(flags, text);
        if (capture->parsed()) return cmd_capture_time(flags, p_target, particles, regime_table);
        if (sweep->parsed()) return cmd_sweep(flags, sweep_text, multipliers, n_seeds);
        if (rate->parsed()) return cmd_rate(rate_b, rate_c);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
