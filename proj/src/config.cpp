#include "cuelab/config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "cuelab/error.hpp"
#include "text.hpp"

namespace cuelab::config {

namespace pt = boost::property_tree;

namespace {

using Section = std::map<std::string, std::string>;

double as_double(const Section& s, const std::string& sec, const std::string& key) {
    try {
        return detail::parse_double(s.at(key), sec + "." + key);
    } catch (const Error& e) {
        throw config_error(e.what());
    }
}

long long as_int(const Section& s, const std::string& sec, const std::string& key) {
    try {
        return detail::parse_int(s.at(key), sec + "." + key);
    } catch (const Error& e) {
        throw config_error(e.what());
    }
}

bool as_bool(const Section& s, const std::string& sec, const std::string& key) {
    const auto& v = s.at(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw config_error(sec + "." + key + ": expected true/false, got '" + v + "'");
}

void check_keys(const Section& s, const std::string& sec, const std::set<std::string>& allowed) {
    for (const auto& [k, v] : s) {
        if (!allowed.count(k)) throw config_error("unknown key '" + k + "' in [" + sec + "]");
    }
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    for (auto& f : detail::split_csv_line(text)) {
        if (!f.empty()) out.push_back(f);
    }
    return out;
}

const std::set<std::string> walker_keys{
    "baseline_cadence_hz", "cue_follow_gain", "baseline_pull_gain", "follow_probability", "cadence_noise_std_hz",
    "noise_correlation_time_s", "memory_halflife_s", "baseline_jitter", "signal_harmonics"};

void apply_walker_overrides(walker::WalkerParams& w, const Section& s, const std::string& sec) {
    auto set = [&](const char* key, double& field) {
        if (s.count(key)) field = as_double(s, sec, key);
    };
    set("baseline_cadence_hz", w.baseline_cadence);
    set("cue_follow_gain", w.cue_follow_gain);
    set("baseline_pull_gain", w.baseline_pull_gain);
    set("follow_probability", w.follow_probability);
    set("cadence_noise_std_hz", w.cadence_noise_std);
    set("noise_correlation_time_s", w.noise_correlation_time);
    set("memory_halflife_s", w.memory_halflife);
    set("baseline_jitter", w.baseline_jitter);
    if (s.count("signal_harmonics")) {
        w.signal_harmonics.clear();
        for (const auto& item : split_list(s.at("signal_harmonics"))) {
            const auto colon = item.find(':');
            walker::Harmonic h;
            try {
                h.amplitude = detail::parse_double(item.substr(0, colon), "harmonic amplitude");
                h.phase = colon == std::string::npos ? 0.0 : detail::parse_double(item.substr(colon + 1), "harmonic phase");
            } catch (const Error& e) {
                throw config_error(sec + ".signal_harmonics: " + e.what());
            }
            w.signal_harmonics.push_back(h);
        }
    }
}

} // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    for (const auto& item : split_list(text)) {
        const auto dash = item.find('-', 1);
        try {
            if (dash == std::string::npos) {
                seeds.push_back(static_cast<std::uint64_t>(detail::parse_int(item, "seed")));
            } else {
                const auto lo = detail::parse_int(item.substr(0, dash), "seed");
                const auto hi = detail::parse_int(item.substr(dash + 1), "seed");
                if (lo < 0 || hi < lo) throw config_error("bad seed range '" + item + "'");
                for (auto s = lo; s <= hi; ++s) seeds.push_back(static_cast<std::uint64_t>(s));
            }
        } catch (const Error& e) {
            throw config_error(std::string("protocol.seeds: ") + e.what());
        }
    }
    if (seeds.empty()) throw config_error("protocol.seeds: empty list");
    return seeds;
}

runner::ExperimentConfig parse(std::istream& in) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw config_error(std::string("config: ") + e.what());
    }

    std::map<std::string, Section> sections;
    for (const auto& [name, child] : tree) {
        if (child.empty()) throw config_error("config: key '" + name + "' outside any section");
        Section s;
        for (const auto& [k, v] : child) s[k] = detail::trim(v.data());
        sections[name] = std::move(s);
    }
    static const std::set<std::string> known{"protocol", "cds", "gp", "optimizer", "walker", "strategies"};
    for (const auto& [name, s] : sections) {
        if (!known.count(name) && name.rfind("persona.", 0) != 0) throw config_error("unknown section [" + name + "]");
    }

    runner::ExperimentConfig cfg;
    if (auto it = sections.find("protocol"); it != sections.end()) {
        const auto& s = it->second;
        const std::string sec = "protocol";
        check_keys(s, sec, {"session_duration_s", "cueing_duration_s", "target_offset", "check_interval_strides",
                            "acceptance_band", "beat_count", "sample_rate_hz", "warmup_s", "log_decimation",
                            "divergence_low_hz", "divergence_high_hz", "seeds", "threads"});
        auto& p = cfg.protocol;
        if (s.count("session_duration_s")) p.session_duration = as_double(s, sec, "session_duration_s");
        if (s.count("cueing_duration_s")) p.cueing_duration = as_double(s, sec, "cueing_duration_s");
        if (s.count("target_offset")) p.target_offset = as_double(s, sec, "target_offset");
        if (s.count("check_interval_strides")) p.check_interval = static_cast<int>(as_int(s, sec, "check_interval_strides"));
        if (s.count("acceptance_band")) p.acceptance_band = as_double(s, sec, "acceptance_band");
        if (s.count("beat_count")) p.beat_count = static_cast<int>(as_int(s, sec, "beat_count"));
        if (s.count("sample_rate_hz")) p.sample_rate = as_double(s, sec, "sample_rate_hz");
        if (s.count("warmup_s")) p.warmup = as_double(s, sec, "warmup_s");
        if (s.count("log_decimation")) p.log_decimation = static_cast<int>(as_int(s, sec, "log_decimation"));
        if (s.count("divergence_low_hz")) p.divergence_low = as_double(s, sec, "divergence_low_hz");
        if (s.count("divergence_high_hz")) p.divergence_high = as_double(s, sec, "divergence_high_hz");
        if (s.count("seeds")) p.seeds = parse_seed_list(s.at("seeds"));
        if (s.count("threads")) p.threads = static_cast<int>(as_int(s, sec, "threads"));
    }
    if (auto it = sections.find("cds"); it != sections.end()) {
        const auto& s = it->second;
        const std::string sec = "cds";
        check_keys(s, sec, {"harmonics", "freq_learn_rate", "coeff_learn_rate", "initial_phase_rad", "initial_frequency_hz"});
        if (s.count("harmonics")) cfg.cds.harmonic_count = static_cast<int>(as_int(s, sec, "harmonics"));
        if (s.count("freq_learn_rate")) cfg.cds.freq_learn_rate = as_double(s, sec, "freq_learn_rate");
        if (s.count("coeff_learn_rate")) cfg.cds.coeff_learn_rate = as_double(s, sec, "coeff_learn_rate");
        if (s.count("initial_phase_rad")) cfg.cds.initial_phase = as_double(s, sec, "initial_phase_rad");
        if (s.count("initial_frequency_hz")) cfg.cds.initial_frequency = cds::two_pi * as_double(s, sec, "initial_frequency_hz");
    }
    if (auto it = sections.find("gp"); it != sections.end()) {
        const auto& s = it->second;
        const std::string sec = "gp";
        check_keys(s, sec, {"length_scale_cadence_hz", "length_scale_cue_hz", "signal_variance", "noise_variance",
                            "jitter", "refit", "refit_every"});
        if (s.count("length_scale_cadence_hz")) cfg.gp.length_scales[0] = as_double(s, sec, "length_scale_cadence_hz");
        if (s.count("length_scale_cue_hz")) cfg.gp.length_scales[1] = as_double(s, sec, "length_scale_cue_hz");
        if (s.count("signal_variance")) cfg.gp.signal_variance = as_double(s, sec, "signal_variance");
        if (s.count("noise_variance")) cfg.gp.noise_variance = as_double(s, sec, "noise_variance");
        if (s.count("jitter")) cfg.gp.jitter = as_double(s, sec, "jitter");
        if (s.count("refit")) cfg.gp_refit = as_bool(s, sec, "refit");
        if (s.count("refit_every")) cfg.gp_refit_every = static_cast<int>(as_int(s, sec, "refit_every"));
    }
    if (auto it = sections.find("optimizer"); it != sections.end()) {
        const auto& s = it->second;
        const std::string sec = "optimizer";
        check_keys(s, sec, {"optimality_tolerance", "max_iterations", "multistart"});
        if (s.count("optimality_tolerance")) cfg.optimizer.optimality_tolerance = as_double(s, sec, "optimality_tolerance");
        if (s.count("max_iterations")) cfg.optimizer.max_iterations = static_cast<int>(as_int(s, sec, "max_iterations"));
        if (s.count("multistart")) cfg.optimizer.multistart_count = static_cast<int>(as_int(s, sec, "multistart"));
    }
    if (auto it = sections.find("walker"); it != sections.end()) {
        const auto& s = it->second;
        const std::string sec = "walker";
        auto allowed = walker_keys;
        allowed.insert("persona");
        check_keys(s, sec, allowed);
        if (s.count("persona")) {
            const auto& name = s.at("persona");
            if (auto custom = sections.find("persona." + name); custom != sections.end()) {
                check_keys(custom->second, custom->first, walker_keys);
                walker::WalkerParams w;
                w.name = name;
                apply_walker_overrides(w, custom->second, custom->first);
                cfg.walker = w;
            } else {
                cfg.walker = walker::persona(name);
            }
        }
        apply_walker_overrides(cfg.walker, s, sec);
    }
    if (auto it = sections.find("strategies"); it != sections.end()) {
        const auto& s = it->second;
        const std::string sec = "strategies";
        check_keys(s, sec, {"list", "p_gain"});
        double gain = 0.5;
        if (s.count("p_gain")) gain = as_double(s, sec, "p_gain");
        if (s.count("list")) {
            cfg.strategies.clear();
            for (const auto& name : split_list(s.at("list"))) {
                try {
                    cfg.strategies.push_back({strategy::parse_kind(name), gain});
                } catch (const Error& e) {
                    throw config_error(e.what());
                }
            }
        } else {
            for (auto& st : cfg.strategies) st.p_gain = gain;
        }
    }
    cfg.validate();
    return cfg;
}

runner::ExperimentConfig load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config " + path.string());
    return parse(in);
}

std::string render(const runner::ExperimentConfig& c) {
    using detail::num;
    std::ostringstream o;
    const auto& p = c.protocol;
    o << "[protocol]\n"
      << "session_duration_s = " << num(p.session_duration) << "\n"
      << "cueing_duration_s = " << num(p.cueing_duration) << "\n"
      << "target_offset = " << num(p.target_offset) << "\n"
      << "check_interval_strides = " << p.check_interval << "\n"
      << "acceptance_band = " << num(p.acceptance_band) << "\n"
      << "beat_count = " << p.beat_count << "\n"
      << "sample_rate_hz = " << num(p.sample_rate) << "\n"
      << "warmup_s = " << num(p.warmup) << "\n"
      << "log_decimation = " << p.log_decimation << "\n"
      << "divergence_low_hz = " << num(p.divergence_low) << "\n"
      << "divergence_high_hz = " << num(p.divergence_high) << "\n"
      << "seeds = ";
    for (std::size_t i = 0; i < p.seeds.size(); ++i) o << (i ? "," : "") << p.seeds[i];
    o << "\nthreads = " << p.threads << "\n\n";

    o << "[cds]\n"
      << "harmonics = " << c.cds.harmonic_count << "\n"
      << "freq_learn_rate = " << num(c.cds.freq_learn_rate) << "\n"
      << "coeff_learn_rate = " << num(c.cds.coeff_learn_rate) << "\n"
      << "initial_phase_rad = " << num(c.cds.initial_phase) << "\n"
      << "initial_frequency_hz = " << num(c.cds.initial_frequency / cds::two_pi) << "\n\n";

    o << "[gp]\n"
      << "length_scale_cadence_hz = " << num(c.gp.length_scales[0]) << "\n"
      << "length_scale_cue_hz = " << num(c.gp.length_scales[1]) << "\n"
      << "signal_variance = " << num(c.gp.signal_variance) << "\n"
      << "noise_variance = " << num(c.gp.noise_variance) << "\n"
      << "jitter = " << num(c.gp.jitter) << "\n"
      << "refit = " << (c.gp_refit ? "true" : "false") << "\n"
      << "refit_every = " << c.gp_refit_every << "\n\n";

    o << "[optimizer]\n"
      << "optimality_tolerance = " << num(c.optimizer.optimality_tolerance) << "\n"
      << "max_iterations = " << c.optimizer.max_iterations << "\n"
      << "multistart = " << c.optimizer.multistart_count << "\n\n";

    const auto& w = c.walker;
    o << "[walker]\n"
      << "baseline_cadence_hz = " << num(w.baseline_cadence) << "\n"
      << "cue_follow_gain = " << num(w.cue_follow_gain) << "\n"
      << "baseline_pull_gain = " << num(w.baseline_pull_gain) << "\n"
      << "follow_probability = " << num(w.follow_probability) << "\n"
      << "cadence_noise_std_hz = " << num(w.cadence_noise_std) << "\n"
      << "noise_correlation_time_s = " << num(w.noise_correlation_time) << "\n"
      << "memory_halflife_s = " << num(w.memory_halflife) << "\n"
      << "baseline_jitter = " << num(w.baseline_jitter) << "\n"
      << "signal_harmonics = ";
    for (std::size_t i = 0; i < w.signal_harmonics.size(); ++i) {
        o << (i ? ", " : "") << num(w.signal_harmonics[i].amplitude) << ':' << num(w.signal_harmonics[i].phase);
    }
    o << "\n\n[strategies]\nlist = ";
    for (std::size_t i = 0; i < c.strategies.size(); ++i) o << (i ? ", " : "") << strategy::to_string(c.strategies[i].kind);
    o << "\np_gain = " << num(c.strategies.empty() ? 0.5 : c.strategies.front().p_gain) << "\n";
    return o.str();
}

} // namespace cuelab::config
