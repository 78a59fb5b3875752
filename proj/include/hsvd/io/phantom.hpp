#ifndef HSVD_IO_PHANTOM_HPP
#define HSVD_IO_PHANTOM_HPP

#include <hsvd/error.hpp>
#include <hsvd/io/atomic_write.hpp>
#include <hsvd/model.hpp>

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace hsvd::io {

/// One named resonance, placed on the chemical-shift axis.
struct PhantomComponent {
    std::string name;
    double      ppm       = 0;
    double      amplitude = 0;
    double      damping   = 0; /// 1/s
    double      phase     = 0; /// radians
};

/// Synthetic acquisition description, stored as JSON.
struct PhantomSpec {
    std::vector<PhantomComponent>                components;
    double                                       noise_sigma = 0; /// rms magnitude of the complex noise, E|n|^2 = sigma^2
    std::uint64_t                                noise_seed  = 0;
    std::size_t                                  n_samples   = 0;
    Acquisition                                  acq;
    std::optional<std::vector<PhantomComponent>> water_reference; /// unsuppressed-water acquisition
    std::vector<double>                          eddy_phase;      /// theta(t) = sum_i c_i t^i radians, t in seconds
};

/// Circular complex Gaussian noise from mt19937_64 and the Box-Muller transform.
///
/// Each sample draws two 64-bit words x1, x2 and maps them to u = (x >> 11) * 2^-53.
/// With u1' = 1 - u1 in (0, 1], the sample is sigma * sqrt(-ln u1') * exp(j 2 pi u2),
/// so that E|n|^2 = sigma^2. The definition is fixed so any implementation
/// reproduces the same noise for the same seed.
class NoiseGenerator {
public:
    NoiseGenerator(std::uint64_t seed, double sigma) : _engine(seed), _sigma(sigma) {}

    Complex operator()() {
        const double u1 = 1.0 - unit();
        const double u2 = unit();
        return std::polar(_sigma * std::sqrt(-std::log(u1)), 2.0 * std::numbers::pi * u2);
    }

private:
    double unit() { return static_cast<double>(_engine() >> 11) * 0x1.0p-53; }

    std::mt19937_64 _engine;
    double          _sigma;
};

struct PhantomSignal {
    Fid                fid;
    std::optional<Fid> water_reference;
    ModelFit           truth; /// generating components in fit order (before the eddy ramp and noise)
};

namespace detail {

inline void require_finite_field(double v, const std::string& what) {
    if (!std::isfinite(v)) {
        throw InvalidInput("phantom: " + what + " must be finite");
    }
}

inline void validate_components(const std::vector<PhantomComponent>& list, const char* where) {
    std::set<std::string> names;
    for (const auto& c : list) {
        if (c.name.empty()) {
            throw InvalidInput(std::string("phantom: unnamed component in ") + where);
        }
        if (!names.insert(c.name).second) {
            throw InvalidInput("phantom: duplicate component name '" + c.name + "' in " + where);
        }
        require_finite_field(c.ppm, c.name + ".ppm");
        require_finite_field(c.amplitude, c.name + ".amplitude");
        require_finite_field(c.damping, c.name + ".damping");
        require_finite_field(c.phase, c.name + ".phase");
        if (c.amplitude < 0) {
            throw InvalidInput("phantom: " + c.name + ".amplitude must be nonnegative");
        }
    }
}

inline std::vector<HarmonicComponent> harmonic_components(const std::vector<PhantomComponent>& list, const Acquisition& acq) {
    std::vector<HarmonicComponent> out;
    out.reserve(list.size());
    for (const auto& c : list) {
        out.push_back(HarmonicComponent{c.amplitude, c.damping, ppm_to_hz(c.ppm, acq), wrap_phase(c.phase)});
    }
    return out;
}

inline std::vector<Complex> apply_ramp_and_noise(const Fid& clean, const std::vector<double>& eddy, NoiseGenerator& noise, bool noisy) {
    std::vector<Complex> out(clean.samples().begin(), clean.samples().end());
    for (std::size_t n = 0; n < out.size(); ++n) {
        if (!eddy.empty()) {
            const double t     = static_cast<double>(n) * clean.dwell_time();
            double       theta = 0;
            for (std::size_t i = eddy.size(); i-- > 0;) {
                theta = theta * t + eddy[i];
            }
            out[n] *= std::polar(1.0, theta);
        }
        if (noisy) {
            out[n] += noise();
        }
    }
    return out;
}

} // namespace detail

inline void validate(const PhantomSpec& spec) {
    if (spec.n_samples < 2) {
        throw InvalidInput("phantom: n_samples must be at least 2");
    }
    detail::require_finite_field(spec.acq.dwell_time, "dwell_time_s");
    detail::require_finite_field(spec.acq.transmitter_freq, "transmitter_freq_mhz");
    detail::require_finite_field(spec.acq.reference_ppm, "reference_ppm");
    detail::require_finite_field(spec.noise_sigma, "noise_sigma");
    if (!(spec.acq.dwell_time > 0)) {
        throw InvalidInput("phantom: dwell_time must be positive");
    }
    if (!(spec.acq.transmitter_freq > 0)) {
        throw InvalidInput("phantom: transmitter_freq must be positive");
    }
    if (spec.noise_sigma < 0) {
        throw InvalidInput("phantom: noise_sigma must be nonnegative");
    }
    detail::validate_components(spec.components, "components");
    if (spec.water_reference) {
        detail::validate_components(*spec.water_reference, "water_reference");
    }
    for (std::size_t i = 0; i < spec.eddy_phase.size(); ++i) {
        detail::require_finite_field(spec.eddy_phase[i], "eddy_phase[" + std::to_string(i) + "]");
    }
}

/// Synthesizes the phantom. The eddy ramp multiplies both the signal and the
/// water reference; noise is added afterwards, signal first, then reference,
/// from a single generator stream.
[[nodiscard]] inline PhantomSignal synth_phantom(const PhantomSpec& spec) {
    validate(spec);

    const auto metabolites = detail::harmonic_components(spec.components, spec.acq);
    const auto clean       = synthesize(metabolites, spec.n_samples, spec.acq);

    NoiseGenerator noise(spec.noise_seed, spec.noise_sigma);
    const bool     noisy = spec.noise_sigma > 0;

    PhantomSignal out{clean.with_samples(detail::apply_ramp_and_noise(clean, spec.eddy_phase, noise, noisy)), std::nullopt, {}};
    if (spec.water_reference) {
        const auto water    = synthesize(detail::harmonic_components(*spec.water_reference, spec.acq), spec.n_samples, spec.acq);
        out.water_reference = water.with_samples(detail::apply_ramp_and_noise(water, spec.eddy_phase, noise, noisy));
    }
    out.truth.components = metabolites;
    sort_components(out.truth.components);
    return out;
}

namespace detail {

using nlohmann::json;

inline void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) {
            ok = ok || key == a;
        }
        if (!ok) {
            throw ParseError("phantom: unknown key '" + key + "' in " + where);
        }
    }
}

inline double number_field(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) {
        throw ParseError(std::string("phantom: missing field '") + key + "' in " + where);
    }
    const auto& v = obj.at(key);
    if (!v.is_number()) {
        throw ParseError(std::string("phantom: field '") + key + "' in " + where + " must be a number");
    }
    return v.get<double>();
}

inline std::vector<PhantomComponent> component_list(const json& arr, const std::string& where) {
    if (!arr.is_array()) {
        throw ParseError("phantom: " + where + " must be an array");
    }
    std::vector<PhantomComponent> list;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const auto&       c   = arr[i];
        const std::string loc = where + "[" + std::to_string(i) + "]";
        if (!c.is_object()) {
            throw ParseError("phantom: " + loc + " must be an object");
        }
        check_keys(c, {"name", "ppm", "amplitude", "damping", "phase"}, loc);
        if (!c.contains("name") || !c.at("name").is_string()) {
            throw ParseError("phantom: " + loc + " needs a string 'name'");
        }
        PhantomComponent pc;
        pc.name      = c.at("name").get<std::string>();
        pc.ppm       = number_field(c, "ppm", loc);
        pc.amplitude = number_field(c, "amplitude", loc);
        pc.damping   = number_field(c, "damping", loc);
        pc.phase     = c.contains("phase") ? number_field(c, "phase", loc) : 0.0;
        list.push_back(std::move(pc));
    }
    return list;
}

} // namespace detail

[[nodiscard]] inline PhantomSpec parse_phantom(const std::string& text) {
    using detail::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("phantom: malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw ParseError("phantom: top level must be an object");
    }
    detail::check_keys(doc, {"description", "n_samples", "dwell_time_s", "transmitter_freq_mhz", "reference_ppm", "noise_sigma", "noise_seed", "components", "water_reference", "eddy_phase"}, "phantom");

    PhantomSpec spec;
    if (!doc.contains("n_samples") || !doc.at("n_samples").is_number_unsigned()) {
        throw ParseError("phantom: n_samples must be a nonnegative integer");
    }
    spec.n_samples            = doc.at("n_samples").get<std::size_t>();
    spec.acq.dwell_time       = detail::number_field(doc, "dwell_time_s", "phantom");
    spec.acq.transmitter_freq = detail::number_field(doc, "transmitter_freq_mhz", "phantom");
    spec.acq.reference_ppm    = detail::number_field(doc, "reference_ppm", "phantom");
    spec.noise_sigma          = doc.contains("noise_sigma") ? detail::number_field(doc, "noise_sigma", "phantom") : 0.0;
    if (doc.contains("noise_seed")) {
        if (!doc.at("noise_seed").is_number_unsigned()) {
            throw ParseError("phantom: noise_seed must be a nonnegative integer");
        }
        spec.noise_seed = doc.at("noise_seed").get<std::uint64_t>();
    }
    if (!doc.contains("components")) {
        throw ParseError("phantom: missing field 'components'");
    }
    spec.components = detail::component_list(doc.at("components"), "components");
    if (doc.contains("water_reference")) {
        const auto& w = doc.at("water_reference");
        if (!w.is_object()) {
            throw ParseError("phantom: water_reference must be an object");
        }
        detail::check_keys(w, {"components"}, "water_reference");
        if (!w.contains("components")) {
            throw ParseError("phantom: missing field 'components' in water_reference");
        }
        spec.water_reference = detail::component_list(w.at("components"), "water_reference.components");
    }
    if (doc.contains("eddy_phase")) {
        const auto& e = doc.at("eddy_phase");
        if (!e.is_array()) {
            throw ParseError("phantom: eddy_phase must be an array of numbers");
        }
        for (const auto& c : e) {
            if (!c.is_number()) {
                throw ParseError("phantom: eddy_phase must be an array of numbers");
            }
            spec.eddy_phase.push_back(c.get<double>());
        }
    }
    validate(spec);
    return spec;
}

[[nodiscard]] inline PhantomSpec read_phantom(const std::filesystem::path& path) { return parse_phantom(read_file(path)); }

} // namespace hsvd::io

#endif // HSVD_IO_PHANTOM_HPP
