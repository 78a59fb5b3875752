// hsvd: command-line driver for the HSVD library.
//
// Every subcommand reads one input (a FID file, or a phantom JSON file for `synth`),
// applies a single operation and writes its outputs atomically. Exit status:
// 0 success, 1 usage error, 2 data or parse error, 3 numerical failure.

#include <hsvd/hsvd.hpp>

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fs = std::filesystem;

namespace {

enum ExitCode : int { exit_ok = 0, exit_usage = 1, exit_data = 2, exit_numerical = 3 };

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Collects rendered outputs and writes them only once everything succeeded.
class OutputSet {
public:
    void add(const std::string& path, std::string content) {
        if (!path.empty()) {
            _files.emplace_back(path, std::move(content));
        }
    }

    void commit() {
        std::vector<fs::path> written;
        try {
            for (const auto& [path, content] : _files) {
                hsvd::io::write_file_atomically(path, content);
                written.push_back(path);
            }
        } catch (...) {
            for (const auto& p : written) {
                std::error_code ignored;
                fs::remove(p, ignored);
            }
            throw;
        }
    }

private:
    std::vector<std::pair<std::string, std::string>> _files;
};

struct Options {
    std::string                  input;
    std::string                  output;
    std::string                  svg;
    std::string                  reference;
    std::string                  reference_output;
    std::string                  truth;
    std::string                  removed;
    std::string                  band;
    std::string                  anchors;
    std::string                  smoothing = "linear";
    std::size_t                  order     = hsvd::default_model_order;
    std::size_t                  iters     = 20;
    double                       tol       = 1e-6;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t>   zero_fill;
    std::optional<double>        angle;
    bool                         auto_phase = false;
};

hsvd::PpmBand parse_band(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw UsageError("--band expects center:halfwidth in ppm, got '" + text + "'");
    }
    const auto center = hsvd::io::parse_double(std::string_view(text).substr(0, colon));
    const auto half   = hsvd::io::parse_double(std::string_view(text).substr(colon + 1));
    if (!center || !half || !std::isfinite(*center) || !(*half > 0) || !std::isfinite(*half)) {
        throw UsageError("--band expects center:halfwidth with a positive halfwidth, got '" + text + "'");
    }
    return hsvd::PpmBand(*center, *half);
}

std::vector<std::size_t> parse_anchors(const std::string& text) {
    std::vector<std::size_t> out;
    std::size_t              pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const auto token = std::string_view(text).substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        const auto value = hsvd::io::parse_count(token);
        if (!value) {
            throw UsageError("--anchors expects comma-separated bin indices, got '" + text + "'");
        }
        out.push_back(static_cast<std::size_t>(*value));
        if (comma == std::string::npos) {
            break;
        }
        pos = comma + 1;
    }
    return out;
}

std::string describe(const std::string& previous, const std::string& step) { return previous.empty() ? step : previous + " | " + step; }

void add_spectrum_svg(OutputSet& outputs, const Options& opt, const hsvd::Spectrum& spec, const std::string& title) {
    if (!opt.svg.empty()) {
        hsvd::io::SvgOptions svgOpts;
        svgOpts.title = title;
        outputs.add(opt.svg, hsvd::io::spectrum_svg(spec, svgOpts));
    }
}

void add_fid_output(OutputSet& outputs, const Options& opt, const hsvd::Fid& fid, const std::string& description, const std::string& title) {
    outputs.add(opt.output, hsvd::io::format_fid(fid, description));
    if (!opt.svg.empty()) {
        add_spectrum_svg(outputs, opt, hsvd::to_spectrum(fid, opt.zero_fill), title);
    }
}

void run_synth(const Options& opt) {
    auto spec = hsvd::io::read_phantom(opt.input);
    if (opt.seed) {
        spec.noise_seed = *opt.seed;
    }
    const auto signal = hsvd::io::synth_phantom(spec);

    OutputSet  outputs;
    const auto name = fs::path(opt.input).stem().string();
    add_fid_output(outputs, opt, signal.fid, "synth " + name + " seed " + std::to_string(spec.noise_seed), "synthetic phantom " + name);
    if (!opt.reference_output.empty()) {
        if (!signal.water_reference) {
            throw hsvd::InvalidInput("synth: the phantom has no water_reference block");
        }
        outputs.add(opt.reference_output, hsvd::io::format_fid(*signal.water_reference, "water reference " + name + " seed " + std::to_string(spec.noise_seed)));
    }
    outputs.add(opt.truth, hsvd::io::components_csv(signal.truth.components, spec.acq));
    outputs.commit();
}

void run_decompose(const Options& opt) {
    const auto in  = hsvd::io::read_fid_file(opt.input);
    const auto fit = hsvd::decompose(in.fid, opt.order);
    std::cerr << "decompose: " << fit.components.size() << " components, residual energy " << hsvd::io::format_double(fit.residual_energy);
    if (fit.dropped_poles > 0) {
        std::cerr << ", " << fit.dropped_poles << " poles at the origin dropped";
    }
    std::cerr << '\n';
    OutputSet outputs;
    outputs.add(opt.output, hsvd::io::components_csv(fit.components, in.fid.acquisition()));
    outputs.commit();
}

void run_filter(const Options& opt) {
    const auto in  = hsvd::io::read_fid_file(opt.input);
    const auto out = hsvd::filter_rank(in.fid, opt.order);
    OutputSet  outputs;
    add_fid_output(outputs, opt, out, describe(in.description, "filter k=" + std::to_string(opt.order)), "rank-" + std::to_string(opt.order) + " model");
    outputs.commit();
}

void run_cadzow(const Options& opt) {
    const auto in  = hsvd::io::read_fid_file(opt.input);
    const auto res = hsvd::cadzow(in.fid, opt.order, opt.iters, opt.tol);
    std::cerr << "cadzow: " << res.iterations << " iterations, " << (res.converged ? "converged" : "iteration cap reached") << ", sigma[k]/sigma[0] " << hsvd::io::format_double(res.rank_ratio.front()) << " -> "
              << hsvd::io::format_double(res.rank_ratio.back()) << '\n';
    OutputSet outputs;
    add_fid_output(outputs, opt, res.fid, describe(in.description, "cadzow k=" + std::to_string(opt.order)), "Cadzow k=" + std::to_string(opt.order));
    outputs.commit();
}

void run_phase(const Options& opt) {
    if (opt.auto_phase == opt.angle.has_value()) {
        throw UsageError("phase: give exactly one of --auto or --angle");
    }
    if (opt.auto_phase && opt.band.empty()) {
        throw UsageError("phase --auto needs --band center:halfwidth");
    }
    const auto in    = hsvd::io::read_fid_file(opt.input);
    const auto angle = opt.auto_phase ? hsvd::auto_phase(in.fid, parse_band(opt.band), opt.order) : *opt.angle;
    std::cerr << "phase: rotating by " << hsvd::io::format_double(angle) << " rad\n";
    OutputSet outputs;
    add_fid_output(outputs, opt, hsvd::phase_correct(in.fid, angle), describe(in.description, "phase " + hsvd::io::format_double(angle)), "phase corrected");
    outputs.commit();
}

void run_eddy(const Options& opt) {
    const auto in  = hsvd::io::read_fid_file(opt.input);
    const auto ref = hsvd::io::read_fid(opt.reference);
    const auto res = hsvd::eddy_correct(in.fid, ref);
    if (res.patched > 0) {
        std::cerr << "eddy: " << res.patched << " zero reference samples took their phase from a neighbor\n";
    }
    OutputSet outputs;
    add_fid_output(outputs, opt, res.fid, describe(in.description, "eddy"), "eddy-current corrected");
    outputs.commit();
}

void run_water(const Options& opt) {
    const auto band = opt.band.empty() ? hsvd::default_water_band() : parse_band(opt.band);
    const auto in   = hsvd::io::read_fid_file(opt.input);
    const auto res  = hsvd::remove_water(in.fid, band, opt.order);
    if (res.removed.empty()) {
        std::cerr << "water: nothing removed, no fitted component in " << band.to_string() << '\n';
    } else {
        std::cerr << "water: removed " << res.removed.size() << " components in " << band.to_string() << '\n';
    }
    OutputSet outputs;
    add_fid_output(outputs, opt, res.fid, describe(in.description, "water " + band.to_string()), "water removed");
    outputs.add(opt.removed, hsvd::io::components_csv(res.removed, in.fid.acquisition()));
    outputs.commit();
}

void run_baseline(const Options& opt) {
    hsvd::BaselineAnchors anchors;
    anchors.indices = parse_anchors(opt.anchors);
    if (opt.smoothing == "linear") {
        anchors.smoothing = hsvd::BaselineSmoothing::linear;
    } else if (opt.smoothing == "cubic") {
        anchors.smoothing = hsvd::BaselineSmoothing::cubic;
    } else {
        throw UsageError("--smoothing must be linear or cubic");
    }
    const auto in   = hsvd::io::read_fid(opt.input);
    const auto spec = hsvd::baseline_correct(hsvd::to_spectrum(in, opt.zero_fill), anchors);
    OutputSet  outputs;
    outputs.add(opt.output, hsvd::io::spectrum_csv(spec));
    add_spectrum_svg(outputs, opt, spec, "baseline corrected");
    outputs.commit();
}

void run_spectrum(const Options& opt) {
    const auto in   = hsvd::io::read_fid(opt.input);
    const auto spec = hsvd::to_spectrum(in, opt.zero_fill);
    OutputSet  outputs;
    outputs.add(opt.output, hsvd::io::spectrum_csv(spec));
    add_spectrum_svg(outputs, opt, spec, "spectrum");
    outputs.commit();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"HSVD decomposition and MRS preprocessing"};
    app.require_subcommand(1);
    Options opt;

    auto addInput = [&](CLI::App* cmd, const char* what) { cmd->add_option("input", opt.input, what)->required(); };
    auto addOutput = [&](CLI::App* cmd, const char* what) { cmd->add_option("-o,--output", opt.output, what)->required(); };
    auto addOrder  = [&](CLI::App* cmd) { cmd->add_option("-k,--order", opt.order, "model order")->check(CLI::PositiveNumber); };
    auto addSvg    = [&](CLI::App* cmd) {
        cmd->add_option("--svg", opt.svg, "also plot the real spectrum to this SVG file");
        cmd->add_option("--zero-fill", opt.zero_fill, "transform length (default: next power of two)");
    };

    std::vector<std::pair<CLI::App*, void (*)(const Options&)>> commands;

    auto* synth = app.add_subcommand("synth", "synthesize a FID from a phantom JSON file");
    addInput(synth, "phantom spec");
    addOutput(synth, "FID file");
    synth->add_option("--reference-output", opt.reference_output, "write the water reference FID here");
    synth->add_option("--truth", opt.truth, "write the generating components as CSV");
    synth->add_option("--seed", opt.seed, "override the phantom noise seed");
    addSvg(synth);
    commands.emplace_back(synth, run_synth);

    auto* dec = app.add_subcommand("decompose", "fit damped sinusoids, write the component table");
    addInput(dec, "FID file");
    addOutput(dec, "component CSV");
    addOrder(dec);
    commands.emplace_back(dec, run_decompose);

    auto* filter = app.add_subcommand("filter", "replace the signal by its rank-k model");
    addInput(filter, "FID file");
    addOutput(filter, "FID file");
    addOrder(filter);
    addSvg(filter);
    commands.emplace_back(filter, run_filter);

    auto* cad = app.add_subcommand("cadzow", "Cadzow rank-k denoising");
    addInput(cad, "FID file");
    addOutput(cad, "FID file");
    addOrder(cad);
    cad->add_option("--iters", opt.iters, "iteration cap")->check(CLI::PositiveNumber);
    cad->add_option("--tol", opt.tol, "stop when sigma[k]/sigma[k-1] falls below this")->check(CLI::PositiveNumber);
    addSvg(cad);
    commands.emplace_back(cad, run_cadzow);

    auto* phase = app.add_subcommand("phase", "zero-order phase correction");
    addInput(phase, "FID file");
    addOutput(phase, "FID file");
    addOrder(phase);
    phase->add_flag("--auto", opt.auto_phase, "make the strongest component in --band absorptive");
    phase->add_option("--band", opt.band, "center:halfwidth in ppm");
    phase->add_option("--angle", opt.angle, "rotation in radians");
    addSvg(phase);
    commands.emplace_back(phase, run_phase);

    auto* eddy = app.add_subcommand("eddy", "eddy-current correction against a water reference");
    addInput(eddy, "FID file");
    addOutput(eddy, "FID file");
    eddy->add_option("--reference", opt.reference, "unsuppressed-water reference FID")->required();
    addSvg(eddy);
    commands.emplace_back(eddy, run_eddy);

    auto* water = app.add_subcommand("water", "subtract fitted components inside a ppm band");
    addInput(water, "FID file");
    addOutput(water, "FID file");
    addOrder(water);
    water->add_option("--band", opt.band, "center:halfwidth in ppm (default 4.7:0.3)");
    water->add_option("--removed", opt.removed, "write the removed components as CSV");
    addSvg(water);
    commands.emplace_back(water, run_water);

    auto* base = app.add_subcommand("baseline", "subtract an anchor-point baseline from the spectrum");
    addInput(base, "FID file");
    addOutput(base, "spectrum CSV");
    base->add_option("--anchors", opt.anchors, "comma-separated spectrum bin indices")->required();
    base->add_option("--smoothing", opt.smoothing, "linear or cubic");
    addSvg(base);
    commands.emplace_back(base, run_baseline);

    auto* spec = app.add_subcommand("spectrum", "Fourier transform to a spectrum CSV");
    addInput(spec, "FID file");
    addOutput(spec, "spectrum CSV");
    addSvg(spec);
    commands.emplace_back(spec, run_spectrum);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "hsvd: " << e.what() << '\n';
        return exit_usage;
    }

    try {
        for (const auto& [cmd, run] : commands) {
            if (cmd->parsed()) {
                run(opt);
            }
        }
    } catch (const UsageError& e) {
        std::cerr << "hsvd: " << e.what() << '\n';
        return exit_usage;
    } catch (const hsvd::NumericalError& e) {
        std::cerr << "hsvd: numerical failure: " << e.what() << '\n';
        return exit_numerical;
    } catch (const std::exception& e) {
        std::cerr << "hsvd: " << e.what() << '\n';
        return exit_data;
    }
    return exit_ok;
}
