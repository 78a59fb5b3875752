#ifndef HSVD_IO_SVG_HPP
#define HSVD_IO_SVG_HPP

#include <hsvd/error.hpp>
#include <hsvd/spectrum.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>

namespace hsvd::io {

struct SvgOptions {
    double                 width  = 900;
    double                 height = 420;
    std::optional<PpmBand> window; /// restricts the plotted ppm range
    std::string            title;
};

namespace detail {

inline std::string fixed(double v, int digits = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

inline std::string escape_xml(const std::string& s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

// 1, 2 or 5 times a power of ten, giving roughly `target` intervals over `span`
inline double nice_step(double span, int target) {
    const double raw  = span / target;
    const double mag  = std::pow(10.0, std::floor(std::log10(raw)));
    const double norm = raw / mag;
    return (norm < 1.5 ? 1.0 : norm < 3.5 ? 2.0 : norm < 7.5 ? 5.0 : 10.0) * mag;
}

} // namespace detail

/// Line plot of the real spectrum against ppm, high ppm on the left.
[[nodiscard]] inline std::string spectrum_svg(const Spectrum& spec, const SvgOptions& opts = {}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        if (!opts.window || opts.window->contains(spec.ppm_axis[i])) {
            idx.push_back(i);
        }
    }
    if (idx.size() < 2) {
        throw InvalidInput("spectrum_svg: fewer than two bins in the plotted range");
    }

    // ppm_axis descends with the index, so idx runs from high to low ppm
    const double ppmHi = spec.ppm_axis[idx.front()];
    const double ppmLo = spec.ppm_axis[idx.back()];
    double       yMin  = spec.bins[idx.front()].real();
    double       yMax  = yMin;
    for (const auto i : idx) {
        yMin = std::min(yMin, spec.bins[i].real());
        yMax = std::max(yMax, spec.bins[i].real());
    }
    if (yMax == yMin) {
        yMax += 1.0;
        yMin -= 1.0;
    }
    const double pad = 0.05 * (yMax - yMin);
    yMin -= pad;
    yMax += pad;

    const double left = 80, right = 20, top = 40, bottom = 60;
    const double plotW = opts.width - left - right;
    const double plotH = opts.height - top - bottom;
    const auto   xOf   = [&](double ppm) { return left + (ppmHi - ppm) / (ppmHi - ppmLo) * plotW; };
    const auto   yOf   = [&](double v) { return top + (yMax - v) / (yMax - yMin) * plotH; };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::fixed(opts.width, 0) + "\" height=\"" + detail::fixed(opts.height, 0) + "\" viewBox=\"0 0 " + detail::fixed(opts.width, 0) + " " +
           detail::fixed(opts.height, 0) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!opts.title.empty()) {
        svg += "<text x=\"" + detail::fixed(opts.width / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" + detail::escape_xml(opts.title) + "</text>\n";
    }

    // axes
    svg += "<g stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n";
    svg += "<line x1=\"" + detail::fixed(left) + "\" y1=\"" + detail::fixed(top + plotH) + "\" x2=\"" + detail::fixed(left + plotW) + "\" y2=\"" + detail::fixed(top + plotH) + "\"/>\n";
    svg += "<line x1=\"" + detail::fixed(left) + "\" y1=\"" + detail::fixed(top) + "\" x2=\"" + detail::fixed(left) + "\" y2=\"" + detail::fixed(top + plotH) + "\"/>\n";
    svg += "</g>\n";

    svg += "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"black\">\n";
    const double xStep = detail::nice_step(ppmHi - ppmLo, 10);
    for (double t = std::ceil(ppmLo / xStep) * xStep; t <= ppmHi + 1e-9 * xStep; t += xStep) {
        const double x = xOf(t);
        svg += "<line x1=\"" + detail::fixed(x) + "\" y1=\"" + detail::fixed(top + plotH) + "\" x2=\"" + detail::fixed(x) + "\" y2=\"" + detail::fixed(top + plotH + 5) + "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + detail::fixed(x) + "\" y=\"" + detail::fixed(top + plotH + 18) + "\" text-anchor=\"middle\">" + detail::fixed(std::abs(t) < 1e-12 ? 0.0 : t, xStep < 1 ? 1 : 0) + "</text>\n";
    }
    const double yStep = detail::nice_step(yMax - yMin, 6);
    for (double t = std::ceil(yMin / yStep) * yStep; t <= yMax; t += yStep) {
        const double y = yOf(t);
        char         label[32];
        std::snprintf(label, sizeof label, "%.3g", std::abs(t) < 1e-12 * yStep ? 0.0 : t);
        svg += "<line x1=\"" + detail::fixed(left - 5) + "\" y1=\"" + detail::fixed(y) + "\" x2=\"" + detail::fixed(left) + "\" y2=\"" + detail::fixed(y) + "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + detail::fixed(left - 8) + "\" y=\"" + detail::fixed(y + 4) + "\" text-anchor=\"end\">" + label + "</text>\n";
    }
    svg += "<text x=\"" + detail::fixed(left + plotW / 2) + "\" y=\"" + detail::fixed(opts.height - 15) + "\" text-anchor=\"middle\" font-size=\"13\">Chemical shift (ppm)</text>\n";
    svg += "<text x=\"18\" y=\"" + detail::fixed(top + plotH / 2) + "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 " + detail::fixed(top + plotH / 2) + ")\">Real part (a.u.)</text>\n";
    svg += "</g>\n";

    svg += "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1\" points=\"";
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const auto i = idx[k];
        if (k > 0) {
            svg += ' ';
        }
        svg += detail::fixed(xOf(spec.ppm_axis[i])) + "," + detail::fixed(yOf(spec.bins[i].real()));
    }
    svg += "\"/>\n</svg>\n";
    return svg;
}

} // namespace hsvd::io

#endif // HSVD_IO_SVG_HPP
