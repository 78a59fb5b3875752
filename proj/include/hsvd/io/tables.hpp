#ifndef HSVD_IO_TABLES_HPP
#define HSVD_IO_TABLES_HPP

#include <hsvd/io/number_format.hpp>
#include <hsvd/model.hpp>
#include <hsvd/spectrum.hpp>

#include <span>
#include <string>

namespace hsvd::io {

/// CSV with header `index,frequency_hz,ppm,real,imag`, one row per bin.
[[nodiscard]] inline std::string spectrum_csv(const Spectrum& spec) {
    std::string out = "index,frequency_hz,ppm,real,imag\n";
    for (std::size_t i = 0; i < spec.size(); ++i) {
        out += std::to_string(i);
        out += ',' + format_double(spec.freq_axis[i]);
        out += ',' + format_double(spec.ppm_axis[i]);
        out += ',' + format_double(spec.bins[i].real());
        out += ',' + format_double(spec.bins[i].imag());
        out += '\n';
    }
    return out;
}

/// CSV with header `amplitude,damping_per_s,frequency_hz,ppm,phase_rad`, rows in the given order.
[[nodiscard]] inline std::string components_csv(std::span<const HarmonicComponent> components, const Acquisition& acq) {
    std::string out = "amplitude,damping_per_s,frequency_hz,ppm,phase_rad\n";
    for (const auto& c : components) {
        out += format_double(c.amplitude);
        out += ',' + format_double(c.damping);
        out += ',' + format_double(c.frequency);
        out += ',' + format_double(hz_to_ppm(c.frequency, acq));
        out += ',' + format_double(c.phase);
        out += '\n';
    }
    return out;
}

} // namespace hsvd::io

#endif // HSVD_IO_TABLES_HPP
