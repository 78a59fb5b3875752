#ifndef HSVD_IO_FID_FILE_HPP
#define HSVD_IO_FID_FILE_HPP

#include <hsvd/error.hpp>
#include <hsvd/io/atomic_write.hpp>
#include <hsvd/io/number_format.hpp>
#include <hsvd/model.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace hsvd::io {

inline constexpr int         fid_format_version = 1;
inline constexpr const char* fid_magic          = "HSVD-FID";

/// A FID together with the free-text description stored next to it.
struct FidFile {
    Fid         fid;
    std::string description;
};

/// Text form: magic line, `key value` header lines, a `data` line, then one
/// `real imag` pair per sample. Blank lines and lines starting with '#' are ignored.
[[nodiscard]] inline std::string format_fid(const Fid& fid, std::string_view description = {}) {
    for (const char ch : description) {
        if (ch == '\n' || ch == '\r') {
            throw InvalidInput("FID description must be a single line");
        }
    }
    const auto&        acq = fid.acquisition();
    std::ostringstream out;
    out << fid_magic << '\n';
    out << "format_version " << fid_format_version << '\n';
    out << "dwell_time_s " << format_double(acq.dwell_time) << '\n';
    out << "transmitter_freq_mhz " << format_double(acq.transmitter_freq) << '\n';
    out << "reference_ppm " << format_double(acq.reference_ppm) << '\n';
    if (!description.empty()) {
        out << "description " << description << '\n';
    }
    out << "n_samples " << fid.size() << '\n';
    out << "data\n";
    for (const auto& s : fid.samples()) {
        out << format_double(s.real()) << ' ' << format_double(s.imag()) << '\n';
    }
    return out.str();
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> parts;
    std::size_t                   i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) {
            ++i;
        }
        const std::size_t start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t') {
            ++i;
        }
        if (i > start) {
            parts.push_back(s.substr(start, i - start));
        }
    }
    return parts;
}

} // namespace detail

[[nodiscard]] inline FidFile parse_fid(std::string_view text) {
    struct Field {
        std::string value;
        std::size_t line = 0;
    };
    std::map<std::string, Field, std::less<>> header;
    std::vector<Complex>                        samples;
    bool                                        sawMagic = false;
    bool                                        inData   = false;
    std::size_t                                 dataLine = 0;

    std::size_t lineNo = 0;
    std::size_t pos    = 0;
    while (pos <= text.size()) {
        const auto       nl   = text.find('\n', pos);
        std::string_view raw  = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos                   = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineNo;
        const auto line = detail::trim(raw);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        if (!sawMagic) {
            if (line != fid_magic) {
                throw ParseError("not a FID file (expected '" + std::string(fid_magic) + "' on the first line)", lineNo);
            }
            sawMagic = true;
            continue;
        }
        if (!inData) {
            if (line == "data") {
                inData   = true;
                dataLine = lineNo;
                continue;
            }
            const auto        sp    = line.find_first_of(" \t");
            const std::string key(line.substr(0, sp));
            const std::string value(sp == std::string_view::npos ? std::string_view{} : detail::trim(line.substr(sp)));
            if (header.contains(key)) {
                throw ParseError("duplicate field " + key, lineNo);
            }
            header[key] = Field{value, lineNo};
            continue;
        }
        const auto parts = detail::split_ws(line);
        if (parts.size() != 2) {
            throw ParseError("length mismatch: expected a real and an imaginary value, found " + std::to_string(parts.size()) + " values", lineNo);
        }
        const auto re = parse_double(parts[0]);
        const auto im = parse_double(parts[1]);
        if (!re || !im) {
            throw ParseError("malformed sample value", lineNo);
        }
        if (!std::isfinite(*re) || !std::isfinite(*im)) {
            throw ParseError("sample " + std::to_string(samples.size()) + " is not finite", lineNo);
        }
        samples.emplace_back(*re, *im);
    }
    if (!sawMagic) {
        throw ParseError("empty FID file");
    }

    const auto require = [&](const char* key) -> const Field& {
        const auto it = header.find(key);
        if (it == header.end()) {
            throw ParseError(std::string("missing field ") + key);
        }
        return it->second;
    };
    const auto number = [&](const char* key) {
        const auto& f = require(key);
        const auto  v = parse_double(f.value);
        if (!v || !std::isfinite(*v)) {
            throw ParseError(std::string("field ") + key + " is not a finite number", f.line);
        }
        return *v;
    };

    for (const auto& [key, field] : header) {
        static constexpr std::string_view known[] = {"format_version", "dwell_time_s", "transmitter_freq_mhz", "reference_ppm", "description", "n_samples"};
        if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
            throw ParseError("unknown field " + key, field.line);
        }
    }

    const auto& version = require("format_version");
    if (parse_count(version.value) != static_cast<unsigned long long>(fid_format_version)) {
        throw ParseError("unsupported format_version '" + version.value + "'", version.line);
    }
    Acquisition acq;
    acq.dwell_time = number("dwell_time_s");
    if (!(acq.dwell_time > 0)) {
        throw ParseError("dwell_time must be positive", require("dwell_time_s").line);
    }
    acq.transmitter_freq = number("transmitter_freq_mhz");
    if (!(acq.transmitter_freq > 0)) {
        throw ParseError("transmitter_freq must be positive", require("transmitter_freq_mhz").line);
    }
    acq.reference_ppm = number("reference_ppm");

    const auto& countField = require("n_samples");
    const auto  declared   = parse_count(countField.value);
    if (!declared) {
        throw ParseError("field n_samples is not a count", countField.line);
    }
    if (!inData) {
        throw ParseError("missing data section");
    }
    if (*declared != samples.size()) {
        throw ParseError("length mismatch: n_samples is " + std::to_string(*declared) + " but the data section holds " + std::to_string(samples.size()) + " samples", dataLine);
    }
    if (samples.size() < 2) {
        throw ParseError("a FID needs at least 2 samples", dataLine);
    }

    const auto desc = header.find("description");
    return FidFile{Fid(std::move(samples), acq), desc == header.end() ? std::string{} : desc->second.value};
}

[[nodiscard]] inline FidFile read_fid_file(const std::filesystem::path& path) { return parse_fid(read_file(path)); }

[[nodiscard]] inline Fid read_fid(const std::filesystem::path& path) { return read_fid_file(path).fid; }

inline void write_fid(const std::filesystem::path& path, const Fid& fid, std::string_view description = {}) { write_file_atomically(path, format_fid(fid, description)); }

} // namespace hsvd::io

#endif // HSVD_IO_FID_FILE_HPP
