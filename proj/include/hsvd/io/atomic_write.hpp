#ifndef HSVD_IO_ATOMIC_WRITE_HPP
#define HSVD_IO_ATOMIC_WRITE_HPP

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

#include <unistd.h>

namespace hsvd::io {

/// Error while reading or writing a file (missing, unreadable, disk full).
class FileError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Writes `content` to a sibling temporary file, then renames it over `path`.
/// Readers never observe a partially written file, and a failure leaves no file behind.
inline void write_file_atomically(const std::filesystem::path& path, std::string_view content) {
    namespace fs  = std::filesystem;
    const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw FileError("cannot open " + tmp.string() + " for writing");
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            out.close();
            std::error_code ignored;
            fs::remove(tmp, ignored);
            throw FileError("failed writing " + path.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignored;
        fs::remove(tmp, ignored);
        throw FileError("cannot move output into place at " + path.string() + ": " + ec.message());
    }
}

/// Whole file as a string.
inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FileError("cannot open " + path.string());
    }
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw FileError("failed reading " + path.string());
    }
    return content;
}

} // namespace hsvd::io

#endif // HSVD_IO_ATOMIC_WRITE_HPP
