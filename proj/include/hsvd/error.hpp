#ifndef HSVD_ERROR_HPP
#define HSVD_ERROR_HPP

#include <stdexcept>
#include <string>

namespace hsvd {

/// Input violates an operation's precondition (bad shape, non-finite value, empty band...).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An iterative kernel hit its iteration cap.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed file content. `line` is 1-based, 0 when the problem is not tied to a line.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), _line(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return _line; }

private:
    std::size_t _line;
};

} // namespace hsvd

#endif // HSVD_ERROR_HPP
