#pragma once

#include "tensorrl/tensor.hpp"

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

namespace tensorrl {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A file could not be opened, read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);
double parse_double(std::string_view text);

// Tensor text format:
//   shape: d1 d2 ... dn
//   <row-major values, one line per last-mode fibre>
void write_tensor(std::ostream& os, const DenseTensor& t);
DenseTensor read_tensor(std::istream& is);
void save_tensor(const std::filesystem::path& path, const DenseTensor& t);
DenseTensor load_tensor(const std::filesystem::path& path);

// CP text format:
//   rank: r
//   order: n
//   dims: d1 ... dn
//   then per component: one weight line followed by n factor lines.
void write_cp(std::ostream& os, const CPForm& cp);
CPForm read_cp(std::istream& is);
void save_cp(const std::filesystem::path& path, const CPForm& cp);
CPForm load_cp(const std::filesystem::path& path);

} // namespace tensorrl
