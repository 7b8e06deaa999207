#include "tensorrl/tensor_io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace tensorrl {

std::string format_double(double value) {
    std::array<char, 32> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) throw FormatError("cannot format value");
    return std::string(buf.data(), end);
}

double parse_double(std::string_view text) {
    double value = 0.0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size())
        throw FormatError("invalid number '" + std::string(text) + "'");
    return value;
}

namespace {

std::string read_header(std::istream& is, std::string_view key) {
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto colon = line.find(':');
        if (colon == std::string::npos || std::string_view(line).substr(0, colon) != key)
            throw FormatError("expected '" + std::string(key) + ":' header, got '" + line + "'");
        return line.substr(colon + 1);
    }
    throw FormatError("missing '" + std::string(key) + ":' header");
}

Shape parse_dims(const std::string& text) {
    std::istringstream ss(text);
    Shape shape;
    std::string tok;
    while (ss >> tok) {
        std::size_t d = 0;
        auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), d);
        if (ec != std::errc{} || end != tok.data() + tok.size() || d == 0)
            throw FormatError("invalid dimension '" + tok + "'");
        shape.push_back(d);
    }
    return shape;
}

std::size_t parse_count(const std::string& text) {
    std::istringstream ss(text);
    long long v = -1;
    if (!(ss >> v) || v < 0) throw FormatError("invalid count '" + text + "'");
    return static_cast<std::size_t>(v);
}

std::vector<double> read_values(std::istream& is, std::size_t n) {
    std::vector<double> values;
    values.reserve(n);
    std::string tok;
    while (values.size() < n && is >> tok) values.push_back(parse_double(tok));
    if (values.size() != n)
        throw FormatError("expected " + std::to_string(n) + " values, found " + std::to_string(values.size()));
    return values;
}

void write_row(std::ostream& os, std::span<const double> row) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? " " : "") << format_double(row[i]);
    os << '\n';
}

} // namespace

void write_tensor(std::ostream& os, const DenseTensor& t) {
    os << "shape:";
    for (auto d : t.shape()) os << ' ' << d;
    os << '\n';
    const std::size_t row = t.order() == 0 ? 1 : t.shape().back();
    for (std::size_t off = 0; off < t.size(); off += row) write_row(os, t.values().subspan(off, row));
}

DenseTensor read_tensor(std::istream& is) {
    Shape shape = parse_dims(read_header(is, "shape"));
    auto values = read_values(is, element_count(shape));
    std::string extra;
    if (is >> extra) throw FormatError("trailing data after tensor values");
    return DenseTensor(std::move(shape), std::move(values));
}

void save_tensor(const std::filesystem::path& path, const DenseTensor& t) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
    write_tensor(os, t);
    if (!os) throw IoError("write failed for '" + path.string() + "'");
}

DenseTensor load_tensor(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open '" + path.string() + "'");
    return read_tensor(is);
}

void write_cp(std::ostream& os, const CPForm& cp) {
    os << "rank: " << cp.rank() << '\n' << "order: " << cp.order() << '\n' << "dims:";
    for (auto d : cp.dims()) os << ' ' << d;
    os << '\n';
    for (std::size_t k = 0; k < cp.rank(); ++k) {
        os << format_double(cp.weight(k)) << '\n';
        for (std::size_t j = 0; j < cp.order(); ++j) write_row(os, cp.factor(k, j));
    }
}

CPForm read_cp(std::istream& is) {
    const std::size_t rank = parse_count(read_header(is, "rank"));
    const std::size_t order = parse_count(read_header(is, "order"));
    Shape dims = parse_dims(read_header(is, "dims"));
    if (dims.size() != order) throw FormatError("dims line does not match order");
    CPForm cp(dims);
    std::vector<std::vector<double>> fs(order);
    for (std::size_t k = 0; k < rank; ++k) {
        const double w = read_values(is, 1)[0];
        for (std::size_t j = 0; j < order; ++j) fs[j] = read_values(is, dims[j]);
        cp.add_component(w, fs);
    }
    std::string extra;
    if (is >> extra) throw FormatError("trailing data after CP components");
    return cp;
}

void save_cp(const std::filesystem::path& path, const CPForm& cp) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
    write_cp(os, cp);
    if (!os) throw IoError("write failed for '" + path.string() + "'");
}

CPForm load_cp(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open '" + path.string() + "'");
    return read_cp(is);
}

} // namespace tensorrl
