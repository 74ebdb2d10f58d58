#include "nvscc/io.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace nvscc::io {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::uint64_t fnv1a64(const void* data, std::size_t size) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::uint64_t hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("hash_file: cannot open '" + path + "'");
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[65536];
    while (in) {
        in.read(buf, sizeof(buf));
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ull;
        }
    }
    return h;
}

void write_text_atomic(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open '" + tmp + "' for writing");
        out.write(text.data(), std::streamsize(text.size()));
        if (!out) throw std::runtime_error("write failure on '" + tmp + "'");
    }
    fs::rename(tmp, path);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_field(const ScalarField3D& field, const std::string& path) {
    // raw float64 payload; this code targets little-endian hosts
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open '" + tmp + "' for writing");
        out.write(reinterpret_cast<const char*>(field.values.data()),
                  std::streamsize(field.values.size() * sizeof(double)));
        if (!out) throw std::runtime_error("write failure on '" + tmp + "'");
    }
    fs::rename(tmp, path);

    json side;
    side["format"] = "float64-le";
    side["order"] = "x-fastest row-major (x,y,z)";
    side["unit"] = field.unit;
    side["origin_nm"] = {field.grid.origin[0], field.grid.origin[1], field.grid.origin[2]};
    side["spacing_nm"] = {field.grid.spacing[0], field.grid.spacing[1], field.grid.spacing[2]};
    side["counts"] = {field.grid.counts[0], field.grid.counts[1], field.grid.counts[2]};
    write_text_atomic(path + ".json", side.dump(2) + "\n");
}

ScalarField3D read_field(const std::string& path) {
    const json side = json::parse(read_text(path + ".json"));
    Grid3D grid({side["origin_nm"][0], side["origin_nm"][1], side["origin_nm"][2]},
                {side["spacing_nm"][0], side["spacing_nm"][1], side["spacing_nm"][2]},
                {side["counts"][0], side["counts"][1], side["counts"][2]});
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::vector<double> values(std::size_t(grid.node_count()));
    in.read(reinterpret_cast<char*>(values.data()),
            std::streamsize(values.size() * sizeof(double)));
    if (std::size_t(in.gcount()) != values.size() * sizeof(double))
        throw std::runtime_error("short read on '" + path + "'");
    return ScalarField3D(grid, std::move(values), side["unit"].get<std::string>());
}

CsvWriter::CsvWriter(std::string header) : buffer_(std::move(header)) {
    buffer_ += '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) buffer_ += ',';
        buffer_ += format_double(values[i]);
    }
    buffer_ += '\n';
}

void CsvWriter::row_with_label(const std::string& label, const std::vector<double>& values) {
    buffer_ += label;
    for (double v : values) {
        buffer_ += ',';
        buffer_ += format_double(v);
    }
    buffer_ += '\n';
}

void CsvWriter::raw_row(const std::string& line) {
    buffer_ += line;
    buffer_ += '\n';
}

void CsvWriter::save(const std::string& path) const { write_text_atomic(path, buffer_); }

} // namespace nvscc::io
