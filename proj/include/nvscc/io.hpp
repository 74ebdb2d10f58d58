#ifndef NVSCC_IO_HPP
#define NVSCC_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "nvscc/grid.hpp"

namespace nvscc::io {

/// Format a double with 17 significant digits so text round-trips are exact.
std::string format_double(double v);

/// FNV-1a 64-bit over a byte buffer; the manifest's content hash.
std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t fnv1a64(const std::string& s);

/// Hex string of a 64-bit hash.
std::string hash_hex(std::uint64_t h);

/// Hash of a file's contents.
std::uint64_t hash_file(const std::string& path);

/// Write a field as little-endian float64 in the documented x-fastest
/// row-major order, plus a `<path>.json` sidecar with grid metadata.
void write_field(const ScalarField3D& field, const std::string& path);

/// Read back a field written by write_field.
ScalarField3D read_field(const std::string& path);

/// Write CSV rows; every numeric cell is emitted via format_double.
struct CsvWriter {
    explicit CsvWriter(std::string header);
    void row(const std::vector<double>& values);
    void row_with_label(const std::string& label, const std::vector<double>& values);
    void raw_row(const std::string& line);
    const std::string& text() const { return buffer_; }
    void save(const std::string& path) const;

private:
    std::string buffer_;
};

/// Write a string to a file atomically (tmp file + rename).
void write_text_atomic(const std::string& path, const std::string& text);

std::string read_text(const std::string& path);

} // namespace nvscc::io

#endif
