#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "apet/compression.hpp"
#include "apet/types.hpp"

namespace apet {

/// tokm — fixed binary layout, little-endian throughout:
///   bytes 0..3   magic "TOKM"
///   bytes 4..7   format version, u32 (currently 1)
///   bytes 8..15  n, u64
///   bytes 16..23 d, u64
///   bytes 24..   n·d IEEE-754 float32 payload, row-major, exactly 4·n·d
///                bytes, no trailing data
/// csv  — one token per line, comma-separated decimals (shortest
///        round-trip formatting on write), optional single leading header
///        line starting with '#'.
enum class MatrixFormat { tokm, csv };

inline constexpr std::uint32_t kTokmVersion = 1;

const char* to_string(MatrixFormat f);
MatrixFormat format_from_string(const std::string& s);

/// Parse a matrix file. tokm payloads widen float32 → float64 internally.
TokenMatrix read_matrix(const std::filesystem::path& path, MatrixFormat format);

/// Write a matrix. tokm narrows float64 → float32 with round-to-nearest-even;
/// identical matrices always produce identical bytes.
void write_matrix(const std::filesystem::path& path, MatrixFormat format,
                  const TokenMatrix& x);

/// Canonical JSON for a compression report. Key order is fixed:
///   schema, config{keep, basis_m, sampler, dc_percentile, ridge_rel, merge,
///   seed}, n, d, k, m, residuals{min, max, mean}, degenerate_geometry,
///   basis, retained, groups[, timings_ms]
/// Timings are opt-in: without them, identical runs serialize to identical
/// bytes.
nlohmann::ordered_json report_to_json(const CompressionReport& report,
                                      bool include_timings = false);

void write_report(const std::filesystem::path& path, const CompressionReport& report,
                  bool include_timings = false);

} // namespace apet
