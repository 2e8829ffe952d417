#include "apet/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace apet {

namespace {

constexpr std::array<char, 4> kMagic = {'T', 'O', 'K', 'M'};

template <typename T>
void put_le(std::string& out, T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i)
        out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
}

template <typename T>
T get_le(const unsigned char* p) {
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        value |= static_cast<T>(p[i]) << (8 * i);
    return value;
}

std::string read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (!in.good() && !in.eof()) throw IoError("read failure on '" + path.string() + "'");
    return std::move(buf).str();
}

void write_file_bytes(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failure on '" + path.string() + "'");
}

TokenMatrix parse_tokm(const std::string& bytes, const std::filesystem::path& path) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic.data(), 4) != 0)
        throw BadMagic("'" + path.string() + "' is not a tokm file");
    if (bytes.size() < 24)
        throw TruncatedPayload("'" + path.string() + "': header truncated");

    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const auto version = get_le<std::uint32_t>(p + 4);
    if (version != kTokmVersion)
        throw UnsupportedVersion("'" + path.string() + "': tokm version " +
                                 std::to_string(version) + " unsupported");
    const auto n = get_le<std::uint64_t>(p + 8);
    const auto d = get_le<std::uint64_t>(p + 16);
    if (n < 1 || d < 1)
        throw EmptyMatrix("'" + path.string() + "': matrix dimensions must be positive");
    if (d != 0 && n > (std::numeric_limits<std::uint64_t>::max() / 4) / d)
        throw TruncatedPayload("'" + path.string() + "': dimensions overflow payload size");

    const std::uint64_t payload = 4 * n * d;
    if (bytes.size() < 24 + payload)
        throw TruncatedPayload("'" + path.string() + "': payload shorter than 4*n*d bytes");
    if (bytes.size() > 24 + payload)
        throw TrailingBytes("'" + path.string() + "': trailing bytes after payload");

    RowMatrix values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    const unsigned char* q = p + 24;
    for (std::uint64_t i = 0; i < n * d; ++i, q += 4) {
        const std::uint32_t word = get_le<std::uint32_t>(q);
        float f;
        std::memcpy(&f, &word, 4);
        if (!std::isfinite(f))
            throw NonFiniteValue("'" + path.string() + "': non-finite value in payload");
        values.data()[i] = static_cast<double>(f);
    }
    return TokenMatrix(std::move(values));
}

TokenMatrix parse_csv(const std::string& bytes, const std::filesystem::path& path) {
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 0;
    std::istringstream in(bytes);
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1 && !line.empty() && line.front() == '#') continue;
        if (line.empty()) continue;

        std::vector<double> row;
        std::size_t pos = 0;
        while (true) {
            std::size_t comma = line.find(',', pos);
            std::string_view field(line.data() + pos,
                                   (comma == std::string::npos ? line.size() : comma) - pos);
            while (!field.empty() && (field.front() == ' ' || field.front() == '\t'))
                field.remove_prefix(1);
            while (!field.empty() && (field.back() == ' ' || field.back() == '\t'))
                field.remove_suffix(1);
            double value = 0.0;
            const auto [ptr, ec] =
                std::from_chars(field.data(), field.data() + field.size(), value);
            if (ec != std::errc{} || ptr != field.data() + field.size())
                throw DataError("'" + path.string() + "' line " + std::to_string(line_no) +
                                ": cannot parse '" + std::string(field) + "' as a number");
            if (!std::isfinite(value))
                throw NonFiniteValue("'" + path.string() + "' line " +
                                     std::to_string(line_no) + ": non-finite value");
            row.push_back(value);
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw RaggedCsv("'" + path.string() + "' line " + std::to_string(line_no) +
                            ": expected " + std::to_string(rows.front().size()) +
                            " columns, got " + std::to_string(row.size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw EmptyMatrix("'" + path.string() + "': no data rows");

    RowMatrix values(static_cast<Eigen::Index>(rows.size()),
                     static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return TokenMatrix(std::move(values));
}

std::string format_shortest(double value) {
    std::array<char, 32> buf;
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), res.ptr);
}

} // namespace

const char* to_string(MatrixFormat f) { return f == MatrixFormat::tokm ? "tokm" : "csv"; }

MatrixFormat format_from_string(const std::string& s) {
    if (s == "tokm") return MatrixFormat::tokm;
    if (s == "csv") return MatrixFormat::csv;
    throw UsageError("unknown matrix format '" + s + "' (expected tokm|csv)");
}

TokenMatrix read_matrix(const std::filesystem::path& path, MatrixFormat format) {
    const std::string bytes = read_file_bytes(path);
    return format == MatrixFormat::tokm ? parse_tokm(bytes, path) : parse_csv(bytes, path);
}

void write_matrix(const std::filesystem::path& path, MatrixFormat format,
                  const TokenMatrix& x) {
    std::string bytes;
    if (format == MatrixFormat::tokm) {
        bytes.reserve(24 + 4 * x.n() * x.d());
        bytes.append(kMagic.data(), 4);
        put_le<std::uint32_t>(bytes, kTokmVersion);
        put_le<std::uint64_t>(bytes, x.n());
        put_le<std::uint64_t>(bytes, x.d());
        for (Index i = 0; i < x.n() * x.d(); ++i) {
            // double → float narrowing rounds to nearest-even (default FP mode)
            const float f = static_cast<float>(x.values().data()[i]);
            std::uint32_t word;
            std::memcpy(&word, &f, 4);
            put_le<std::uint32_t>(bytes, word);
        }
    } else {
        for (Index i = 0; i < x.n(); ++i) {
            for (Index j = 0; j < x.d(); ++j) {
                if (j) bytes.push_back(',');
                bytes += format_shortest(
                    x.values()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            }
            bytes.push_back('\n');
        }
    }
    write_file_bytes(path, bytes);
}

nlohmann::ordered_json report_to_json(const CompressionReport& report,
                                      bool include_timings) {
    nlohmann::ordered_json j;
    j["schema"] = "1";
    nlohmann::ordered_json cfg;
    cfg["keep"] = report.config.keep.value_or(report.k);
    cfg["basis_m"] = report.config.basis_m;
    cfg["sampler"] = to_string(report.config.sampler);
    cfg["dc_percentile"] = report.config.dc_percentile;
    cfg["ridge_rel"] = report.config.ridge_rel;
    cfg["merge"] = to_string(report.config.merge);
    cfg["seed"] = report.config.seed;
    j["config"] = std::move(cfg);
    j["n"] = report.n;
    j["d"] = report.d;
    j["k"] = report.k;
    j["m"] = report.m;
    j["residuals"] = {
        {"min", report.residual_min},
        {"max", report.residual_max},
        {"mean", report.residual_mean},
    };
    j["degenerate_geometry"] = report.degenerate_geometry;
    j["basis"] = report.basis_indices;
    j["retained"] = report.retained;
    j["groups"] = report.groups;
    if (include_timings) {
        j["timings_ms"] = {
            {"sample", report.timings.sample_ms}, {"fit", report.timings.fit_ms},
            {"select", report.timings.select_ms}, {"merge", report.timings.merge_ms},
            {"total", report.timings.total_ms},
        };
    }
    return j;
}

void write_report(const std::filesystem::path& path, const CompressionReport& report,
                  bool include_timings) {
    write_file_bytes(path, report_to_json(report, include_timings).dump(2) + "\n");
}

} // namespace apet
