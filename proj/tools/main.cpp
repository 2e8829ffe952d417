// apet — approximation-error guided token compression CLI.
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "apet/approximation.hpp"
#include "apet/compression.hpp"
#include "apet/evaluation.hpp"
#include "apet/io.hpp"
#include "apet/sampling.hpp"

namespace {

using apet::Index;

std::string shortest(double value) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text) {
    const auto pos = text.find("..");
    if (pos == std::string::npos)
        throw apet::UsageError("--seeds expects the form S0..S1 (got '" + text + "')");
    std::uint64_t begin = 0, end = 0;
    const char* b0 = text.data();
    const char* b1 = text.data() + pos;
    const char* e0 = text.data() + pos + 2;
    const char* e1 = text.data() + text.size();
    if (std::from_chars(b0, b1, begin).ptr != b1 || std::from_chars(e0, e1, end).ptr != e1)
        throw apet::UsageError("--seeds expects unsigned integers S0..S1");
    if (end < begin) throw apet::UsageError("--seeds range end must be >= begin");
    return {begin, end};
}

std::vector<apet::BaselineStrategy> parse_baselines(const std::string& text) {
    std::vector<apet::BaselineStrategy> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const auto len = (comma == std::string::npos ? text.size() : comma) - pos;
        const std::string name = text.substr(pos, len);
        if (!name.empty()) out.push_back(apet::baseline_from_string(name));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) throw apet::UsageError("--baselines list is empty");
    return out;
}

std::vector<Index> read_index_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw apet::IoError("cannot open '" + path.string() + "' for reading");
    std::vector<Index> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::uint64_t value = 0;
        const char* b = line.data();
        const char* e = line.data() + line.size();
        if (std::from_chars(b, e, value).ptr != e)
            throw apet::DataError("'" + path.string() + "': cannot parse index '" + line + "'");
        out.push_back(static_cast<Index>(value));
    }
    return out;
}

void write_index_lines(const std::filesystem::path& path, const std::vector<Index>& indices) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw apet::IoError("cannot open '" + path.string() + "' for writing");
    for (Index i : indices) out << i << '\n';
    if (!out) throw apet::IoError("write failure on '" + path.string() + "'");
}

void emit_lines(const std::optional<std::string>& output, const std::string& text) {
    if (output) {
        std::ofstream out(*output, std::ios::trunc);
        if (!out) throw apet::IoError("cannot open '" + *output + "' for writing");
        out << text;
        if (!out) throw apet::IoError("write failure on '" + *output + "'");
    } else {
        std::cout << text;
    }
}

struct SamplerFlags {
    std::string sampler = "fps";
    double dc_percentile = apet::kDefaultDcPercentile;
    std::uint64_t seed = 0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--sampler", sampler, "Basis sampling strategy: fps|dpc|random")
            ->capture_default_str();
        cmd->add_option("--dc-percentile", dc_percentile,
                        "DPC cutoff percentile of squared distances, in (0,100)")
            ->capture_default_str();
        cmd->add_option("--seed", seed, "Seed for the random sampler")->capture_default_str();
    }

    apet::BasisSelection run(const apet::TokenMatrix& x, Index m) const {
        switch (apet::sampler_from_string(sampler)) {
            case apet::Sampler::fps: return apet::sample_fps(x, m);
            case apet::Sampler::dpc: return apet::sample_dpc(x, m, dc_percentile);
            case apet::Sampler::random: return apet::sample_random(x, m, seed);
        }
        throw apet::UsageError("unknown sampler");
    }
};

int run(int argc, char** argv) {
    CLI::App app{"approximation-error guided token compression"};
    app.require_subcommand(1);

    // --- compress ---
    auto* compress_cmd =
        app.add_subcommand("compress", "Compress a token matrix to K tokens");
    struct {
        std::string input, output;
        std::string format = "tokm";
        std::optional<std::uint64_t> keep;
        std::optional<double> ratio;
        std::uint64_t basis_m = 10;
        SamplerFlags sampler;
        double ridge = 1e-6;
        std::string merge = "mean";
        std::optional<std::string> report;
    } co;
    compress_cmd->add_option("--input", co.input, "Input matrix path")->required();
    compress_cmd->add_option("--format", co.format, "Matrix format: tokm|csv")
        ->capture_default_str();
    auto* keep_opt = compress_cmd->add_option("--keep", co.keep, "Retain exactly K tokens");
    compress_cmd->add_option("--ratio", co.ratio, "Retain round(ratio*n) tokens")
        ->excludes(keep_opt);
    compress_cmd->add_option("--basis-m", co.basis_m, "Basis size M")->capture_default_str();
    co.sampler.attach(compress_cmd);
    compress_cmd->add_option("--ridge", co.ridge, "Relative ridge for the basis fit")
        ->capture_default_str();
    compress_cmd->add_option("--merge", co.merge, "Merge mode: mean|drop")
        ->capture_default_str();
    compress_cmd->add_option("--output", co.output, "Output matrix path")->required();
    compress_cmd->add_option("--report", co.report, "Write a JSON report here");
    compress_cmd->callback([&] {
        const auto format = apet::format_from_string(co.format);
        const apet::TokenMatrix x = apet::read_matrix(co.input, format);
        apet::ApetConfig cfg;
        if (co.keep) cfg.keep = static_cast<Index>(*co.keep);
        cfg.keep_ratio = co.ratio;
        cfg.basis_m = static_cast<Index>(co.basis_m);
        cfg.sampler = apet::sampler_from_string(co.sampler.sampler);
        cfg.dc_percentile = co.sampler.dc_percentile;
        cfg.seed = co.sampler.seed;
        cfg.ridge_rel = co.ridge;
        cfg.merge = apet::merge_mode_from_string(co.merge);
        auto [merged, report] = apet::compress(x, cfg);
        apet::write_matrix(co.output, format, merged);
        if (co.report) apet::write_report(*co.report, report);
        std::cerr << "compress: n=" << report.n << " d=" << report.d << " k=" << report.k
                  << " m=" << report.m << " | sample " << shortest(report.timings.sample_ms)
                  << "ms, fit " << shortest(report.timings.fit_ms) << "ms, select "
                  << shortest(report.timings.select_ms) << "ms, merge "
                  << shortest(report.timings.merge_ms) << "ms, total "
                  << shortest(report.timings.total_ms) << "ms\n";
    });

    // --- score ---
    auto* score_cmd =
        app.add_subcommand("score", "Emit per-token approximation-error residuals (csv)");
    struct {
        std::string input;
        std::string format = "tokm";
        std::uint64_t basis_m = 10;
        SamplerFlags sampler;
        double ridge = 1e-6;
        std::optional<std::string> output;
    } sc;
    score_cmd->add_option("--input", sc.input, "Input matrix path")->required();
    score_cmd->add_option("--format", sc.format, "Matrix format: tokm|csv")
        ->capture_default_str();
    score_cmd->add_option("--basis-m", sc.basis_m, "Basis size M")->capture_default_str();
    sc.sampler.attach(score_cmd);
    score_cmd->add_option("--ridge", sc.ridge, "Relative ridge for the basis fit")
        ->capture_default_str();
    score_cmd->add_option("--output", sc.output, "Residual csv path (default: stdout)");
    score_cmd->callback([&] {
        const apet::TokenMatrix x =
            apet::read_matrix(sc.input, apet::format_from_string(sc.format));
        const apet::BasisSelection basis = sc.sampler.run(x, static_cast<Index>(sc.basis_m));
        const apet::ApproximationResult fit = apet::fit_basis(x, basis, sc.ridge);
        std::string text;
        for (double r : fit.residuals) {
            text += shortest(r);
            text += '\n';
        }
        emit_lines(sc.output, text);
    });

    // --- sample ---
    auto* sample_cmd = app.add_subcommand("sample", "Emit basis token indices");
    struct {
        std::string input;
        std::string format = "tokm";
        std::uint64_t m = 10;
        SamplerFlags sampler;
        std::optional<std::string> output;
    } sa;
    sample_cmd->add_option("--input", sa.input, "Input matrix path")->required();
    sample_cmd->add_option("--format", sa.format, "Matrix format: tokm|csv")
        ->capture_default_str();
    sample_cmd->add_option("--m", sa.m, "Number of basis tokens")->required();
    sa.sampler.attach(sample_cmd);
    sample_cmd->add_option("--output", sa.output, "Index list path (default: stdout)");
    sample_cmd->callback([&] {
        const apet::TokenMatrix x =
            apet::read_matrix(sa.input, apet::format_from_string(sa.format));
        const apet::BasisSelection basis = sa.sampler.run(x, static_cast<Index>(sa.m));
        std::string text;
        for (Index i : basis.indices) {
            text += std::to_string(i);
            text += '\n';
        }
        emit_lines(sa.output, text);
    });

    // --- synth ---
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic token matrix (tokm)");
    struct {
        std::string kind;
        std::uint64_t n = 0, d = 0, rank = 1, outliers = 0;
        double sigma = 0.0;
        std::uint64_t seed = 0;
        std::string output;
        std::optional<std::string> truth;
    } sy;
    synth_cmd->add_option("--kind", sy.kind, "lowrank|outliers|clusters")->required();
    synth_cmd->add_option("--n", sy.n, "Token count")->required();
    synth_cmd->add_option("--d", sy.d, "Feature dimension")->required();
    synth_cmd->add_option("--rank", sy.rank, "Factor rank / cluster count")
        ->capture_default_str();
    synth_cmd->add_option("--outliers", sy.outliers, "Planted outlier count")
        ->capture_default_str();
    synth_cmd->add_option("--sigma", sy.sigma, "Noise level")->capture_default_str();
    synth_cmd->add_option("--seed", sy.seed, "Generator seed")->capture_default_str();
    synth_cmd->add_option("--output", sy.output, "Output matrix path (tokm)")->required();
    synth_cmd->add_option("--truth", sy.truth, "Write planted outlier indices here");
    synth_cmd->callback([&] {
        apet::SyntheticSpec spec;
        spec.kind = apet::synthetic_kind_from_string(sy.kind);
        spec.n = static_cast<Index>(sy.n);
        spec.d = static_cast<Index>(sy.d);
        spec.rank = static_cast<Index>(sy.rank);
        spec.outliers = static_cast<Index>(sy.outliers);
        spec.sigma = sy.sigma;
        spec.seed = sy.seed;
        const apet::SyntheticData data = apet::gen_synthetic(spec);
        apet::write_matrix(sy.output, apet::MatrixFormat::tokm, data.tokens);
        if (sy.truth) {
            if (!data.truth)
                throw apet::UsageError("--truth is only meaningful for --kind outliers");
            write_index_lines(*sy.truth, *data.truth);
        }
    });

    // --- eval ---
    auto* eval_cmd =
        app.add_subcommand("eval", "Compare retention quality against baselines");
    struct {
        std::string input;
        std::optional<std::string> truth;
        std::uint64_t keep = 0;
        std::uint64_t basis_m = 10;
        std::string baselines = "random,norm,stride";
        std::string seeds = "0..0";
        std::string report;
    } ev;
    eval_cmd->add_option("--input", ev.input, "Input matrix path (tokm)")->required();
    eval_cmd->add_option("--truth", ev.truth, "Ground-truth outlier index file");
    eval_cmd->add_option("--keep", ev.keep, "Retain exactly K tokens")->required();
    eval_cmd->add_option("--basis-m", ev.basis_m, "Basis size M")->capture_default_str();
    eval_cmd->add_option("--baselines", ev.baselines, "Comma list of random|norm|stride")
        ->capture_default_str();
    eval_cmd->add_option("--seeds", ev.seeds, "Inclusive seed range S0..S1")
        ->capture_default_str();
    eval_cmd->add_option("--report", ev.report, "Write the JSON result table here")
        ->required();
    eval_cmd->callback([&] {
        const apet::TokenMatrix x = apet::read_matrix(ev.input, apet::MatrixFormat::tokm);
        std::optional<std::vector<Index>> truth;
        if (ev.truth) truth = read_index_file(*ev.truth);
        apet::EvalOptions options;
        options.keep = static_cast<Index>(ev.keep);
        options.basis_m = static_cast<Index>(ev.basis_m);
        options.baselines = parse_baselines(ev.baselines);
        std::tie(options.seed_begin, options.seed_end) = parse_seed_range(ev.seeds);
        const apet::EvalResult result = apet::run_eval(x, truth, options);
        std::ofstream out(ev.report, std::ios::trunc);
        if (!out) throw apet::IoError("cannot open '" + ev.report + "' for writing");
        out << apet::eval_to_json(result).dump(2) << '\n';
        if (!out) throw apet::IoError("write failure on '" + ev.report + "'");
        for (const auto& m : result.methods) {
            std::cerr << m.name << ": mean_rel_error=" << shortest(m.mean_rel_error);
            if (m.mean_recall) std::cerr << " mean_recall=" << shortest(*m.mean_recall);
            std::cerr << '\n';
        }
    });

    // --- bound ---
    auto* bound_cmd = app.add_subcommand(
        "bound", "Print the entropy lower bound on per-dimension reconstruction MSE");
    struct {
        double h_cond = 0.0;
        std::uint64_t dim = 1;
    } bo;
    bound_cmd->add_option("--h-cond", bo.h_cond, "Conditional entropy in nats")->required();
    bound_cmd->add_option("--dim", bo.dim, "Feature dimension")->required();
    bound_cmd->callback([&] {
        const double value =
            apet::mse_entropy_bound({bo.h_cond, static_cast<Index>(bo.dim)});
        std::cout << shortest(value) << '\n';
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const apet::UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const apet::DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const apet::NumericError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
