#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "apet/errors.hpp"

namespace apet {

using Index = std::size_t;

// Tokens are rows; row-major storage so a row is contiguous memory.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// The token set: an n×d real matrix, one token per row. Row order is the
/// token's original sequence position and is never reordered by any
/// operation in this library. Construction validates the invariants
/// (n ≥ 1, d ≥ 1, all entries finite); after that the contents are
/// immutable.
class TokenMatrix {
public:
    explicit TokenMatrix(RowMatrix values);

    Index n() const { return static_cast<Index>(values_.rows()); }
    Index d() const { return static_cast<Index>(values_.cols()); }

    const RowMatrix& values() const { return values_; }
    auto row(Index i) const { return values_.row(static_cast<Eigen::Index>(i)); }

private:
    RowMatrix values_;
};

/// Pairwise squared Euclidean distances. Exactly symmetric with a zero
/// diagonal; only the upper triangle is computed, the lower is mirrored.
struct DistanceMatrix {
    Eigen::MatrixXd sq; // n×n, entries ‖v_i − v_j‖₂²

    Index n() const { return static_cast<Index>(sq.rows()); }
    double operator()(Index i, Index j) const {
        return sq(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
};

/// Least-squares coefficients: row i expresses token i in the basis.
/// (n×m; tokens as rows, so this is the transpose of the usual
/// basis-times-coefficients convention with tokens as columns.)
struct Coefficients {
    RowMatrix values; // n×m

    Index n() const { return static_cast<Index>(values.rows()); }
    Index m() const { return static_cast<Index>(values.cols()); }
};

enum class Sampler { fps, dpc, random };

const char* to_string(Sampler s);
Sampler sampler_from_string(const std::string& s);

/// The basis token subset: m distinct row indices in selection order.
/// For FPS the selection order is nested: the first k indices for budget m
/// equal the full selection for budget k.
struct BasisSelection {
    std::vector<Index> indices;
    Sampler strategy = Sampler::fps;
    std::uint64_t seed = 0;
    // Set when the geometry collapsed (all pairwise distances zero) and the
    // selection fell back to the first m indices.
    bool degenerate = false;

    Index m() const { return indices.size(); }
};

enum class MergeMode { mean, drop };

const char* to_string(MergeMode m);
MergeMode merge_mode_from_string(const std::string& s);

} // namespace apet
