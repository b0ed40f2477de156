#pragma once

#include <utility>
#include <vector>

#include "mvmhat/types.hpp"

namespace mvmhat {

/// One-to-one pairing maximizing total score over min(rows, cols) pairs.
/// Rectangular inputs are padded internally; pairs are returned sorted by
/// row. Deterministic: equal-score alternatives resolve by scan order
/// (lowest column first).
std::vector<std::pair<int, int>> hungarian(const Matrix& score);

/// Symmetric unit-interval matrix over a block layout; per-block rounding
/// yields the cross-view / over-time permutations.
struct AssignmentMatrix {
    Matrix values;
    BlockLayout layout;

    Eigen::Block<Matrix> block(int a, int b) {
        const auto& sa = layout.slot(a);
        const auto& sb = layout.slot(b);
        return values.block(sa.offset, sb.offset, sa.count, sb.count);
    }
    Eigen::Block<const Matrix> block(int a, int b) const {
        const auto& sa = layout.slot(a);
        const auto& sb = layout.slot(b);
        return values.block(sa.offset, sb.offset, sa.count, sb.count);
    }
};

struct SolverConfig {
    Real threshold = 0.5;  // match acceptance threshold M
    int max_iters = 10;
    Real tol = 1e-6;
    enum class Mode { consistency, pseudo_only } mode = Mode::consistency;
};

/// Per-block Hungarian rounding of the affinity: pairs scoring <= threshold
/// are dropped, same-frame diagonal blocks are identity. Not necessarily
/// symmetric (block (a,b) and (b,a) are rounded independently).
AssignmentMatrix pseudo_label_assignment(const GlobalAffinity& affinity, Real threshold);

/// Nearest positive-semidefinite matrix in Frobenius norm: eigenvalues
/// clamped at zero. Input must be symmetric.
Matrix psd_project(const Matrix& symmetric);

/// Deterministic globally consistent assignment from the affinity:
/// symmetrize, then alternate PSD projection with clamping to [0,1], unit
/// diagonal, and re-symmetrization until the iterate stops moving. In
/// pseudo_only mode returns pseudo_label_assignment instead.
AssignmentMatrix consistency_solve(const GlobalAffinity& affinity, const SolverConfig& config);

/// Binary permutation blocks rounded from a solved assignment. Only upper-
/// triangle block pairs are rounded; the mirror block is the transpose, so
/// consumers always see P(a,b) == P(b,a)^T.
class PermutationSet {
public:
    PermutationSet() = default;
    explicit PermutationSet(const BlockLayout& layout)
        : layout_(layout), blocks_(static_cast<size_t>(layout.size()) * layout.size()) {}

    const BlockLayout& layout() const { return layout_; }
    const BinaryMatrix& block(int a, int b) const {
        return blocks_.at(static_cast<size_t>(a) * layout_.size() + b);
    }
    BinaryMatrix& block(int a, int b) {
        return blocks_.at(static_cast<size_t>(a) * layout_.size() + b);
    }

private:
    BlockLayout layout_;
    std::vector<BinaryMatrix> blocks_;
};

PermutationSet extract_permutations(const AssignmentMatrix& assignment, Real threshold);

}  // namespace mvmhat
