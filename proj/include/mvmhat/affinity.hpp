#pragma once

#include <cmath>
#include <vector>

#include "mvmhat/types.hpp"

namespace mvmhat {

struct AffinityParams {
    Real epsilon = 0.1;  // temperature sharpness
    Real delta = 0.5;    // target peak mass
};

/// Softmax temperature such that a unit-margin row puts `delta` mass on its
/// peak among C columns: tau = (1/epsilon) * ln((delta*(C-1)+1)/(1-delta)).
inline Real adaptive_temperature(int columns, Real epsilon, Real delta) {
    if (columns < 1) throw DataError("adaptive_temperature: C must be >= 1");
    if (epsilon <= 0) throw DataError("adaptive_temperature: epsilon must be > 0");
    if (!(delta > 0 && delta < 1)) throw DataError("adaptive_temperature: delta must be in (0,1)");
    return std::log((delta * (columns - 1) + 1) / (1 - delta)) / epsilon;
}

/// Dot-product similarity between the subjects of two frames, entry (r,c) =
/// <subject r of i, subject c of j>. Inputs are one feature row per subject.
template <typename DerivedA, typename DerivedB>
Matrix similarity(const Eigen::MatrixBase<DerivedA>& features_i,
                  const Eigen::MatrixBase<DerivedB>& features_j) {
    if (features_i.cols() != features_j.cols())
        throw DataError("similarity: feature dimensions differ");
    return features_i * features_j.transpose();
}

/// Row-wise softmax of tau * S, computed with per-row max subtraction.
template <typename Derived>
Matrix row_softmax(const Eigen::MatrixBase<Derived>& scores, Real tau) {
    if (tau < 0) throw DataError("row_softmax: tau must be >= 0");
    Matrix out(scores.rows(), scores.cols());
    for (Eigen::Index r = 0; r < scores.rows(); ++r) {
        if (scores.cols() == 0) continue;
        const Real m = scores.row(r).maxCoeff();
        out.row(r) = (tau * (scores.row(r).array() - m)).exp();
        out.row(r) /= out.row(r).sum();
    }
    return out;
}

/// Matching matrix for one frame pair: similarity, then the temperature-
/// adaptive row softmax with C = number of target subjects.
template <typename DerivedA, typename DerivedB>
Matrix matching_matrix(const Eigen::MatrixBase<DerivedA>& features_i,
                       const Eigen::MatrixBase<DerivedB>& features_j,
                       const AffinityParams& params) {
    const Matrix s = similarity(features_i, features_j);
    if (s.cols() == 0 || s.rows() == 0) return Matrix::Zero(s.rows(), s.cols());
    const Real tau = adaptive_temperature(static_cast<int>(s.cols()), params.epsilon, params.delta);
    return row_softmax(s, tau);
}

/// Scale every feature row to unit L2 norm. Throws DataError identifying the
/// offending (view, time, det) on a zero-norm row.
FrameSubjects normalize_embeddings(FrameSubjects frame);

/// Block matrix of matching matrices over all given frames in order. Frames
/// with no subjects occupy zero-width slots.
GlobalAffinity assemble_global_affinity(const std::vector<FrameSubjects>& frames,
                                        const AffinityParams& params);

}  // namespace mvmhat
