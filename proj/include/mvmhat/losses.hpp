#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mvmhat/types.hpp"

namespace mvmhat {

/// A loss term together with its analytic gradients, keyed by input name
/// (e.g. "X_ij"). Summing two LossValues merges the maps, adding gradients
/// for shared inputs.
struct LossValue {
    Real value = 0;
    std::map<std::string, Matrix> gradients;
};

LossValue total_loss(const std::vector<LossValue>& parts);

/// Round trip i -> j -> i of two matching matrices; identity on co-visible
/// subjects when both matchings are consistent.
Matrix symmetric_similarity(const Matrix& x_ij, const Matrix& x_ji);

/// Cycle i -> j -> k -> i of three matching matrices.
Matrix transitive_similarity(const Matrix& x_ij, const Matrix& x_jk, const Matrix& x_ki);

/// Per-row presence pseudo label: 1 iff the row's best match in the
/// counterpart frame clears the threshold (a row that peaks below it is
/// treated as a dummy, i.e. the subject is absent from the other frame).
std::vector<int> pair_presence_labels(const Matrix& x_ij, Real threshold);

/// Presence requires clearing the threshold towards both counterpart frames.
std::vector<int> triple_presence_labels(const Matrix& x_ij, const Matrix& x_ik, Real threshold);

/// Margin penalty for a subject expected on the diagonal: the diagonal entry
/// must beat the hardest off-diagonal entry of its row by m1.
Real row_loss_present(const Matrix& consistency, int row, Real m1);

/// Penalty for a dummy row: the diagonal entry must stay within m2 of both
/// the largest and smallest off-diagonal entry.
Real row_loss_absent(const Matrix& consistency, int row, Real m2);

/// Sum of present/absent row losses over a consistency matrix, selected by
/// the pseudo labels. Gradient key: "I".
LossValue matrix_loss(const Matrix& consistency, const std::vector<int>& labels, Real m1, Real m2);

/// Feature-side symmetry loss: matrix_loss of the i->j->i round trip plus the
/// j->i->j round trip, each with labels from its own forward direction.
/// Gradient keys: "X_ij", "X_ji".
LossValue feature_symmetry_loss(const Matrix& x_ij, const Matrix& x_ji, Real threshold, Real m1,
                                Real m2);

/// Feature-side transitivity loss: matrix_loss of the i->j->k->i cycle and of
/// its transpose, labels from (x_ij, x_ik). Gradient keys: "X_ij", "X_jk",
/// "X_ki", "X_ik" (the last is zero; it only feeds the labels).
LossValue feature_transitivity_loss(const Matrix& x_ij, const Matrix& x_jk, const Matrix& x_ki,
                                    const Matrix& x_ik, Real threshold, Real m1, Real m2);

/// Fraction of zero entries in a binary label matrix; the "auto" setting for
/// the focal loss alpha.
Real auto_alpha(const BinaryMatrix& labels);

/// Focal cross-entropy between an assignment matrix and a binary pseudo
/// label, entries clamped to [1e-7, 1 - 1e-7]. Gradient key: "A".
LossValue focal_pseudo_loss(const Matrix& assignment, const BinaryMatrix& labels, Real alpha,
                            Real gamma);

/// Frobenius norm of (A - A^T). Gradient key: "A".
LossValue assignment_symmetry_loss(const Matrix& assignment);

/// Nuclear norm (sum of singular values) with subgradient U V^T. Gradient
/// key: "A".
LossValue nuclear_norm_loss(const Matrix& assignment);

using LossFn = std::function<LossValue(const std::map<std::string, Matrix>&)>;

struct FiniteDiffReport {
    Real max_rel_error = 0;
    int checked = 0;
    int skipped = 0;  // entries adjacent to a relu/max/min kink
    Real tolerance = 1e-4;

    bool pass() const { return max_rel_error <= tolerance; }
};

/// Compare analytic gradients against central finite differences at `point`.
/// Entries where the one-sided slopes disagree (a kink within h) are skipped.
/// Relative error is |analytic - numeric| / max(1, |analytic|, |numeric|).
FiniteDiffReport finite_diff_check(const LossFn& fn, const std::map<std::string, Matrix>& point,
                                   Real h = 1e-5, Real tol = 1e-4);

}  // namespace mvmhat
