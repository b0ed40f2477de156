#include "mvmhat/assignment.hpp"

#include <Eigen/Eigenvalues>

#include <cstdint>
#include <cstring>
#include <limits>
#include <string>

namespace mvmhat {

namespace {

std::string matrix_hash(const Matrix& m) {
    // FNV-1a over the raw coefficients, for error reporting only.
    uint64_t h = 1469598103934665603ull;
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        uint64_t bits;
        const Real v = m.data()[i];
        std::memcpy(&bits, &v, sizeof bits);
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xff;
            h *= 1099511628211ull;
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace

std::vector<std::pair<int, int>> hungarian(const Matrix& score) {
    const int rows = static_cast<int>(score.rows());
    const int cols = static_cast<int>(score.cols());
    const int n = std::max(rows, cols);
    if (n == 0) return {};
    if (!score.allFinite()) throw DataError("hungarian: scores must be finite");

    // Minimization on a square padded cost matrix; dummy entries cost 0 and
    // absorb the surplus rows or columns.
    const Real top = (score.size() > 0) ? score.maxCoeff() : 0;
    Matrix cost = Matrix::Zero(n, n);
    cost.topLeftCorner(rows, cols) = (top - score.array()).matrix();

    // Shortest augmenting path with potentials (Jonker-Volgenant style).
    const Real inf = std::numeric_limits<Real>::infinity();
    std::vector<Real> u(n + 1, 0), v(n + 1, 0), minv(n + 1);
    std::vector<int> match(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = match[j0];
            Real delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const Real cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0);
    }

    std::vector<std::pair<int, int>> pairs;
    for (int j = 1; j <= n; ++j) {
        const int i = match[j];
        if (i >= 1 && i <= rows && j <= cols) pairs.emplace_back(i - 1, j - 1);
    }
    std::sort(pairs.begin(), pairs.end());
    return pairs;
}

AssignmentMatrix pseudo_label_assignment(const GlobalAffinity& affinity, Real threshold) {
    AssignmentMatrix out;
    out.layout = affinity.layout;
    out.values = Matrix::Zero(affinity.layout.total(), affinity.layout.total());
    const int nslots = affinity.layout.size();
    for (int a = 0; a < nslots; ++a) {
        for (int b = 0; b < nslots; ++b) {
            if (a == b) {
                const int n = affinity.layout.slot(a).count;
                out.block(a, a) = Matrix::Identity(n, n);
                continue;
            }
            const Matrix block = affinity.block(a, b);
            if (block.size() == 0) continue;
            auto target = out.block(a, b);
            for (const auto& [r, c] : hungarian(block))
                if (block(r, c) > threshold) target(r, c) = 1;
        }
    }
    return out;
}

Matrix psd_project(const Matrix& symmetric) {
    if (symmetric.rows() != symmetric.cols()) throw DataError("psd_project: matrix must be square");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetric);
    if (eig.info() != Eigen::Success)
        throw NumericError("psd_project: eigendecomposition failed, input hash " +
                           matrix_hash(symmetric));
    const Vector clamped = eig.eigenvalues().cwiseMax(0.0);
    return eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
}

AssignmentMatrix consistency_solve(const GlobalAffinity& affinity, const SolverConfig& config) {
    if (config.mode == SolverConfig::Mode::pseudo_only)
        return pseudo_label_assignment(affinity, config.threshold);
    if (config.max_iters < 1) throw DataError("consistency_solve: max_iters must be >= 1");

    AssignmentMatrix out;
    out.layout = affinity.layout;
    Matrix a = 0.5 * (affinity.values + affinity.values.transpose());
    for (int iter = 0; iter < config.max_iters; ++iter) {
        const Matrix prev = a;
        a = psd_project(a);
        a = a.cwiseMax(0.0).cwiseMin(1.0);
        a.diagonal().setConstant(1.0);
        a = 0.5 * (a + a.transpose());
        if ((a - prev).norm() < config.tol) break;
    }
    out.values = std::move(a);
    return out;
}

PermutationSet extract_permutations(const AssignmentMatrix& assignment, Real threshold) {
    PermutationSet out(assignment.layout);
    const int nslots = assignment.layout.size();
    for (int a = 0; a < nslots; ++a) {
        for (int b = a; b < nslots; ++b) {
            const int ra = assignment.layout.slot(a).count;
            const int cb = assignment.layout.slot(b).count;
            BinaryMatrix p = BinaryMatrix::Zero(ra, cb);
            if (a == b) {
                p.diagonal().setConstant(1);
            } else {
                const Matrix block = assignment.block(a, b);
                for (const auto& [r, c] : hungarian(block))
                    if (block(r, c) > threshold) p(r, c) = 1;
            }
            out.block(a, b) = p;
            out.block(b, a) = p.transpose();
        }
    }
    return out;
}

}  // namespace mvmhat
