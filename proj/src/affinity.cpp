#include "mvmhat/affinity.hpp"

#include <string>

namespace mvmhat {

FrameSubjects normalize_embeddings(FrameSubjects frame) {
    for (Eigen::Index r = 0; r < frame.features.rows(); ++r) {
        const Real n = frame.features.row(r).norm();
        if (n <= 0)
            throw DataError("normalize_embeddings: zero-norm vector at view " +
                            std::to_string(frame.view) + ", time " + std::to_string(frame.time) +
                            ", det " + std::to_string(r));
        frame.features.row(r) /= n;
    }
    return frame;
}

GlobalAffinity assemble_global_affinity(const std::vector<FrameSubjects>& frames,
                                        const AffinityParams& params) {
    GlobalAffinity out;
    for (const FrameSubjects& f : frames) out.layout.add(f.time, f.view, f.count());
    const int n = out.layout.total();
    out.values = Matrix::Zero(n, n);
    for (int a = 0; a < out.layout.size(); ++a) {
        for (int b = 0; b < out.layout.size(); ++b) {
            if (frames[a].count() == 0 || frames[b].count() == 0) continue;
            out.block(a, b) = matching_matrix(frames[a].features, frames[b].features, params);
        }
    }
    return out;
}

}  // namespace mvmhat
