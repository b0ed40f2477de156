#include "mvmhat/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace mvmhat {

namespace {

using Rng = std::mt19937_64;

Vector random_unit(Rng& rng, int dim) {
    std::normal_distribution<Real> gauss(0, 1);
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v[i] = gauss(rng);
    const Real n = v.norm();
    return n > 0 ? Vector(v / n) : Vector(Vector::Unit(dim, 0));
}

}  // namespace

AssignmentInstance generate_assignment_instance(const AssignmentParams& params,
                                                std::uint64_t seed) {
    if (params.n_ids < 1) throw DataError("generate_assignment_instance: n_ids must be >= 1");
    if (params.views < 2) throw DataError("generate_assignment_instance: views must be >= 2");
    if (!(params.error_rate >= 0 && params.error_rate < 1))
        throw DataError("generate_assignment_instance: error_rate must be in [0,1)");
    if (!(params.visibility_prob > 0 && params.visibility_prob <= 1))
        throw DataError("generate_assignment_instance: visibility_prob must be in (0,1]");

    Rng rng(seed);
    std::uniform_real_distribution<Real> unif(0, 1);
    const int n_slots = 2 * params.views;  // two time points, all views each

    AssignmentInstance out;
    out.seed = seed;
    out.visibility = BinaryMatrix::Zero(n_slots, params.n_ids);
    for (int s = 0; s < n_slots; ++s)
        for (int i = 0; i < params.n_ids; ++i)
            out.visibility(s, i) = unif(rng) < params.visibility_prob ? 1 : 0;

    // Every identity must appear somewhere, and every slot keeps at least
    // min(2, n_ids) subjects so that absent-identity rows (uniform over >= 2
    // columns) stay below any matching threshold >= 0.5.
    for (int i = 0; i < params.n_ids; ++i) {
        if (out.visibility.col(i).sum() == 0)
            out.visibility(std::uniform_int_distribution<int>(0, n_slots - 1)(rng), i) = 1;
    }
    const int min_per_slot = std::min(2, params.n_ids);
    for (int s = 0; s < n_slots; ++s) {
        while (out.visibility.row(s).sum() < min_per_slot) {
            const int i = std::uniform_int_distribution<int>(0, params.n_ids - 1)(rng);
            out.visibility(s, i) = 1;
        }
    }

    BlockLayout layout;
    out.slot_identities.resize(n_slots);
    for (int s = 0; s < n_slots; ++s) {
        std::vector<int>& ids = out.slot_identities[s];
        for (int i = 0; i < params.n_ids; ++i)
            if (out.visibility(s, i)) ids.push_back(i);
        std::shuffle(ids.begin(), ids.end(), rng);
        layout.add(s / params.views, 1 + s % params.views, static_cast<int>(ids.size()));
    }

    const int total = layout.total();
    out.truth.layout = layout;
    out.truth.values = Matrix::Zero(total, total);
    out.affinity.layout = layout;
    out.affinity.values = Matrix::Zero(total, total);

    for (int a = 0; a < n_slots; ++a) {
        for (int b = 0; b < n_slots; ++b) {
            const auto& ids_a = out.slot_identities[a];
            const auto& ids_b = out.slot_identities[b];
            const int cols = static_cast<int>(ids_b.size());
            auto truth_block = out.truth.block(a, b);
            auto aff_block = out.affinity.block(a, b);
            for (int p = 0; p < static_cast<int>(ids_a.size()); ++p) {
                int match = -1;
                for (int q = 0; q < cols; ++q)
                    if (ids_b[q] == ids_a[p]) match = q;
                if (match >= 0) {
                    truth_block(p, match) = 1;
                    aff_block(p, match) = 1;
                } else {
                    aff_block.row(p).setConstant(Real(1) / cols);
                }
            }
        }
    }

    // Corrupt cross blocks only; a frame matched against itself keeps its
    // exact self-assignment.
    for (int a = 0; a < n_slots; ++a) {
        for (int b = 0; b < n_slots; ++b) {
            if (a == b) continue;
            const auto& ids_a = out.slot_identities[a];
            const auto& ids_b = out.slot_identities[b];
            const int cols = static_cast<int>(ids_b.size());
            if (cols < 2) continue;
            auto aff_block = out.affinity.block(a, b);
            for (int p = 0; p < static_cast<int>(ids_a.size()); ++p) {
                int match = -1;
                for (int q = 0; q < cols; ++q)
                    if (ids_b[q] == ids_a[p]) match = q;
                if (match < 0) continue;
                if (unif(rng) >= params.error_rate) continue;
                int wrong = std::uniform_int_distribution<int>(0, cols - 2)(rng);
                if (wrong >= match) ++wrong;
                std::swap(aff_block(p, match), aff_block(p, wrong));
            }
            for (int p = 0; p < static_cast<int>(ids_a.size()); ++p) {
                const Real sum = aff_block.row(p).sum();
                if (sum > 0) aff_block.row(p) /= sum;
            }
        }
    }
    return out;
}

Scenario generate_scenario(const ScenarioParams& params, std::uint64_t seed) {
    if (params.n_ids < 1 || params.views < 1 || params.frames < 0 || params.dim < 1)
        throw DataError("generate_scenario: invalid size parameters");
    if (params.noise < 0) throw DataError("generate_scenario: noise must be >= 0");
    if (params.random_occlusions < 0 || params.occlusion_min_len < 1 ||
        params.occlusion_max_len < params.occlusion_min_len)
        throw DataError("generate_scenario: invalid occlusion parameters");

    Rng rng(seed);
    std::uniform_real_distribution<Real> unif(0, 1);
    std::normal_distribution<Real> gauss(0, 1);
    const Real world = params.world;

    // Identity anchors, redrawn while any pair is too aligned.
    std::vector<Vector> anchors(params.n_ids);
    for (int attempt = 0; attempt < 200; ++attempt) {
        for (auto& a : anchors) a = random_unit(rng, params.dim);
        Real worst = 0;
        for (int i = 0; i < params.n_ids; ++i)
            for (int j = i + 1; j < params.n_ids; ++j)
                worst = std::max(worst, std::abs(anchors[i].dot(anchors[j])));
        if (worst <= 0.6) break;
    }

    struct Body {
        Real px, py, vx, vy, w, h;
    };
    std::vector<Body> bodies(params.n_ids);
    for (Body& b : bodies) {
        b.px = world * (0.1 + 0.8 * unif(rng));
        b.py = world * (0.1 + 0.8 * unif(rng));
        const Real angle = 2 * M_PI * unif(rng);
        const Real speed = world * (0.002 + 0.004 * unif(rng));
        b.vx = speed * std::cos(angle);
        b.vy = speed * std::sin(angle);
        b.w = world * (0.03 + 0.03 * unif(rng));
        b.h = world * (0.06 + 0.06 * unif(rng));
    }

    struct Camera {
        Real scale, cos_a, sin_a, tx, ty;
    };
    std::vector<Camera> cameras(params.views);
    for (Camera& c : cameras) {
        c.scale = 0.8 + 0.45 * unif(rng);
        const Real angle = (unif(rng) - 0.5);
        c.cos_a = std::cos(angle);
        c.sin_a = std::sin(angle);
        c.tx = world * 0.1 * (unif(rng) - 0.5);
        c.ty = world * 0.1 * (unif(rng) - 0.5);
    }

    std::vector<OcclusionSpec> occlusions = params.occlusions;
    for (int k = 0; k < params.random_occlusions; ++k) {
        OcclusionSpec o;
        o.view = 1 + std::uniform_int_distribution<int>(0, params.views - 1)(rng);
        o.identity = std::uniform_int_distribution<int>(0, params.n_ids - 1)(rng);
        const int len = std::uniform_int_distribution<int>(params.occlusion_min_len,
                                                           params.occlusion_max_len)(rng);
        o.t_begin = std::uniform_int_distribution<int>(0, std::max(0, params.frames - len))(rng);
        o.t_end = o.t_begin + len;
        occlusions.push_back(o);
    }
    auto hidden = [&occlusions](int view, int identity, int frame) {
        for (const OcclusionSpec& o : occlusions)
            if (o.view == view && o.identity == identity && frame >= o.t_begin && frame < o.t_end)
                return true;
        return false;
    };

    Scenario out;
    out.bundles.reserve(params.frames);
    for (int t = 0; t < params.frames; ++t) {
        if (t > 0) {
            for (Body& b : bodies) {
                b.px += b.vx;
                b.py += b.vy;
                if (b.px < 0) { b.px = -b.px; b.vx = -b.vx; }
                if (b.px > world) { b.px = 2 * world - b.px; b.vx = -b.vx; }
                if (b.py < 0) { b.py = -b.py; b.vy = -b.vy; }
                if (b.py > world) { b.py = 2 * world - b.py; b.vy = -b.vy; }
            }
        }
        FrameBundle bundle;
        bundle.time = t;
        for (int v = 1; v <= params.views; ++v) {
            const Camera& cam = cameras[v - 1];
            std::vector<int> present;
            for (int i = 0; i < params.n_ids; ++i)
                if (!hidden(v, i, t)) present.push_back(i);
            std::shuffle(present.begin(), present.end(), rng);

            FrameSubjects frame;
            frame.view = v;
            frame.time = t;
            frame.features.resize(static_cast<int>(present.size()), params.dim);
            for (int d = 0; d < static_cast<int>(present.size()); ++d) {
                const int i = present[d];
                const Body& b = bodies[i];
                const Real rx = b.px - world / 2;
                const Real ry = b.py - world / 2;
                const Real cx = cam.scale * (cam.cos_a * rx - cam.sin_a * ry) + world / 2 + cam.tx;
                const Real cy = cam.scale * (cam.sin_a * rx + cam.cos_a * ry) + world / 2 + cam.ty;
                Box box{cx - cam.scale * b.w / 2, cy - cam.scale * b.h / 2, cam.scale * b.w,
                        cam.scale * b.h};
                frame.boxes.push_back(box);
                frame.ids.push_back(i);

                Vector e = anchors[i];
                if (params.noise > 0) {
                    for (int k = 0; k < params.dim; ++k) e[k] += params.noise * gauss(rng);
                    const Real n = e.norm();
                    if (n > 0) e /= n;
                }
                frame.features.row(d) = e.transpose();
                out.ground_truth.push_back({v, t, i, box});
            }
            bundle.views.push_back(std::move(frame));
        }
        out.bundles.push_back(std::move(bundle));
    }
    return out;
}

}  // namespace mvmhat
