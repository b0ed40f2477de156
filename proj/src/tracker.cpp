#include "mvmhat/tracker.hpp"

#include <algorithm>

namespace mvmhat {

MultiViewTracker::MultiViewTracker(TrackerConfig config) : config_(std::move(config)) {
    config_.solver.threshold = config_.match_threshold;
}

Box MultiViewTracker::predict_box(const TrackletView& tv) const {
    if (!tv.has_prev) return tv.last_box;
    Box b;
    b.x = 2 * tv.last_box.x - tv.prev_box.x;
    b.y = 2 * tv.last_box.y - tv.prev_box.y;
    b.w = std::max<Real>(2 * tv.last_box.w - tv.prev_box.w, 1e-3);
    b.h = std::max<Real>(2 * tv.last_box.h - tv.prev_box.h, 1e-3);
    return b;
}

TemporalMatches MultiViewTracker::temporal_associate(int view, const FrameSubjects& frame) const {
    // Active tracklets of this view, most recently seen first.
    std::vector<int> candidates;
    for (int i = 0; i < static_cast<int>(tracklets_.size()); ++i) {
        auto it = tracklets_[i].views.find(view);
        if (it != tracklets_[i].views.end() && it->second.active) candidates.push_back(i);
    }
    std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
        const int la = tracklets_[a].views.at(view).last_seen;
        const int lb = tracklets_[b].views.at(view).last_seen;
        if (la != lb) return la > lb;
        return tracklets_[a].id < tracklets_[b].id;
    });

    const int n_dets = frame.count();
    TemporalMatches out;
    std::vector<char> det_taken(n_dets, 0);
    std::vector<char> trk_taken(candidates.size(), 0);

    // Stage 1: appearance. Embedding dot products, one-to-one, accepted
    // above the matching threshold.
    if (!candidates.empty() && n_dets > 0) {
        Matrix score(candidates.size(), n_dets);
        for (size_t r = 0; r < candidates.size(); ++r) {
            const Vector& f = tracklets_[candidates[r]].views.at(view).feature;
            score.row(r) = (frame.features * f).transpose();
        }
        for (const auto& [r, c] : hungarian(score)) {
            if (score(r, c) > config_.match_threshold) {
                out.matches.emplace_back(candidates[r], c);
                trk_taken[r] = 1;
                det_taken[c] = 1;
            }
        }
    }

    // Stage 2: box overlap against constant-velocity predictions.
    std::vector<int> rest_trk, rest_det;
    for (size_t r = 0; r < candidates.size(); ++r)
        if (!trk_taken[r]) rest_trk.push_back(candidates[r]);
    for (int c = 0; c < n_dets; ++c)
        if (!det_taken[c]) rest_det.push_back(c);
    if (!rest_trk.empty() && !rest_det.empty()) {
        Matrix overlap(rest_trk.size(), rest_det.size());
        for (size_t r = 0; r < rest_trk.size(); ++r) {
            const Box pred = predict_box(tracklets_[rest_trk[r]].views.at(view));
            for (size_t c = 0; c < rest_det.size(); ++c)
                overlap(r, c) = iou(pred, frame.boxes[rest_det[c]]);
        }
        for (const auto& [r, c] : hungarian(overlap)) {
            if (overlap(r, c) > config_.iou_min) {
                out.matches.emplace_back(rest_trk[r], rest_det[c]);
                det_taken[rest_det[c]] = 1;
            }
        }
    }

    for (int c = 0; c < n_dets; ++c)
        if (!det_taken[c]) out.unmatched.push_back(c);
    std::sort(out.matches.begin(), out.matches.end(),
              [](const auto& a, const auto& b) { return a.second < b.second; });
    return out;
}

void MultiViewTracker::observe(int tracklet_index, int view, int time, const Box& box,
                               const Vector& feature) {
    TrackletView& tv = tracklets_[tracklet_index].views[view];
    const bool fresh = tv.feature.size() == 0;
    if (!fresh && tv.last_seen == time - 1) {
        tv.prev_box = tv.last_box;
        tv.has_prev = true;
    } else {
        tv.has_prev = false;
    }
    tv.last_box = box;
    tv.last_seen = time;
    tv.active = true;
    if (fresh) {
        tv.feature = feature;
    } else {
        tv.feature = config_.feature_momentum * tv.feature +
                     (1 - config_.feature_momentum) * feature;
        const Real n = tv.feature.norm();
        if (n > 0) tv.feature /= n;
    }
}

std::vector<TrackRecord> MultiViewTracker::step(const FrameBundle& bundle) {
    const int n_views = static_cast<int>(bundle.views.size());
    if (n_views == 0) throw DataError("tracker: bundle has no views");
    if (n_views_ == 0) n_views_ = n_views;
    if (n_views != n_views_) throw DataError("tracker: view count changed between frames");
    if (has_prev_frame_ && bundle.time <= prev_time_)
        throw DataError("tracker: frames must arrive in increasing time order");
    for (int v = 0; v < n_views; ++v)
        if (bundle.views[v].view != v + 1)
            throw DataError("tracker: bundle views must be ordered 1..V");

    const int t = bundle.time;
    std::vector<FrameSubjects> frames;
    for (int v = 0; v < n_views; ++v) frames.push_back(normalize_embeddings(bundle.views[v]));
    for (const FrameSubjects& f : frames)
        if (f.count() > 0) dim_ = std::max(dim_, f.dim());

    // Affinity slots: all views at time t, then all views at the previous
    // time holding the tracklets matched there.
    std::vector<FrameSubjects> slots = frames;
    if (has_prev_frame_) {
        for (int v = 0; v < n_views; ++v) {
            FrameSubjects prev;
            prev.view = v + 1;
            prev.time = prev_time_;
            const std::vector<int>& matched = prev_matched_[v];
            prev.features.resize(static_cast<int>(matched.size()), dim_);
            for (size_t k = 0; k < matched.size(); ++k) {
                const TrackletView& tv = tracklets_[matched[k]].views.at(v + 1);
                prev.features.row(static_cast<int>(k)) = tv.feature.transpose();
                prev.boxes.push_back(tv.last_box);
            }
            slots.push_back(std::move(prev));
        }
    }

    const GlobalAffinity affinity = assemble_global_affinity(slots, config_.affinity);
    AssignmentMatrix assignment = consistency_solve(affinity, config_.solver);
    assignment.values = 0.5 * (assignment.values + assignment.values.transpose()).eval();
    const PermutationSet perms = extract_permutations(assignment, config_.match_threshold);

    // Temporal association per view.
    std::vector<TemporalMatches> temporal(n_views);
    for (int v = 0; v < n_views; ++v) temporal[v] = temporal_associate(v + 1, frames[v]);

    // matched_det[v][d] = tracklet index claiming detection d of view v.
    std::vector<std::vector<int>> matched_det(n_views);
    std::vector<std::vector<char>> tracklet_in_view(n_views);
    for (int v = 0; v < n_views; ++v) {
        matched_det[v].assign(frames[v].count(), -1);
        tracklet_in_view[v].assign(tracklets_.size(), 0);
        for (const auto& [trk, det] : temporal[v].matches) {
            matched_det[v][det] = trk;
            tracklet_in_view[v][trk] = 1;
        }
    }

    // Spatial association: unmatched detections adopt tracklets matched in
    // other views, either at this time point or at the previous one.
    for (int v = 0; v < n_views; ++v) {
        const int slot_v = affinity.layout.find(t, v + 1);
        struct Claim {
            Real score;
            int det;
            int tracklet;
        };
        std::vector<Claim> claims;
        for (int det : temporal[v].unmatched) {
            int best_trk = -1;
            Real best_score = 0;
            for (int u = 0; u < n_views; ++u) {
                if (u == v) continue;
                const int slot_u = affinity.layout.find(t, u + 1);
                const BinaryMatrix& p_now = perms.block(slot_v, slot_u);
                for (int q = 0; q < p_now.cols(); ++q) {
                    if (!p_now(det, q)) continue;
                    const int trk = matched_det[u][q];
                    if (trk < 0 || tracklet_in_view[v][trk]) continue;
                    const Real score = assignment.block(slot_v, slot_u)(det, q);
                    if (score > best_score) {
                        best_score = score;
                        best_trk = trk;
                    }
                }
                if (has_prev_frame_) {
                    const int slot_prev = affinity.layout.find(prev_time_, u + 1);
                    const BinaryMatrix& p_prev = perms.block(slot_v, slot_prev);
                    for (int k = 0; k < p_prev.cols(); ++k) {
                        if (!p_prev(det, k)) continue;
                        const int trk = prev_matched_[u][k];
                        if (tracklet_in_view[v][trk]) continue;
                        const Real score = assignment.block(slot_v, slot_prev)(det, k);
                        if (score > best_score) {
                            best_score = score;
                            best_trk = trk;
                        }
                    }
                }
            }
            if (best_trk >= 0) claims.push_back({best_score, det, best_trk});
        }

        // Conflicts on one tracklet: the higher assignment score wins, the
        // loser starts a new tracklet below.
        std::sort(claims.begin(), claims.end(), [](const Claim& a, const Claim& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.det < b.det;
        });
        for (const Claim& c : claims) {
            if (tracklet_in_view[v][c.tracklet] || matched_det[v][c.det] >= 0) continue;
            matched_det[v][c.det] = c.tracklet;
            tracklet_in_view[v][c.tracklet] = 1;
        }
        for (int det : temporal[v].unmatched) {
            if (matched_det[v][det] >= 0) continue;
            Tracklet fresh;
            fresh.id = next_id_++;
            tracklets_.push_back(std::move(fresh));
            matched_det[v][det] = static_cast<int>(tracklets_.size()) - 1;
            for (int u = 0; u < n_views; ++u) tracklet_in_view[u].push_back(u == v ? 1 : 0);
        }
    }

    // Commit observations, put unmatched views to sleep, emit records.
    std::vector<TrackRecord> records;
    for (int v = 0; v < n_views; ++v) {
        for (int d = 0; d < frames[v].count(); ++d) {
            const int trk = matched_det[v][d];
            observe(trk, v + 1, t, frames[v].boxes[d], frames[v].features.row(d).transpose());
            records.push_back({v + 1, t, tracklets_[trk].id, frames[v].boxes[d]});
        }
    }
    for (int v = 0; v < n_views; ++v) {
        for (auto& trk : tracklets_) {
            auto it = trk.views.find(v + 1);
            if (it != trk.views.end() && it->second.last_seen != t) it->second.active = false;
        }
    }

    prev_matched_.assign(n_views, {});
    for (int v = 0; v < n_views; ++v)
        for (int d = 0; d < frames[v].count(); ++d) prev_matched_[v].push_back(matched_det[v][d]);
    prev_time_ = t;
    has_prev_frame_ = true;
    return records;
}

std::vector<TrackRecord> MultiViewTracker::run(const std::vector<FrameBundle>& bundles) {
    std::vector<TrackRecord> out;
    for (const FrameBundle& bundle : bundles) {
        std::vector<TrackRecord> records = step(bundle);
        out.insert(out.end(), records.begin(), records.end());
    }
    return out;
}

}  // namespace mvmhat
