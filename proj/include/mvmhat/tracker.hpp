#pragma once

#include <map>
#include <vector>

#include "mvmhat/affinity.hpp"
#include "mvmhat/assignment.hpp"
#include "mvmhat/types.hpp"

namespace mvmhat {

struct TrackerConfig {
    AffinityParams affinity;
    Real match_threshold = 0.5;  // M: appearance acceptance and rounding
    Real iou_min = 0.3;          // second-stage box overlap acceptance
    Real feature_momentum = 0.9; // weight of the old track feature in the EMA
    SolverConfig solver;
};

/// Per-view state of a tracklet. A tracklet sleeps in a view when unmatched
/// there and is only revived through cross-view association.
struct TrackletView {
    bool active = false;
    int last_seen = -1;
    Box last_box{};
    Box prev_box{};
    bool has_prev = false;  // two consecutive observations, velocity usable
    Vector feature;         // unit-norm EMA of observed embeddings
};

struct Tracklet {
    int id = 0;
    std::map<int, TrackletView> views;
};

/// Result of per-view temporal association for one frame.
struct TemporalMatches {
    std::vector<std::pair<int, int>> matches;  // (tracklet index, det index)
    std::vector<int> unmatched;                // det indices
};

/// Online multi-view tracker: per frame, a globally consistent assignment
/// over all views at the current and previous time links detections to
/// tracklets across views, on top of per-view appearance + box matching.
class MultiViewTracker {
public:
    explicit MultiViewTracker(TrackerConfig config);

    /// Process one time point; emits the (view, frame, id, box) records of
    /// this frame. Frames must arrive in increasing time order.
    std::vector<TrackRecord> step(const FrameBundle& bundle);

    std::vector<TrackRecord> run(const std::vector<FrameBundle>& bundles);

    const std::vector<Tracklet>& tracklets() const { return tracklets_; }

    /// Appearance-then-overlap matching of one view's detections against the
    /// view's active tracklets. Exposed for testing.
    TemporalMatches temporal_associate(int view, const FrameSubjects& frame) const;

private:
    Box predict_box(const TrackletView& tv) const;
    void observe(int tracklet_index, int view, int time, const Box& box, const Vector& feature);

    TrackerConfig config_;
    std::vector<Tracklet> tracklets_;
    int next_id_ = 0;
    int n_views_ = 0;
    int dim_ = 0;
    int prev_time_ = -1;
    bool has_prev_frame_ = false;
    // Tracklets matched at the previous time point, per view, in detection
    // order; these occupy the previous-time slots of the affinity layout.
    std::vector<std::vector<int>> prev_matched_;
};

}  // namespace mvmhat
