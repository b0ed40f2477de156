#pragma once

#include <cstdint>
#include <vector>

#include "mvmhat/assignment.hpp"
#include "mvmhat/types.hpp"

namespace mvmhat {

/// A simulated affinity over two time points and V views, with its exact
/// assignment ground truth. `slot_identities[s][p]` is the identity of
/// subject p in layout slot s; `visibility(s, i)` flags identity i in slot s.
struct AssignmentInstance {
    GlobalAffinity affinity;
    AssignmentMatrix truth;  // binary, truth.values = P * P^T
    std::vector<std::vector<int>> slot_identities;
    BinaryMatrix visibility;  // slots x identities
    std::uint64_t seed = 0;
};

struct AssignmentParams {
    int n_ids = 8;
    int views = 3;
    Real error_rate = 0.0;        // probability of relocating a row's peak
    Real visibility_prob = 1.0;   // per (slot, identity) presence probability
};

/// Build an instance: sample visibility (every identity appears somewhere,
/// every slot keeps at least min(2, n_ids) subjects), shuffle per-slot
/// subject order, derive the affinity from the truth, then corrupt cross
/// blocks by swapping the peak of a row into a wrong column with probability
/// error_rate. Rows whose identity is absent from the target slot are
/// uniform. Deterministic per seed.
AssignmentInstance generate_assignment_instance(const AssignmentParams& params,
                                                std::uint64_t seed);

/// Hide (view, identity) for frames t_begin <= t < t_end.
struct OcclusionSpec {
    int view = 1;
    int identity = 0;
    int t_begin = 0;
    int t_end = 0;
};

struct ScenarioParams {
    int n_ids = 8;
    int views = 3;
    int frames = 200;
    int dim = 1000;           // embedding dimension
    Real noise = 0.0;         // embedding noise level
    int random_occlusions = 0;
    int occlusion_min_len = 5;
    int occlusion_max_len = 30;
    std::vector<OcclusionSpec> occlusions;  // scripted, applied on top
    Real world = 1000.0;      // side of the square the subjects roam
};

struct Scenario {
    std::vector<FrameBundle> bundles;
    std::vector<TrackRecord> ground_truth;
};

/// Multi-view motion scenario: constant-velocity walks with boundary
/// reflection, per-view affine cameras, per-identity embedding anchors with
/// optional gaussian noise, occlusions dropping detections. Deterministic
/// per seed.
Scenario generate_scenario(const ScenarioParams& params, std::uint64_t seed);

}  // namespace mvmhat
