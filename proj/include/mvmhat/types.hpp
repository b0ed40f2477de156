#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

namespace mvmhat {

using Real = double;
using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
using Vector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
using BinaryMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

/// Malformed or inconsistent input data (files, shapes, value ranges).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure (decomposition did not converge, gradient check failed).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Axis-aligned bounding box in pixels, (x, y) top-left corner.
struct Box {
    Real x = 0, y = 0, w = 0, h = 0;

    Real area() const { return w * h; }
};

inline Real iou(const Box& a, const Box& b) {
    const Real x1 = std::max(a.x, b.x);
    const Real y1 = std::max(a.y, b.y);
    const Real x2 = std::min(a.x + a.w, b.x + b.w);
    const Real y2 = std::min(a.y + a.h, b.y + b.h);
    const Real inter = std::max<Real>(0, x2 - x1) * std::max<Real>(0, y2 - y1);
    if (inter <= 0) return 0;
    return inter / (a.area() + b.area() - inter);
}

/// All detections of one (view, time) frame: one feature row and one box per
/// subject. `ids` carries ground-truth identities and is only populated for
/// synthetic or annotated data.
struct FrameSubjects {
    int view = 0;
    int time = 0;
    Matrix features;         // N x D, row per subject
    std::vector<Box> boxes;  // N
    std::vector<int> ids;    // empty, or N ground-truth identities

    int count() const { return static_cast<int>(features.rows()); }
    int dim() const { return static_cast<int>(features.cols()); }
};

/// Row/column layout of a block matrix over concatenated frames: all views at
/// the first time point, then all views at the second.
class BlockLayout {
public:
    struct Slot {
        int time = 0;
        int view = 0;
        int count = 0;
        int offset = 0;
    };

    BlockLayout() = default;

    void add(int time, int view, int count) {
        if (count < 0) throw DataError("BlockLayout: negative subject count");
        slots_.push_back({time, view, count, total_});
        total_ += count;
    }

    int total() const { return total_; }
    int size() const { return static_cast<int>(slots_.size()); }
    const Slot& slot(int i) const { return slots_.at(i); }
    const std::vector<Slot>& slots() const { return slots_; }

    /// Index of the slot holding (time, view), or -1.
    int find(int time, int view) const {
        for (int i = 0; i < size(); ++i)
            if (slots_[i].time == time && slots_[i].view == view) return i;
        return -1;
    }

    bool operator==(const BlockLayout& o) const {
        if (total_ != o.total_ || slots_.size() != o.slots_.size()) return false;
        for (size_t i = 0; i < slots_.size(); ++i) {
            const Slot& a = slots_[i];
            const Slot& b = o.slots_[i];
            if (a.time != b.time || a.view != b.view || a.count != b.count) return false;
        }
        return true;
    }

private:
    std::vector<Slot> slots_;
    int total_ = 0;
};

/// Block matrix of pairwise matching matrices over a BlockLayout; each block
/// row is a probability distribution over the target slot's subjects.
struct GlobalAffinity {
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

/// One tracked (or annotated) box: subject `id` seen in `view` at `frame`.
struct TrackRecord {
    int view = 0;
    int frame = 0;
    int id = 0;
    Box box;
};

/// Synchronized detections of all views at one time point. Views are
/// numbered 1..V; position k holds view k+1.
struct FrameBundle {
    int time = 0;
    std::vector<FrameSubjects> views;
};

}  // namespace mvmhat
