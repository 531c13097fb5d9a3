#pragma once

#include <deque>

#include "mesovms/types.hpp"

namespace mesovms {

/// Ring buffer of the most recent occupancy snapshots, newest first.
/// Entry k (0-based) is the state vector k+1 steps ago.
class StateHistory {
public:
    StateHistory(int capacity, Eigen::Index link_count)
        : capacity_(capacity), link_count_(link_count) {}

    void push(Vector snapshot) {
        buffer_.push_front(std::move(snapshot));
        if (static_cast<int>(buffer_.size()) > capacity_) buffer_.pop_back();
    }

    int size() const { return static_cast<int>(buffer_.size()); }
    int capacity() const { return capacity_; }
    Eigen::Index link_count() const { return link_count_; }
    const Vector& lag(int k) const { return buffer_.at(static_cast<std::size_t>(k)); }

    /// Concatenation [q(t-1); q(t-2); ...; q(t-depth)]. Lags not yet
    /// observed (the first steps of a run) are zero vectors.
    Vector stacked(int depth) const {
        Vector out = Vector::Zero(depth * link_count_);
        int available = std::min(depth, size());
        for (int k = 0; k < available; ++k)
            out.segment(k * link_count_, link_count_) = buffer_[static_cast<std::size_t>(k)];
        return out;
    }

    /// Stacked history with every lag divided elementwise by the per-link
    /// reference occupancy, the form consumed by the decision rules.
    Vector stacked_normalized(int depth, const VectorRef& reference) const {
        if (reference.size() != link_count_)
            throw ConfigError("stacked_normalized: reference vector has wrong length");
        Vector out = stacked(depth);
        for (int k = 0; k < depth; ++k)
            out.segment(k * link_count_, link_count_) =
                out.segment(k * link_count_, link_count_).cwiseQuotient(reference);
        return out;
    }

private:
    int capacity_;
    Eigen::Index link_count_;
    std::deque<Vector> buffer_;
};

}  // namespace mesovms
