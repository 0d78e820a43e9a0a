#pragma once

#include "neardiag/matrix.hpp"

namespace neardiag {

/// Weighted directed network topology on n vertices. weight(i, j) is the
/// strength with which agent i hears agent j, i.e. an arc j -> i. Weights are
/// nonnegative and the diagonal is zeroed on construction.
class WeightedDigraph {
public:
    WeightedDigraph(std::size_t n, RealVector weights_row_major);

    std::size_t size() const noexcept { return n_; }
    double weight(std::size_t i, std::size_t j) const { return weights_[i * n_ + j]; }
    const RealVector& weights() const noexcept { return weights_; }

private:
    std::size_t n_ = 0;
    RealVector weights_;
};

/// L = diag(W*ones) - W. Rows sum to zero; the all-ones vector is always an
/// eigenvector for eigenvalue 0.
class LaplacianMatrix {
public:
    /// Direct construction validates the row-sum-zero property within
    /// 1e-12 * max(1, ||L||_F).
    LaplacianMatrix(std::size_t n, RealVector entries_row_major);

    std::size_t size() const noexcept { return n_; }
    double entry(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }
    const RealVector& entries() const noexcept { return entries_; }

    double frob_norm() const;
    ComplexMatrix to_complex() const;

private:
    friend LaplacianMatrix laplacian(const WeightedDigraph&);
    LaplacianMatrix() = default;

    std::size_t n_ = 0;
    RealVector entries_;
};

LaplacianMatrix laplacian(const WeightedDigraph& g);

/// True iff some root vertex reaches every vertex along directed arcs
/// (arcs run j -> i when weight(i, j) > 0). Decided by condensing to strongly
/// connected components: exactly one component of in-degree zero.
bool has_spanning_tree(const WeightedDigraph& g);

struct ScheduleSegment {
    double t_start;
    WeightedDigraph graph;
};

/// Piecewise-constant topology over [0, horizon_end]: segment k is active on
/// [t_start_k, t_start_{k+1}), the last one through horizon_end.
class TopologySchedule {
public:
    TopologySchedule(std::vector<ScheduleSegment> segments, double horizon_end);

    const std::vector<ScheduleSegment>& segments() const noexcept { return segments_; }
    double horizon_end() const noexcept { return horizon_end_; }
    std::size_t agent_count() const noexcept { return segments_.front().graph.size(); }

    /// Segment active at t; throws invalid_input outside [0, horizon_end].
    const WeightedDigraph& graph_at(double t) const;
    std::size_t segment_index_at(double t) const;

private:
    std::vector<ScheduleSegment> segments_;
    double horizon_end_ = 0.0;
};

struct GapInterval {
    double t_start;
    double t_end;
};

/// Maximal positive-length intervals during which the active graph has no
/// spanning tree. Adjacent disconnected segments merge into one interval.
std::vector<GapInterval> spanning_tree_gap_intervals(const TopologySchedule& s);

}  // namespace neardiag
