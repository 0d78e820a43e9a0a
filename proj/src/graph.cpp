#include "neardiag/graph.hpp"

#include <algorithm>
#include <cmath>

#include "neardiag/errors.hpp"

namespace neardiag {

WeightedDigraph::WeightedDigraph(std::size_t n, RealVector weights_row_major)
    : n_(n), weights_(std::move(weights_row_major)) {
    if (n_ == 0) throw invalid_input("WeightedDigraph: vertex count must be >= 1");
    if (weights_.size() != n_ * n_)
        throw invalid_input("WeightedDigraph: weight count does not match n*n");
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = 0; j < n_; ++j) {
            const double w = weights_[i * n_ + j];
            if (!std::isfinite(w) || w < 0.0)
                throw invalid_input("WeightedDigraph: weights must be finite and nonnegative");
        }
        weights_[i * n_ + i] = 0.0;  // self-loops cancel in the Laplacian anyway
    }
}

LaplacianMatrix::LaplacianMatrix(std::size_t n, RealVector entries_row_major)
    : n_(n), entries_(std::move(entries_row_major)) {
    if (n_ == 0) throw invalid_input("LaplacianMatrix: order must be >= 1");
    if (entries_.size() != n_ * n_)
        throw invalid_input("LaplacianMatrix: entry count does not match n*n");
    double worst = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n_; ++j) {
            if (!std::isfinite(entries_[i * n_ + j]))
                throw invalid_input("LaplacianMatrix: non-finite entry");
            row += entries_[i * n_ + j];
        }
        worst = std::max(worst, std::abs(row));
    }
    if (worst > 1e-12 * std::max(1.0, frob_norm()))
        throw invalid_input("LaplacianMatrix: rows do not sum to zero");
}

double LaplacianMatrix::frob_norm() const {
    double s = 0.0;
    for (double v : entries_) s += v * v;
    return std::sqrt(s);
}

ComplexMatrix LaplacianMatrix::to_complex() const {
    ComplexMatrix m(n_, n_);
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j) m(i, j) = entry(i, j);
    return m;
}

LaplacianMatrix laplacian(const WeightedDigraph& g) {
    const std::size_t n = g.size();
    LaplacianMatrix l;
    l.n_ = n;
    l.entries_.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double indeg = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double w = g.weight(i, j);
            indeg += w;
            l.entries_[i * n + j] = w > 0.0 ? -w : 0.0;  // avoid -0.0 in outputs
        }
        l.entries_[i * n + i] = indeg;
    }
    return l;
}

namespace {

/// Iterative Tarjan SCC. Arcs follow information flow: j -> i for w_ij > 0.
std::vector<std::size_t> strongly_connected_components(const WeightedDigraph& g,
                                                       std::size_t& comp_count) {
    const std::size_t n = g.size();
    std::vector<std::vector<std::size_t>> out(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (g.weight(i, j) > 0.0) out[j].push_back(i);

    constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
    std::vector<std::size_t> index(n, kUnset), lowlink(n, kUnset), comp(n, kUnset);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::size_t next_index = 0;
    comp_count = 0;

    struct Frame {
        std::size_t v;
        std::size_t edge;
    };
    std::vector<Frame> call;

    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != kUnset) continue;
        call.push_back({root, 0});
        while (!call.empty()) {
            Frame& f = call.back();
            const std::size_t v = f.v;
            if (f.edge == 0) {
                index[v] = lowlink[v] = next_index++;
                stack.push_back(v);
                on_stack[v] = true;
            }
            bool descended = false;
            while (f.edge < out[v].size()) {
                const std::size_t w = out[v][f.edge++];
                if (index[w] == kUnset) {
                    call.push_back({w, 0});
                    descended = true;
                    break;
                }
                if (on_stack[w]) lowlink[v] = std::min(lowlink[v], index[w]);
            }
            if (descended) continue;
            if (lowlink[v] == index[v]) {
                while (true) {
                    const std::size_t w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp[w] = comp_count;
                    if (w == v) break;
                }
                ++comp_count;
            }
            call.pop_back();
            if (!call.empty()) {
                const std::size_t parent = call.back().v;
                lowlink[parent] = std::min(lowlink[parent], lowlink[v]);
            }
        }
    }
    return comp;
}

}  // namespace

bool has_spanning_tree(const WeightedDigraph& g) {
    const std::size_t n = g.size();
    std::size_t comp_count = 0;
    const std::vector<std::size_t> comp = strongly_connected_components(g, comp_count);

    std::vector<bool> has_in(comp_count, false);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (g.weight(i, j) > 0.0 && comp[j] != comp[i]) has_in[comp[i]] = true;

    std::size_t sources = 0;
    for (std::size_t c = 0; c < comp_count; ++c)
        if (!has_in[c]) ++sources;
    return sources == 1;
}

TopologySchedule::TopologySchedule(std::vector<ScheduleSegment> segments, double horizon_end)
    : segments_(std::move(segments)), horizon_end_(horizon_end) {
    if (segments_.empty()) throw invalid_input("TopologySchedule: needs at least one segment");
    if (segments_.front().t_start != 0.0)
        throw invalid_input("TopologySchedule: first segment must start at t = 0");
    const std::size_t n = segments_.front().graph.size();
    for (std::size_t k = 0; k < segments_.size(); ++k) {
        if (!std::isfinite(segments_[k].t_start))
            throw invalid_input("TopologySchedule: non-finite segment start");
        if (segments_[k].graph.size() != n)
            throw invalid_input("TopologySchedule: all graphs must share the same order");
        if (k > 0 && segments_[k].t_start <= segments_[k - 1].t_start)
            throw invalid_input("TopologySchedule: segment starts must strictly increase");
    }
    if (!std::isfinite(horizon_end_) || horizon_end_ <= segments_.back().t_start)
        throw invalid_input("TopologySchedule: horizon_end must exceed the last segment start");
}

std::size_t TopologySchedule::segment_index_at(double t) const {
    if (!(t >= 0.0) || t > horizon_end_)
        throw invalid_input("TopologySchedule: query time outside [0, horizon_end]");
    std::size_t lo = 0, hi = segments_.size();
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (segments_[mid].t_start <= t)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

const WeightedDigraph& TopologySchedule::graph_at(double t) const {
    return segments_[segment_index_at(t)].graph;
}

std::vector<GapInterval> spanning_tree_gap_intervals(const TopologySchedule& s) {
    std::vector<GapInterval> gaps;
    const auto& segs = s.segments();
    for (std::size_t k = 0; k < segs.size(); ++k) {
        if (has_spanning_tree(segs[k].graph)) continue;
        const double start = segs[k].t_start;
        const double end = k + 1 < segs.size() ? segs[k + 1].t_start : s.horizon_end();
        if (!gaps.empty() && gaps.back().t_end == start)
            gaps.back().t_end = end;
        else
            gaps.push_back({start, end});
    }
    return gaps;
}

}  // namespace neardiag
