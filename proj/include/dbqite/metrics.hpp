#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <unordered_map>
#include <vector>

#include "dbqite/circuit.hpp"
#include "json.hpp"

namespace dbqite {

/// How a CCX gate is charged in the {U3, CX} basis.
enum class CcxCountMode {
  toffoli,      // 6 CX + 9 single-qubit gates (standard Toffoli decomposition)
  logical_and,  // 3 CX + 6 single-qubit gates (relative-phase AND, valid inside compute/uncompute pairs)
};

struct MetricsOptions {
  CcxCountMode ccx = CcxCountMode::toffoli;
};

struct GateMetrics {
  std::int64_t u3_count = 0;  // every single-qubit gate counts as one U3, no merging
  std::int64_t cx_count = 0;  // CX plus CCX decomposition per CcxCountMode
  std::int64_t depth = 0;     // greedy earliest-slot schedule over the gate list
  std::int64_t u0_queries = 0;
  std::int64_t ccx_count = 0;
  std::int64_t phase_count = 0;
  std::int64_t rz_count = 0;
  std::int64_t t_count = 0;
  std::int64_t exph_count = 0;  // opaque exact-evolution gates, excluded from u3/cx
  std::int64_t total_gates = 0;
};

inline void to_json(nlohmann::json& j, const GateMetrics& m) {
  j = nlohmann::json{{"u3_count", m.u3_count},       {"cx_count", m.cx_count},   {"depth", m.depth},
                     {"u0_queries", m.u0_queries},   {"ccx_count", m.ccx_count}, {"phase_count", m.phase_count},
                     {"rz_count", m.rz_count},       {"t_count", m.t_count},     {"exph_count", m.exph_count},
                     {"total_gates", m.total_gates}};
}

namespace detail {

inline constexpr std::int64_t kNoPath = std::numeric_limits<std::int64_t>::min() / 4;

/// Longest-path transfer matrix of a block in the (max, +) semiring:
/// paths[out * w + in] = most gates on any dependency path from input wire `in` to output wire `out`.
struct BlockSummary {
  GateMetrics counts;
  int width = 0;
  std::vector<std::int64_t> paths;
};

class MetricsBuilder {
 public:
  explicit MetricsBuilder(MetricsOptions opts) : opts_(opts) {}

  const BlockSummary& summarize(const Circuit& c) {
    if (auto it = memo_.find(&c); it != memo_.end()) return it->second;
    BlockSummary s;
    const int w = c.width();
    s.width = w;
    // frontier[q * w + in]: longest path from input `in` ending at wire q so far
    std::vector<std::int64_t> frontier(static_cast<std::size_t>(w) * w, kNoPath);
    for (int q = 0; q < w; ++q) frontier[idx(q, q, w)] = 0;
    std::vector<int> wires;
    for (const auto& op : c.ops()) {
      if (const auto* g = std::get_if<Gate>(&op)) {
        count_gate(*g, s.counts);
        wires.clear();
        if (g->kind == GateKind::EXPH) {
          for (int q = 0; q < c.data_qubits(); ++q) wires.push_back(q);
        } else {
          for (int q : g->operands()) wires.push_back(q);
        }
        for (int in = 0; in < w; ++in) {
          std::int64_t t = kNoPath;
          for (int q : wires) t = std::max(t, frontier[idx(q, in, w)]);
          if (t == kNoPath) continue;
          for (int q : wires) frontier[idx(q, in, w)] = t + 1;
        }
      } else {
        const auto& call = std::get<Call>(op);
        const BlockSummary& sub = summarize(*call.body);
        add_counts(s.counts, sub.counts);
        const int sw = sub.width;
        std::vector<std::int64_t> next = frontier;
        for (int out = 0; out < sw; ++out) {
          for (int in = 0; in < w; ++in) {
            std::int64_t best = kNoPath;
            for (int mid = 0; mid < sw; ++mid) {
              const std::int64_t p = call.inverse ? sub.paths[idx(mid, out, sw)] : sub.paths[idx(out, mid, sw)];
              const std::int64_t f = frontier[idx(mid, in, w)];
              if (p == kNoPath || f == kNoPath) continue;
              best = std::max(best, p + f);
            }
            next[idx(out, in, w)] = best;
          }
        }
        frontier = std::move(next);
      }
    }
    s.counts.u0_queries = c.u0_queries();
    std::int64_t depth = 0;
    for (auto v : frontier) depth = std::max(depth, v);
    s.counts.depth = depth;
    s.paths = std::move(frontier);
    return memo_.emplace(&c, std::move(s)).first->second;
  }

 private:
  static std::size_t idx(int row, int col, int w) {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(w) + static_cast<std::size_t>(col);
  }

  void count_gate(const Gate& g, GateMetrics& m) const {
    ++m.total_gates;
    switch (g.kind) {
      case GateKind::CX: ++m.cx_count; break;
      case GateKind::CCX:
        ++m.ccx_count;
        if (opts_.ccx == CcxCountMode::toffoli) {
          m.cx_count += 6;
          m.u3_count += 9;
        } else {
          m.cx_count += 3;
          m.u3_count += 6;
        }
        break;
      case GateKind::EXPH: ++m.exph_count; break;
      default:
        ++m.u3_count;
        if (g.kind == GateKind::PHASE) ++m.phase_count;
        if (g.kind == GateKind::RZ) ++m.rz_count;
        if (g.kind == GateKind::T || g.kind == GateKind::Tdg) ++m.t_count;
        break;
    }
  }

  static void add_counts(GateMetrics& a, const GateMetrics& b) {
    a.u3_count += b.u3_count;
    a.cx_count += b.cx_count;
    a.ccx_count += b.ccx_count;
    a.phase_count += b.phase_count;
    a.rz_count += b.rz_count;
    a.t_count += b.t_count;
    a.exph_count += b.exph_count;
    a.total_gates += b.total_gates;
  }

  MetricsOptions opts_;
  std::unordered_map<const Circuit*, BlockSummary> memo_;
};

}  // namespace detail

/// Structural gate counts and depth. Shared sub-circuits are summarized once, so metrics of
/// deep recursive syntheses cost time proportional to the distinct blocks, not the gate count.
inline GateMetrics metrics(const Circuit& c, MetricsOptions opts = {}) {
  detail::MetricsBuilder b(opts);
  return b.summarize(c).counts;
}

/// Depth by direct greedy scheduling of the expanded gate list.
inline std::int64_t flat_depth(const Circuit& c) {
  std::vector<std::int64_t> avail(static_cast<std::size_t>(c.width()), 0);
  std::int64_t depth = 0;
  c.for_each_gate([&](const Gate& g) {
    std::vector<int> wires;
    if (g.kind == GateKind::EXPH) {
      for (int q = 0; q < c.data_qubits(); ++q) wires.push_back(q);
    } else {
      wires.assign(g.operands().begin(), g.operands().end());
    }
    std::int64_t t = 0;
    for (int q : wires) t = std::max(t, avail[static_cast<std::size_t>(q)]);
    for (int q : wires) avail[static_cast<std::size_t>(q)] = t + 1;
    depth = std::max(depth, t + 1);
  });
  return depth;
}

}  // namespace dbqite
