#pragma once

#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <span>
#include <string>
#include <vector>

#include "hyperyolo/error.hpp"

namespace hyperyolo {

using VertexId = std::uint32_t;
using EdgeId = std::uint32_t;

// Diagonals of D_v and D_e.
struct DegreePair {
  std::vector<std::size_t> vertex_degrees;
  std::vector<std::size_t> hyperedge_degrees;

  friend bool operator==(const DegreePair&, const DegreePair&) = default;
};

// Immutable hypergraph stored as two CSR membership tables: hyperedge -> vertices
// (the columns of H) and vertex -> hyperedges (the rows of H). H itself is never
// materialized.
class Hypergraph {
 public:
  Hypergraph() = default;

  // Each hyperedge must be non-empty, strictly ascending and in range, and every
  // vertex must belong to at least one hyperedge.
  Hypergraph(std::size_t vertex_count, const std::vector<std::vector<VertexId>>& hyperedges)
      : vertex_count_(vertex_count) {
    edge_offsets_.reserve(hyperedges.size() + 1);
    edge_offsets_.push_back(0);
    std::vector<std::size_t> vdeg(vertex_count, 0);
    for (std::size_t e = 0; e < hyperedges.size(); ++e) {
      const auto& members = hyperedges[e];
      if (members.empty())
        detail::fail(ErrorKind::invalid_argument,
                     "hypergraph: hyperedge " + std::to_string(e) + " is empty");
      for (std::size_t i = 0; i < members.size(); ++i) {
        if (members[i] >= vertex_count)
          detail::fail(ErrorKind::invalid_argument,
                       "hypergraph: vertex index out of range in hyperedge " + std::to_string(e));
        if (i > 0 && members[i - 1] >= members[i])
          detail::fail(ErrorKind::invalid_argument,
                       "hypergraph: hyperedge " + std::to_string(e) +
                           " is not strictly ascending (duplicate or unsorted index)");
        ++vdeg[members[i]];
      }
      edge_members_.insert(edge_members_.end(), members.begin(), members.end());
      edge_offsets_.push_back(edge_members_.size());
    }
    vertex_offsets_.assign(vertex_count + 1, 0);
    for (std::size_t v = 0; v < vertex_count; ++v) {
      if (vdeg[v] == 0)
        detail::fail(ErrorKind::invalid_argument,
                     "hypergraph: vertex " + std::to_string(v) + " belongs to no hyperedge");
      vertex_offsets_[v + 1] = vertex_offsets_[v] + vdeg[v];
    }
    vertex_edges_.resize(edge_members_.size());
    std::vector<std::size_t> cursor(vertex_offsets_.begin(), vertex_offsets_.end() - 1);
    // Edges are visited in ascending order, so each incidence list ends up sorted.
    for (std::size_t e = 0; e + 1 < edge_offsets_.size(); ++e)
      for (std::size_t i = edge_offsets_[e]; i < edge_offsets_[e + 1]; ++i)
        vertex_edges_[cursor[edge_members_[i]]++] = static_cast<EdgeId>(e);
  }

  std::size_t vertex_count() const { return vertex_count_; }
  std::size_t edge_count() const { return edge_offsets_.empty() ? 0 : edge_offsets_.size() - 1; }
  std::size_t incidence_count() const { return edge_members_.size(); }

  std::span<const VertexId> hyperedge(std::size_t e) const {
    return {edge_members_.data() + edge_offsets_[e], edge_offsets_[e + 1] - edge_offsets_[e]};
  }
  std::span<const EdgeId> incident(std::size_t v) const {
    return {vertex_edges_.data() + vertex_offsets_[v],
            vertex_offsets_[v + 1] - vertex_offsets_[v]};
  }

  std::vector<std::vector<VertexId>> hyperedges() const {
    std::vector<std::vector<VertexId>> out;
    out.reserve(edge_count());
    for (std::size_t e = 0; e < edge_count(); ++e) {
      auto m = hyperedge(e);
      out.emplace_back(m.begin(), m.end());
    }
    return out;
  }

  bool contains(std::size_t e, VertexId v) const {
    for (auto u : hyperedge(e))
      if (u == v) return true;
    return false;
  }

  friend bool operator==(const Hypergraph& a, const Hypergraph& b) {
    return a.vertex_count_ == b.vertex_count_ && a.edge_offsets_ == b.edge_offsets_ &&
           a.edge_members_ == b.edge_members_;
  }

 private:
  std::size_t vertex_count_ = 0;
  std::vector<std::size_t> edge_offsets_;
  std::vector<VertexId> edge_members_;
  std::vector<std::size_t> vertex_offsets_;
  std::vector<EdgeId> vertex_edges_;
};

inline DegreePair degrees(const Hypergraph& g) {
  DegreePair d;
  d.vertex_degrees.resize(g.vertex_count());
  d.hyperedge_degrees.resize(g.edge_count());
  for (std::size_t v = 0; v < g.vertex_count(); ++v) d.vertex_degrees[v] = g.incident(v).size();
  for (std::size_t e = 0; e < g.edge_count(); ++e) d.hyperedge_degrees[e] = g.hyperedge(e).size();
  return d;
}

// Text format: "N M", then one line per hyperedge with ascending vertex indices.
inline void write_text(std::ostream& os, const Hypergraph& g) {
  os << g.vertex_count() << ' ' << g.edge_count() << '\n';
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    bool first = true;
    for (auto v : g.hyperedge(e)) {
      if (!first) os << ' ';
      os << v;
      first = false;
    }
    os << '\n';
  }
}

inline Hypergraph read_text(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) detail::fail(ErrorKind::format, "hypergraph text: missing header");
  std::istringstream head(line);
  std::size_t n = 0;
  std::size_t m = 0;
  if (!(head >> n >> m)) detail::fail(ErrorKind::format, "hypergraph text: malformed header");
  std::vector<std::vector<VertexId>> edges;
  edges.reserve(m);
  for (std::size_t e = 0; e < m; ++e) {
    if (!std::getline(is, line))
      detail::fail(ErrorKind::format, "hypergraph text: expected " + std::to_string(m) +
                                          " hyperedge lines, got " + std::to_string(e));
    std::istringstream ls(line);
    std::vector<VertexId> members;
    long long v = 0;
    while (ls >> v) {
      detail::require(v >= 0, ErrorKind::format, "hypergraph text: negative vertex index");
      members.push_back(static_cast<VertexId>(v));
    }
    detail::require(ls.eof(), ErrorKind::format,
                    "hypergraph text: non-numeric token on line " + std::to_string(e + 2));
    edges.push_back(std::move(members));
  }
  try {
    return Hypergraph(n, edges);
  } catch (const Error& err) {
    detail::fail(ErrorKind::format, std::string("hypergraph text: ") + err.what());
  }
}

}  // namespace hyperyolo
