#pragma once

#include <string>
#include <vector>

#include "paramshap/query.hpp"

namespace paramshap {

/// Hypergraph over named vertices; one labeled edge per atom/filter.
struct Hypergraph {
  std::vector<std::string> vertices;
  struct Edge {
    std::string label;
    std::vector<int> verts;  // sorted, distinct vertex indices
  };
  std::vector<Edge> edges;

  int vertex_index(const std::string& name) const;
  int add_vertex(const std::string& name);  // idempotent
  void add_edge(std::string label, const std::vector<std::string>& names);
};

/// One edge per atom; with `include_params` also one per filter, and
/// parameter occurrences count as vertices (this is the graph whose
/// reducibility the stratified solver needs). Without it, only variables.
Hypergraph query_hypergraph(const ParamQuery& q, bool include_params);

/// Rooted tree over the hyperedges (one node per edge, same indexing).
/// Disconnected components hang together through empty-overlap links, so
/// there is always a single root when the graph has at least one edge.
struct JoinTree {
  int root = -1;
  std::vector<int> parent;                 // -1 at the root
  std::vector<std::vector<int>> children;  // deterministic order
  std::vector<int> depth;                  // root = 0

  size_t size() const { return parent.size(); }
};

struct GyoResult {
  bool acyclic = false;
  JoinTree tree;                       // meaningful when acyclic
  std::vector<std::string> remaining;  // irreducible edge labels otherwise
};

/// Ear-removal reduction. Deterministic: scans edges lowest-index first and
/// attaches each ear to its lowest-index witness. `acyclic` iff the graph
/// reduces to nothing.
GyoResult gyo_reduce(const Hypergraph& h);

/// True when the query's atom+filter structure over variables and parameters
/// reduces acyclically.
bool is_p_acyclic(const ParamQuery& q);

}  // namespace paramshap
