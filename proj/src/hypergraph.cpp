#include "paramshap/hypergraph.hpp"

#include <algorithm>
#include <functional>

#include "paramshap/errors.hpp"

namespace paramshap {

int Hypergraph::vertex_index(const std::string& name) const {
  auto it = std::find(vertices.begin(), vertices.end(), name);
  return it == vertices.end() ? -1 : static_cast<int>(it - vertices.begin());
}

int Hypergraph::add_vertex(const std::string& name) {
  int idx = vertex_index(name);
  if (idx >= 0) return idx;
  vertices.push_back(name);
  return static_cast<int>(vertices.size() - 1);
}

void Hypergraph::add_edge(std::string label, const std::vector<std::string>& names) {
  Edge e;
  e.label = std::move(label);
  for (const auto& n : names) e.verts.push_back(add_vertex(n));
  std::sort(e.verts.begin(), e.verts.end());
  e.verts.erase(std::unique(e.verts.begin(), e.verts.end()), e.verts.end());
  edges.push_back(std::move(e));
}

Hypergraph query_hypergraph(const ParamQuery& q, bool include_params) {
  Hypergraph h;
  for (size_t i = 0; i < q.atoms.size(); ++i) {
    const Atom& a = q.atoms[i];
    std::vector<std::string> names;
    for (const auto& t : a.terms) {
      if (t.kind == Term::Kind::Variable) names.push_back(t.name);
      if (include_params && t.kind == Term::Kind::Parameter) names.push_back("$" + t.name);
    }
    h.add_edge("atom " + std::to_string(i + 1) + " (" + a.relation + ")", names);
  }
  if (include_params) {
    for (size_t i = 0; i < q.filters.size(); ++i) {
      std::vector<std::string> names = q.filters[i].variables();
      for (const auto& p : q.filters[i].parameters()) names.push_back("$" + p);
      h.add_edge("filter " + std::to_string(i + 1) + " " + to_text(q.filters[i]), names);
    }
  }
  return h;
}

GyoResult gyo_reduce(const Hypergraph& h) {
  const int n = static_cast<int>(h.edges.size());
  GyoResult res;
  res.tree.parent.assign(n, -1);
  res.tree.children.assign(n, {});
  res.tree.depth.assign(n, 0);
  if (n == 0) {
    res.acyclic = true;
    return res;
  }

  std::vector<bool> alive(n, true);
  int alive_count = n;
  // vertex -> number of alive edges containing it
  std::vector<int> occ(h.vertices.size(), 0);
  for (const auto& e : h.edges) {
    for (int v : e.verts) ++occ[v];
  }

  auto try_remove = [&](int e) -> bool {
    // Vertices of e shared with another alive edge.
    std::vector<int> shared;
    for (int v : h.edges[e].verts) {
      if (occ[v] > 1) shared.push_back(v);
    }
    int witness = -1;
    for (int w = 0; w < n && witness < 0; ++w) {
      if (w == e || !alive[w]) continue;
      bool contains = std::includes(h.edges[w].verts.begin(), h.edges[w].verts.end(),
                                    shared.begin(), shared.end());
      if (contains) witness = w;
    }
    if (witness < 0 && !shared.empty()) return false;  // not an ear yet
    alive[e] = false;
    --alive_count;
    for (int v : h.edges[e].verts) --occ[v];
    res.tree.parent[e] = witness;  // -1 when e was the last edge standing
    return true;
  };

  bool progress = true;
  while (progress && alive_count > 0) {
    progress = false;
    for (int e = 0; e < n && alive_count > 0; ++e) {
      if (!alive[e]) continue;
      if (alive_count == 1) {
        // Final edge of the reduction: it is the root.
        alive[e] = false;
        --alive_count;
        res.tree.parent[e] = -1;
        res.tree.root = e;
        progress = true;
        break;
      }
      if (try_remove(e)) progress = true;
    }
  }

  if (alive_count > 0) {
    res.acyclic = false;
    for (int e = 0; e < n; ++e) {
      if (alive[e]) res.remaining.push_back(h.edges[e].label);
    }
    return res;
  }

  res.acyclic = true;
  for (int e = 0; e < n; ++e) {
    int p = res.tree.parent[e];
    if (p >= 0) {
      res.tree.children[p].push_back(e);
    } else {
      res.tree.root = e;
    }
  }
  for (auto& ch : res.tree.children) std::sort(ch.begin(), ch.end());
  // Depths via traversal from the root.
  std::function<void(int)> walk = [&](int e) {
    for (int c : res.tree.children[e]) {
      res.tree.depth[c] = res.tree.depth[e] + 1;
      walk(c);
    }
  };
  res.tree.depth[res.tree.root] = 0;
  walk(res.tree.root);
  return res;
}

bool is_p_acyclic(const ParamQuery& q) {
  return gyo_reduce(query_hypergraph(q, true)).acyclic;
}

}  // namespace paramshap
