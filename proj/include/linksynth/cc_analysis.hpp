#ifndef LINKSYNTH_CC_ANALYSIS_HPP
#define LINKSYNTH_CC_ANALYSIS_HPP

//===========================================================================
// Pairwise CC classification (disjoint / containment / intersecting), the
// transitively reduced containment forest, and the exact-vs-ILP split.
//===========================================================================

#include <string>
#include <vector>

#include "linksynth/constraints.hpp"

namespace linksynth {

enum class PairKind : uint8_t { Disjoint, AContainsB, BContainsA, Intersecting };

inline const char* pairKindName(PairKind k) {
  switch (k) {
    case PairKind::Disjoint: return "disjoint";
    case PairKind::AContainsB: return "a-contains-b";
    case PairKind::BContainsA: return "b-contains-a";
    case PairKind::Intersecting: return "intersecting";
  }
  return "?";
}

// Disjointness first (R1 conditions disjoint, or identical R1 with disjoint
// R2), then containment over the union of both sides' conditions. AContainsB
// means b's selection is a subset of a's. Two CCs with identical predicate
// sets are mutually contained; the pair is oriented by id so the order stays
// acyclic.
inline PairKind classifyPair(const LinearCC& a, const LinearCC& b) {
  if (selectionsDisjoint(a.r1Conds, b.r1Conds)) return PairKind::Disjoint;
  if (condMapEquals(a.r1Conds, b.r1Conds) && selectionsDisjoint(a.r2Conds, b.r2Conds))
    return PairKind::Disjoint;
  CondMap au = a.allConds(), bu = b.allConds();
  bool bInA = selectionContains(au, bu);
  bool aInB = selectionContains(bu, au);
  if (bInA && aInB) return a.id <= b.id ? PairKind::AContainsB : PairKind::BContainsA;
  if (bInA) return PairKind::AContainsB;
  if (aInB) return PairKind::BContainsA;
  return PairKind::Intersecting;
}

// Full pair matrix; [i][j] classifies (cc[i], cc[j]).
inline std::vector<std::vector<PairKind>> classifyAll(const std::vector<LinearCC>& ccs) {
  size_t n = ccs.size();
  std::vector<std::vector<PairKind>> m(n, std::vector<PairKind>(n, PairKind::Disjoint));
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      PairKind k = classifyPair(ccs[i], ccs[j]);
      m[i][j] = k;
      m[j][i] = k == PairKind::AContainsB   ? PairKind::BContainsA
                : k == PairKind::BContainsA ? PairKind::AContainsB
                                            : k;
    }
  }
  return m;
}

// Containment DAG after transitive reduction, grouped into connected
// components ("diagrams"). With no intersecting pairs inside a diagram the
// maximal element is unique and the reduced DAG is a tree.
struct HasseForest {
  std::vector<std::vector<int>> children;  // reduced containment edges, parent -> children
  std::vector<std::vector<int>> parents;   // reduced incoming edges
  std::vector<std::vector<int>> diagrams;  // node lists per component, ascending
  std::vector<int> diagramOf;
  std::vector<std::vector<int>> maximals;  // per diagram, nodes with no container
};

inline HasseForest buildHasseForest(const std::vector<LinearCC>& ccs,
                                    const std::vector<std::vector<PairKind>>& matrix) {
  int n = static_cast<int>(ccs.size());
  const int words = (n + 63) / 64;
  // contains[i] = bitset of nodes strictly inside i
  std::vector<std::vector<uint64_t>> contains(n, std::vector<uint64_t>(words, 0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && matrix[i][j] == PairKind::AContainsB) contains[i][j / 64] |= 1ull << (j % 64);

  HasseForest f;
  f.children.assign(n, {});
  f.parents.assign(n, {});
  f.diagramOf.assign(n, -1);

  // transitive reduction: drop i->j when some k inside i also contains j
  std::vector<uint64_t> indirect(words);
  auto sortByCcId = [&](std::vector<int>& xs) {
    std::sort(xs.begin(), xs.end(), [&](int x, int y) { return ccs[x].id < ccs[y].id; });
  };
  for (int i = 0; i < n; ++i) {
    std::fill(indirect.begin(), indirect.end(), 0);
    for (int w = 0; w < words; ++w) {
      uint64_t bits = contains[i][w];
      while (bits) {
        int k = w * 64 + __builtin_ctzll(bits);
        bits &= bits - 1;
        for (int w2 = 0; w2 < words; ++w2) indirect[w2] |= contains[k][w2];
      }
    }
    for (int w = 0; w < words; ++w) {
      uint64_t bits = contains[i][w] & ~indirect[w];
      while (bits) {
        int j = w * 64 + __builtin_ctzll(bits);
        bits &= bits - 1;
        f.children[i].push_back(j);
        f.parents[j].push_back(i);
      }
    }
    sortByCcId(f.children[i]);
  }
  for (int j = 0; j < n; ++j) sortByCcId(f.parents[j]);

  // connected components of the (undirected) containment graph
  std::vector<int> stack;
  for (int s = 0; s < n; ++s) {
    if (f.diagramOf[s] >= 0) continue;
    int d = static_cast<int>(f.diagrams.size());
    f.diagrams.push_back({});
    stack.push_back(s);
    f.diagramOf[s] = d;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      f.diagrams[d].push_back(u);
      for (const auto& adj : {f.children[u], f.parents[u]})
        for (int v : adj)
          if (f.diagramOf[v] < 0) {
            f.diagramOf[v] = d;
            stack.push_back(v);
          }
    }
    std::sort(f.diagrams[d].begin(), f.diagrams[d].end());
  }

  f.maximals.resize(f.diagrams.size());
  for (size_t d = 0; d < f.diagrams.size(); ++d) {
    for (int u : f.diagrams[d])
      if (f.parents[u].empty()) f.maximals[d].push_back(u);
    sortByCcId(f.maximals[d]);
  }
  return f;
}

inline HasseForest buildHasseForest(const std::vector<LinearCC>& ccs) {
  return buildHasseForest(ccs, classifyAll(ccs));
}

// Exact-solvable vs ILP split: any diagram touching an intersecting pair goes
// wholesale to s2. Granularity is whole diagrams, so no s1 CC is comparable
// or intersecting with any s2 CC.
struct HybridSplit {
  std::vector<int> s1, s2;                        // CC indices, ascending
  std::vector<std::pair<int, int>> intersecting;  // i < j
};

inline HybridSplit computeHybridSplit(const std::vector<LinearCC>& ccs, const HasseForest& forest,
                                      const std::vector<std::vector<PairKind>>& matrix) {
  int n = static_cast<int>(ccs.size());
  HybridSplit split;
  std::vector<char> badDiagram(forest.diagrams.size(), 0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (matrix[i][j] == PairKind::Intersecting) {
        split.intersecting.emplace_back(i, j);
        badDiagram[forest.diagramOf[i]] = 1;
        badDiagram[forest.diagramOf[j]] = 1;
      }
  for (int i = 0; i < n; ++i)
    (badDiagram[forest.diagramOf[i]] ? split.s2 : split.s1).push_back(i);
  return split;
}

inline HybridSplit computeHybridSplit(const std::vector<LinearCC>& ccs) {
  auto matrix = classifyAll(ccs);
  auto forest = buildHasseForest(ccs, matrix);
  return computeHybridSplit(ccs, forest, matrix);
}

// Graphviz rendering of the reduced forest, one cluster per diagram.
inline std::string forestToDot(const std::vector<LinearCC>& ccs, const HasseForest& f) {
  std::string out = "digraph hasse {\n  rankdir=TB;\n";
  for (size_t d = 0; d < f.diagrams.size(); ++d) {
    out += "  subgraph cluster_" + std::to_string(d) + " {\n";
    out += "    label=\"diagram " + std::to_string(d) + "\";\n";
    for (int u : f.diagrams[d]) out += "    \"" + ccs[u].id + "\";\n";
    out += "  }\n";
  }
  for (size_t u = 0; u < f.children.size(); ++u)
    for (int v : f.children[u]) out += "  \"" + ccs[u].id + "\" -> \"" + ccs[v].id + "\";\n";
  out += "}\n";
  return out;
}

}  // namespace linksynth

#endif
