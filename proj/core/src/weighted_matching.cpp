#include "stragglar/weighted_matching.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <optional>

#include "stragglar/error.hpp"

namespace stragglar {

namespace {

// Primal-dual blossom algorithm after Galil, "Efficient algorithms for finding
// maximum matching in graphs" (1986). Vertex duals are stored doubled so that
// integer weights keep all arithmetic integral; an edge k = (i, j, w) has
// slack dual[i] + dual[j] - 2w.
//
// Endpoint p of edge k is 2k or 2k+1; endpoint(p) is the vertex, p ^ 1 the
// other end. Blossom ids are [n, 2n). Labels: 0 free, 1 S (outer), 2 T
// (inner); bit 4 marks vertices on the current scanBlossom path.
class BlossomSolver {
 public:
  explicit BlossomSolver(const WeightedGraph& g)
      : edges_(g.edges), nv_(g.num_vertices), ne_(static_cast<int>(g.edges.size())) {}

  std::vector<int> solve() {
    if (ne_ == 0 || nv_ == 0) return std::vector<int>(static_cast<std::size_t>(nv_), -1);
    std::int64_t max_weight = 0;
    for (const WeightedEdge& e : edges_) max_weight = std::max(max_weight, e.weight);

    endpoint_.resize(2 * static_cast<std::size_t>(ne_));
    for (int p = 0; p < 2 * ne_; ++p) {
      const WeightedEdge& e = edges_[static_cast<std::size_t>(p / 2)];
      endpoint_[static_cast<std::size_t>(p)] = (p % 2 == 0) ? e.u : e.v;
    }
    neighbend_.assign(static_cast<std::size_t>(nv_), {});
    for (int k = 0; k < ne_; ++k) {
      const WeightedEdge& e = edges_[static_cast<std::size_t>(k)];
      neighbend_[static_cast<std::size_t>(e.u)].push_back(2 * k + 1);
      neighbend_[static_cast<std::size_t>(e.v)].push_back(2 * k);
    }
    const std::size_t n2 = 2 * static_cast<std::size_t>(nv_);
    mate_.assign(static_cast<std::size_t>(nv_), -1);
    label_.assign(n2, 0);
    labelend_.assign(n2, -1);
    inblossom_.resize(static_cast<std::size_t>(nv_));
    for (int v = 0; v < nv_; ++v) inblossom_[static_cast<std::size_t>(v)] = v;
    blossomparent_.assign(n2, -1);
    blossomchilds_.assign(n2, {});
    blossombase_.assign(n2, -1);
    for (int v = 0; v < nv_; ++v) blossombase_[static_cast<std::size_t>(v)] = v;
    blossomendps_.assign(n2, {});
    bestedge_.assign(n2, -1);
    blossombestedges_.assign(n2, std::nullopt);
    unusedblossoms_.clear();
    for (int b = nv_; b < 2 * nv_; ++b) unusedblossoms_.push_back(b);
    dualvar_.assign(n2, 0);
    for (int v = 0; v < nv_; ++v) dualvar_[static_cast<std::size_t>(v)] = max_weight;
    allowedge_.assign(static_cast<std::size_t>(ne_), false);
    queue_.clear();

    for (int t = 0; t < nv_; ++t) {
      std::fill(label_.begin(), label_.end(), 0);
      std::fill(bestedge_.begin(), bestedge_.end(), -1);
      for (std::size_t b = static_cast<std::size_t>(nv_); b < n2; ++b) blossombestedges_[b].reset();
      std::fill(allowedge_.begin(), allowedge_.end(), false);
      queue_.clear();

      for (int v = 0; v < nv_; ++v) {
        if (mate_[u(v)] == -1 && label_[u(inblossom_[u(v)])] == 0) assign_label(v, 1, -1);
      }

      bool augmented = false;
      while (true) {
        while (!queue_.empty() && !augmented) {
          const int v = queue_.back();
          queue_.pop_back();
          assert(label_[u(inblossom_[u(v)])] == 1);
          for (int p : neighbend_[u(v)]) {
            const int k = p / 2;
            const int w = endpoint_[u(p)];
            if (inblossom_[u(v)] == inblossom_[u(w)]) continue;
            std::int64_t kslack = 0;
            if (!allowedge_[u(k)]) {
              kslack = slack(k);
              if (kslack <= 0) allowedge_[u(k)] = true;
            }
            if (allowedge_[u(k)]) {
              if (label_[u(inblossom_[u(w)])] == 0) {
                assign_label(w, 2, p ^ 1);
              } else if (label_[u(inblossom_[u(w)])] == 1) {
                const int base = scan_blossom(v, w);
                if (base >= 0) {
                  add_blossom(base, k);
                } else {
                  augment_matching(k);
                  augmented = true;
                  break;
                }
              } else if (label_[u(w)] == 0) {
                assert(label_[u(inblossom_[u(w)])] == 2);
                label_[u(w)] = 2;
                labelend_[u(w)] = p ^ 1;
              }
            } else if (label_[u(inblossom_[u(w)])] == 1) {
              const int b = inblossom_[u(v)];
              if (bestedge_[u(b)] == -1 || kslack < slack(bestedge_[u(b)])) bestedge_[u(b)] = k;
            } else if (label_[u(w)] == 0) {
              if (bestedge_[u(w)] == -1 || kslack < slack(bestedge_[u(w)])) bestedge_[u(w)] = k;
            }
          }
        }
        if (augmented) break;

        // No augmenting path with the current duals: pick the dual update.
        int deltatype = 1;
        std::int64_t delta = *std::min_element(dualvar_.begin(), dualvar_.begin() + nv_);
        int deltaedge = -1;
        int deltablossom = -1;
        for (int v = 0; v < nv_; ++v) {
          if (label_[u(inblossom_[u(v)])] == 0 && bestedge_[u(v)] != -1) {
            const std::int64_t d = slack(bestedge_[u(v)]);
            if (d < delta) {
              delta = d;
              deltatype = 2;
              deltaedge = bestedge_[u(v)];
            }
          }
        }
        for (int b = 0; b < 2 * nv_; ++b) {
          if (blossomparent_[u(b)] == -1 && label_[u(b)] == 1 && bestedge_[u(b)] != -1) {
            const std::int64_t ks = slack(bestedge_[u(b)]);
            assert(ks % 2 == 0);
            const std::int64_t d = ks / 2;
            if (d < delta) {
              delta = d;
              deltatype = 3;
              deltaedge = bestedge_[u(b)];
            }
          }
        }
        for (int b = nv_; b < 2 * nv_; ++b) {
          if (blossombase_[u(b)] >= 0 && blossomparent_[u(b)] == -1 && label_[u(b)] == 2 &&
              dualvar_[u(b)] < delta) {
            delta = dualvar_[u(b)];
            deltatype = 4;
            deltablossom = b;
          }
        }

        for (int v = 0; v < nv_; ++v) {
          const int lb = label_[u(inblossom_[u(v)])];
          if (lb == 1) {
            dualvar_[u(v)] -= delta;
          } else if (lb == 2) {
            dualvar_[u(v)] += delta;
          }
        }
        for (int b = nv_; b < 2 * nv_; ++b) {
          if (blossombase_[u(b)] >= 0 && blossomparent_[u(b)] == -1) {
            if (label_[u(b)] == 1) {
              dualvar_[u(b)] += delta;
            } else if (label_[u(b)] == 2) {
              dualvar_[u(b)] -= delta;
            }
          }
        }

        if (deltatype == 1) {
          break;  // optimum reached
        } else if (deltatype == 2) {
          allowedge_[u(deltaedge)] = true;
          int i = edges_[u(deltaedge)].u;
          int j = edges_[u(deltaedge)].v;
          if (label_[u(inblossom_[u(i)])] == 0) std::swap(i, j);
          assert(label_[u(inblossom_[u(i)])] == 1);
          queue_.push_back(i);
        } else if (deltatype == 3) {
          allowedge_[u(deltaedge)] = true;
          const int i = edges_[u(deltaedge)].u;
          assert(label_[u(inblossom_[u(i)])] == 1);
          queue_.push_back(i);
        } else {
          expand_blossom(deltablossom, false);
        }
      }

      if (!augmented) break;

      for (int b = nv_; b < 2 * nv_; ++b) {
        if (blossomparent_[u(b)] == -1 && blossombase_[u(b)] >= 0 && label_[u(b)] == 1 &&
            dualvar_[u(b)] == 0) {
          expand_blossom(b, true);
        }
      }
    }

    std::vector<int> mate(static_cast<std::size_t>(nv_), -1);
    for (int v = 0; v < nv_; ++v) {
      if (mate_[u(v)] >= 0) mate[u(v)] = endpoint_[u(mate_[u(v)])];
    }
    return mate;
  }

 private:
  static std::size_t u(int i) { return static_cast<std::size_t>(i); }

  // Python-style indexing into a blossom's child/endpoint ring.
  static int& ring(std::vector<int>& v, int j) {
    const int size = static_cast<int>(v.size());
    return v[u(((j % size) + size) % size)];
  }

  std::int64_t slack(int k) const {
    const WeightedEdge& e = edges_[u(k)];
    return dualvar_[u(e.u)] + dualvar_[u(e.v)] - 2 * e.weight;
  }

  void blossom_leaves(int b, std::vector<int>& out) const {
    if (b < nv_) {
      out.push_back(b);
      return;
    }
    for (int t : blossomchilds_[u(b)]) blossom_leaves(t, out);
  }

  std::vector<int> leaves(int b) const {
    std::vector<int> out;
    blossom_leaves(b, out);
    return out;
  }

  void assign_label(int w, int t, int p) {
    const int b = inblossom_[u(w)];
    assert(label_[u(w)] == 0 && label_[u(b)] == 0);
    label_[u(w)] = label_[u(b)] = t;
    labelend_[u(w)] = labelend_[u(b)] = p;
    bestedge_[u(w)] = bestedge_[u(b)] = -1;
    if (t == 1) {
      blossom_leaves(b, queue_);
    } else if (t == 2) {
      const int base = blossombase_[u(b)];
      assert(mate_[u(base)] >= 0);
      assign_label(endpoint_[u(mate_[u(base)])], 1, mate_[u(base)] ^ 1);
    }
  }

  // Walks back from v and w along alternating trees. Returns the base of a
  // new blossom, or -1 if the trees are disjoint (augmenting path).
  int scan_blossom(int v, int w) {
    std::vector<int> path;
    int base = -1;
    while (v != -1 || w != -1) {
      int b = inblossom_[u(v)];
      if (label_[u(b)] & 4) {
        base = blossombase_[u(b)];
        break;
      }
      assert(label_[u(b)] == 1);
      path.push_back(b);
      label_[u(b)] = 5;
      assert(labelend_[u(b)] == mate_[u(blossombase_[u(b)])]);
      if (labelend_[u(b)] == -1) {
        v = -1;
      } else {
        v = endpoint_[u(labelend_[u(b)])];
        b = inblossom_[u(v)];
        assert(label_[u(b)] == 2);
        assert(labelend_[u(b)] >= 0);
        v = endpoint_[u(labelend_[u(b)])];
      }
      if (w != -1) std::swap(v, w);
    }
    for (int b : path) label_[u(b)] = 1;
    return base;
  }

  void add_blossom(int base, int k) {
    int v = edges_[u(k)].u;
    int w = edges_[u(k)].v;
    const int bb = inblossom_[u(base)];
    int bv = inblossom_[u(v)];
    int bw = inblossom_[u(w)];
    const int b = unusedblossoms_.back();
    unusedblossoms_.pop_back();
    blossombase_[u(b)] = base;
    blossomparent_[u(b)] = -1;
    blossomparent_[u(bb)] = b;
    std::vector<int> path;
    std::vector<int> endps;
    while (bv != bb) {
      blossomparent_[u(bv)] = b;
      path.push_back(bv);
      endps.push_back(labelend_[u(bv)]);
      assert(labelend_[u(bv)] >= 0);
      v = endpoint_[u(labelend_[u(bv)])];
      bv = inblossom_[u(v)];
    }
    path.push_back(bb);
    std::reverse(path.begin(), path.end());
    std::reverse(endps.begin(), endps.end());
    endps.push_back(2 * k);
    while (bw != bb) {
      blossomparent_[u(bw)] = b;
      path.push_back(bw);
      endps.push_back(labelend_[u(bw)] ^ 1);
      assert(labelend_[u(bw)] >= 0);
      w = endpoint_[u(labelend_[u(bw)])];
      bw = inblossom_[u(w)];
    }
    assert(label_[u(bb)] == 1);
    label_[u(b)] = 1;
    labelend_[u(b)] = labelend_[u(bb)];
    dualvar_[u(b)] = 0;
    blossomchilds_[u(b)] = path;
    blossomendps_[u(b)] = endps;
    for (int leaf : leaves(b)) {
      if (label_[u(inblossom_[u(leaf)])] == 2) queue_.push_back(leaf);
      inblossom_[u(leaf)] = b;
    }

    // Least-slack edges from the new blossom to each neighbouring S-blossom.
    std::vector<int> bestedgeto(2 * u(nv_), -1);
    for (int sub : path) {
      std::vector<std::vector<int>> nblists;
      if (!blossombestedges_[u(sub)]) {
        for (int leaf : leaves(sub)) {
          std::vector<int> list;
          for (int p : neighbend_[u(leaf)]) list.push_back(p / 2);
          nblists.push_back(std::move(list));
        }
      } else {
        nblists.push_back(*blossombestedges_[u(sub)]);
      }
      for (const std::vector<int>& nblist : nblists) {
        for (int ek : nblist) {
          int i = edges_[u(ek)].u;
          int j = edges_[u(ek)].v;
          if (inblossom_[u(j)] == b) std::swap(i, j);
          const int bj = inblossom_[u(j)];
          if (bj != b && label_[u(bj)] == 1 &&
              (bestedgeto[u(bj)] == -1 || slack(ek) < slack(bestedgeto[u(bj)]))) {
            bestedgeto[u(bj)] = ek;
          }
        }
      }
      blossombestedges_[u(sub)].reset();
      bestedge_[u(sub)] = -1;
    }
    std::vector<int> best;
    for (int ek : bestedgeto) {
      if (ek != -1) best.push_back(ek);
    }
    bestedge_[u(b)] = -1;
    for (int ek : best) {
      if (bestedge_[u(b)] == -1 || slack(ek) < slack(bestedge_[u(b)])) bestedge_[u(b)] = ek;
    }
    blossombestedges_[u(b)] = std::move(best);
  }

  void expand_blossom(int b, bool endstage) {
    for (int s : std::vector<int>(blossomchilds_[u(b)])) {
      blossomparent_[u(s)] = -1;
      if (s < nv_) {
        inblossom_[u(s)] = s;
      } else if (endstage && dualvar_[u(s)] == 0) {
        expand_blossom(s, endstage);
      } else {
        for (int leaf : leaves(s)) inblossom_[u(leaf)] = s;
      }
    }
    if (!endstage && label_[u(b)] == 2) {
      // Relabel the sub-blossoms on the even path from the entry child to the
      // base as T/S alternately; the others become free or keep T labels.
      assert(labelend_[u(b)] >= 0);
      std::vector<int>& childs = blossomchilds_[u(b)];
      std::vector<int>& endps = blossomendps_[u(b)];
      const int entrychild = inblossom_[u(endpoint_[u(labelend_[u(b)] ^ 1)])];
      int j = static_cast<int>(std::find(childs.begin(), childs.end(), entrychild) - childs.begin());
      int jstep;
      int endptrick;
      if (j & 1) {
        j -= static_cast<int>(childs.size());
        jstep = 1;
        endptrick = 0;
      } else {
        jstep = -1;
        endptrick = 1;
      }
      int p = labelend_[u(b)];
      while (j != 0) {
        label_[u(endpoint_[u(p ^ 1)])] = 0;
        label_[u(endpoint_[u(ring(endps, j - endptrick) ^ endptrick ^ 1)])] = 0;
        assign_label(endpoint_[u(p ^ 1)], 2, p);
        allowedge_[u(ring(endps, j - endptrick) / 2)] = true;
        j += jstep;
        p = ring(endps, j - endptrick) ^ endptrick;
        allowedge_[u(p / 2)] = true;
        j += jstep;
      }
      int bv = ring(childs, j);
      label_[u(endpoint_[u(p ^ 1)])] = label_[u(bv)] = 2;
      labelend_[u(endpoint_[u(p ^ 1)])] = labelend_[u(bv)] = p;
      bestedge_[u(bv)] = -1;
      j += jstep;
      while (ring(childs, j) != entrychild) {
        bv = ring(childs, j);
        if (label_[u(bv)] == 1) {
          j += jstep;
          continue;
        }
        int found = -1;
        for (int leaf : leaves(bv)) {
          if (label_[u(leaf)] != 0) {
            found = leaf;
            break;
          }
        }
        if (found >= 0) {
          assert(label_[u(found)] == 2);
          assert(inblossom_[u(found)] == bv);
          label_[u(found)] = 0;
          label_[u(endpoint_[u(mate_[u(blossombase_[u(bv)])])])] = 0;
          assign_label(found, 2, labelend_[u(found)]);
        }
        j += jstep;
      }
    }
    label_[u(b)] = labelend_[u(b)] = -1;
    blossomchilds_[u(b)].clear();
    blossomendps_[u(b)].clear();
    blossombase_[u(b)] = -1;
    blossombestedges_[u(b)].reset();
    bestedge_[u(b)] = -1;
    unusedblossoms_.push_back(b);
  }

  // Swaps matched/unmatched edges along the even path inside blossom b from
  // vertex v to the base, then rotates b so that v becomes its base.
  void augment_blossom(int b, int v) {
    int t = v;
    while (blossomparent_[u(t)] != b) t = blossomparent_[u(t)];
    if (t >= nv_) augment_blossom(t, v);
    std::vector<int>& childs = blossomchilds_[u(b)];
    std::vector<int>& endps = blossomendps_[u(b)];
    const int i = static_cast<int>(std::find(childs.begin(), childs.end(), t) - childs.begin());
    int j = i;
    int jstep;
    int endptrick;
    if (i & 1) {
      j -= static_cast<int>(childs.size());
      jstep = 1;
      endptrick = 0;
    } else {
      jstep = -1;
      endptrick = 1;
    }
    while (j != 0) {
      j += jstep;
      t = ring(childs, j);
      const int p = ring(endps, j - endptrick) ^ endptrick;
      if (t >= nv_) augment_blossom(t, endpoint_[u(p)]);
      j += jstep;
      t = ring(childs, j);
      if (t >= nv_) augment_blossom(t, endpoint_[u(p ^ 1)]);
      mate_[u(endpoint_[u(p)])] = p ^ 1;
      mate_[u(endpoint_[u(p ^ 1)])] = p;
    }
    std::rotate(childs.begin(), childs.begin() + i, childs.end());
    std::rotate(endps.begin(), endps.begin() + i, endps.end());
    blossombase_[u(b)] = blossombase_[u(childs.front())];
    assert(blossombase_[u(b)] == v);
  }

  void augment_matching(int k) {
    const int v = edges_[u(k)].u;
    const int w = edges_[u(k)].v;
    for (auto [s, p] : {std::pair{v, 2 * k + 1}, std::pair{w, 2 * k}}) {
      while (true) {
        const int bs = inblossom_[u(s)];
        assert(label_[u(bs)] == 1);
        assert(labelend_[u(bs)] == mate_[u(blossombase_[u(bs)])]);
        if (bs >= nv_) augment_blossom(bs, s);
        mate_[u(s)] = p;
        if (labelend_[u(bs)] == -1) break;
        const int t = endpoint_[u(labelend_[u(bs)])];
        const int bt = inblossom_[u(t)];
        assert(label_[u(bt)] == 2);
        assert(labelend_[u(bt)] >= 0);
        s = endpoint_[u(labelend_[u(bt)])];
        const int j = endpoint_[u(labelend_[u(bt)] ^ 1)];
        assert(blossombase_[u(bt)] == t);
        if (bt >= nv_) augment_blossom(bt, j);
        mate_[u(j)] = labelend_[u(bt)];
        p = labelend_[u(bt)] ^ 1;
      }
    }
  }

  std::vector<WeightedEdge> edges_;
  int nv_;
  int ne_;
  std::vector<int> endpoint_;
  std::vector<std::vector<int>> neighbend_;
  std::vector<int> mate_;
  std::vector<int> label_;
  std::vector<int> labelend_;
  std::vector<int> inblossom_;
  std::vector<int> blossomparent_;
  std::vector<std::vector<int>> blossomchilds_;
  std::vector<int> blossombase_;
  std::vector<std::vector<int>> blossomendps_;
  std::vector<int> bestedge_;
  std::vector<std::optional<std::vector<int>>> blossombestedges_;
  std::vector<int> unusedblossoms_;
  std::vector<std::int64_t> dualvar_;
  std::vector<bool> allowedge_;
  std::vector<int> queue_;
};

}  // namespace

MatchingSolution max_weight_matching(const WeightedGraph& graph) {
  for (const WeightedEdge& e : graph.edges) {
    if (e.u < 0 || e.v < 0 || e.u >= graph.num_vertices || e.v >= graph.num_vertices) {
      throw Error("max_weight_matching: edge endpoint out of range");
    }
    if (e.u == e.v) throw Error("max_weight_matching: self-loop");
  }
  WeightedGraph positive{graph.num_vertices, {}};
  for (const WeightedEdge& e : graph.edges) {
    if (e.weight > 0) positive.edges.push_back(e);
  }

  const std::vector<int> mate = BlossomSolver(positive).solve();

  // Parallel edges: report the heaviest one between each matched pair.
  std::map<std::pair<int, int>, std::int64_t> weight_of;
  for (const WeightedEdge& e : positive.edges) {
    auto key = std::minmax(e.u, e.v);
    auto [it, inserted] = weight_of.emplace(std::pair{key.first, key.second}, e.weight);
    if (!inserted) it->second = std::max(it->second, e.weight);
  }
  MatchingSolution out;
  for (int v = 0; v < static_cast<int>(mate.size()); ++v) {
    const int w = mate[static_cast<std::size_t>(v)];
    if (w > v) {
      const std::int64_t weight = weight_of.at({v, w});
      out.edges.push_back({v, w, weight});
      out.total_weight += weight;
    }
  }
  return out;
}

MatchingSolution NeedGraph::solve() const {
  std::map<Rank, int> dense;
  for (Rank r : vertices) dense.emplace(r, static_cast<int>(dense.size()));
  WeightedGraph g{static_cast<int>(dense.size()), {}};
  g.edges.reserve(edges.size());
  for (const WeightedEdge& e : edges) {
    auto a = dense.find(e.u);
    auto b = dense.find(e.v);
    if (a == dense.end() || b == dense.end()) throw Error("need graph edge names an unknown rank");
    g.edges.push_back({a->second, b->second, e.weight});
  }
  MatchingSolution dense_solution = max_weight_matching(g);
  MatchingSolution out;
  out.total_weight = dense_solution.total_weight;
  for (const WeightedEdge& e : dense_solution.edges) {
    const Rank a = vertices[static_cast<std::size_t>(e.u)];
    const Rank b = vertices[static_cast<std::size_t>(e.v)];
    out.edges.push_back({std::min(a, b), std::max(a, b), e.weight});
  }
  std::sort(out.edges.begin(), out.edges.end(),
            [](const WeightedEdge& x, const WeightedEdge& y) { return x.u < y.u; });
  return out;
}

}  // namespace stragglar
