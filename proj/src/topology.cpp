#include "skelimg/topology.hpp"

#include "skelimg/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <numeric>
#include <set>

namespace skelimg {

int SkeletonTopology::joint_index(std::string_view name) const
{
   const auto it = std::find(joints.begin(), joints.end(), name);
   if(it == joints.end())
      throw ValidationError(fmt::format("unknown joint '{}'", name));
   return int(it - joints.begin());
}

const std::vector<int>& SkeletonTopology::layout(std::string_view id) const
{
   const auto it = channel_layouts.find(std::string(id));
   if(it == channel_layouts.end())
      throw ValidationError(fmt::format("unknown channel layout '{}'", id));
   return it->second;
}

int SkeletonTopology::channel_count(std::string_view id) const
{
   const auto& lay = layout(id);
   if(lay.empty()) return 0;
   return *std::max_element(lay.begin(), lay.end()) + 1;
}

std::vector<std::vector<int>>
SkeletonTopology::edges_by_channel(std::string_view id) const
{
   const auto& lay = layout(id);
   if(int(lay.size()) != edge_count())
      throw ValidationError(fmt::format(
          "layout '{}' assigns {} edges, topology has {}", id, lay.size(),
          edge_count()));
   std::vector<std::vector<int>> out(size_t(channel_count(id)));
   for(int e = 0; e < edge_count(); ++e) out[size_t(lay[size_t(e)])].push_back(e);
   return out;
}

// ----------------------------------------------------------- default topology
//
namespace {

SkeletonTopology make_human_topology()
{
   SkeletonTopology t;
   t.joints = {"pelvis",        "right_hip",     "right_knee",
               "right_ankle",   "left_hip",      "left_knee",
               "left_ankle",    "spine",         "thorax",
               "neck",          "head",          "left_shoulder",
               "left_elbow",    "left_wrist",    "right_shoulder",
               "right_elbow",   "right_wrist"};
   const std::vector<int> parent
       = {-1, 0, 1, 2, 0, 4, 5, 0, 7, 8, 9, 8, 11, 12, 8, 14, 15};
   for(size_t k = 0; k < parent.size(); ++k) {
      if(parent[k] < 0) {
         t.parents.push_back(std::nullopt);
      } else {
         t.parents.push_back(parent[k]);
         t.edges.push_back({parent[k], int(k)});
      }
   }
   t.flip_map = {0, 4, 5, 6, 1, 2, 3, 7, 8, 9, 10, 14, 15, 16, 11, 12, 13};

   // edges 0-2 right leg, 3-5 left leg, 6-9 spine/head, 10-12 left arm,
   // 13-15 right arm
   t.channel_layouts["1ch"] = std::vector<int>(16, 0);
   t.channel_layouts["3ch"]
       = {2, 2, 2, 2, 2, 2, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1};
   t.channel_layouts["5ch"]
       = {4, 4, 4, 3, 3, 3, 0, 0, 0, 0, 1, 1, 1, 2, 2, 2};
   return t;
}

} // namespace

const SkeletonTopology& default_human_topology()
{
   static const SkeletonTopology topo = make_human_topology();
   return topo;
}

// ------------------------------------------------------------------- validate
//
std::vector<std::string> validate(const SkeletonTopology& topo)
{
   std::vector<std::string> out;
   const int n = topo.joint_count();
   const auto in_range = [n](int i) { return i >= 0 && i < n; };

   for(int e = 0; e < topo.edge_count(); ++e) {
      const auto [a, b] = topo.edges[size_t(e)];
      if(!in_range(a) || !in_range(b))
         out.push_back(fmt::format("edge {}: joint index out of range ({}, {})",
                                   e, a, b));
      else if(a == b)
         out.push_back(fmt::format("edge {}: self-loop", e));
   }

   // parents
   bool parents_ok = true;
   if(int(topo.parents.size()) != n) {
      out.push_back(fmt::format("parents: expected {} entries, got {}", n,
                                topo.parents.size()));
      parents_ok = false;
   } else {
      for(int k = 0; k < n; ++k) {
         const auto& p = topo.parents[size_t(k)];
         if(p && (!in_range(*p) || *p == k)) {
            out.push_back(fmt::format("parent {}: invalid parent index {}", k, *p));
            parents_ok = false;
         }
      }
   }
   if(parents_ok) {
      for(int k = 0; k < n; ++k) {
         int cur = k;
         int hops = 0;
         while(topo.parents[size_t(cur)] && hops <= n) {
            cur = *topo.parents[size_t(cur)];
            ++hops;
         }
         if(hops > n) {
            out.push_back(fmt::format("parent {}: cycle in parent chain", k));
            parents_ok = false;
            break;
         }
      }
   }
   if(parents_ok) {
      // at most one root per connected component of the edge graph
      std::vector<int> comp(static_cast<size_t>(n));
      std::iota(comp.begin(), comp.end(), 0);
      const auto find = [&](int x) {
         while(comp[size_t(x)] != x) x = comp[size_t(x)] = comp[size_t(comp[size_t(x)])];
         return x;
      };
      for(const auto& [a, b] : topo.edges)
         if(in_range(a) && in_range(b)) comp[size_t(find(a))] = find(b);
      for(int k = 0; k < n; ++k)
         if(topo.parents[size_t(k)] && in_range(*topo.parents[size_t(k)]))
            comp[size_t(find(k))] = find(*topo.parents[size_t(k)]);
      std::map<int, std::vector<int>> roots;
      for(int k = 0; k < n; ++k)
         if(!topo.parents[size_t(k)]) roots[find(k)].push_back(k);
      for(const auto& [c, rs] : roots)
         if(rs.size() > 1)
            out.push_back(fmt::format("parents: component has {} roots ({})",
                                      rs.size(), fmt::join(rs, ", ")));
   }

   // flip map
   bool flip_ok = true;
   if(int(topo.flip_map.size()) != n) {
      out.push_back(fmt::format("flip_map: expected {} entries, got {}", n,
                                topo.flip_map.size()));
      flip_ok = false;
   } else {
      for(int k = 0; k < n; ++k) {
         const int f = topo.flip_map[size_t(k)];
         if(!in_range(f)) {
            out.push_back(fmt::format("flip_map {}: index {} out of range", k, f));
            flip_ok = false;
         } else if(topo.flip_map[size_t(f)] != k) {
            out.push_back(fmt::format("flip_map {}: not an involution ({} -> {} -> {})",
                                      k, k, f, topo.flip_map[size_t(f)]));
            flip_ok = false;
         }
      }
   }
   if(flip_ok) {
      std::set<std::pair<int, int>> edge_set;
      for(const auto& [a, b] : topo.edges) edge_set.insert({std::min(a, b), std::max(a, b)});
      for(int e = 0; e < topo.edge_count(); ++e) {
         const auto [a, b] = topo.edges[size_t(e)];
         if(!in_range(a) || !in_range(b)) continue;
         const int fa = topo.flip_map[size_t(a)];
         const int fb = topo.flip_map[size_t(b)];
         if(!edge_set.count({std::min(fa, fb), std::max(fa, fb)}))
            out.push_back(fmt::format("flip_map: edge {} ({}, {}) maps to ({}, {}), not an edge",
                                      e, a, b, fa, fb));
      }
   }

   // channel layouts
   for(const auto& [id, lay] : topo.channel_layouts) {
      if(int(lay.size()) != topo.edge_count()) {
         out.push_back(fmt::format("layout '{}': {} channel entries for {} edges",
                                   id, lay.size(), topo.edge_count()));
         continue;
      }
      if(lay.empty()) continue;
      const int max_c = *std::max_element(lay.begin(), lay.end());
      std::vector<bool> used(size_t(std::max(max_c + 1, 0)), false);
      for(size_t e = 0; e < lay.size(); ++e) {
         if(lay[e] < 0)
            out.push_back(fmt::format("layout '{}': edge {} has negative channel {}",
                                      id, e, lay[e]));
         else
            used[size_t(lay[e])] = true;
      }
      for(size_t c = 0; c < used.size(); ++c)
         if(!used[c])
            out.push_back(fmt::format("layout '{}': channel {} has no edges (channels must be dense)",
                                      id, c));
   }
   return out;
}

void require_valid(const SkeletonTopology& topo)
{
   const auto v = validate(topo);
   if(!v.empty())
      throw ValidationError(fmt::format("invalid topology: {}", fmt::join(v, "; ")));
}

std::vector<int> topological_order(const SkeletonTopology& topo)
{
   const int n = topo.joint_count();
   if(int(topo.parents.size()) != n)
      throw ValidationError("topology parents do not match joint count");
   std::vector<std::vector<int>> children(static_cast<size_t>(n));
   std::vector<int> order;
   for(int k = 0; k < n; ++k) {
      const auto& p = topo.parents[size_t(k)];
      if(!p)
         order.push_back(k);
      else if(*p >= 0 && *p < n)
         children[size_t(*p)].push_back(k);
      else
         throw ValidationError(fmt::format("joint {}: invalid parent", k));
   }
   for(size_t i = 0; i < order.size(); ++i)
      for(int c : children[size_t(order[i])]) order.push_back(c);
   if(int(order.size()) != n)
      throw ValidationError("topology parents contain a cycle");
   return order;
}

int tree_root(const SkeletonTopology& topo)
{
   const auto order = topological_order(topo);
   const auto n_roots = std::count_if(topo.parents.begin(), topo.parents.end(),
                                      [](const auto& p) { return !p.has_value(); });
   if(n_roots != 1)
      throw ValidationError(fmt::format("topology is not a tree ({} roots)", n_roots));
   return order.front();
}

} // namespace skelimg
