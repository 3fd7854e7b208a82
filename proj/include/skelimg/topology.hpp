#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace skelimg {

struct Edge
{
   int a = 0;
   int b = 0;

   friend bool operator==(const Edge&, const Edge&) = default;
};

// Joint/edge graph of a skeleton plus the left/right flip permutation and the
// edge-to-channel partitions used when rendering multi-channel images.
struct SkeletonTopology
{
   std::vector<std::string> joints;
   std::vector<Edge> edges;
   std::vector<std::optional<int>> parents;
   std::vector<int> flip_map;
   // layout id ("1ch", "3ch", "5ch", ...) -> channel index per edge
   std::map<std::string, std::vector<int>> channel_layouts;

   int joint_count() const noexcept { return int(joints.size()); }
   int edge_count() const noexcept { return int(edges.size()); }

   // Throws ValidationError for unknown names/layouts.
   int joint_index(std::string_view name) const;
   const std::vector<int>& layout(std::string_view id) const;
   int channel_count(std::string_view id) const;

   // Edge indices grouped per channel, in ascending edge order.
   std::vector<std::vector<int>> edges_by_channel(std::string_view id) const;

   friend bool operator==(const SkeletonTopology&,
                          const SkeletonTopology&) = default;
};

// 17-joint human skeleton (pelvis root) with "1ch", "3ch" and "5ch" layouts.
const SkeletonTopology& default_human_topology();

// Empty iff every structural invariant holds. Each message names the rule
// and the offending indices, e.g. "edge 0: self-loop".
std::vector<std::string> validate(const SkeletonTopology& topo);

// validate() and throw ValidationError with all violations joined.
void require_valid(const SkeletonTopology& topo);

// Joints ordered so that every parent precedes its children.
std::vector<int> topological_order(const SkeletonTopology& topo);

// Single root of the parent tree; throws ValidationError if the parents do
// not form exactly one tree.
int tree_root(const SkeletonTopology& topo);

} // namespace skelimg
