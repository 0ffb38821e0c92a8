// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The echosim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "echosim/bvh.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "echosim/intersect.hpp"

namespace echosim {

namespace {

// Slab test; returns the entry distance or +inf on a miss.
double box_entry(const Eigen::AlignedBox3d& box, const Vec3& origin, const Vec3& inv_dir, double t_min,
                 double t_max) {
  for (int a = 0; a < 3; ++a) {
    double t0 = (box.min()(a) - origin(a)) * inv_dir(a);
    double t1 = (box.max()(a) - origin(a)) * inv_dir(a);
    if (t0 > t1) std::swap(t0, t1);
    // NaN (0 * inf) leaves the bounds untouched.
    if (t0 > t_min) t_min = t0;
    if (t1 < t_max) t_max = t1;
    if (t_min > t_max) return std::numeric_limits<double>::infinity();
  }
  return t_min;
}

}  // namespace

Bvh::Bvh(const Mesh& mesh, int leaf_size) : mesh_(&mesh) {
  const int nf = static_cast<int>(mesh.face_count());
  order_.resize(nf);
  std::iota(order_.begin(), order_.end(), 0);
  centroids_.resize(nf);
  for (int f = 0; f < nf; ++f) centroids_[f] = mesh.face_center(f);
  nodes_.reserve(2 * static_cast<std::size_t>(nf) / std::max(1, leaf_size) + 1);
  if (nf > 0) build(0, nf, std::max(1, leaf_size));

  neighbors_.assign(nf, {-1, -1, -1});
  std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> edges;
  for (int f = 0; f < nf; ++f)
    for (int e = 0; e < 3; ++e) edges[std::minmax(mesh.faces(f, e), mesh.faces(f, (e + 1) % 3))].emplace_back(f, e);
  for (const auto& [key, uses] : edges)
    if (uses.size() == 2) {
      neighbors_[uses[0].first][uses[0].second] = uses[1].first;
      neighbors_[uses[1].first][uses[1].second] = uses[0].first;
    }
}

int Bvh::build(int first, int count, int leaf_size) {
  const int index = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  Eigen::AlignedBox3d box;
  Eigen::AlignedBox3d centroid_box;
  for (int i = first; i < first + count; ++i) {
    const int f = order_[i];
    for (int k = 0; k < 3; ++k) box.extend(mesh_->corner(f, k));
    centroid_box.extend(centroids_[f]);
  }
  // Pad flat boxes so the slab test stays robust for axis-aligned faces.
  const double pad = 1e-9 * std::max(1.0, box.sizes().maxCoeff());
  box.min().array() -= pad;
  box.max().array() += pad;
  nodes_[index].box = box;
  if (count <= leaf_size) {
    nodes_[index].first = first;
    nodes_[index].count = count;
    return index;
  }
  int axis = 0;
  centroid_box.sizes().maxCoeff(&axis);
  const int mid = first + count / 2;
  std::nth_element(order_.begin() + first, order_.begin() + mid, order_.begin() + first + count,
                   [&](int a, int b) {
                     if (centroids_[a](axis) != centroids_[b](axis)) return centroids_[a](axis) < centroids_[b](axis);
                     return a < b;
                   });
  const int left = build(first, mid - first, leaf_size);
  const int right = build(mid, first + count - mid, leaf_size);
  nodes_[index].left = left;
  nodes_[index].right = right;
  return index;
}

template <bool AnyHit>
std::optional<Hit> Bvh::traverse(const Vec3& origin, const Vec3& direction, double t_min, double t_max) const {
  if (nodes_.empty()) return std::nullopt;
  const Vec3 inv_dir = direction.cwiseInverse();
  std::optional<Hit> best;
  double best_t = t_max;
  int stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (box_entry(node.box, origin, inv_dir, t_min, best_t) == std::numeric_limits<double>::infinity()) continue;
    if (node.left < 0) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        const int f = order_[i];
        const auto hit = moller_trumbore<double>(origin, direction, mesh_->corner(f, 0), mesh_->corner(f, 1),
                                                 mesh_->corner(f, 2), t_min, best_t);
        if (!hit) continue;
        // Ties on t resolve to the lowest face index for reproducibility.
        if (best && hit->t == best_t && f > best->face) continue;
        best_t = hit->t;
        best = Hit{f, hit->t, origin + hit->t * direction, hit->u, hit->v};
        if constexpr (AnyHit) return best;
      }
      continue;
    }
    const double tl = box_entry(nodes_[node.left].box, origin, inv_dir, t_min, best_t);
    const double tr = box_entry(nodes_[node.right].box, origin, inv_dir, t_min, best_t);
    // Push the farther child first so the nearer one is visited next.
    if (tl <= tr) {
      if (tr != std::numeric_limits<double>::infinity()) stack[top++] = node.right;
      if (tl != std::numeric_limits<double>::infinity()) stack[top++] = node.left;
    } else {
      if (tl != std::numeric_limits<double>::infinity()) stack[top++] = node.left;
      if (tr != std::numeric_limits<double>::infinity()) stack[top++] = node.right;
    }
  }
  return best;
}

std::optional<Hit> Bvh::intersect(const Vec3& origin, const Vec3& direction, double t_min, double t_max) const {
  return traverse<false>(origin, direction, t_min, t_max);
}

bool Bvh::occluded(const Vec3& origin, const Vec3& direction, double t_min, double t_max) const {
  return traverse<true>(origin, direction, t_min, t_max).has_value();
}

std::optional<Hit> intersect_brute_force(const Mesh& mesh, const Vec3& origin, const Vec3& direction,
                                         double t_min) {
  std::optional<Hit> best;
  for (Eigen::Index f = 0; f < mesh.face_count(); ++f) {
    const auto hit = moller_trumbore<double>(origin, direction, mesh.corner(f, 0), mesh.corner(f, 1),
                                             mesh.corner(f, 2), t_min);
    if (hit && (!best || hit->t < best->t)) best = Hit{f, hit->t, origin + hit->t * direction, hit->u, hit->v};
  }
  return best;
}

}  // namespace echosim
