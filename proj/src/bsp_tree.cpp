#include "aeroprint/bsp_tree.hpp"

#include <algorithm>
#include <string>

#include "aeroprint/error.hpp"

namespace aeroprint {

struct BspTreeAccess {
  static std::shared_ptr<const BspNode>& root(BspTree& t) { return t.root_; }
  static std::map<PlaneId, Plane>& planes(BspTree& t) { return t.planes_; }
  static std::size_t& leaf_count(BspTree& t) { return t.leaf_count_; }
  static ChunkId& next_chunk_id(BspTree& t) { return t.next_chunk_id_; }
};

namespace {

using NodePtr = std::shared_ptr<const BspNode>;

// Vertex-side prefilter: a chunk entirely within the snap band of one side
// cannot be split.
bool crosses(const TriangleMesh& mesh, const Plane& plane) {
  bool below = false;
  bool above = false;
  for (const Vec3& v : mesh.vertices) {
    const double d = signed_distance(plane, v);
    below = below || d < -kPlaneSnap;
    above = above || d > kPlaneSnap;
    if (below && above) {
      return true;
    }
  }
  return false;
}

SplitCache::Entry compute_split(const ChunkRecord& chunk, const Plane& plane) {
  SplitCache::Entry e;
  if (!crosses(chunk.mesh, plane)) {
    e.untouched = true;
    return e;
  }
  SplitResult parts;
  try {
    parts = split_mesh(chunk.mesh, plane);
  } catch (const Error& err) {
    if (err.code() != ErrorCode::kDegenerateCut) {
      throw;
    }
    e.degenerate = true;
    return e;
  }
  if (parts.negative.empty() || parts.positive.empty()) {
    e.untouched = true;
    return e;
  }
  e.negative_volume = mesh_volume(parts.negative);
  e.positive_volume = mesh_volume(parts.positive);
  e.negative = std::move(parts.negative);
  e.positive = std::move(parts.positive);
  return e;
}

struct CutContext {
  PlaneId id;
  const Plane& plane;
  SplitCache* cache;
  bool keep_slivers_whole;
  ChunkId next_chunk_id;
  std::size_t splits = 0;
};

NodePtr make_leaf(const ChunkRecord& parent, TriangleMesh mesh, double volume, CutFace face,
                  ChunkId id) {
  auto rec = std::make_shared<ChunkRecord>();
  rec->mesh = std::move(mesh);
  rec->cut_faces = parent.cut_faces;
  rec->cut_faces.push_back(face);
  rec->volume = volume;
  rec->id = id;
  auto node = std::make_shared<BspNode>();
  node->chunk = std::move(rec);
  return node;
}

NodePtr cut_node(const NodePtr& node, CutContext& ctx) {
  if (node->is_leaf()) {
    SplitCache::Entry local;
    const SplitCache::Entry* e = nullptr;
    if (ctx.cache != nullptr) {
      e = &ctx.cache->lookup(node->chunk, ctx.id, ctx.plane);
    } else {
      local = compute_split(*node->chunk, ctx.plane);
      e = &local;
    }
    if (e->untouched) {
      return node;
    }
    if (e->degenerate) {
      if (ctx.keep_slivers_whole) {
        return node;
      }
      throw Error(ErrorCode::kDegenerateCut,
                  "plane " + std::to_string(ctx.id) + " leaves a sliver of chunk " +
                      std::to_string(node->chunk->id));
    }
    const ChunkRecord& parent = *node->chunk;
    auto inner = std::make_shared<BspNode>();
    inner->plane = ctx.id;
    inner->left = make_leaf(parent, e->negative, e->negative_volume, {ctx.id, Side::kNegative},
                            ctx.next_chunk_id++);
    inner->right = make_leaf(parent, e->positive, e->positive_volume, {ctx.id, Side::kPositive},
                             ctx.next_chunk_id++);
    ++ctx.splits;
    return inner;
  }
  NodePtr left = cut_node(node->left, ctx);
  NodePtr right = cut_node(node->right, ctx);
  if (left == node->left && right == node->right) {
    return node;
  }
  auto inner = std::make_shared<BspNode>(*node);
  inner->left = std::move(left);
  inner->right = std::move(right);
  return inner;
}

std::optional<BspTree> cut_tree(const BspTree& tree, PlaneId id, const Plane& plane,
                                SplitCache* cache, bool keep_slivers_whole) {
  if (auto it = tree.planes().find(id); it != tree.planes().end() && !(it->second == plane)) {
    throw Error(ErrorCode::kInvalidArgument,
                "plane id " + std::to_string(id) + " already names a different plane");
  }
  BspTree out = tree;
  CutContext ctx{id, plane, cache, keep_slivers_whole, BspTreeAccess::next_chunk_id(out)};
  NodePtr root = cut_node(tree.root_ptr(), ctx);
  if (ctx.splits == 0) {
    return std::nullopt;
  }
  BspTreeAccess::root(out) = std::move(root);
  BspTreeAccess::planes(out).emplace(id, plane);
  BspTreeAccess::leaf_count(out) += ctx.splits;
  BspTreeAccess::next_chunk_id(out) = ctx.next_chunk_id;
  return out;
}

void collect_leaves(const NodePtr& node, std::vector<std::shared_ptr<const ChunkRecord>>& out) {
  if (node->is_leaf()) {
    out.push_back(node->chunk);
    return;
  }
  collect_leaves(node->left, out);
  collect_leaves(node->right, out);
}

NodePtr relabel(const NodePtr& node, ChunkId& next) {
  auto copy = std::make_shared<BspNode>(*node);
  if (node->is_leaf()) {
    auto rec = std::make_shared<ChunkRecord>(*node->chunk);
    rec->id = next++;
    copy->chunk = std::move(rec);
    return copy;
  }
  copy->left = relabel(node->left, next);
  copy->right = relabel(node->right, next);
  return copy;
}

}  // namespace

BspTree::BspTree(TriangleMesh root_mesh) {
  check_watertight(root_mesh);
  const double volume = mesh_volume(root_mesh);
  if (!(volume >= kVolumeEpsilon)) {
    throw Error(ErrorCode::kEmptyInput, "root mesh encloses no volume");
  }
  auto rec = std::make_shared<ChunkRecord>();
  rec->mesh = root_mesh;
  rec->volume = volume;
  rec->id = 0;
  auto node = std::make_shared<BspNode>();
  node->chunk = std::move(rec);
  root_mesh_ = std::make_shared<const TriangleMesh>(std::move(root_mesh));
  root_volume_ = volume;
  root_ = std::move(node);
  leaf_count_ = 1;
  next_chunk_id_ = 1;
}

const Plane& BspTree::plane(PlaneId id) const {
  const auto it = planes_.find(id);
  if (it == planes_.end()) {
    throw Error(ErrorCode::kUnknownPlane, "plane id " + std::to_string(id));
  }
  return it->second;
}

std::vector<std::shared_ptr<const ChunkRecord>> BspTree::leaves() const {
  std::vector<std::shared_ptr<const ChunkRecord>> out;
  out.reserve(leaf_count_);
  collect_leaves(root_, out);
  return out;
}

PlaneId BspTree::next_plane_id() const {
  return planes_.empty() ? 0 : planes_.rbegin()->first + 1;
}

const SplitCache::Entry& SplitCache::lookup(const std::shared_ptr<const ChunkRecord>& chunk,
                                            PlaneId id, const Plane& plane) {
  const auto key = std::make_pair(chunk.get(), id);
  if (auto it = entries_.find(key); it != entries_.end()) {
    ++hits_;
    return it->second;
  }
  Entry e = compute_split(*chunk, plane);
  e.keepalive = chunk;
  return entries_.emplace(key, std::move(e)).first->second;
}

BspTree apply_cut(const BspTree& tree, PlaneId id, const Plane& plane, SplitCache* cache) {
  std::optional<BspTree> out = cut_tree(tree, id, plane, cache, false);
  if (!out) {
    throw Error(ErrorCode::kNoEffect, "plane " + std::to_string(id) + " splits no chunk");
  }
  return std::move(*out);
}

BspTree apply_cut(const BspTree& tree, const Plane& plane) {
  return apply_cut(tree, tree.next_plane_id(), plane);
}

std::optional<BspTree> try_apply_cut(const BspTree& tree, PlaneId id, const Plane& plane,
                                     SplitCache* cache) {
  try {
    return cut_tree(tree, id, plane, cache, false);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kDegenerateCut) {
      return std::nullopt;
    }
    throw;
  }
}

BspTree rebuild_sorted(const BspTree& tree) {
  std::vector<std::pair<PlaneId, Plane>> order(tree.planes().begin(), tree.planes().end());
  std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    if (a.second.origin.z != b.second.origin.z) {
      return a.second.origin.z < b.second.origin.z;
    }
    return a.first < b.first;
  });

  BspTree out = tree;
  {
    // fresh single-leaf tree over the same root mesh
    auto rec = std::make_shared<ChunkRecord>();
    rec->mesh = tree.root_mesh();
    rec->volume = tree.root_volume();
    auto node = std::make_shared<BspNode>();
    node->chunk = std::move(rec);
    BspTreeAccess::root(out) = std::move(node);
    BspTreeAccess::planes(out).clear();
    BspTreeAccess::leaf_count(out) = 1;
    BspTreeAccess::next_chunk_id(out) = 1;
  }
  for (const auto& [id, plane] : order) {
    if (std::optional<BspTree> next = cut_tree(out, id, plane, nullptr, true)) {
      out = std::move(*next);
    }
  }
  ChunkId next = 0;
  BspTreeAccess::root(out) = relabel(out.root_ptr(), next);
  BspTreeAccess::next_chunk_id(out) = next;
  return out;
}

std::vector<ChunkId> in_order_priority(const BspTree& tree) {
  std::vector<ChunkId> ids;
  for (const auto& leaf : tree.leaves()) {
    ids.push_back(leaf->id);
  }
  return ids;
}

}  // namespace aeroprint
