#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "aeroprint/geometry.hpp"

namespace aeroprint {

using PlaneId = std::uint32_t;
using ChunkId = std::uint32_t;

enum class Side { kNegative, kPositive };

struct CutFace {
  PlaneId plane_id = 0;
  Side side = Side::kNegative;
  friend bool operator==(const CutFace&, const CutFace&) = default;
};

struct ChunkRecord {
  TriangleMesh mesh;
  std::vector<CutFace> cut_faces;
  double volume = 0.0;
  ChunkId id = 0;
};

struct BspNode {
  // internal node
  std::optional<PlaneId> plane;
  std::shared_ptr<const BspNode> left;   // negative side
  std::shared_ptr<const BspNode> right;  // positive side
  // leaf
  std::shared_ptr<const ChunkRecord> chunk;

  bool is_leaf() const { return chunk != nullptr; }
};

/// Immutable value: cutting returns a new tree that shares every untouched
/// subtree with its parent, so branching during search is cheap.
class BspTree {
 public:
  /// Throws NonWatertight for an open root mesh, EmptyInput for zero volume.
  explicit BspTree(TriangleMesh root_mesh);

  const BspNode& root() const { return *root_; }
  const std::shared_ptr<const BspNode>& root_ptr() const { return root_; }
  const std::map<PlaneId, Plane>& planes() const { return planes_; }
  const Plane& plane(PlaneId id) const;
  const TriangleMesh& root_mesh() const { return *root_mesh_; }
  double root_volume() const { return root_volume_; }

  /// Leaves left to right.
  std::vector<std::shared_ptr<const ChunkRecord>> leaves() const;
  std::size_t leaf_count() const { return leaf_count_; }
  /// Smallest id not yet used in the plane registry.
  PlaneId next_plane_id() const;

 private:
  friend struct BspTreeAccess;
  BspTree() = default;

  std::shared_ptr<const TriangleMesh> root_mesh_;
  double root_volume_ = 0.0;
  std::shared_ptr<const BspNode> root_;
  std::map<PlaneId, Plane> planes_;
  std::size_t leaf_count_ = 0;
  ChunkId next_chunk_id_ = 0;
};

/// Memoizes split_mesh per (chunk, plane id). Chunks are shared between
/// trees of one search, so the same split recurs across beam branches.
/// Plane ids must denote the same plane for the lifetime of the cache.
class SplitCache {
 public:
  struct Entry {
    std::shared_ptr<const ChunkRecord> keepalive;
    bool degenerate = false;
    bool untouched = false;
    TriangleMesh negative;
    TriangleMesh positive;
    double negative_volume = 0.0;
    double positive_volume = 0.0;
  };

  const Entry& lookup(const std::shared_ptr<const ChunkRecord>& chunk, PlaneId id, const Plane& plane);
  std::size_t size() const { return entries_.size(); }
  std::size_t hits() const { return hits_; }

 private:
  std::map<std::pair<const ChunkRecord*, PlaneId>, Entry> entries_;
  std::size_t hits_ = 0;
};

/// Splits every leaf the plane crosses. Leaves on one side of the plane are
/// kept as they are. Throws NoEffect when no leaf is split, DegenerateCut
/// when a split would leave a sliver, InvalidArgument when `id` is already
/// registered with a different plane.
BspTree apply_cut(const BspTree& tree, PlaneId id, const Plane& plane, SplitCache* cache = nullptr);
BspTree apply_cut(const BspTree& tree, const Plane& plane);

/// As apply_cut, but NoEffect and DegenerateCut yield nullopt.
std::optional<BspTree> try_apply_cut(const BspTree& tree, PlaneId id, const Plane& plane,
                                     SplitCache* cache = nullptr);

/// Re-applies the tree's planes to the bare root mesh in order of ascending
/// origin z (ties by plane id). Planes that no longer split anything are
/// dropped; a leaf whose split would be a sliver stays whole. Chunk ids are
/// relabelled 0..n-1 in in-order sequence.
BspTree rebuild_sorted(const BspTree& tree);

/// Leaf chunk ids in in-order traversal (negative subtree first).
std::vector<ChunkId> in_order_priority(const BspTree& tree);

}  // namespace aeroprint
