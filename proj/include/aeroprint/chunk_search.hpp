#pragma once

#include <map>
#include <numbers>
#include <span>
#include <vector>

#include "aeroprint/bsp_tree.hpp"
#include "aeroprint/geometry.hpp"

namespace aeroprint {

struct SearchConfig {
  double phi_sample_max = std::numbers::pi / 4;  // rad
  int n_polar = 2;
  int n_azimuth = 8;
  double delta = 0.25;  // m between parallel candidate planes
  int w_inner = 2;
  int w_outer = 4;
  double g_disp = 200.0;
  double g_part = 10.0;
  double g_faces = 20.0;
  int max_iterations = 10;
  std::vector<double> capacities{0.08, 0.08};  // m^3 of material per UAV
  double phi_conn_max = std::numbers::pi / 4;  // rad
  double extruder_h = 0.1;                     // m
  double extruder_l = 0.1;                     // m
  // Combine the connectivity and extruder bounds with max instead of min.
  bool literal_max_combinator = false;
  // Use the standard deviation instead of the variance in c_v.
  bool dispersion_sqrt = false;

  /// Throws Config describing the first offending field.
  void validate() const;
  friend bool operator==(const SearchConfig&, const SearchConfig&) = default;
};

/// Per-leaf ingredients of the heuristic.
struct LeafScore {
  double volume = 0.0;
  int seed = 0;
  int positive_faces = 0;
};

/// sigma / mu with sigma the mean squared deviation (or its root when
/// `use_sqrt`). Throws EmptyInput for no volumes.
double volume_dispersion(std::span<const double> volumes, bool use_sqrt = false);

/// 1 iff the chunk lies on the non-positive side of every cut plane it
/// has a face on. Planes the chunk only inherited from an ancestor without
/// keeping a face on them are ignored, so the answer depends on geometry
/// alone and not on the order cuts were applied in. Throws UnknownPlane.
int is_seed(const ChunkRecord& chunk, const std::map<PlaneId, Plane>& planes);

/// Number of distinct cut planes the chunk has a face on, when it is a seed.
int positive_face_count(const ChunkRecord& chunk, const std::map<PlaneId, Plane>& planes);

LeafScore score_leaf(const ChunkRecord& chunk, const std::map<PlaneId, Plane>& planes);

double chunk_reward(int seed, int positive_faces, const SearchConfig& config);

/// G_disp * c_v - sum of chunk rewards. Lower is better.
double tree_heuristic(std::span<const LeafScore> leaves, const SearchConfig& config);
double tree_heuristic(const BspTree& tree, const SearchConfig& config);

/// Steepest admissible cut inclination.
double max_polar_angle(const SearchConfig& config);

/// Every leaf strictly smaller than the largest capacity.
bool is_terminated(std::span<const double> leaf_volumes, std::span<const double> capacities);
bool is_terminated(const BspTree& tree, std::span<const double> capacities);

struct CandidatePlane {
  PlaneId id = 0;
  Plane plane;
};

/// sample_normals(max_polar_angle) x plane_family, ids in enumeration order.
std::vector<CandidatePlane> candidate_planes(const TriangleMesh& mesh, const SearchConfig& config);

struct BeamAuditEntry {
  std::vector<PlaneId> planes;  // sorted
  double heuristic = 0.0;
  std::size_t leaves = 0;
  bool terminated = false;
};

struct IterationAudit {
  int iteration = 0;
  std::size_t expanded = 0;  // child trees evaluated
  std::vector<BeamAuditEntry> beam;
};

struct SearchResult {
  BspTree tree;
  double heuristic = 0.0;
  bool terminated = false;
  int iterations_used = 0;
  std::vector<IterationAudit> audit;
};

/// Beam search over cut sets. The returned tree has been through
/// rebuild_sorted. When no terminated tree is found within max_iterations
/// the best tree seen is returned with terminated = false; callers that
/// need a printable decomposition use require_terminated.
SearchResult beam_search(const TriangleMesh& mesh, const SearchConfig& config);
SearchResult beam_search(const TriangleMesh& mesh, const SearchConfig& config,
                         const std::vector<CandidatePlane>& candidates);

/// Throws SearchExhausted unless the result is terminated.
const SearchResult& require_terminated(const SearchResult& result);

}  // namespace aeroprint
