#include "aeroprint/chunk_search.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <tuple>

#include "aeroprint/error.hpp"

namespace aeroprint {
namespace {

constexpr double kSeedTolerance = 1e-9;

void require(bool ok, const std::string& field, const std::string& why) {
  if (!ok) {
    throw Error(ErrorCode::kConfig, "search." + field + ": " + why);
  }
}

// Cut planes the chunk still has a face on, each listed once.
std::vector<const Plane*> bounding_cut_planes(const ChunkRecord& chunk,
                                              const std::map<PlaneId, Plane>& planes) {
  std::vector<const Plane*> out;
  std::set<PlaneId> seen;
  for (const CutFace& cf : chunk.cut_faces) {
    if (!seen.insert(cf.plane_id).second) {
      continue;
    }
    const auto it = planes.find(cf.plane_id);
    if (it == planes.end()) {
      throw Error(ErrorCode::kUnknownPlane, "cut face references plane " +
                                                std::to_string(cf.plane_id));
    }
    const Plane& plane = it->second;
    const auto& v = chunk.mesh.vertices;
    const bool has_face = std::any_of(chunk.mesh.faces.begin(), chunk.mesh.faces.end(),
                                      [&](const Face& f) {
                                        return std::abs(signed_distance(plane, v[f[0]])) <= kSeedTolerance &&
                                               std::abs(signed_distance(plane, v[f[1]])) <= kSeedTolerance &&
                                               std::abs(signed_distance(plane, v[f[2]])) <= kSeedTolerance;
                                      });
    if (has_face) {
      out.push_back(&plane);
    }
  }
  return out;
}

bool below_all(const ChunkRecord& chunk, const std::vector<const Plane*>& planes) {
  for (const Plane* p : planes) {
    for (const Vec3& v : chunk.mesh.vertices) {
      if (signed_distance(*p, v) > kSeedTolerance) {
        return false;
      }
    }
  }
  return true;
}

struct Candidate {
  BspTree tree;
  double h = 0.0;
  std::size_t generation = 0;
  bool terminated = false;
  std::vector<PlaneId> plane_set;
};

auto rank_key(const Candidate& c) { return std::make_tuple(c.h, c.tree.leaf_count(), c.generation); }

bool better(const Candidate& a, const Candidate& b) { return rank_key(a) < rank_key(b); }

std::vector<PlaneId> plane_set(const BspTree& tree) {
  std::vector<PlaneId> ids;
  for (const auto& [id, plane] : tree.planes()) ids.push_back(id);
  return ids;
}

BeamAuditEntry audit_entry(const Candidate& c) {
  return {c.plane_set, c.h, c.tree.leaf_count(), c.terminated};
}

}  // namespace

void SearchConfig::validate() const {
  require(std::isfinite(phi_sample_max) && phi_sample_max >= 0.0 &&
              phi_sample_max <= std::numbers::pi / 2,
          "phi_sample_max", "must lie in [0, pi/2]");
  require(n_polar >= 1, "n_polar", "must be >= 1");
  require(n_azimuth >= 1, "n_azimuth", "must be >= 1");
  require(std::isfinite(delta) && delta > 0.0, "delta", "must be > 0");
  require(w_inner >= 1, "w_inner", "must be >= 1");
  require(w_outer >= 1, "w_outer", "must be >= 1");
  require(std::isfinite(g_disp) && std::isfinite(g_part) && std::isfinite(g_faces), "gains",
          "must be finite");
  require(max_iterations >= 0, "max_iterations", "must be >= 0");
  require(!capacities.empty(), "capacities", "must not be empty");
  for (std::size_t i = 0; i < capacities.size(); ++i) {
    require(std::isfinite(capacities[i]) && capacities[i] > 0.0,
            "capacities[" + std::to_string(i) + "]", "must be > 0");
  }
  require(std::isfinite(phi_conn_max) && phi_conn_max >= 0.0, "phi_conn_max", "must be >= 0");
  require(std::isfinite(extruder_h) && extruder_h > 0.0, "extruder_h", "must be > 0");
  require(std::isfinite(extruder_l) && extruder_l > 0.0, "extruder_l", "must be > 0");
}

double volume_dispersion(std::span<const double> volumes, bool use_sqrt) {
  if (volumes.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no volumes");
  }
  const double n = static_cast<double>(volumes.size());
  double mean = 0.0;
  for (double v : volumes) mean += v;
  mean /= n;
  double sigma = 0.0;
  for (double v : volumes) sigma += (v - mean) * (v - mean);
  sigma /= n;
  if (use_sqrt) {
    sigma = std::sqrt(sigma);
  }
  return sigma / mean;
}

int is_seed(const ChunkRecord& chunk, const std::map<PlaneId, Plane>& planes) {
  return below_all(chunk, bounding_cut_planes(chunk, planes)) ? 1 : 0;
}

int positive_face_count(const ChunkRecord& chunk, const std::map<PlaneId, Plane>& planes) {
  return score_leaf(chunk, planes).positive_faces;
}

LeafScore score_leaf(const ChunkRecord& chunk, const std::map<PlaneId, Plane>& planes) {
  const auto bounding = bounding_cut_planes(chunk, planes);
  const int seed = below_all(chunk, bounding) ? 1 : 0;
  return {chunk.volume, seed, seed * static_cast<int>(bounding.size())};
}

double chunk_reward(int seed, int positive_faces, const SearchConfig& config) {
  return config.g_part * seed + config.g_faces * positive_faces;
}

double tree_heuristic(std::span<const LeafScore> leaves, const SearchConfig& config) {
  std::vector<double> volumes;
  volumes.reserve(leaves.size());
  double reward = 0.0;
  for (const LeafScore& s : leaves) {
    volumes.push_back(s.volume);
    reward += chunk_reward(s.seed, s.positive_faces, config);
  }
  return config.g_disp * volume_dispersion(volumes, config.dispersion_sqrt) - reward;
}

double tree_heuristic(const BspTree& tree, const SearchConfig& config) {
  std::vector<LeafScore> scores;
  for (const auto& leaf : tree.leaves()) {
    scores.push_back(score_leaf(*leaf, tree.planes()));
  }
  return tree_heuristic(scores, config);
}

double max_polar_angle(const SearchConfig& config) {
  const double extruder = std::atan(config.extruder_h / config.extruder_l);
  const double combined = config.literal_max_combinator ? std::max(config.phi_conn_max, extruder)
                                                        : std::min(config.phi_conn_max, extruder);
  return std::min(combined, config.phi_sample_max);
}

bool is_terminated(std::span<const double> leaf_volumes, std::span<const double> capacities) {
  if (capacities.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no capacities");
  }
  const double largest = *std::max_element(capacities.begin(), capacities.end());
  return std::all_of(leaf_volumes.begin(), leaf_volumes.end(),
                     [&](double v) { return v < largest; });
}

bool is_terminated(const BspTree& tree, std::span<const double> capacities) {
  std::vector<double> volumes;
  for (const auto& leaf : tree.leaves()) volumes.push_back(leaf->volume);
  return is_terminated(volumes, capacities);
}

std::vector<CandidatePlane> candidate_planes(const TriangleMesh& mesh, const SearchConfig& config) {
  std::vector<CandidatePlane> out;
  for (const Vec3& n : sample_normals(max_polar_angle(config), config.n_polar, config.n_azimuth)) {
    for (const Plane& p : plane_family(n, mesh, config.delta)) {
      out.push_back({static_cast<PlaneId>(out.size()), p});
    }
  }
  return out;
}

SearchResult beam_search(const TriangleMesh& mesh, const SearchConfig& config) {
  config.validate();
  return beam_search(mesh, config, candidate_planes(mesh, config));
}

SearchResult beam_search(const TriangleMesh& mesh, const SearchConfig& config,
                         const std::vector<CandidatePlane>& candidates) {
  config.validate();
  SplitCache cache;
  std::size_t generation = 0;

  auto evaluate = [&](BspTree tree) {
    Candidate c{std::move(tree), 0.0, generation++, false, {}};
    c.h = tree_heuristic(c.tree, config);
    c.terminated = is_terminated(c.tree, config.capacities);
    c.plane_set = plane_set(c.tree);
    return c;
  };

  std::vector<Candidate> pool;
  pool.push_back(evaluate(BspTree(mesh)));
  Candidate best = pool.front();
  SearchResult result{best.tree, best.h, best.terminated, 0, {}};
  result.audit.push_back({0, 1, {audit_entry(best)}});

  int iteration = 0;
  while (!pool.front().terminated && iteration < config.max_iterations) {
    ++iteration;
    std::vector<Candidate> next;
    std::size_t expanded = 0;
    for (const Candidate& parent : pool) {
      if (parent.terminated) {
        next.push_back(parent);
        continue;
      }
      std::vector<Candidate> children;
      for (const CandidatePlane& cand : candidates) {
        if (parent.tree.planes().count(cand.id) != 0) {
          continue;
        }
        std::optional<BspTree> child = try_apply_cut(parent.tree, cand.id, cand.plane, &cache);
        if (!child) {
          continue;
        }
        ++expanded;
        children.push_back(evaluate(std::move(*child)));
      }
      std::stable_sort(children.begin(), children.end(), better);
      const std::size_t keep = std::min(children.size(), static_cast<std::size_t>(config.w_inner));
      std::move(children.begin(), children.begin() + static_cast<std::ptrdiff_t>(keep),
                std::back_inserter(next));
    }
    if (next.empty()) {
      --iteration;
      break;
    }
    std::stable_sort(next.begin(), next.end(), better);
    // one tree per cut set; different insertion orders yield the same leaves
    std::vector<Candidate> unique;
    std::set<std::vector<PlaneId>> seen;
    for (Candidate& c : next) {
      if (seen.insert(c.plane_set).second) {
        unique.push_back(std::move(c));
      }
      if (unique.size() == static_cast<std::size_t>(config.w_outer)) {
        break;
      }
    }
    pool = std::move(unique);

    IterationAudit audit{iteration, expanded, {}};
    for (const Candidate& c : pool) audit.beam.push_back(audit_entry(c));
    result.audit.push_back(std::move(audit));

    if (better(pool.front(), best)) {
      best = pool.front();
    }
  }

  // a printable front ends the search and beats earlier unprintable trees
  const Candidate& chosen = pool.front().terminated ? pool.front() : best;
  result.tree = rebuild_sorted(chosen.tree);
  result.heuristic = tree_heuristic(result.tree, config);
  result.terminated = is_terminated(result.tree, config.capacities);
  result.iterations_used = iteration;
  return result;
}

const SearchResult& require_terminated(const SearchResult& result) {
  if (!result.terminated) {
    double largest = 0.0;
    for (const auto& leaf : result.tree.leaves()) largest = std::max(largest, leaf->volume);
    throw Error(ErrorCode::kSearchExhausted,
                "no decomposition within capacity after " + std::to_string(result.iterations_used) +
                    " iterations (largest chunk " + std::to_string(largest) + " m^3)");
  }
  return result;
}

}  // namespace aeroprint
