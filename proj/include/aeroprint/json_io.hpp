#pragma once

#include <filesystem>
#include <vector>

#include "aeroprint/bsp_tree.hpp"
#include "aeroprint/chunk_search.hpp"
#include "aeroprint/mission_emulator.hpp"
#include "aeroprint/task_allocation.hpp"
#include "json.hpp"

namespace aeroprint {

nlohmann::json to_json(const Vec3& v);

/// Plane registry plus the node structure; leaves carry chunk id, volume
/// and cut faces.
nlohmann::json tree_json(const BspTree& tree);
nlohmann::json order_json(const std::vector<ChunkId>& order);
nlohmann::json audit_json(const SearchResult& result);
nlohmann::json events_json(const std::vector<ScheduleEvent>& events);
nlohmann::json markers_json(const std::vector<DepositedMarker>& markers);
nlohmann::json stats_json(const TrackingReport& report);

/// Two-space indented dump with a trailing newline. Throws Io.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace aeroprint
