#include "aeroprint/task_allocation.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "aeroprint/error.hpp"

namespace aeroprint {
namespace {

UavAgent& find_agent(std::vector<UavAgent>& agents, AgentId id) {
  const auto it = std::find_if(agents.begin(), agents.end(),
                               [id](const UavAgent& a) { return a.id == id; });
  if (it == agents.end()) {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown agent {}", id));
  }
  return *it;
}

}  // namespace

std::string to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kAssigned:
      return "assigned";
    case EventKind::kCompleted:
      return "completed";
    case EventKind::kDeactivated:
      return "deactivated";
  }
  return "unknown";
}

std::string to_string(AgentStatus status) {
  switch (status) {
    case AgentStatus::kIdle:
      return "idle";
    case AgentStatus::kPrinting:
      return "printing";
    case AgentStatus::kInactive:
      return "inactive";
  }
  return "unknown";
}

PrintSchedule build_schedule(const BspTree& tree) { return build_schedule(in_order_priority(tree)); }

PrintSchedule build_schedule(const std::vector<ChunkId>& order) {
  PrintSchedule s;
  s.queue.assign(order.begin(), order.end());
  return s;
}

std::optional<Assignment> assign_next(PrintSchedule& schedule, std::vector<UavAgent>& agents,
                                      const std::map<ChunkId, double>& chunk_volumes, double t) {
  if (schedule.active || schedule.queue.empty()) {
    return std::nullopt;
  }
  const ChunkId head = schedule.queue.front();
  const auto vol = chunk_volumes.find(head);
  if (vol == chunk_volumes.end()) {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("no volume for chunk {}", head));
  }
  UavAgent* pick = nullptr;
  for (UavAgent& a : agents) {
    if (a.status != AgentStatus::kIdle || !(a.capacity > vol->second)) {
      continue;
    }
    if (pick == nullptr || a.capacity < pick->capacity ||
        (a.capacity == pick->capacity && a.id < pick->id)) {
      pick = &a;
    }
  }
  if (pick == nullptr) {
    throw Error(ErrorCode::kNoCapableAgent,
                fmt::format("chunk {} ({:.6g} m^3) exceeds every remaining agent's capacity",
                            head, vol->second));
  }
  pick->status = AgentStatus::kPrinting;
  schedule.queue.pop_front();
  schedule.active = Assignment{pick->id, head};
  schedule.log.push_back({t, EventKind::kAssigned, pick->id, head, pick->battery});
  return schedule.active;
}

void complete(PrintSchedule& schedule, std::vector<UavAgent>& agents, AgentId agent,
              ChunkId chunk, double battery_drain, double threshold, double t) {
  if (!schedule.active || !(*schedule.active == Assignment{agent, chunk})) {
    throw Error(ErrorCode::kNotActive,
                fmt::format("agent {} is not printing chunk {}", agent, chunk));
  }
  if (!(std::isfinite(battery_drain) && battery_drain >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "battery drain must be >= 0");
  }
  UavAgent& a = find_agent(agents, agent);
  a.battery = std::max(0.0, a.battery - battery_drain);
  schedule.completed.push_back(chunk);
  schedule.active.reset();
  schedule.log.push_back({t, EventKind::kCompleted, agent, chunk, a.battery});
  if (a.battery < threshold) {
    a.status = AgentStatus::kInactive;
    schedule.log.push_back({t, EventKind::kDeactivated, agent, chunk, a.battery});
  } else {
    a.status = AgentStatus::kIdle;
  }
}

}  // namespace aeroprint
