#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aeroprint/bsp_tree.hpp"

namespace aeroprint {

using AgentId = std::uint32_t;

enum class AgentStatus { kIdle, kPrinting, kInactive };

struct UavAgent {
  AgentId id = 0;
  double capacity = 0.0;  // m^3
  double battery = 1.0;   // fraction
  AgentStatus status = AgentStatus::kIdle;
  friend bool operator==(const UavAgent&, const UavAgent&) = default;
};

enum class EventKind { kAssigned, kCompleted, kDeactivated };
std::string to_string(EventKind kind);
std::string to_string(AgentStatus status);

struct ScheduleEvent {
  double t = 0.0;
  EventKind kind = EventKind::kAssigned;
  AgentId agent = 0;
  ChunkId chunk = 0;
  double battery = 0.0;  // after the event
  friend bool operator==(const ScheduleEvent&, const ScheduleEvent&) = default;
};

struct Assignment {
  AgentId agent = 0;
  ChunkId chunk = 0;
  friend bool operator==(const Assignment&, const Assignment&) = default;
};

struct PrintSchedule {
  std::deque<ChunkId> queue;
  std::vector<ChunkId> completed;  // in completion order
  std::optional<Assignment> active;
  std::vector<ScheduleEvent> log;
};

PrintSchedule build_schedule(const BspTree& tree);
PrintSchedule build_schedule(const std::vector<ChunkId>& order);

/// Hands the head chunk to the idle agent with the smallest capacity that
/// exceeds its volume (lowest id on ties). Returns nullopt while another
/// agent is printing or when the queue is empty. Throws NoCapableAgent when
/// no remaining agent can hold the head chunk.
std::optional<Assignment> assign_next(PrintSchedule& schedule, std::vector<UavAgent>& agents,
                                      const std::map<ChunkId, double>& chunk_volumes,
                                      double t = 0.0);

/// Closes the active assignment and drains the agent's battery; an agent
/// left below `threshold` becomes inactive. Throws NotActive when
/// (agent, chunk) is not the active assignment.
void complete(PrintSchedule& schedule, std::vector<UavAgent>& agents, AgentId agent,
              ChunkId chunk, double battery_drain, double threshold = 0.15, double t = 0.0);

}  // namespace aeroprint
