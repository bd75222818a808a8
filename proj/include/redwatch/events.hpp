#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace redwatch {

/// Number of counters a behavior sample carries.
inline constexpr int kEventCount = 13;

/// The monitored counter set, in canonical column order.
enum class EventId : int {
    instruction = 0,
    stall_issue,
    stall_retire,
    cycles,
    load,
    dtlb_read,
    store,
    bpu_read,
    dtlb_write,
    branch,
    l1d_read_miss,
    l1i_read_miss,
    context_switch,
};

const std::array<std::string_view, kEventCount>& event_names();
std::string_view event_name(EventId id);
std::optional<EventId> event_from_name(std::string_view name);

/// Candidate counters a feature-selection pass can rank (34 entries).
const std::vector<std::string>& full_event_universe();

}  // namespace redwatch
