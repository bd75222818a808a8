#include "redwatch/events.hpp"

namespace redwatch {

const std::array<std::string_view, kEventCount>& event_names() {
    static const std::array<std::string_view, kEventCount> names = {
        "instruction",  "stall_issue", "stall_retire",  "cycles",
        "load",         "dtlb_read",   "store",         "bpu_read",
        "dtlb_write",   "branch",      "l1d_read_miss", "l1i_read_miss",
        "context_switch",
    };
    return names;
}

std::string_view event_name(EventId id) {
    return event_names()[static_cast<int>(id)];
}

std::optional<EventId> event_from_name(std::string_view name) {
    const auto& names = event_names();
    for (int i = 0; i < kEventCount; ++i) {
        if (names[i] == name) return static_cast<EventId>(i);
    }
    return std::nullopt;
}

const std::vector<std::string>& full_event_universe() {
    static const std::vector<std::string> universe = {
        "instruction",
        "load",
        "store",
        "l1d_read_miss",
        "l1d_write_miss",
        "l1d_prefetch_miss",
        "l1i_read_miss",
        "llc_read_access",
        "llc_read_miss",
        "llc_write_access",
        "llc_write_miss",
        "llc_prefetch_access",
        "llc_prefetch_miss",
        "dtlb_read_access",
        "dtlb_read_miss",
        "dtlb_write_access",
        "dtlb_write_miss",
        "itlb_read_access",
        "itlb_read_miss",
        "bpu_read_access",
        "bpu_read_miss",
        "cache_node_read_access",
        "cache_node_read_miss",
        "cache_node_write_access",
        "cache_node_write_miss",
        "cache_node_prefetch_access",
        "cache_node_prefetch_miss",
        "cycles",
        "branch_instructions",
        "branch_prediction_miss",
        "page_faults",
        "context_switch",
        "stall_issue",
        "stall_retirement",
    };
    return universe;
}

}  // namespace redwatch
