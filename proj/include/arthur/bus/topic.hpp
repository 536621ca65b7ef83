#pragma once

#include <string>
#include <string_view>

namespace arthur::bus {

/// Concrete topic: non-empty levels, no wildcards, no leading '$'.
bool valid_topic(std::string_view topic);

/// MQTT filter: '+' matches one level, a trailing '#' matches any remainder.
bool valid_filter(std::string_view filter);

bool topic_matches(std::string_view filter, std::string_view topic);

/// True for topics under "arthur/" that follow the workstation topic scheme.
bool matches_scheme(std::string_view topic);

/// Builders for the workstation topic scheme.
namespace topics {

inline constexpr std::string_view kRoot = "arthur";

std::string config(std::string_view ws, std::string_view category, std::string_view id);
std::string config_deleted(std::string_view ws, std::string_view id);
std::string config_meta(std::string_view ws);
std::string robot_state(std::string_view ws, std::string_view agent);
std::string input_events(std::string_view ws);
std::string action_events(std::string_view ws);
std::string condition_events(std::string_view ws);
std::string condition_report(std::string_view ws);
std::string task_status(std::string_view ws, std::string_view task);
std::string assembly_progress(std::string_view ws);
std::string assembly_dispatch(std::string_view ws);
std::string zone(std::string_view ws, std::string_view zone_id);
std::string service_status(std::string_view ws, std::string_view service);
std::string user_body(std::string_view ws);
std::string fake(std::string_view ws, std::string_view kind);
std::string rpc_request(std::string_view ws, std::string_view service);
std::string rpc_response(std::string_view ws, std::string_view service);
std::string robot_rpc_request(std::string_view ws, std::string_view agent);
std::string robot_rpc_response(std::string_view ws, std::string_view agent);
/// Commands to a supervisor such as `arthur up`, e.g. {"command": "down"}.
std::string service_command(std::string_view ws, std::string_view service);
std::string all(std::string_view ws);

}  // namespace topics

}  // namespace arthur::bus
