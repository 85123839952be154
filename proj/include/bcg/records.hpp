#pragma once

#include <json.hpp>
#include <string>

#include "bcg/hypergame.hpp"
#include "bcg/trace.hpp"
#include "bcg/umpire.hpp"

namespace bcg {

nlohmann::json game_to_json(const GameSpec& spec);
GameSpec game_from_json(const nlohmann::json& j);

nlohmann::json trace_to_json(const ReasoningTrace& trace);
ReasoningTrace trace_from_json(const nlohmann::json& j);

/// {"kind": "composite"|"leaf", "level", "owner", "children" | "players"+"perspectives"+"predicted"}.
nlohmann::json hypergame_to_json(const Hypergame& h);
Hypergame hypergame_from_json(const nlohmann::json& j, const GameSpec& spec);

/// One JSONL results line. Wall-clock timestamps are not persisted.
nlohmann::json record_to_json(const MatchRecord& record);
/// Throws ParseError on schema violations.
MatchRecord record_from_json(const nlohmann::json& j);

std::string record_to_line(const MatchRecord& record);

}  // namespace bcg
