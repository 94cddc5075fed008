#pragma once

#include <iosfwd>
#include <string>

#include "json.hpp"

#include "aqt/engine.hpp"

namespace aqt {

nlohmann::json to_json(const RoundRecord& rec);
RoundRecord record_from_json(const nlohmann::json& j);

// First line {"header": ...}, then one compact JSON object per round.
void write_trace_jsonl(std::ostream& out, const nlohmann::json& header, const Trace& trace);

struct StoredTrace
{
	nlohmann::json header;
	Trace trace;
};

StoredTrace read_trace_jsonl(std::istream& in);

// Round lines only, as written by write_trace_jsonl. Used to compare runs
// whose headers differ (scheduler name, topology kind).
std::string records_text(const Trace& trace);

// round,max_load,total_load,delivered. max_load is the larger of the
// after-injection and after-forwarding peaks, total_load is taken after
// injection and delivered counts this round only.
void write_summary_csv(std::ostream& out, const Trace& trace);

} // namespace aqt
