#include "aqt/trace_io.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "aqt/error.hpp"

namespace aqt {

nlohmann::json to_json(const RoundRecord& rec)
{
	nlohmann::json act = nlohmann::json::array();
	for (const auto& a : rec.activation)
		act.push_back({a.node, a.key.level, a.key.target});
	nlohmann::json sent = nlohmann::json::array();
	for (const auto& [node, id] : rec.sent)
		sent.push_back({node, id});
	return {{"round", rec.round},
	        {"injected", rec.injected},
	        {"activation", act},
	        {"sent", sent},
	        {"delivered", rec.delivered},
	        {"load_before", rec.load_before},
	        {"load_after", rec.load_after},
	        {"drained", rec.drained}};
}

RoundRecord record_from_json(const nlohmann::json& j)
{
	try {
		RoundRecord rec;
		rec.round = j.at("round").get<Round>();
		rec.injected = j.at("injected").get<std::vector<PacketId>>();
		for (const auto& a : j.at("activation"))
			rec.activation.push_back({a.at(0).get<NodeId>(), {a.at(1).get<int>(), a.at(2).get<NodeId>()}});
		for (const auto& s : j.at("sent"))
			rec.sent.emplace_back(s.at(0).get<NodeId>(), s.at(1).get<PacketId>());
		rec.delivered = j.at("delivered").get<std::vector<PacketId>>();
		rec.load_before = j.at("load_before").get<std::vector<int>>();
		rec.load_after = j.at("load_after").get<std::vector<int>>();
		rec.drained = j.value("drained", false);
		return rec;
	} catch (const nlohmann::json::exception& e) {
		throw Error(ErrorCode::ParseError, std::string("trace record: ") + e.what());
	}
}

void write_trace_jsonl(std::ostream& out, const nlohmann::json& header, const Trace& trace)
{
	out << nlohmann::json{{"header", header}}.dump() << '\n';
	out << records_text(trace);
}

StoredTrace read_trace_jsonl(std::istream& in)
{
	StoredTrace st;
	std::string line;
	bool have_header = false;
	int lineno = 0;
	while (std::getline(in, line)) {
		++lineno;
		if (line.empty())
			continue;
		nlohmann::json j;
		try {
			j = nlohmann::json::parse(line);
		} catch (const nlohmann::json::exception& e) {
			throw Error(ErrorCode::ParseError, "trace line " + std::to_string(lineno) + ": " + e.what());
		}
		if (!have_header) {
			if (!j.contains("header"))
				throw Error(ErrorCode::ParseError, "trace must start with a header line");
			st.header = j["header"];
			have_header = true;
			continue;
		}
		auto rec = record_from_json(j);
		for (int x : rec.load_before)
			st.trace.max_load = std::max(st.trace.max_load, x);
		for (int x : rec.load_after)
			st.trace.max_load = std::max(st.trace.max_load, x);
		st.trace.injected += static_cast<std::int64_t>(rec.injected.size());
		st.trace.delivered += static_cast<std::int64_t>(rec.delivered.size());
		st.trace.rounds.push_back(std::move(rec));
	}
	if (!have_header)
		throw Error(ErrorCode::ParseError, "empty trace");
	st.trace.horizon = static_cast<Round>(st.trace.rounds.size());
	return st;
}

std::string records_text(const Trace& trace)
{
	std::string out;
	for (const auto& rec : trace.rounds) {
		out += to_json(rec).dump();
		out += '\n';
	}
	return out;
}

void write_summary_csv(std::ostream& out, const Trace& trace)
{
	out << "round,max_load,total_load,delivered\n";
	for (const auto& rec : trace.rounds) {
		int peak = 0;
		for (int x : rec.load_before)
			peak = std::max(peak, x);
		for (int x : rec.load_after)
			peak = std::max(peak, x);
		const auto total = std::accumulate(rec.load_before.begin(), rec.load_before.end(), std::int64_t{0});
		out << rec.round << ',' << peak << ',' << total << ',' << rec.delivered.size() << '\n';
	}
}

} // namespace aqt
