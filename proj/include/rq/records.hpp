#pragma once

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

#include "rq/phase.hpp"

namespace rq {

// Key order is fixed so identical runs produce byte-identical lines.
using Json = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "1";
inline constexpr const char* kToolVersion = "rq 0.1.0";

// One experiment record: config echo + payload, no timestamps (timing goes
// into a separate metadata line so payload lines stay reproducible).
Json make_record(const std::string& command, std::uint64_t seed,
                 const Json& config, const Json& payload);

void write_jsonl(std::ostream& out, const Json& record);

// `{"meta": ...}` line: wall time and other non-reproducible facts.
Json make_meta(double wall_seconds);

// Generic CSV: one row per record, columns looked up in the payload (dotted
// keys descend).  Missing axis -> input error.  Deterministic ordering and
// shortest-round-trip numeric formatting.
std::string emit_plot_data(const std::vector<Json>& records,
                           const std::vector<std::string>& axes);

// The sweep figure: `ell,d,fraction_collapsed,n_trials` sorted by (ell, d).
// A verdict of trivial or z2 counts as collapsed; skipped cells are dropped.
std::string sweep_csv(const std::vector<SweepRecord>& records);

Json sweep_record_json(const SweepRecord& r);

// Config file ingestion: JSON, or a small TOML subset (`key = value` lines,
// scalar and flat-array values, `#` comments).  Unknown keys are rejected
// by the consumers.
Json load_config_file(const std::string& path);

}  // namespace rq
