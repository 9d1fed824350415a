#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "pmp/pmpcheck.hpp"

namespace pmp {

/// Reads and validates a run file. Throws Config naming the offending field.
RunConfig parse_run(const std::string& path);
RunConfig parse_run_json(const nlohmann::json& j);

/// Canonical form with every default written out.
nlohmann::json run_to_json(const RunConfig& cfg);

/// FNV-1a (64 bit, hex) of the canonical run JSON.
std::string fingerprint(const RunConfig& cfg);

/// Report JSON, schema "pmp-report/1".
nlohmann::json report_to_json(const Report& r, const RunConfig& cfg);

/// CSV: iterate,bielecki_residual,ratio
void write_contraction_csv(std::ostream& os, const PicardTrace& trace);
/// CSV: scale,remainder,remainder_over_scale
void write_expansion_csv(std::ostream& os, const ExpansionReport& rep);

}  // namespace pmp
