#pragma once

// Run report: a pure function of an event log and the scenario it came from.

#include <string>
#include <vector>

#include "pafa/oaam.hpp"
#include "pafa/simkernel.hpp"

namespace pafa::report {

// Lines that do not follow the log format raise ParseError.
std::vector<sim::LogLine> parse_log(const std::string& text);

// JSON with sorted keys, newline-terminated.
std::string make_report(const std::vector<sim::LogLine>& log, const oaam::ScenarioDoc& scenario);

}  // namespace pafa::report
