// JSON export of simulation records and CSV report tables.
#pragma once

#include "backbone/bounds.hpp"
#include "backbone/metrics.hpp"
#include "backbone/sim.hpp"
#include "backbone/suites.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace backbone {

inline constexpr int kRecordSchemaVersion = 1;
inline constexpr int kReportSchemaVersion = 1;

// Full record: params, derived constants, trace, every block, per-round view
// classes and round markers. Prism records add the per-round leader sequences
// of every honest view and the final ledgers of the distinct views at the
// last round. Keys are sorted, so equal records dump to equal bytes.
nlohmann::json record_to_json(const SimRecord& record);
std::string record_json_string(const SimRecord& record);

nlohmann::json params_to_json(const ProtocolParams& params);
nlohmann::json derived_to_json(const DerivedParams& d);

struct LatencyRow {
    std::uint64_t trial = 0;
    BlockId block = kNoBlock;
    std::int64_t broadcast_round = 0;
    std::optional<std::int64_t> latency;
};

// Honest payload blocks of a Prism record with their latencies.
std::vector<LatencyRow> latency_rows(const SimRecord& record);

// CSV tables; every file starts with a header row.
void write_bounds_csv(std::ostream& os, const std::vector<BoundReport>& rows);
void write_implications_csv(std::ostream& os, const SuiteReport& report);
void write_events_csv(std::ostream& os, const std::vector<FrequencyReport>& rows);
void write_latency_csv(std::ostream& os, const std::vector<LatencyRow>& rows);

nlohmann::json bounds_to_json(const std::vector<BoundReport>& rows);
nlohmann::json implications_to_json(const SuiteReport& report);
nlohmann::json events_to_json(const std::vector<FrequencyReport>& rows);

// Shortest decimal that reads back to the same double.
std::string format_double(double x);

} // namespace backbone
